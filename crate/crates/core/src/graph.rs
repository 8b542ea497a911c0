//! Communication graphs, clique enumeration and chordality.
//!
//! Nodes are 0-based inside the crate. File formats and the CLI use 1-based
//! indices and convert through [`Graph::from_one_based`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from 0-based edges, dropping duplicates.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewNodes { min: 1, got: 0 });
        }
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for idx in [a, b] {
                if idx >= n {
                    return Err(Error::NodeOutOfRange { index: idx, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &list {
            adj[a].push(b);
            adj[b].push(a);
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Ok(Self { n, edges: list, adj })
    }

    /// Same as [`Graph::new`] but with 1-based node labels.
    pub fn from_one_based(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut shifted = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for idx in [a, b] {
                if idx == 0 || idx > n {
                    return Err(Error::NodeOutOfRange { index: idx, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            shifted.push((a - 1, b - 1));
        }
        Self::new(n, &shifted)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Edges as sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.adj[a].binary_search(&b).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1) / 2
    }
}

/// Cycle `0 - 1 - ... - (n-1) - 0`.
pub fn make_ring(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::TooFewNodes { min: 3, got: n });
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::new(n, &edges)
}

/// Hub node 0 joined to every node of the rim cycle `1..n`.
pub fn make_wheel(n: usize) -> Result<Graph> {
    if n < 4 {
        return Err(Error::TooFewNodes { min: 4, got: n });
    }
    let mut edges: Vec<_> = (1..n).map(|j| (0, j)).collect();
    let rim = n - 1;
    edges.extend((0..rim).map(|k| (1 + k, 1 + (k + 1) % rim)));
    Graph::new(n, &edges)
}

pub fn make_path(n: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &edges)
}

pub fn make_complete(n: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    Graph::new(n, &edges)
}

/// Ordered clique list with the per-node membership lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueSet {
    cliques: Vec<Vec<usize>>,
    membership: Vec<Vec<usize>>,
}

impl CliqueSet {
    /// Wraps a user-supplied clique list over `n` nodes. Members are sorted,
    /// the clique order is kept. Nothing is checked against a graph here; use
    /// [`check_assumption2`] for that.
    pub fn from_cliques(n: usize, cliques: Vec<Vec<usize>>) -> Result<Self> {
        let mut cliques = cliques;
        let mut membership = vec![Vec::new(); n];
        for (k, c) in cliques.iter_mut().enumerate() {
            if c.is_empty() {
                return Err(Error::CliqueSet(format!("clique {k} is empty")));
            }
            c.sort_unstable();
            if c.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::CliqueSet(format!("clique {k} repeats a node")));
            }
            for &v in c.iter() {
                if v >= n {
                    return Err(Error::NodeOutOfRange { index: v, n });
                }
                membership[v].push(k);
            }
        }
        Ok(Self { cliques, membership })
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.membership.len()
    }

    /// Indices of the cliques containing node `v`.
    pub fn membership(&self, v: usize) -> &[usize] {
        &self.membership[v]
    }

    /// Number of cliques containing both `a` and `b`.
    pub fn shared(&self, a: usize, b: usize) -> usize {
        let (ma, mb) = (&self.membership[a], &self.membership[b]);
        ma.iter().filter(|k| mb.binary_search(k).is_ok()).count()
    }
}

/// All maximal cliques (Bron–Kerbosch with pivoting), sorted lexicographically.
/// Isolated nodes come out as singletons.
pub fn maximal_cliques(g: &Graph) -> CliqueSet {
    let mut found = Vec::new();
    let mut current = Vec::new();
    let all: Vec<usize> = (0..g.n).collect();
    bron_kerbosch(g, &mut current, all, Vec::new(), &mut found);
    for c in &mut found {
        c.sort_unstable();
    }
    found.sort();
    CliqueSet::from_cliques(g.n, found).expect("enumerated cliques are well formed")
}

fn bron_kerbosch(
    g: &Graph,
    current: &mut Vec<usize>,
    mut cand: Vec<usize>,
    mut excl: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if cand.is_empty() {
        if excl.is_empty() {
            out.push(current.clone());
        }
        return;
    }
    let pivot = cand
        .iter()
        .chain(excl.iter())
        .copied()
        .max_by_key(|&u| cand.iter().filter(|&&w| g.has_edge(u, w)).count())
        .expect("candidate set is nonempty");
    let branch: Vec<usize> = cand.iter().copied().filter(|&v| !g.has_edge(pivot, v)).collect();
    for v in branch {
        let next_cand = cand.iter().copied().filter(|&w| g.has_edge(v, w)).collect();
        let next_excl = excl.iter().copied().filter(|&w| g.has_edge(v, w)).collect();
        current.push(v);
        bron_kerbosch(g, current, next_cand, next_excl, out);
        current.pop();
        cand.retain(|&w| w != v);
        excl.push(v);
    }
}

/// Chordality via maximum cardinality search. Returns a perfect elimination
/// ordering when the graph is chordal.
pub fn is_chordal(g: &Graph) -> (bool, Option<Vec<usize>>) {
    let n = g.n;
    let mut weight = vec![0usize; n];
    let mut numbered = vec![false; n];
    let mut visit = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !numbered[v])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("an unnumbered vertex remains");
        numbered[v] = true;
        visit.push(v);
        for &w in g.neighbors(v) {
            if !numbered[w] {
                weight[w] += 1;
            }
        }
    }
    visit.reverse();
    if is_perfect_elimination_ordering(g, &visit) {
        (true, Some(visit))
    } else {
        (false, None)
    }
}

/// Each vertex's later neighbours must form a clique.
pub fn is_perfect_elimination_ordering(g: &Graph, order: &[usize]) -> bool {
    let n = g.n;
    if order.len() != n {
        return false;
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = i;
    }
    for &v in order {
        let later: Vec<usize> = g.neighbors(v).iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        let Some(&parent) = later.iter().min_by_key(|&&w| pos[w]) else {
            continue;
        };
        if later.iter().any(|&w| w != parent && !g.has_edge(parent, w)) {
            return false;
        }
    }
    true
}

/// Covering and intersection conditions: every node sits in some clique, and
/// two distinct nodes share a clique exactly when they are adjacent.
pub fn check_assumption2(cs: &CliqueSet, g: &Graph) -> bool {
    assumption2_violation(cs, g).is_none()
}

/// First violated condition, if any, as a readable message (1-based nodes).
pub fn assumption2_violation(cs: &CliqueSet, g: &Graph) -> Option<String> {
    if cs.node_count() != g.node_count() {
        return Some(format!(
            "clique set covers {} nodes, graph has {}",
            cs.node_count(),
            g.node_count()
        ));
    }
    for v in 0..g.n {
        if cs.membership(v).is_empty() {
            return Some(format!("node {} is in no clique", v + 1));
        }
    }
    for a in 0..g.n {
        for b in (a + 1)..g.n {
            let share = cs.shared(a, b) > 0;
            if share != g.has_edge(a, b) {
                return Some(if share {
                    format!("nodes {} and {} share a clique but are not adjacent", a + 1, b + 1)
                } else {
                    format!("edge ({}, {}) is not covered by any clique", a + 1, b + 1)
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(Graph::new(1, &[]).is_ok());
        assert_eq!(Graph::from_one_based(3, &[(1, 1)]), Err(Error::SelfLoop(1)));
        assert!(matches!(
            Graph::from_one_based(3, &[(1, 4)]),
            Err(Error::NodeOutOfRange { index: 4, .. })
        ));
        let g = Graph::from_one_based(3, &[(2, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn path_cliques_and_membership() {
        let cs = maximal_cliques(&fig1());
        assert_eq!(cs.cliques(), &[vec![0, 1], vec![1, 2]]);
        let sizes: Vec<usize> = (0..3).map(|v| cs.membership(v).len()).collect();
        assert_eq!(sizes, [1, 2, 1]);
        assert!(check_assumption2(&cs, &fig1()));
    }

    #[test]
    fn complete_and_cycle() {
        let k3 = make_complete(3).unwrap();
        assert_eq!(maximal_cliques(&k3).cliques(), &[vec![0, 1, 2]]);
        let c4 = make_ring(4).unwrap();
        assert_eq!(
            maximal_cliques(&c4).cliques(),
            &[vec![0, 1], vec![0, 3], vec![1, 2], vec![2, 3]]
        );
        assert!(!is_chordal(&c4).0);
        assert!(is_chordal(&make_complete(4).unwrap()).0);
        assert!(is_chordal(&fig1()).0);
    }

    #[test]
    fn isolated_vertices_are_singletons() {
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        let cs = maximal_cliques(&g);
        assert_eq!(cs.cliques(), &[vec![0, 1], vec![2]]);
        assert!(check_assumption2(&cs, &g));
    }

    #[test]
    fn assumption_violations() {
        let g = fig1();
        let partial = CliqueSet::from_cliques(3, alloc::vec![alloc::vec![0, 1]]).unwrap();
        assert!(!check_assumption2(&partial, &g));
        let singles = CliqueSet::from_cliques(3, alloc::vec![alloc::vec![0], alloc::vec![1], alloc::vec![2]]).unwrap();
        assert!(!check_assumption2(&singles, &g));
    }

    #[test]
    fn ring_and_wheel() {
        let r4 = make_ring(4).unwrap();
        assert_eq!(r4.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        let w4 = make_wheel(4).unwrap();
        assert_eq!(w4.edges().len(), 6);
        assert!(w4.is_complete());
        assert_eq!(make_ring(32).unwrap().edges().len(), 32);
        assert!(make_ring(2).is_err());
        assert!(make_wheel(3).is_err());
        // the rim is a chordless cycle once it has four or more nodes
        let w10 = make_wheel(10).unwrap();
        assert!(!is_chordal(&w10).0);
        assert_eq!(maximal_cliques(&w10).len(), 9);
        assert!(is_chordal(&w4).0);
    }
}
