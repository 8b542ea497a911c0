//! Clique lifting: the duplication matrix `E`, the projector `M`, lifted plant
//! matrices and the maps that bring lifted variables back to the original
//! coordinates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{CliqueSet, Graph};
use crate::linalg::{self, max_abs};
use crate::sdp::{self, Definiteness, MatrixExpr, SdpProblem, SdpStatus, SolverConfig};
use crate::{Error, Mat, Result};

/// Per-agent block sizes of a vector or matrix dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    owner: Vec<usize>,
}

impl BlockPartition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Dimension("partition needs at least one block".into()));
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Dimension(format!("block {k} has size zero")));
        }
        let offsets = linalg::offsets(&sizes);
        let mut owner = Vec::with_capacity(sizes.iter().sum());
        for (i, &s) in sizes.iter().enumerate() {
            owner.extend(core::iter::repeat_n(i, s));
        }
        Ok(Self { sizes, offsets, owner })
    }

    /// `agents` blocks of equal size.
    pub fn uniform(agents: usize, size: usize) -> Result<Self> {
        Self::new(vec![size; agents])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn total(&self) -> usize {
        self.owner.len()
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn size(&self, i: usize) -> usize {
        self.sizes[i]
    }

    /// Block containing scalar index `idx`.
    pub fn block_of(&self, idx: usize) -> usize {
        self.owner[idx]
    }
}

/// Partitioned LTI plant. Performance channels are optional.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub partition_x: BlockPartition,
    pub partition_u: BlockPartition,
    pub a: Mat,
    pub b: Mat,
    pub bw: Option<Mat>,
    pub c: Option<Mat>,
    pub d: Option<Mat>,
    pub dw: Option<Mat>,
}

/// Borrowed view of the full performance data, with defaults filled in.
#[derive(Debug, Clone)]
pub struct PerformanceData {
    pub bw: Mat,
    pub c: Mat,
    pub d: Mat,
    pub dw: Mat,
}

impl Plant {
    pub fn new(partition_x: BlockPartition, partition_u: BlockPartition, a: Mat, b: Mat) -> Result<Self> {
        let plant = Self {
            partition_x,
            partition_u,
            a,
            b,
            bw: None,
            c: None,
            d: None,
            dw: None,
        };
        plant.validate()?;
        Ok(plant)
    }

    /// Attaches disturbance input and performance output.
    pub fn with_performance(mut self, bw: Mat, c: Mat, d: Option<Mat>, dw: Option<Mat>) -> Result<Self> {
        self.bw = Some(bw);
        self.c = Some(c);
        self.d = d;
        self.dw = dw;
        self.validate()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.partition_x.total()
    }

    pub fn m(&self) -> usize {
        self.partition_u.total()
    }

    pub fn agents(&self) -> usize {
        self.partition_x.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        if self.partition_x.len() != self.partition_u.len() {
            return Err(Error::Dimension(format!(
                "{} state blocks but {} input blocks",
                self.partition_x.len(),
                self.partition_u.len()
            )));
        }
        check_shape("A", &self.a, n, n)?;
        check_shape("B", &self.b, n, m)?;
        if let Some(bw) = &self.bw {
            check_rows("Bw", bw, n)?;
        }
        if let Some(c) = &self.c {
            check_cols("C", c, n)?;
        }
        let p = self.c.as_ref().map(|c| c.nrows());
        if let Some(d) = &self.d {
            check_cols("D", d, m)?;
            if let Some(p) = p {
                check_rows("D", d, p)?;
            }
        }
        if let Some(dw) = &self.dw {
            if let Some(p) = p {
                check_rows("Dw", dw, p)?;
            }
            if let Some(bw) = &self.bw {
                check_cols("Dw", dw, bw.ncols())?;
            }
        }
        Ok(())
    }

    /// Performance data, or `None` when `Bw` or `C` is missing. Absent `D`
    /// and `Dw` default to zero.
    pub fn performance(&self) -> Option<PerformanceData> {
        let (bw, c) = (self.bw.as_ref()?, self.c.as_ref()?);
        let d = self.d.clone().unwrap_or_else(|| Mat::zeros(c.nrows(), self.m()));
        let dw = self.dw.clone().unwrap_or_else(|| Mat::zeros(c.nrows(), bw.ncols()));
        Some(PerformanceData {
            bw: bw.clone(),
            c: c.clone(),
            d,
            dw,
        })
    }

    pub fn has_square_blocks(&self) -> bool {
        self.partition_x == self.partition_u
    }
}

fn check_shape(name: &str, m: &Mat, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::Dimension(format!(
            "{name} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_rows(name: &str, m: &Mat, rows: usize) -> Result<()> {
    if m.nrows() != rows {
        return Err(Error::Dimension(format!(
            "{name} has {} rows, expected {rows}",
            m.nrows()
        )));
    }
    Ok(())
}

fn check_cols(name: &str, m: &Mat, cols: usize) -> Result<()> {
    if m.ncols() != cols {
        return Err(Error::Dimension(format!(
            "{name} has {} columns, expected {cols}",
            m.ncols()
        )));
    }
    Ok(())
}

/// Plant with square per-agent input blocks plus the map back to the
/// original inputs: `K_original = input_map * K_padded`.
#[derive(Debug, Clone)]
pub struct PaddedPlant {
    pub plant: Plant,
    pub input_map: Mat,
}

impl PaddedPlant {
    pub fn original_gain(&self, k: &Mat) -> Mat {
        &self.input_map * k
    }
}

/// Makes every input block as wide as its state block. Narrow blocks get
/// zero columns. Wide blocks are compressed onto their `n_i` dominant right
/// singular directions of `[B_i; D_i]`, which is exact whenever that stack
/// has rank at most `n_i`.
pub fn pad_inputs(plant: &Plant) -> Result<PaddedPlant> {
    plant.validate()?;
    let (px, pu) = (&plant.partition_x, &plant.partition_u);
    let mut t = Mat::zeros(plant.m(), plant.n());
    for i in 0..px.len() {
        let (ni, mi) = (px.size(i), pu.size(i));
        let (r0, c0) = (pu.offset(i), px.offset(i));
        if mi <= ni {
            for k in 0..mi {
                t[(r0 + k, c0 + k)] = 1.0;
            }
        } else {
            let mut stack = plant.b.columns(r0, mi).into_owned();
            if let Some(d) = &plant.d {
                let (rows, cols) = (stack.nrows(), d.nrows());
                stack = stack.insert_rows(rows, cols, 0.0);
                stack.rows_mut(rows, cols).copy_from(&d.columns(r0, mi));
            }
            let vt = stack.svd(false, true).v_t.expect("requested V^T");
            for k in 0..ni {
                for r in 0..mi {
                    t[(r0 + r, c0 + k)] = vt[(k, r)];
                }
            }
        }
    }
    let mut padded = plant.clone();
    padded.partition_u = px.clone();
    padded.b = &plant.b * &t;
    padded.d = plant.d.as_ref().map(|d| d * &t);
    padded.validate()?;
    Ok(PaddedPlant {
        plant: padded,
        input_map: t,
    })
}

/// Block sparsity pattern induced by a graph: block `(i, j)` may be nonzero
/// only when `i == j` or `(i, j)` is an edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    rows: BlockPartition,
    cols: BlockPartition,
    allowed: Vec<bool>,
}

impl SparsityPattern {
    pub fn from_graph(g: &Graph, rows: &BlockPartition, cols: &BlockPartition) -> Result<Self> {
        let n = g.node_count();
        if rows.len() != n || cols.len() != n {
            return Err(Error::Dimension(
                "pattern partitions must have one block per node".into(),
            ));
        }
        let mut allowed = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                allowed[i * n + j] = i == j || g.has_edge(i, j);
            }
        }
        Ok(Self {
            rows: rows.clone(),
            cols: cols.clone(),
            allowed,
        })
    }

    /// Pattern implied by a clique set: blocks whose agents share a clique.
    pub fn from_cliques(cs: &CliqueSet, rows: &BlockPartition, cols: &BlockPartition) -> Result<Self> {
        let n = cs.node_count();
        if rows.len() != n || cols.len() != n {
            return Err(Error::Dimension(
                "pattern partitions must have one block per node".into(),
            ));
        }
        let mut allowed = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                allowed[i * n + j] = cs.shared(i, j) > 0;
            }
        }
        Ok(Self {
            rows: rows.clone(),
            cols: cols.clone(),
            allowed,
        })
    }

    pub fn agents(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &BlockPartition {
        &self.rows
    }

    pub fn cols(&self) -> &BlockPartition {
        &self.cols
    }

    pub fn block_allowed(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.agents() + j]
    }

    pub fn entry_allowed(&self, r: usize, c: usize) -> bool {
        self.block_allowed(self.rows.block_of(r), self.cols.block_of(c))
    }

    /// Threshold below which a block counts as zero.
    pub fn zero_tolerance(k: &Mat) -> f64 {
        1e-9 * linalg::inf_norm(k).max(1.0)
    }

    /// Largest forbidden block `(i, j, max-abs)`, whether or not it exceeds
    /// the tolerance.
    pub fn worst_forbidden_block(&self, k: &Mat) -> Option<(usize, usize, f64)> {
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..self.agents() {
            for j in 0..self.agents() {
                if self.block_allowed(i, j) {
                    continue;
                }
                let blk = k.view(
                    (self.rows.offset(i), self.cols.offset(j)),
                    (self.rows.size(i), self.cols.size(j)),
                );
                let norm = blk.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                if worst.is_none_or(|w| norm > w.2) {
                    worst = Some((i, j, norm));
                }
            }
        }
        worst
    }

    /// Errors with the worst offending block if `k` leaves the pattern.
    pub fn check(&self, k: &Mat) -> Result<()> {
        if k.shape() != (self.rows.total(), self.cols.total()) {
            return Err(Error::Dimension(format!(
                "gain is {}x{}, pattern expects {}x{}",
                k.nrows(),
                k.ncols(),
                self.rows.total(),
                self.cols.total()
            )));
        }
        if let Some((row, col, norm)) = self.worst_forbidden_block(k) {
            if norm > Self::zero_tolerance(k) {
                return Err(Error::Pattern { row, col, norm });
            }
        }
        Ok(())
    }
}

/// Stacked clique selectors and the diagonal of `E^T E`.
pub fn build_e(cs: &CliqueSet, part: &BlockPartition) -> Result<(Mat, Vec<f64>)> {
    if cs.node_count() != part.len() {
        return Err(Error::Dimension(format!(
            "clique set has {} nodes, partition has {} blocks",
            cs.node_count(),
            part.len()
        )));
    }
    if let Some(v) = (0..part.len()).find(|&v| cs.membership(v).is_empty()) {
        return Err(Error::CliqueSet(format!("node {} is in no clique", v + 1)));
    }
    let rows: usize = cs.cliques().iter().flatten().map(|&v| part.size(v)).sum();
    let mut e = Mat::zeros(rows, part.total());
    let mut r = 0;
    for clique in cs.cliques() {
        for &v in clique {
            for k in 0..part.size(v) {
                e[(r, part.offset(v) + k)] = 1.0;
                r += 1;
            }
        }
    }
    let gram = (0..part.total())
        .map(|c| cs.membership(part.block_of(c)).len() as f64)
        .collect();
    Ok((e, gram))
}

/// `I - E (E^T E)^{-1} E^T`, using that `E^T E` is diagonal.
pub fn build_m(e: &Mat) -> Mat {
    let gram: Vec<f64> = e.column_iter().map(|c| c.norm_squared()).collect();
    let mut m = Mat::identity(e.nrows(), e.nrows());
    for (j, g) in gram.iter().enumerate() {
        let col = e.column(j);
        m -= col * col.transpose() / *g;
    }
    m
}

/// Everything about a clique set that the LMIs need.
#[derive(Debug, Clone)]
pub struct Lifting {
    pub e: Mat,
    pub gram: Vec<f64>,
    pub m: Mat,
    /// Lifted dimension of each clique.
    pub blocks: Vec<usize>,
    pub cliques: CliqueSet,
    pub partition: BlockPartition,
}

impl Lifting {
    pub fn new(cs: &CliqueSet, part: &BlockPartition) -> Result<Self> {
        let (e, gram) = build_e(cs, part)?;
        let m = build_m(&e);
        let blocks = cs
            .cliques()
            .iter()
            .map(|c| c.iter().map(|&v| part.size(v)).sum())
            .collect();
        Ok(Self {
            e,
            gram,
            m,
            blocks,
            cliques: cs.clone(),
            partition: part.clone(),
        })
    }

    pub fn lifted_dim(&self) -> usize {
        self.e.nrows()
    }

    pub fn original_dim(&self) -> usize {
        self.e.ncols()
    }

    /// `(E^T E)^{-1} E^T`.
    pub fn left_inverse(&self) -> Mat {
        let mut out = self.e.transpose();
        for (i, g) in self.gram.iter().enumerate() {
            out.row_mut(i).scale_mut(1.0 / g);
        }
        out
    }

    /// `(E^T E)^{-1} E^T X E`, the gain-side restriction.
    pub fn restrict(&self, x: &Mat) -> Mat {
        self.left_inverse() * x * &self.e
    }

    /// Clique-block-diagonal mask on the lifted space.
    pub fn block_mask(&self) -> Vec<usize> {
        let mut owner = Vec::with_capacity(self.lifted_dim());
        for (k, &d) in self.blocks.iter().enumerate() {
            owner.extend(core::iter::repeat_n(k, d));
        }
        owner
    }
}

/// Lifted plant matrices.
#[derive(Debug, Clone)]
pub struct LiftedSystem {
    pub lifting: Lifting,
    pub a: Mat,
    pub b: Mat,
    pub c: Option<Mat>,
    pub d: Option<Mat>,
    pub bw: Option<Mat>,
    pub dw: Option<Mat>,
}

/// Lifts a plant with square input blocks.
pub fn lift_plant(plant: &Plant, lifting: &Lifting) -> Result<LiftedSystem> {
    plant.validate()?;
    if !plant.has_square_blocks() {
        return Err(Error::Dimension(
            "input blocks must match state blocks; pad inputs first".into(),
        ));
    }
    if plant.partition_x != lifting.partition {
        return Err(Error::Dimension(
            "plant partition differs from the lifting partition".into(),
        ));
    }
    let (e, li) = (&lifting.e, lifting.left_inverse());
    let perf = plant.performance();
    Ok(LiftedSystem {
        a: e * &plant.a * &li,
        b: e * &plant.b * &li,
        c: perf.as_ref().map(|p| &p.c * &li),
        d: perf.as_ref().map(|p| &p.d * &li),
        bw: perf.as_ref().map(|p| e * &p.bw),
        dw: perf.map(|p| p.dw),
        lifting: lifting.clone(),
    })
}

/// `K = (E^T E)^{-1} E^T Z Q^{-1} E` with `Q` inverted clique by clique.
pub fn recover_gain(z: &Mat, q: &Mat, lifting: &Lifting) -> Result<Mat> {
    let qi = linalg::spd_block_inverse(q, &lifting.blocks)?;
    Ok(lifting.restrict(&(z * qi)))
}

/// `P = E^T Q^{-1} E`.
pub fn recover_lyapunov(q: &Mat, lifting: &Lifting) -> Result<Mat> {
    let qi = linalg::spd_block_inverse(q, &lifting.blocks)?;
    Ok(lifting.e.transpose() * qi * &lifting.e)
}

/// Clique-block-diagonal `K~` with `E_u^T K~ E_x = K` for a pattern-conforming
/// `K`: each allowed block is split evenly among the cliques holding both
/// agents.
pub fn block_embed(k: &Mat, cs: &CliqueSet, rows: &BlockPartition, cols: &BlockPartition) -> Result<Mat> {
    let pattern = SparsityPattern::from_cliques(cs, rows, cols)?;
    pattern.check(k)?;
    let n = cs.node_count();
    let mut scaled = Mat::zeros(k.nrows(), k.ncols());
    for i in 0..n {
        for j in 0..n {
            let shared = cs.shared(i, j);
            if shared == 0 {
                continue;
            }
            let (r, c, h, w) = (rows.offset(i), cols.offset(j), rows.size(i), cols.size(j));
            let blk = k.view((r, c), (h, w)) / shared as f64;
            scaled.view_mut((r, c), (h, w)).copy_from(&blk);
        }
    }
    let row_dims: Vec<usize> = cs
        .cliques()
        .iter()
        .map(|c| c.iter().map(|&v| rows.size(v)).sum())
        .collect();
    let col_dims: Vec<usize> = cs
        .cliques()
        .iter()
        .map(|c| c.iter().map(|&v| cols.size(v)).sum())
        .collect();
    let mut out = Mat::zeros(row_dims.iter().sum(), col_dims.iter().sum());
    let (ro, co) = (linalg::offsets(&row_dims), linalg::offsets(&col_dims));
    for (q, clique) in cs.cliques().iter().enumerate() {
        let mut r = ro[q];
        for &i in clique {
            let mut c = co[q];
            for &j in clique {
                let (h, w) = (rows.size(i), cols.size(j));
                let src = scaled.view((rows.offset(i), cols.offset(j)), (h, w)).into_owned();
                out.view_mut((r, c), (h, w)).copy_from(&src);
                c += w;
            }
            r += rows.size(i);
        }
    }
    Ok(out)
}

/// Outcome of [`agler_decompose`].
#[derive(Debug, Clone)]
pub enum AglerOutcome {
    /// Clique-block-diagonal factor with `E^T P~ E = P`.
    Decomposed(Mat),
    Infeasible,
    NumericalFailure,
}

/// Searches for a clique-block-diagonal `P~ > 0` with `E^T P~ E = P`.
pub fn agler_decompose(p: &Mat, lifting: &Lifting, config: &SolverConfig) -> Result<AglerOutcome> {
    let n = lifting.original_dim();
    if p.shape() != (n, n) {
        return Err(Error::Dimension(format!("P must be {n}x{n}")));
    }
    if linalg::asymmetry(p) > 1e-10 * max_abs(p).max(1.0) {
        return Err(Error::NotSymmetric("P".into()));
    }
    let part = &lifting.partition;
    SparsityPattern::from_cliques(&lifting.cliques, part, part)?.check(p)?;

    let mut prob = SdpProblem::new();
    let pt = prob.add_sym_blocks("P~", &lifting.blocks, Some(Definiteness::Positive))?;
    let et = lifting.e.transpose();
    let mut eq = MatrixExpr::square(&[n]);
    eq.term(0, 0, 1.0, Some(&et), pt, false, Some(&lifting.e))
        .constant(0, 0, &(-p));
    prob.add_equality("E^T P~ E = P", &eq, true)?;
    let sol = sdp::solve(&prob, config);
    Ok(match sol.status {
        SdpStatus::Optimal | SdpStatus::Feasible => AglerOutcome::Decomposed(sol.matrix(pt)),
        SdpStatus::Infeasible => AglerOutcome::Infeasible,
        SdpStatus::NumericalFailure => AglerOutcome::NumericalFailure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_complete, maximal_cliques, Graph};

    fn fig1() -> (Graph, CliqueSet) {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let cs = maximal_cliques(&g);
        (g, cs)
    }

    #[test]
    fn example_one_e_and_gram() {
        let (_, cs) = fig1();
        let (e, gram) = build_e(&cs, &BlockPartition::uniform(3, 1).unwrap()).unwrap();
        let expected = Mat::from_row_slice(4, 3, &[1., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 1.]);
        assert_eq!(e, expected);
        assert_eq!(gram, [1.0, 2.0, 1.0]);
        assert_eq!(
            e.transpose() * &e,
            Mat::from_diagonal(&nalgebra::DVector::from_vec(gram))
        );
    }

    #[test]
    fn mixed_block_sizes() {
        let (_, cs) = fig1();
        let (e, gram) = build_e(&cs, &BlockPartition::new(vec![2, 1, 1]).unwrap()).unwrap();
        assert_eq!(e.shape(), (5, 4));
        assert_eq!(gram, [1.0, 1.0, 2.0, 1.0]);
        assert_eq!(e.view((0, 0), (2, 2)).into_owned(), Mat::identity(2, 2));
        let m = build_m(&e);
        let rank = m.singular_values().iter().filter(|s| **s > 1e-12).count();
        assert_eq!(rank, 1);
    }

    #[test]
    fn complete_graph_lifting_is_trivial() {
        let g = make_complete(4).unwrap();
        let cs = maximal_cliques(&g);
        let l = Lifting::new(&cs, &BlockPartition::uniform(4, 1).unwrap()).unwrap();
        assert_eq!(l.e, Mat::identity(4, 4));
        assert_eq!(l.m, Mat::zeros(4, 4));
    }

    #[test]
    fn example_one_projector() {
        let (_, cs) = fig1();
        let l = Lifting::new(&cs, &BlockPartition::uniform(3, 1).unwrap()).unwrap();
        let expected = Mat::from_row_slice(
            4,
            4,
            &[0., 0., 0., 0., 0., 0.5, -0.5, 0., 0., -0.5, 0.5, 0., 0., 0., 0., 0.],
        );
        assert!(max_abs(&(&l.m - expected)) < 1e-15);
        assert!(max_abs(&(&l.m * &l.e)) < 1e-15);
    }

    #[test]
    fn recovery_examples() {
        let (g, cs) = fig1();
        let part = BlockPartition::uniform(3, 1).unwrap();
        let l = Lifting::new(&cs, &part).unwrap();
        let q = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 2.0, 2.0]));
        let p = recover_lyapunov(&q, &l).unwrap();
        assert!(max_abs(&(p - Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.5, 0.5])))) < 1e-15);
        let k = recover_gain(&q, &q, &l).unwrap();
        assert!(max_abs(&(k - Mat::identity(3, 3))) < 1e-15);
        let z = Mat::from_row_slice(4, 4, &[1., 2., 0., 0., 3., 4., 0., 0., 0., 0., 5., 6., 0., 0., 7., 8.]);
        let k = recover_gain(&z, &q, &l).unwrap();
        assert_eq!(k[(0, 2)], 0.0);
        assert_eq!(k[(2, 0)], 0.0);
        SparsityPattern::from_graph(&g, &part, &part)
            .unwrap()
            .check(&k)
            .unwrap();
    }

    #[test]
    fn embed_identity_and_violation() {
        let (g, cs) = fig1();
        let part = BlockPartition::uniform(3, 1).unwrap();
        let l = Lifting::new(&cs, &part).unwrap();
        let kt = block_embed(&Mat::identity(3, 3), &cs, &part, &part).unwrap();
        let diag: Vec<f64> = kt.diagonal().iter().copied().collect();
        assert_eq!(diag, [1.0, 0.5, 0.5, 1.0]);
        assert_eq!(l.e.transpose() * kt * &l.e, Mat::identity(3, 3));
        let mut bad = Mat::identity(3, 3);
        bad[(0, 2)] = 1.0;
        assert!(matches!(
            block_embed(&bad, &cs, &part, &part),
            Err(Error::Pattern { row: 0, col: 2, .. })
        ));
        assert_eq!(
            block_embed(&Mat::zeros(3, 3), &cs, &part, &part).unwrap(),
            Mat::zeros(4, 4)
        );
        let _ = g;
    }

    #[test]
    fn padding_square_and_narrow() {
        let px = BlockPartition::new(vec![2, 1]).unwrap();
        let pu = BlockPartition::new(vec![1, 1]).unwrap();
        let a = Mat::identity(3, 3);
        let b = Mat::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 0.0, 0.0, 3.0]);
        let plant = Plant::new(px.clone(), pu, a, b).unwrap();
        let padded = pad_inputs(&plant).unwrap();
        let expected = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 3.0]);
        assert_eq!(padded.plant.b, expected);
        assert_eq!(padded.plant.partition_u, px);
        let again = pad_inputs(&padded.plant).unwrap();
        assert_eq!(again.plant.b, padded.plant.b);
        assert_eq!(again.input_map, Mat::identity(3, 3));
    }

    #[test]
    fn padding_wide_block_keeps_reachable_directions() {
        let px = BlockPartition::new(vec![1]).unwrap();
        let pu = BlockPartition::new(vec![2]).unwrap();
        let b = Mat::from_row_slice(1, 2, &[3.0, 4.0]);
        let plant = Plant::new(px, pu, Mat::identity(1, 1), b.clone()).unwrap();
        let padded = pad_inputs(&plant).unwrap();
        // B T T^T reproduces B when the block has rank <= n_i
        let back = &padded.plant.b * padded.input_map.transpose();
        assert!(max_abs(&(back - b)) < 1e-14);
    }
}
