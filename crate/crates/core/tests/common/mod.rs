#![allow(dead_code)]

use cliquelmi_core::graph::Graph;
use cliquelmi_core::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn normal(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

/// Chordal by construction: every new node is joined to a clique of the
/// nodes already placed.
pub fn random_chordal(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut cliques: Vec<Vec<usize>> = vec![vec![0]];
    let mut edges = Vec::new();
    for v in 1..n {
        let base = cliques[rng.random_range(0..cliques.len())].clone();
        let keep: Vec<usize> = base.into_iter().filter(|_| rng.random_bool(0.7)).collect();
        let keep = if keep.is_empty() {
            vec![rng.random_range(0..v)]
        } else {
            keep
        };
        for &u in &keep {
            edges.push((u, v));
        }
        let mut c = keep;
        c.push(v);
        cliques.push(c);
    }
    Graph::new(n, &edges).unwrap()
}

/// Shifted Gaussian matrix with spectral abscissa at most `-margin`.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> Mat {
    let a = normal(rng, n, n);
    let eig = a.clone().complex_eigenvalues();
    let top = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    a - Mat::identity(n, n) * (top + margin)
}
