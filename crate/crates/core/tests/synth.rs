mod common;

use cliquelmi_core::graph::{self, maximal_cliques, Graph};
use cliquelmi_core::lifting::{agler_decompose, AglerOutcome, BlockPartition, Lifting, Plant};
use cliquelmi_core::sdp::SolverConfig;
use cliquelmi_core::synth::{analysis_lyapunov, synthesize, AnalysisOutcome, Method, ProblemKind, SynthStatus};
use cliquelmi_core::verify::hinf_norm;
use cliquelmi_core::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const METHODS: [&str; 6] = ["bd", "p1", "p2", "p3", "ext", "comb"];

fn plant(rng: &mut ChaCha8Rng, n: usize, unactuated: &[usize]) -> Plant {
    let a = common::normal(rng, n, n);
    let b = Mat::from_fn(n, n, |r, c| if r == c && !unactuated.contains(&r) { 1.0 } else { 0.0 });
    let part = BlockPartition::uniform(n, 1).unwrap();
    Plant::new(part.clone(), part, a, b).unwrap()
}

fn he_max(p: &Mat, a: &Mat) -> f64 {
    let h = a.transpose() * p + p * a;
    h.symmetric_eigen().eigenvalues.max()
}

fn assert_conforms(k: &Mat, g: &Graph) {
    let tol = 1e-9 * k.amax().max(1.0);
    for r in 0..k.nrows() {
        for c in 0..k.ncols() {
            if r != c && !g.has_edge(r, c) {
                assert!(k[(r, c)].abs() <= tol, "K[{r},{c}] = {}", k[(r, c)]);
            }
        }
    }
}

#[test]
fn fully_actuated_ring_every_method_succeeds() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = graph::make_ring(5).unwrap();
    for _ in 0..3 {
        let p = plant(&mut rng, 5, &[]);
        for m in METHODS {
            let r = synthesize(&p, &g, Method::parse(m, 1.0).unwrap(), ProblemKind::Stabilize, &cfg).unwrap();
            assert!(r.status.is_success(), "{m}: {:?} {:?}", r.status, r.notes);
            let k = r.k.as_ref().unwrap();
            assert_conforms(k, &g);
            let acl = &p.a + &p.b * k;
            if let Some(pm) = &r.p {
                assert!(he_max(pm, &acl) < 0.0, "{m}");
                assert!(pm.clone().symmetric_eigen().eigenvalues.min() > 0.0);
            }
            let top = acl
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(top < 0.0, "{m}: abscissa {top}");
        }
    }
}

#[test]
fn successes_are_certified_with_an_unactuated_agent() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = graph::make_wheel(5).unwrap();
    let mut seen = 0;
    for _ in 0..6 {
        let p = plant(&mut rng, 5, &[1]);
        for m in ["bd", "p1", "p2", "ext", "comb"] {
            let r = synthesize(&p, &g, Method::parse(m, 1.0).unwrap(), ProblemKind::Stabilize, &cfg).unwrap();
            assert_ne!(r.status, SynthStatus::NumericalFailure, "{m}: {:?}", r.notes);
            if r.status.is_success() {
                seen += 1;
                let k = r.k.as_ref().unwrap();
                assert_conforms(k, &g);
                assert!(he_max(r.p.as_ref().unwrap(), &(&p.a + &p.b * k)) < 0.0);
                assert!(r.report.as_ref().unwrap().passed);
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn block_diagonal_gain_has_sparse_certificate() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = graph::make_wheel(6).unwrap();
    let cs = maximal_cliques(&g);
    let p = plant(&mut rng, 6, &[]);
    let r = synthesize(&p, &g, Method::Proposed1, ProblemKind::Stabilize, &cfg).unwrap();
    let k = r.k.unwrap();
    match analysis_lyapunov(&p, &k, &cs, &cfg).unwrap() {
        AnalysisOutcome::Certified(pm) => {
            assert!(he_max(&pm, &(&p.a + &p.b * &k)) < 0.0);
            assert!((pm.clone().symmetric_eigen().eigenvalues.min() - 1.0).abs() < 1e-6);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unstabilizable_class_is_infeasible() {
    // agent 0 is unstable and has no input, so row 0 of A + B K is fixed
    let cfg = SolverConfig::default();
    let g = graph::make_path(3).unwrap();
    let part = BlockPartition::uniform(3, 1).unwrap();
    let a = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]);
    let b = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 1.0]));
    let p = Plant::new(part.clone(), part, a, b).unwrap();
    for m in ["bd", "p1", "p2"] {
        let r = synthesize(&p, &g, Method::parse(m, 1.0).unwrap(), ProblemKind::Stabilize, &cfg).unwrap();
        assert_eq!(r.status, SynthStatus::Infeasible, "{m}");
    }
}

#[test]
fn hinf_bounds_hold_on_a_path() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 4;
    let g = graph::make_path(n).unwrap();
    let mut c = Mat::zeros(2 * n, n);
    let mut d = Mat::zeros(2 * n, n);
    c.view_mut((0, 0), (n, n)).copy_from(&(Mat::identity(n, n) * 20.0));
    d.view_mut((n, 0), (n, n)).copy_from(&Mat::identity(n, n));
    let p = plant(&mut rng, n, &[])
        .with_performance(Mat::identity(n, n), c.clone(), Some(d.clone()), None)
        .unwrap();
    let cen = synthesize(&p, &g, Method::Centralized, ProblemKind::HinfMinimize, &cfg).unwrap();
    let gcen = cen.gamma.unwrap();
    let mut gammas = Vec::new();
    for m in [Method::BlockDiag, Method::Proposed1, Method::Proposed2] {
        let r = synthesize(&p, &g, m, ProblemKind::HinfMinimize, &cfg).unwrap();
        assert!(r.status.is_success(), "{m}: {:?}", r.notes);
        let k = r.k.unwrap();
        let gamma = r.gamma.unwrap();
        let acl = &p.a + &p.b * &k;
        let norm = hinf_norm(&acl, &Mat::identity(n, n), &(&c + &d * &k), &Mat::zeros(2 * n, n)).unwrap();
        assert!(norm <= gamma * (1.0 + 1e-4), "{m}: {norm} > {gamma}");
        assert!(gcen <= gamma * (1.0 + 1e-6), "{m}: {gcen} > {gamma}");
        gammas.push(gamma);
    }
    assert!(gammas[1] <= gammas[0] * (1.0 + 1e-6));
}

#[test]
fn agler_reconstructs_sparse_pd_matrices() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..8 {
        let n = rng.random_range(3..=7);
        let g = common::random_chordal(&mut rng, n);
        let cs = maximal_cliques(&g);
        let part = BlockPartition::uniform(n, 1).unwrap();
        let l = Lifting::new(&cs, &part).unwrap();
        let blocks: Vec<Mat> = l
            .blocks
            .iter()
            .map(|&d| {
                let x = common::normal(&mut rng, d, d);
                &x * x.transpose() + Mat::identity(d, d)
            })
            .collect();
        let pt0 = cliquelmi_core::linalg::block_diag(&blocks);
        let p = l.e.transpose() * pt0 * &l.e;
        match agler_decompose(&p, &l, &cfg).unwrap() {
            AglerOutcome::Decomposed(pt) => {
                let back = l.e.transpose() * &pt * &l.e;
                assert!((back - &p).amax() <= 1e-6 * p.amax());
                assert!(pt.symmetric_eigen().eigenvalues.min() > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
