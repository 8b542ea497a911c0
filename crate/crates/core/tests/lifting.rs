mod common;

use cliquelmi_core::graph::{self, maximal_cliques, CliqueSet};
use cliquelmi_core::lifting::{block_embed, build_e, lift_plant, BlockPartition, Lifting, Plant, SparsityPattern};
use cliquelmi_core::linalg::{block_diag, max_abs};
use cliquelmi_core::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: &Mat, b: &Mat) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1.0)
}

/// Random instance: a connected-or-not graph, its cliques, block sizes.
fn instance(seed: u64) -> (CliqueSet, BlockPartition, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=7);
    let g = common::random_graph(&mut rng, n, 0.45);
    let sizes = (0..n).map(|_| rng.random_range(1..=2)).collect();
    (maximal_cliques(&g), BlockPartition::new(sizes).unwrap(), rng)
}

fn random_spd_blocks(rng: &mut ChaCha8Rng, blocks: &[usize]) -> Mat {
    let bl: Vec<Mat> = blocks
        .iter()
        .map(|&d| {
            let x = common::normal(rng, d, d);
            &x * x.transpose() + Mat::identity(d, d)
        })
        .collect();
    block_diag(&bl)
}

/// Random `K` supported on the pattern of `cs`.
fn random_pattern_gain(rng: &mut ChaCha8Rng, cs: &CliqueSet, part: &BlockPartition) -> Mat {
    let pat = SparsityPattern::from_cliques(cs, part, part).unwrap();
    let k = common::normal(rng, part.total(), part.total());
    Mat::from_fn(k.nrows(), k.ncols(), |r, c| {
        if pat.entry_allowed(r, c) {
            k[(r, c)]
        } else {
            0.0
        }
    })
}

#[test]
fn path_of_three_unit_blocks() {
    let g = graph::make_path(3).unwrap();
    let (e, gram) = build_e(&maximal_cliques(&g), &BlockPartition::uniform(3, 1).unwrap()).unwrap();
    let want = Mat::from_row_slice(4, 3, &[1., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 1.]);
    assert_eq!(e, want);
    assert_eq!(gram, vec![1.0, 2.0, 1.0]);
    assert_eq!(
        e.transpose() * &e,
        Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 1.0]))
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_is_diagonal_and_projector(seed in any::<u64>()) {
        let (cs, part, _) = instance(seed);
        let l = Lifting::new(&cs, &part).unwrap();
        let ete = l.e.transpose() * &l.e;
        for v in 0..part.len() {
            for r in 0..part.size(v) {
                let i = part.offset(v) + r;
                prop_assert_eq!(ete[(i, i)], cs.membership(v).len() as f64);
                prop_assert_eq!(l.gram[i], ete[(i, i)]);
            }
        }
        prop_assert_eq!(max_abs(&(ete.clone() - Mat::from_diagonal(&ete.diagonal()))), 0.0);
        prop_assert!(max_abs(&(&l.m * &l.m - &l.m)) < 1e-12);
        prop_assert!(max_abs(&(&l.m * &l.e)) < 1e-12);
        prop_assert!(max_abs(&(l.left_inverse() * &l.e - Mat::identity(part.total(), part.total()))) < 1e-12);
    }

    #[test]
    fn lifted_lyapunov_form_projects_back(seed in any::<u64>()) {
        let (cs, part, mut rng) = instance(seed);
        let l = Lifting::new(&cs, &part).unwrap();
        let n = part.total();
        let a = common::normal(&mut rng, n, n);
        let plant = Plant::new(part.clone(), part.clone(), a.clone(), Mat::identity(n, n)).unwrap();
        let lifted = lift_plant(&plant, &l).unwrap();
        let pt = random_spd_blocks(&mut rng, &l.blocks);
        let p = l.e.transpose() * &pt * &l.e;
        let lhs = l.e.transpose() * (lifted.a.transpose() * &pt + &pt * &lifted.a) * &l.e;
        let rhs = a.transpose() * &p + &p * &a;
        prop_assert!(rel(&lhs, &rhs) < 1e-10, "{}", rel(&lhs, &rhs));
    }

    #[test]
    fn block_embedding_round_trips(seed in any::<u64>()) {
        let (cs, part, mut rng) = instance(seed);
        let l = Lifting::new(&cs, &part).unwrap();
        let k = random_pattern_gain(&mut rng, &cs, &part);
        let kt = block_embed(&k, &cs, &part, &part).unwrap();
        prop_assert_eq!(kt.shape(), (l.lifted_dim(), l.lifted_dim()));
        // clique-block-diagonal
        let owner = l.block_mask();
        for r in 0..kt.nrows() {
            for c in 0..kt.ncols() {
                if owner[r] != owner[c] {
                    prop_assert_eq!(kt[(r, c)], 0.0);
                }
            }
        }
        let back = l.e.transpose() * &kt * &l.e;
        prop_assert!(rel(&back, &k) < 1e-10);
    }

    #[test]
    fn restriction_lands_in_pattern(seed in any::<u64>()) {
        let (cs, part, mut rng) = instance(seed);
        let l = Lifting::new(&cs, &part).unwrap();
        let blocks: Vec<Mat> = l.blocks.iter().map(|&d| common::normal(&mut rng, d, d)).collect();
        let k = l.restrict(&block_diag(&blocks));
        let pat = SparsityPattern::from_cliques(&cs, &part, &part).unwrap();
        prop_assert!(pat.check(&k).is_ok());
    }
}

#[test]
fn pattern_rejects_forbidden_block() {
    let g = graph::make_path(3).unwrap();
    let part = BlockPartition::uniform(3, 1).unwrap();
    let pat = SparsityPattern::from_graph(&g, &part, &part).unwrap();
    let mut k = Mat::identity(3, 3);
    assert!(pat.check(&k).is_ok());
    k[(0, 2)] = 0.5;
    assert!(pat.check(&k).is_err());
    assert_eq!(pat.worst_forbidden_block(&k).map(|w| (w.0, w.1)), Some((0, 2)));
}
