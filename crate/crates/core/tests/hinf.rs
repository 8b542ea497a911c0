mod common;

use cliquelmi_core::verify::{freq_gain, hinf_norm, is_hurwitz};
use cliquelmi_core::Mat;
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `sigma_max(C (jw I - A)^{-1} B + D)` with a complex LU and SVD.
fn gain_at(a: &Mat, b: &Mat, c: &Mat, d: &Mat, w: f64) -> f64 {
    let n = a.nrows();
    let cx = |m: &Mat| m.map(|v| Complex::new(v, 0.0));
    let jw: DMatrix<Complex<f64>> =
        DMatrix::from_fn(n, n, |r, k| Complex::new(-a[(r, k)], if r == k { w } else { 0.0 }));
    let x = jw.lu().solve(&cx(b)).unwrap();
    let g = cx(c) * x + cx(d);
    g.singular_values().max()
}

fn sweep(a: &Mat, b: &Mat, c: &Mat, d: &Mat, points: usize) -> f64 {
    let mut best = gain_at(a, b, c, d, 0.0);
    for i in 0..points {
        let w = 10f64.powf(-4.0 + 8.0 * i as f64 / (points - 1) as f64);
        best = best.max(gain_at(a, b, c, d, w));
    }
    best
}

#[test]
fn pointwise_gain_matches_complex_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let n = rng.random_range(1..=6);
        let (m, p) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let a = common::random_stable(&mut rng, n, 0.2);
        let (b, c, d) = (
            common::normal(&mut rng, n, m),
            common::normal(&mut rng, p, n),
            common::normal(&mut rng, p, m),
        );
        for w in [0.0, 0.3, 1.0, 7.0] {
            let got = freq_gain(&a, &b, &c, &d, w).unwrap();
            let want = gain_at(&a, &b, &c, &d, w);
            assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{got} vs {want}");
        }
    }
}

#[test]
fn norm_bounds_and_matches_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.random_range(1..=6);
        let (m, p) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let a = common::random_stable(&mut rng, n, 0.05);
        assert!(is_hurwitz(&a).unwrap().0);
        let (b, c) = (common::normal(&mut rng, n, m), common::normal(&mut rng, p, n));
        let d = Mat::zeros(p, m);
        let norm = hinf_norm(&a, &b, &c, &d).unwrap();
        let swept = sweep(&a, &b, &c, &d, 100_000);
        // the sweep can only miss the peak from below
        assert!(swept <= norm * (1.0 + 1e-6), "{swept} > {norm}");
        assert!(norm - swept <= 1e-4 * norm, "{norm} vs {swept}");
    }
}

#[test]
fn first_order_lag() {
    // 1 / (s + 2): peak 1/2 at w = 0
    let a = Mat::from_element(1, 1, -2.0);
    let one = Mat::from_element(1, 1, 1.0);
    let norm = hinf_norm(&a, &one, &one, &Mat::zeros(1, 1)).unwrap();
    assert!((norm - 0.5).abs() < 1e-6 * 0.5);
}

#[test]
fn lightly_damped_resonance() {
    // w0^2 / (s^2 + 2 z w0 s + w0^2), peak 1 / (2 z sqrt(1 - z^2))
    let (w0, z) = (3.0, 0.01);
    let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -w0 * w0, -2.0 * z * w0]);
    let b = Mat::from_row_slice(2, 1, &[0.0, w0 * w0]);
    let c = Mat::from_row_slice(1, 2, &[1.0, 0.0]);
    let norm = hinf_norm(&a, &b, &c, &Mat::zeros(1, 1)).unwrap();
    let want = 1.0 / (2.0 * z * (1.0 - z * z).sqrt());
    assert!((norm - want).abs() <= 1e-6 * want, "{norm} vs {want}");
}

#[test]
fn unstable_is_infinite_or_error() {
    let a = Mat::from_element(1, 1, 1.0);
    let one = Mat::from_element(1, 1, 1.0);
    if let Ok(v) = hinf_norm(&a, &one, &one, &Mat::zeros(1, 1)) {
        assert!(v.is_infinite());
    }
}
