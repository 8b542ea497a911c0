//! Solver-free checks of closed loops and certificates.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::lifting::{Plant, SparsityPattern};
use crate::linalg::{self, lambda_max, lambda_min, spectral_norm, sqrt};
use crate::synth::{ProblemKind, SynthesisResult};
use crate::{Error, Mat, Result};

/// Relative Hurwitz margin: `max Re(lambda) <= -STAB_RTOL * ||A||_2`, a few
/// thousand rounding units of the eigenvalue solver.
pub const STAB_RTOL: f64 = 1e-12;
/// Rounding allowance per unit of `n ||P|| ||A_cl||` in the Lyapunov check.
pub const LYAP_ROUNDING: f64 = 4.0 * f64::EPSILON;
/// Relative accuracy of [`hinf_norm`].
pub const HINF_RTOL: f64 = 1e-7;
/// Slack allowed when comparing a computed norm with a claimed bound.
pub const HINF_BOUND_SLACK: f64 = 1e-4;

pub fn spectral_abscissa(a: &Mat) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("abscissa of a {:?} matrix", a.shape())));
    }
    if a.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let ev = linalg::eigenvalues(a)?;
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// `(hurwitz, spectral abscissa)`.
pub fn is_hurwitz(a: &Mat) -> Result<(bool, f64)> {
    let abscissa = spectral_abscissa(a)?;
    let tol = STAB_RTOL * spectral_norm(a);
    Ok((abscissa < 0.0 && abscissa <= -tol, abscissa))
}

/// `(lambda_max(P A + A^T P), lambda_min(P))`.
pub fn lyapunov_residual(p: &Mat, a: &Mat) -> Result<(f64, f64)> {
    if !p.is_square() || p.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "P is {:?}, closed loop is {:?}",
            p.shape(),
            a.shape()
        )));
    }
    if linalg::asymmetry(p) > 1e-10 * linalg::max_abs(p).max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric("Lyapunov matrix".into()));
    }
    let p = linalg::symmetrize(p);
    let pa = &p * a;
    Ok((lambda_max(&linalg::he(&pa)), lambda_min(&p)))
}

/// `sigma_max(C (j w I - A)^{-1} B + D)` evaluated through the real
/// embedding of the complex resolvent.
pub fn freq_gain(a: &Mat, b: &Mat, c: &Mat, d: &Mat, w: f64) -> Result<f64> {
    let n = a.nrows();
    let (p, m) = d.shape();
    let mut big = Mat::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&(-a));
    big.view_mut((n, n), (n, n)).copy_from(&(-a));
    for i in 0..n {
        big[(i, n + i)] = -w;
        big[(n + i, i)] = w;
    }
    let mut rhs = Mat::zeros(2 * n, m);
    rhs.view_mut((0, 0), (n, m)).copy_from(b);
    let x = big
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("resolvent at w = {w}")))?;
    let gr = c * x.rows(0, n) + d;
    let gi = c * x.rows(n, n);
    let mut emb = Mat::zeros(2 * p, 2 * m);
    emb.view_mut((0, 0), (p, m)).copy_from(&gr);
    emb.view_mut((p, m), (p, m)).copy_from(&gr);
    emb.view_mut((0, m), (p, m)).copy_from(&(-&gi));
    emb.view_mut((p, 0), (p, m)).copy_from(&gi);
    Ok(spectral_norm(&emb))
}

/// Imaginary-axis eigenvalue frequencies of the Hamiltonian at level `g`.
/// Requires `g > sigma_max(D)`.
fn crossings(a: &Mat, b: &Mat, c: &Mat, d: &Mat, g: f64) -> Result<Vec<f64>> {
    let n = a.nrows();
    let m = b.ncols();
    let r = Mat::identity(m, m) * (g * g) - d.transpose() * d;
    let rinv = r.clone().cholesky().ok_or(Error::Bracket)?.inverse();
    let a1 = a + b * &rinv * d.transpose() * c;
    let h12 = b * &rinv * b.transpose() * g;
    let h21 = -(c.transpose() * (Mat::identity(d.nrows(), d.nrows()) + d * &rinv * d.transpose()) * c) / g;
    let mut h = Mat::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&a1);
    h.view_mut((0, n), (n, n)).copy_from(&h12);
    h.view_mut((n, 0), (n, n)).copy_from(&h21);
    h.view_mut((n, n), (n, n)).copy_from(&(-a1.transpose()));
    let band = 1e-8 * spectral_norm(&h).max(f64::MIN_POSITIVE);
    let mut ws: Vec<f64> = linalg::eigenvalues(&h)?
        .into_iter()
        .filter(|z| z.re.abs() <= band && z.im >= 0.0)
        .map(|z| z.im)
        .collect();
    ws.sort_by(|x, y| x.total_cmp(y));
    Ok(ws)
}

/// `||C (sI - A)^{-1} B + D||_inf` of a stable system.
///
/// Level-set iteration on the Hamiltonian: each level with imaginary-axis
/// eigenvalues is raised to the largest gain at the midpoints between
/// consecutive crossing frequencies, until the level `(1 + HINF_RTOL)` times
/// the best gain found has no crossing.
pub fn hinf_norm(a: &Mat, bw: &Mat, c: &Mat, dw: &Mat) -> Result<f64> {
    let n = a.nrows();
    if bw.nrows() != n || c.ncols() != n || dw.shape() != (c.nrows(), bw.ncols()) {
        return Err(Error::Dimension("inconsistent state-space data".into()));
    }
    let (stable, abscissa) = is_hurwitz(a)?;
    if !stable {
        return Err(Error::NotHurwitz(abscissa));
    }
    let dnorm = spectral_norm(dw);
    if n == 0 || bw.ncols() == 0 || c.nrows() == 0 || (linalg::max_abs(bw) == 0.0 || linalg::max_abs(c) == 0.0) {
        return Ok(dnorm);
    }
    // starting lower bound: D, DC gain and the gain at the modal frequencies
    let mut lower = dnorm.max(freq_gain(a, bw, c, dw, 0.0)?);
    for z in linalg::eigenvalues(a)? {
        let w = sqrt(z.re * z.re + z.im * z.im);
        lower = lower.max(freq_gain(a, bw, c, dw, z.im.abs())?);
        lower = lower.max(freq_gain(a, bw, c, dw, w)?);
    }
    if lower == 0.0 {
        return Ok(0.0);
    }
    for _ in 0..100 {
        let level = lower * (1.0 + 2.0 * HINF_RTOL);
        let ws = crossings(a, bw, c, dw, level)?;
        if ws.is_empty() {
            return Ok(lower * (1.0 + HINF_RTOL));
        }
        let mut best = lower;
        let mut probe = |w: f64| -> Result<()> {
            best = best.max(freq_gain(a, bw, c, dw, w)?);
            Ok(())
        };
        for &w in &ws {
            probe(w)?;
        }
        for pair in ws.windows(2) {
            probe(0.5 * (pair[0] + pair[1]))?;
            probe(sqrt(pair[0] * pair[1]))?;
        }
        if best <= level {
            // crossings sit inside the relative band: the peak is already bracketed
            return Ok(lower.max(best) * (1.0 + HINF_RTOL));
        }
        lower = best;
    }
    Err(Error::Bracket)
}

/// `(conforms, worst forbidden block (i, j, norm))`.
pub fn check_sparsity(k: &Mat, pattern: &SparsityPattern) -> (bool, Option<(usize, usize, f64)>) {
    let worst = pattern.worst_forbidden_block(k);
    let ok = match worst {
        Some((_, _, norm)) => norm <= SparsityPattern::zero_tolerance(k),
        None => true,
    };
    (ok, worst)
}

/// PBH test: `rank [lambda I - A, B] = n` for every eigenvalue with
/// `Re(lambda) >= 0`, rank cut at `1e-8 * sigma_max`.
pub fn is_stabilizable(a: &Mat, b: &Mat) -> Result<bool> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::Dimension(format!("A {:?}, B {:?}", a.shape(), b.shape())));
    }
    for lam in linalg::eigenvalues(a)? {
        if lam.re < 0.0 {
            continue;
        }
        let m = b.ncols();
        let pencil = nalgebra::DMatrix::<nalgebra::Complex<f64>>::from_fn(n, n + m, |r, c| {
            if c < n {
                let d = if r == c { lam } else { nalgebra::Complex::new(0.0, 0.0) };
                d - nalgebra::Complex::new(a[(r, c)], 0.0)
            } else {
                nalgebra::Complex::new(b[(r, c - n)], 0.0)
            }
        });
        let sv = pencil.svd(false, false).singular_values;
        let top = sv.iter().copied().fold(0.0, f64::max);
        let rank = sv.iter().filter(|&&s| s > 1e-8 * top).count();
        if rank < n {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovCheck {
    /// `lambda_max(He(P A_cl))`
    pub he_max: f64,
    /// `lambda_min(P)`
    pub p_min: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HinfCheck {
    pub norm: f64,
    pub gamma: f64,
    /// `gamma - norm`
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub hurwitz: bool,
    pub spectral_abscissa: f64,
    pub lyapunov: Option<LyapunovCheck>,
    pub sparsity_ok: bool,
    pub worst_block: Option<(usize, usize, f64)>,
    pub hinf: Option<HinfCheck>,
    pub passed: bool,
    pub notes: Vec<String>,
}

/// Closed-loop state matrix `A + B K` (state feedback) or `A + B K C`
/// (output feedback, `C` given).
pub fn closed_loop(plant: &Plant, k: &Mat, output_map: Option<&Mat>) -> Result<Mat> {
    let keff = match output_map {
        Some(c) => k * c,
        None => k.clone(),
    };
    if keff.shape() != (plant.m(), plant.n()) {
        return Err(Error::Dimension(format!(
            "gain is {:?}, plant needs ({}, {})",
            keff.shape(),
            plant.m(),
            plant.n()
        )));
    }
    Ok(&plant.a + &plant.b * keff)
}

/// Runs every applicable check on a synthesis result against the plant it
/// was computed for.
pub fn certify(plant: &Plant, result: &SynthesisResult) -> Result<VerificationReport> {
    let k = result
        .k
        .as_ref()
        .ok_or_else(|| Error::Invalid("result carries no gain".into()))?;
    let acl = closed_loop(plant, k, result.output_map.as_ref())?;
    let (hurwitz, abscissa) = is_hurwitz(&acl)?;
    let (sparsity_ok, worst_block) = check_sparsity(k, &result.pattern);
    let mut notes = Vec::new();
    let lyapunov = match &result.p {
        Some(p) => {
            let (he_max, p_min) = lyapunov_residual(p, &acl)?;
            // rounding in forming P A_cl; high-gain H-infinity optima reach it
            let noise = LYAP_ROUNDING * acl.nrows() as f64 * spectral_norm(p) * spectral_norm(&acl);
            let passed = p_min > 0.0 && he_max < noise;
            if !passed {
                notes.push(format!("Lyapunov check failed: he_max {he_max:e}, p_min {p_min:e}"));
            } else if he_max >= 0.0 {
                notes.push(format!(
                    "Lyapunov margin {he_max:e} is below working precision ({noise:.1e}); stability rests on the eigenvalue check"
                ));
            }
            Some(LyapunovCheck { he_max, p_min, passed })
        }
        None => None,
    };
    if !hurwitz {
        notes.push(format!("closed loop not Hurwitz: abscissa {abscissa:e}"));
    }
    if !sparsity_ok {
        notes.push("gain violates the sparsity pattern".into());
    }
    let hinf = match (result.kind, result.gamma) {
        (ProblemKind::HinfFixed(_) | ProblemKind::HinfMinimize, Some(gamma)) if hurwitz => {
            let perf = plant
                .performance()
                .ok_or_else(|| Error::Invalid("H-infinity result on a plant without performance data".into()))?;
            let keff = match &result.output_map {
                Some(c) => k * c,
                None => k.clone(),
            };
            let ccl = &perf.c + &perf.d * &keff;
            let norm = hinf_norm(&acl, &perf.bw, &ccl, &perf.dw)?;
            let passed = norm <= gamma * (1.0 + HINF_BOUND_SLACK);
            if !passed {
                notes.push(format!("closed-loop norm {norm} exceeds bound {gamma}"));
            }
            Some(HinfCheck {
                norm,
                gamma,
                margin: gamma - norm,
                passed,
            })
        }
        _ => None,
    };
    let passed =
        hurwitz && sparsity_ok && lyapunov.as_ref().is_none_or(|l| l.passed) && hinf.as_ref().is_none_or(|h| h.passed);
    Ok(VerificationReport {
        hurwitz,
        spectral_abscissa: abscissa,
        lyapunov,
        sparsity_ok,
        worst_block,
        hinf,
        passed,
        notes,
    })
}
