//! Small dense helpers shared by the modules.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{Complex, DVector, Schur};

use crate::{Error, Mat, Result};

/// `f64::sqrt` is not available in `core`; this goes through libm.
pub fn sqrt(x: f64) -> f64 {
    nalgebra::ComplexField::sqrt(x)
}

pub fn he(m: &Mat) -> Mat {
    m + m.transpose()
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Largest absolute row sum.
pub fn inf_norm(m: &Mat) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Largest entry of `m - m^T` in absolute value.
pub fn asymmetry(m: &Mat) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Eigenvalues of the symmetric part, ascending.
pub fn sym_eigenvalues(m: &Mat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn lambda_min(m: &Mat) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

pub fn lambda_max(m: &Mat) -> f64 {
    sym_eigenvalues(m).last().copied().unwrap_or(f64::NEG_INFINITY)
}

/// Eigenvalues of a general square matrix through a real Schur form.
pub fn eigenvalues(m: &Mat) -> Result<Vec<Complex<f64>>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::Eigen)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn block_diag(blocks: &[Mat]) -> Mat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Offsets of consecutive blocks with the given sizes.
pub fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for s in sizes {
        out.push(acc);
        acc += s;
    }
    out
}

/// Inverse of a symmetric positive definite block-diagonal matrix, block by block.
pub fn spd_block_inverse(m: &Mat, blocks: &[usize]) -> Result<Mat> {
    let mut out = Mat::zeros(m.nrows(), m.ncols());
    for (k, (&off, &d)) in offsets(blocks).iter().zip(blocks).enumerate() {
        let blk = symmetrize(&m.view((off, off), (d, d)).into_owned());
        let chol = blk
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite(format!("diagonal block {k}")))?;
        out.view_mut((off, off), (d, d)).copy_from(&chol.inverse());
    }
    Ok(out)
}

/// Inverse of a general block-diagonal matrix, block by block.
pub fn block_inverse(m: &Mat, blocks: &[usize]) -> Result<Mat> {
    let mut out = Mat::zeros(m.nrows(), m.ncols());
    for (k, (&off, &d)) in offsets(blocks).iter().zip(blocks).enumerate() {
        let blk = m.view((off, off), (d, d)).into_owned();
        let inv = blk
            .try_inverse()
            .ok_or_else(|| Error::Singular(format!("diagonal block {k}")))?;
        out.view_mut((off, off), (d, d)).copy_from(&inv);
    }
    Ok(out)
}

/// Orthonormal basis of the null space of `a` (columns), rank cut at `rtol * sigma_max`.
pub fn null_space(a: &Mat, rtol: f64) -> Mat {
    let (p, m) = a.shape();
    if p == 0 {
        return Mat::identity(m, m);
    }
    // pad to square so the SVD hands back a full set of right singular vectors
    let mut padded = Mat::zeros(p.max(m), m);
    padded.view_mut((0, 0), (p, m)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let cut = rtol * smax.max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..m).filter(|&i| svd.singular_values[i] <= cut).collect();
    let mut out = Mat::zeros(m, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &vt.row(i).transpose());
    }
    out
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &Mat, b: &DVector<f64>, rtol: f64) -> DVector<f64> {
    if a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(b, rtol * smax.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}
