//! Homogeneous self-dual primal-dual interior-point method with
//! Nesterov–Todd scaling and Mehrotra correction, for
//!
//! ```text
//! minimize c^T x  subject to  h - G x = s,  s in S_+^{d_1} x ... x S_+^{d_k}
//! ```

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DVector};

use super::{ConicOutcome, ConicProblem, ConicSettings, ConicStatus, Entry};
use crate::linalg::sqrt;
use crate::Mat;

struct Scaled {
    dims: Vec<usize>,
    c: Vec<f64>,
    h: Vec<Mat>,
    /// per column: (block, entries)
    cols: Vec<Vec<(usize, Vec<Entry>)>>,
    /// per block: columns touching it
    touching: Vec<Vec<usize>>,
    colscale: Vec<f64>,
    bh: f64,
}

/// Largest ratio between the biggest column norm and a column's scaled norm.
const MAX_COL_UPSCALE: f64 = 1e4;

impl Scaled {
    fn new(p: &ConicProblem) -> Self {
        let m = p.c.len();
        let nb = p.dims.len();
        let mut cols = Vec::with_capacity(m);
        let mut colscale = Vec::with_capacity(m);
        let mut touching = vec![Vec::new(); nb];
        let norms: Vec<f64> = p
            .cols
            .iter()
            .map(|col| {
                sqrt(
                    col.iter()
                        .map(|e| {
                            if e.row == e.col {
                                e.val * e.val
                            } else {
                                2.0 * e.val * e.val
                            }
                        })
                        .sum::<f64>(),
                )
            })
            .collect();
        // nearly invisible columns are not blown up to unit size, or the
        // iterates run off along them
        let floor = MAX_COL_UPSCALE.recip() * norms.iter().fold(0.0_f64, |a, &v| a.max(v));
        for (u, (col, &norm)) in p.cols.iter().zip(&norms).enumerate() {
            let norm = norm.max(floor);
            let sc = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            colscale.push(sc);
            let mut grouped: Vec<(usize, Vec<Entry>)> = Vec::new();
            let mut sorted: Vec<Entry> = col.clone();
            sorted.sort_by_key(|e| (e.block, e.row, e.col));
            for e in sorted {
                let e = Entry { val: e.val * sc, ..e };
                match grouped.last_mut() {
                    Some((b, list)) if *b == e.block => list.push(e),
                    _ => grouped.push((e.block, vec![e])),
                }
            }
            for (b, _) in &grouped {
                touching[*b].push(u);
            }
            cols.push(grouped);
        }
        let hn = frob(&p.h);
        let bh = hn.max(1.0);
        let cs: Vec<f64> = p.c.iter().zip(&colscale).map(|(c, s)| c * s).collect();
        let cn = sqrt(cs.iter().map(|v| v * v).sum::<f64>());
        let bc = cn.max(1.0);
        Self {
            dims: p.dims.clone(),
            c: cs.iter().map(|v| v / bc).collect(),
            h: p.h.iter().map(|b| b / bh).collect(),
            cols,
            touching,
            colscale,
            bh,
        }
    }

    fn apply_g(&self, x: &[f64]) -> Vec<Mat> {
        let mut out: Vec<Mat> = self.dims.iter().map(|&d| Mat::zeros(d, d)).collect();
        for (u, col) in self.cols.iter().enumerate() {
            let xu = x[u];
            if xu == 0.0 {
                continue;
            }
            for (b, entries) in col {
                add_entries(&mut out[*b], entries, xu);
            }
        }
        out
    }

    fn apply_gt(&self, z: &[Mat]) -> Vec<f64> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|(b, entries)| pair(entries, &z[*b])).sum())
            .collect()
    }
}

fn add_entries(m: &mut Mat, entries: &[Entry], scale: f64) {
    for e in entries {
        let v = e.val * scale;
        m[(e.row, e.col)] += v;
        if e.row != e.col {
            m[(e.col, e.row)] += v;
        }
    }
}

/// `<G_u, Z>` restricted to one block.
fn pair(entries: &[Entry], z: &Mat) -> f64 {
    entries
        .iter()
        .map(|e| {
            if e.row == e.col {
                e.val * z[(e.row, e.col)]
            } else {
                e.val * (z[(e.row, e.col)] + z[(e.col, e.row)])
            }
        })
        .sum()
}

fn frob(ms: &[Mat]) -> f64 {
    sqrt(ms.iter().map(|m| m.norm_squared()).sum::<f64>())
}

fn inner(a: &[Mat], b: &[Mat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

/// Nesterov–Todd scaling of one block: `W z = R^T z R = diag(lambda) = R^{-1} s R^{-T}`.
struct Nt {
    r: Mat,
    lambda: Vec<f64>,
    /// `R^{-T} R^{-1}`
    t: Mat,
    /// `R R^T`
    rrt: Mat,
    rinv: Mat,
}

fn nt_scaling(s: &Mat, z: &Mat) -> Option<Nt> {
    let ls = Cholesky::new(s.clone())?.unpack();
    let lz = Cholesky::new(z.clone())?.unpack();
    let svd = (lz.transpose() * &ls).svd(true, true);
    let (u, vt) = (svd.u?, svd.v_t?);
    let lambda: Vec<f64> = svd.singular_values.iter().copied().collect();
    if lambda.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return None;
    }
    let mut r = ls * vt.transpose();
    let mut rinv = u.transpose() * lz.transpose();
    for (i, l) in lambda.iter().enumerate() {
        let f = 1.0 / sqrt(*l);
        r.column_mut(i).scale_mut(f);
        rinv.row_mut(i).scale_mut(f);
    }
    let t = rinv.transpose() * &rinv;
    let rrt = &r * r.transpose();
    Some(Nt {
        r,
        lambda,
        t,
        rrt,
        rinv,
    })
}

/// Largest `a` with `diag(lambda) + a * d` positive semidefinite.
fn max_step(lambda: &[f64], d: &Mat) -> f64 {
    let n = lambda.len();
    let mut m = d.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= sqrt(lambda[i] * lambda[j]);
        }
    }
    let m = (&m + m.transpose()) * 0.5;
    let min = m.symmetric_eigenvalues().min();
    if min < 0.0 {
        -1.0 / min
    } else {
        f64::INFINITY
    }
}

/// `lambda^{-1} o V` for diagonal `lambda`.
fn jordan_div(lambda: &[f64], v: &Mat) -> Mat {
    let n = lambda.len();
    Mat::from_fn(n, n, |i, j| 2.0 * v[(i, j)] / (lambda[i] + lambda[j]))
}

/// `T G T` for the symmetric `G` given by `entries`. Entries are grouped by
/// a shared index `r`, so that `G = sum_r e_r w_r^T + w_r e_r^T` and each
/// group costs two rank-one updates.
fn congruence_of_entries(t: &Mat, entries: &[Entry]) -> Mat {
    let d = t.nrows();
    let mut y = Mat::zeros(d, d);
    let distinct = |key: fn(&Entry) -> usize| {
        let mut k: Vec<usize> = entries.iter().map(key).collect();
        k.sort_unstable();
        k.dedup();
        k.len()
    };
    let by_row = distinct(|e| e.row) <= distinct(|e| e.col);
    let mut keyed: Vec<(usize, usize, f64)> = entries
        .iter()
        .map(|e| {
            let (r, c) = if by_row { (e.row, e.col) } else { (e.col, e.row) };
            // diagonal entries are split over the two symmetric terms
            let v = if e.row == e.col { 0.5 * e.val } else { e.val };
            (r, c, v)
        })
        .collect();
    keyed.sort_unstable_by_key(|&(r, c, _)| (r, c));
    let mut i = 0;
    while i < keyed.len() {
        let r = keyed[i].0;
        let mut w = nalgebra::DVector::<f64>::zeros(d);
        while i < keyed.len() && keyed[i].0 == r {
            let (_, c, v) = keyed[i];
            w.axpy(v, &t.column(c), 1.0);
            i += 1;
        }
        let tr = t.column(r);
        y.ger(1.0, &tr, &w, 1.0);
        y.ger(1.0, &w, &tr, 1.0);
    }
    y
}

struct Kkt<'a> {
    data: &'a Scaled,
    scal: &'a [Nt],
    chol: Cholesky<f64, nalgebra::Dyn>,
    h: Mat,
}

impl<'a> Kkt<'a> {
    fn build(data: &'a Scaled, scal: &'a [Nt]) -> Option<Self> {
        let m = data.c.len();
        let mut h = Mat::zeros(m, m);
        for (b, cols) in data.touching.iter().enumerate() {
            let t = &scal[b].t;
            for &u in cols {
                let entries = block_entries(&data.cols[u], b);
                let y = congruence_of_entries(t, entries);
                for &v in cols {
                    if v < u {
                        continue;
                    }
                    let val = pair(block_entries(&data.cols[v], b), &y);
                    h[(u, v)] += val;
                }
            }
        }
        for u in 0..m {
            for v in (u + 1)..m {
                h[(v, u)] = h[(u, v)];
            }
        }
        let maxdiag = (0..m).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1e-300);
        let mut reg = 1e-14 * maxdiag;
        for _ in 0..8 {
            let mut hr = h.clone();
            for i in 0..m {
                hr[(i, i)] += reg;
            }
            if let Some(chol) = Cholesky::new(hr) {
                return Some(Self { data, scal, chol, h });
            }
            reg *= 100.0;
        }
        None
    }

    /// Solves `G^T dz = bx`, `G dx - W^T W dz = bz`, refining against the
    /// full residual while that keeps shrinking.
    fn solve(&self, bx: &[f64], bz: &[Mat]) -> (Vec<f64>, Vec<Mat>) {
        let (mut dx, mut dz) = self.solve_once(bx, bz);
        let mut prev = f64::INFINITY;
        for _ in 0..6 {
            let gtz = self.data.apply_gt(&dz);
            let ex: Vec<f64> = bx.iter().zip(&gtz).map(|(a, b)| a - b).collect();
            let gx = self.data.apply_g(&dx);
            let ez: Vec<Mat> = bz
                .iter()
                .zip(gx.iter().zip(&dz))
                .zip(self.scal)
                .map(|((b, (g, z)), nt)| b - (g - &nt.rrt * z * &nt.rrt))
                .collect();
            let res = norm(&ex) + frob(&ez);
            if !(res < 0.5 * prev) {
                break;
            }
            prev = res;
            let (cx, cz) = self.solve_once(&ex, &ez);
            for (a, b) in dx.iter_mut().zip(&cx) {
                *a += b;
            }
            for (a, b) in dz.iter_mut().zip(&cz) {
                *a += b;
            }
        }
        (dx, dz)
    }

    fn solve_once(&self, bx: &[f64], bz: &[Mat]) -> (Vec<f64>, Vec<Mat>) {
        let tbt: Vec<Mat> = bz.iter().zip(self.scal).map(|(b, nt)| &nt.t * b * &nt.t).collect();
        let gt = self.data.apply_gt(&tbt);
        let rhs = DVector::from_iterator(bx.len(), bx.iter().zip(&gt).map(|(a, b)| a + b));
        let mut dx = self.chol.solve(&rhs);
        // refine against the unregularised Schur matrix
        let res = &rhs - &self.h * &dx;
        dx += self.chol.solve(&res);
        let dx: Vec<f64> = dx.iter().copied().collect();
        let gx = self.data.apply_g(&dx);
        let dz = gx
            .iter()
            .zip(bz)
            .zip(self.scal)
            .map(|((g, b), nt)| &nt.t * (g - b) * &nt.t)
            .collect();
        (dx, dz)
    }
}

fn block_entries(col: &[(usize, Vec<Entry>)], b: usize) -> &[Entry] {
    col.iter()
        .find(|(bb, _)| *bb == b)
        .map(|(_, e)| e.as_slice())
        .unwrap_or(&[])
}

struct Direction {
    dx: Vec<f64>,
    dz: Vec<Mat>,
    ds_s: Vec<Mat>,
    dz_s: Vec<Mat>,
    dtau: f64,
    dkappa: f64,
}

/// Solves one conic problem.
pub fn solve(p: &ConicProblem, set: &ConicSettings) -> ConicOutcome {
    let data = Scaled::new(p);
    let m = data.c.len();
    let nu: usize = data.dims.iter().sum();
    let hn = frob(&data.h).max(1.0);
    let cn = norm(&data.c).max(1.0);

    let mut x = vec![0.0; m];
    let mut s: Vec<Mat> = data.dims.iter().map(|&d| Mat::identity(d, d)).collect();
    let mut z = s.clone();
    let (mut tau, mut kappa) = (1.0_f64, 1.0_f64);

    let unscale = |x: &[f64], tau: f64| -> Vec<f64> {
        x.iter()
            .zip(&data.colscale)
            .map(|(v, sc)| v * sc * data.bh / tau)
            .collect()
    };
    let mut note = String::new();
    let mut last = (f64::NAN, f64::NAN, f64::NAN);
    // best acceptable iterate at reduced accuracy, returned if progress stops
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    // best Farkas ratio seen, for the same purpose
    let mut best_cert = (f64::INFINITY, 0);
    // objective of the best nearly optimal iterate, acceptable or not
    let mut near: Option<(f64, f64, f64)> = None;

    for it in 0..set.max_iters {
        let gx = data.apply_g(&x);
        let gtz = data.apply_gt(&z);
        let rx: Vec<f64> = gtz.iter().zip(&data.c).map(|(g, c)| g + c * tau).collect();
        let rz: Vec<Mat> = s
            .iter()
            .zip(&gx)
            .zip(&data.h)
            .map(|((s, g), h)| s + g - h * tau)
            .collect();
        let cx = dot(&data.c, &x);
        let hz = inner(&data.h, &z);
        let rt = kappa + cx + hz;
        let sz = inner(&s, &z);
        let mu = (sz + tau * kappa) / (nu as f64 + 1.0);

        let pres = frob(&rz) / (tau * hn);
        let dres = norm(&rx) / (tau * cn);
        let pcost = cx / tau;
        let dcost = -hz / tau;
        let gap = sz / (tau * tau);
        let relgap = (pcost - dcost).abs() / pcost.abs().max(dcost.abs()).max(1.0);
        last = (pres, dres, relgap);

        let xo = unscale(&x, tau);
        let acceptable = p.acceptable(&xo);
        if set.feasibility_only {
            if acceptable {
                return ConicOutcome::new(ConicStatus::Feasible, xo, it, note);
            }
        } else if acceptable
            && pres <= set.feas_tol
            && dres <= set.feas_tol
            && (gap <= set.gap_tol || relgap <= set.gap_tol)
        {
            return ConicOutcome::new(ConicStatus::Optimal, xo, it, note);
        }
        let score = pres.max(dres).max(relgap.min(gap));
        let loose = 100.0;
        if !set.feasibility_only
            && acceptable
            && pres <= loose * set.feas_tol
            && dres <= loose * set.feas_tol
            && relgap.min(gap) <= loose * set.gap_tol
            && best.as_ref().is_none_or(|b| score < b.0)
        {
            best = Some((score, xo.clone(), it));
        }
        let rough = 10.0 * loose;
        if !set.feasibility_only
            && pres <= rough * set.feas_tol
            && dres <= rough * set.feas_tol
            && relgap.min(gap) <= rough * set.gap_tol
            && near.is_none_or(|n| score < n.0)
        {
            near = Some((score, dot(&p.c, &xo), relgap));
        }
        // Farkas ray, measured independently of the scale of h
        let cert = if hz < 0.0 {
            norm(&gtz) * frob(&data.h) / -hz
        } else {
            f64::INFINITY
        };
        if cert < best_cert.0 {
            best_cert = (cert, it);
        }
        if cert <= set.infeas_tol {
            return ConicOutcome::new(ConicStatus::Infeasible, Vec::new(), it, note);
        }
        if !set.feasibility_only && cx < 0.0 {
            let ray: Vec<Mat> = gx.iter().zip(&s).map(|(g, s)| g + s).collect();
            if frob(&ray) / -cx <= set.infeas_tol {
                return ConicOutcome::new(ConicStatus::Unbounded, Vec::new(), it, note);
            }
        }

        let Some(scal) = s
            .iter()
            .zip(&z)
            .map(|(s, z)| nt_scaling(s, z))
            .collect::<Option<Vec<_>>>()
        else {
            note = format!("lost positive definiteness at iteration {it}");
            break;
        };
        let Some(kkt) = Kkt::build(&data, &scal) else {
            note = format!("Schur complement factorisation failed at iteration {it}");
            break;
        };
        let neg_c: Vec<f64> = data.c.iter().map(|v| -v).collect();
        let (x1, z1) = kkt.solve(&neg_c, &data.h);
        let denom_base = dot(&data.c, &x1) + inner(&data.h, &z1);

        let direction = |sigma: f64, ds: Vec<Mat>, dk: f64| -> Direction {
            let f = 1.0 - sigma;
            let bx: Vec<f64> = rx.iter().map(|v| -f * v).collect();
            let bz: Vec<Mat> = rz
                .iter()
                .zip(&ds)
                .zip(&scal)
                .map(|((r, d), nt)| -(r * f) - &nt.r * d * nt.r.transpose())
                .collect();
            let (x0, z0) = kkt.solve(&bx, &bz);
            let num = -f * rt - dk / tau - dot(&data.c, &x0) - inner(&data.h, &z0);
            let den = -kappa / tau + denom_base;
            let dtau = num / den;
            let dx: Vec<f64> = x0.iter().zip(&x1).map(|(a, b)| a + dtau * b).collect();
            let dz: Vec<Mat> = z0.iter().zip(&z1).map(|(a, b)| a + b * dtau).collect();
            let dz_s: Vec<Mat> = dz
                .iter()
                .zip(&scal)
                .map(|(d, nt)| nt.r.transpose() * d * &nt.r)
                .collect();
            // ds from the primal row, so that an inexact Schur solve
            // cannot push the iterate off the primal residual path
            let gdx = data.apply_g(&dx);
            let ds_s: Vec<Mat> = rz
                .iter()
                .zip(gdx.iter().zip(&data.h))
                .zip(&scal)
                .map(|((r, (g, h)), nt)| {
                    let d = -(r * f) - g + h * dtau;
                    &nt.rinv * d * nt.rinv.transpose()
                })
                .collect();
            drop(ds);
            let dkappa = (dk - kappa * dtau) / tau;
            Direction {
                dx,
                dz,
                ds_s,
                dz_s,
                dtau,
                dkappa,
            }
        };
        let step = |d: &Direction| -> f64 {
            let mut a = f64::INFINITY;
            for (nt, (ds, dz)) in scal.iter().zip(d.ds_s.iter().zip(&d.dz_s)) {
                a = a.min(max_step(&nt.lambda, ds)).min(max_step(&nt.lambda, dz));
            }
            if d.dtau < 0.0 {
                a = a.min(-tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-kappa / d.dkappa);
            }
            a
        };

        // predictor
        let ds_aff: Vec<Mat> = scal
            .iter()
            .map(|nt| -Mat::from_diagonal(&DVector::from_vec(nt.lambda.clone())))
            .collect();
        let aff = direction(0.0, ds_aff, -tau * kappa);
        let a_aff = step(&aff).min(1.0);
        let sigma = {
            let t = 1.0 - a_aff;
            t * t * t
        }
        .clamp(0.0, 1.0);

        // corrector
        let ds_cor: Vec<Mat> = scal
            .iter()
            .zip(aff.ds_s.iter().zip(&aff.dz_s))
            .map(|(nt, (ds, dz))| {
                let n = nt.lambda.len();
                let mut v = (ds * dz + dz * ds) * -0.5;
                for i in 0..n {
                    v[(i, i)] += sigma * mu - nt.lambda[i] * nt.lambda[i];
                }
                jordan_div(&nt.lambda, &v)
            })
            .collect();
        let dk = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
        let dir = direction(sigma, ds_cor, dk);
        let alpha = (set.step_fraction * step(&dir)).min(1.0);
        if !(alpha > 1e-12) {
            note = format!("step length collapsed at iteration {it}");
            break;
        }

        for (a, b) in x.iter_mut().zip(&dir.dx) {
            *a += alpha * b;
        }
        for ((zb, dzb), (sb, (dsb, nt))) in z
            .iter_mut()
            .zip(&dir.dz)
            .zip(s.iter_mut().zip(dir.ds_s.iter().zip(&scal)))
        {
            *zb += dzb * alpha;
            *sb += (&nt.r * dsb * nt.r.transpose()) * alpha;
            let zs = (&*zb + zb.transpose()) * 0.5;
            *zb = zs;
            let ss = (&*sb + sb.transpose()) * 0.5;
            *sb = ss;
        }
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
        if !(tau > 0.0 && kappa > 0.0 && tau.is_finite()) {
            note = format!("homogeneous variables left the cone at iteration {it}");
            break;
        }
    }
    if let Some((score, x, it)) = best {
        let note = format!("{note}; returning iterate {it} at accuracy {score:.1e}");
        return ConicOutcome::new(ConicStatus::Optimal, x, it, note);
    }
    if best_cert.0 <= 100.0 * set.infeas_tol {
        let note = format!("{note}; Farkas ratio {:.1e} at iteration {}", best_cert.0, best_cert.1);
        return ConicOutcome::new(ConicStatus::Infeasible, Vec::new(), best_cert.1, note);
    }
    if note.is_empty() {
        note = format!(
            "iteration limit: pres {:.2e}, dres {:.2e}, relgap {:.2e}",
            last.0, last.1, last.2
        );
    }
    let mut out = ConicOutcome::new(ConicStatus::Stalled, Vec::new(), set.max_iters, note);
    out.near_optimal = near.map(|n| (n.1, n.2));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_problem(a: f64, eps: f64) -> ConicProblem {
        // find p with p >= eps and -2 a p >= eps
        ConicProblem {
            dims: vec![1, 1],
            c: vec![0.0],
            h: vec![Mat::from_element(1, 1, -eps), Mat::from_element(1, 1, -eps)],
            cols: vec![vec![
                Entry {
                    block: 0,
                    row: 0,
                    col: 0,
                    val: -1.0,
                },
                Entry {
                    block: 1,
                    row: 0,
                    col: 0,
                    val: 2.0 * a,
                },
            ]],
            accept_tol: vec![eps / 2.0, eps / 2.0],
        }
    }

    #[test]
    fn scalar_lyapunov_feasible_and_infeasible() {
        let set = ConicSettings {
            feasibility_only: true,
            ..ConicSettings::default()
        };
        let out = solve(&scalar_problem(-1.0, 1e-7), &set);
        assert_eq!(out.status, ConicStatus::Feasible);
        assert!(out.x[0] >= 0.5e-7);
        let out = solve(&scalar_problem(1.0, 1e-7), &set);
        assert_eq!(out.status, ConicStatus::Infeasible);
    }

    #[test]
    fn small_lp_optimum() {
        // minimize x1 + x2 with x1 >= 1, x2 >= 2 (diagonal blocks)
        let p = ConicProblem {
            dims: vec![1, 1],
            c: vec![1.0, 1.0],
            h: vec![Mat::from_element(1, 1, -1.0), Mat::from_element(1, 1, -2.0)],
            cols: vec![
                vec![Entry {
                    block: 0,
                    row: 0,
                    col: 0,
                    val: -1.0,
                }],
                vec![Entry {
                    block: 1,
                    row: 0,
                    col: 0,
                    val: -1.0,
                }],
            ],
            accept_tol: vec![1e-8, 1e-8],
        };
        let out = solve(&p, &ConicSettings::default());
        assert_eq!(out.status, ConicStatus::Optimal);
        assert!((out.x[0] - 1.0).abs() < 1e-7 && (out.x[1] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn max_eigenvalue_sdp() {
        // minimize t subject to t I - A >= 0, optimum lambda_max(A)
        let a = Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let p = ConicProblem {
            dims: vec![2],
            c: vec![1.0],
            h: vec![-a.clone()],
            cols: vec![vec![
                Entry {
                    block: 0,
                    row: 0,
                    col: 0,
                    val: -1.0,
                },
                Entry {
                    block: 0,
                    row: 1,
                    col: 1,
                    val: -1.0,
                },
            ]],
            accept_tol: vec![1e-8],
        };
        let out = solve(&p, &ConicSettings::default());
        assert_eq!(out.status, ConicStatus::Optimal);
        let expected = 2.5 + 1.25_f64.sqrt();
        assert!((out.x[0] - expected).abs() < 1e-7, "{} vs {expected}", out.x[0]);
    }
}
