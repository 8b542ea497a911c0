//! Structured SDP models and the solver contract.
//!
//! A problem holds matrix and scalar variables, affine matrix inequalities
//! built from products `L X R` of constant matrices with variables, linear
//! matrix equalities and a linear objective over scalar variables. Solving
//! lowers it to a standard conic problem handled by a [`ConicSolver`].

mod ipm;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::linalg::{self, spectral_norm};
use crate::{Error, Mat, Result};

/// Handle to a matrix variable of one problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatVar(usize);

/// Handle to a scalar variable of one problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarVar(usize);

/// Positivity imposed on every diagonal block of a symmetric variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    /// `X_k > 0`, encoded with the strict margin.
    Positive,
    /// `X_k >= 0`.
    NonNegative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarBound {
    Free,
    AtLeast(f64),
    /// `> 0`, encoded as `>= strict_eps`.
    Positive,
}

/// Direction of a matrix inequality `F(y) <sense> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `F < 0`, encoded as `F <= -eps I`.
    NegativeDefinite,
    NegativeSemidefinite,
    /// `F > 0`, encoded as `F >= eps I`.
    PositiveDefinite,
    PositiveSemidefinite,
}

impl Sense {
    fn strict(self) -> bool {
        matches!(self, Sense::NegativeDefinite | Sense::PositiveDefinite)
    }

    fn sign(self) -> f64 {
        match self {
            Sense::NegativeDefinite | Sense::NegativeSemidefinite => -1.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
struct VarLayout {
    name: String,
    rows: usize,
    cols: usize,
    /// unknown index per entry, row-major
    entries: Vec<Option<usize>>,
}

impl VarLayout {
    fn value(&self, y: &[f64]) -> Mat {
        Mat::from_fn(self.rows, self.cols, |r, c| {
            self.entries[r * self.cols + c].map_or(0.0, |u| y[u])
        })
    }
}

#[derive(Debug, Clone)]
struct ScalarLayout {
    name: String,
    unknown: usize,
}

#[derive(Debug, Clone, Copy)]
enum Operand {
    Matrix { var: MatVar, transposed: bool },
    Scalar(ScalarVar),
}

#[derive(Debug, Clone)]
struct Term {
    bi: usize,
    bj: usize,
    coef: f64,
    left: Option<Mat>,
    operand: Operand,
    right: Option<Mat>,
}

/// Affine matrix expression over a block partition, built term by term.
/// Dimensions are checked when the expression is added to a problem.
#[derive(Debug, Clone)]
pub struct MatrixExpr {
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    constants: Vec<(usize, usize, Mat)>,
    terms: Vec<Term>,
}

impl MatrixExpr {
    pub fn new(row_dims: &[usize], col_dims: &[usize]) -> Self {
        Self {
            row_dims: row_dims.to_vec(),
            col_dims: col_dims.to_vec(),
            constants: Vec::new(),
            terms: Vec::new(),
        }
    }

    /// Square expression with the same partition on both sides.
    pub fn square(dims: &[usize]) -> Self {
        Self::new(dims, dims)
    }

    pub fn constant(&mut self, bi: usize, bj: usize, m: &Mat) -> &mut Self {
        self.constants.push((bi, bj, m.clone()));
        self
    }

    /// Constant placed at `(bi, bj)` and, off the diagonal, its transpose at `(bj, bi)`.
    pub fn constant_sym(&mut self, bi: usize, bj: usize, m: &Mat) -> &mut Self {
        self.constants.push((bi, bj, m.clone()));
        if bi != bj {
            self.constants.push((bj, bi, m.transpose()));
        }
        self
    }

    /// Adds `coef * L X R` (or `L X^T R`) at block `(bi, bj)`. Missing
    /// `L`/`R` mean identity.
    #[allow(clippy::too_many_arguments)]
    pub fn term(
        &mut self,
        bi: usize,
        bj: usize,
        coef: f64,
        left: Option<&Mat>,
        var: MatVar,
        transposed: bool,
        right: Option<&Mat>,
    ) -> &mut Self {
        self.terms.push(Term {
            bi,
            bj,
            coef,
            left: left.cloned(),
            operand: Operand::Matrix { var, transposed },
            right: right.cloned(),
        });
        self
    }

    /// Symmetric placement of `coef * L X R`: on a diagonal block this adds
    /// `He(L X R)`, off the diagonal it also adds the transpose at `(bj, bi)`.
    pub fn term_sym(
        &mut self,
        bi: usize,
        bj: usize,
        coef: f64,
        left: Option<&Mat>,
        var: MatVar,
        right: Option<&Mat>,
    ) -> &mut Self {
        self.term(bi, bj, coef, left, var, false, right);
        let lt = left.map(|m| m.transpose());
        let rt = right.map(|m| m.transpose());
        self.term(bj, bi, coef, rt.as_ref(), var, true, lt.as_ref())
    }

    /// Same as [`MatrixExpr::term_sym`] with the variable transposed.
    pub fn term_sym_t(
        &mut self,
        bi: usize,
        bj: usize,
        coef: f64,
        left: Option<&Mat>,
        var: MatVar,
        right: Option<&Mat>,
    ) -> &mut Self {
        self.term(bi, bj, coef, left, var, true, right);
        let lt = left.map(|m| m.transpose());
        let rt = right.map(|m| m.transpose());
        self.term(bj, bi, coef, rt.as_ref(), var, false, lt.as_ref())
    }

    /// Adds `coef * s * M` at `(bi, bj)`.
    pub fn scalar(&mut self, bi: usize, bj: usize, coef: f64, s: ScalarVar, m: &Mat) -> &mut Self {
        self.terms.push(Term {
            bi,
            bj,
            coef,
            left: None,
            operand: Operand::Scalar(s),
            right: Some(m.clone()),
        });
        self
    }

    /// `coef * s * M` at `(bi, bj)` plus the transpose at `(bj, bi)` off the diagonal.
    pub fn scalar_sym(&mut self, bi: usize, bj: usize, coef: f64, s: ScalarVar, m: &Mat) -> &mut Self {
        self.scalar(bi, bj, coef, s, m);
        if bi != bj {
            self.scalar(bj, bi, coef, s, &m.transpose());
        }
        self
    }

    /// `blkdiag(left) * F * blkdiag(right)`. A `None` map keeps the block
    /// as is; a map with zero rows (columns) drops the block.
    pub fn map_blocks(&self, left: &[Option<Mat>], right: &[Option<Mat>]) -> Result<Self> {
        if left.len() != self.row_dims.len() || right.len() != self.col_dims.len() {
            return Err(Error::Dimension("block map count differs from the partition".into()));
        }
        for (i, l) in left.iter().enumerate() {
            if let Some(l) = l {
                if l.ncols() != self.row_dims[i] {
                    return Err(Error::Dimension(format!("left map {i} has {} columns", l.ncols())));
                }
            }
        }
        for (j, r) in right.iter().enumerate() {
            if let Some(r) = r {
                if r.nrows() != self.col_dims[j] {
                    return Err(Error::Dimension(format!("right map {j} has {} rows", r.nrows())));
                }
            }
        }
        let row_dims: Vec<usize> = left
            .iter()
            .zip(&self.row_dims)
            .map(|(l, &d)| l.as_ref().map_or(d, |l| l.nrows()))
            .collect();
        let col_dims: Vec<usize> = right
            .iter()
            .zip(&self.col_dims)
            .map(|(r, &d)| r.as_ref().map_or(d, |r| r.ncols()))
            .collect();
        let mismatch = || Error::Dimension("factor shape does not match the partition".into());
        let lmul = |bi: usize, m: Option<&Mat>| -> Result<Option<Mat>> {
            Ok(match (&left[bi], m) {
                (Some(l), Some(m)) if l.ncols() != m.nrows() => return Err(mismatch()),
                (Some(l), Some(m)) => Some(l * m),
                (Some(l), None) => Some(l.clone()),
                (None, m) => m.cloned(),
            })
        };
        let rmul = |bj: usize, m: Option<&Mat>| -> Result<Option<Mat>> {
            Ok(match (&right[bj], m) {
                (Some(r), Some(m)) if m.ncols() != r.nrows() => return Err(mismatch()),
                (Some(r), Some(m)) => Some(m * r),
                (Some(r), None) => Some(r.clone()),
                (None, m) => m.cloned(),
            })
        };
        let mut out = MatrixExpr::new(&row_dims, &col_dims);
        for (bi, bj, m) in &self.constants {
            if *bi < row_dims.len() && *bj < col_dims.len() && row_dims[*bi] > 0 && col_dims[*bj] > 0 {
                let m = rmul(*bj, lmul(*bi, Some(m))?.as_ref())?.expect("constant present");
                out.constants.push((*bi, *bj, m));
            }
        }
        for t in &self.terms {
            if t.bi >= row_dims.len() || t.bj >= col_dims.len() || row_dims[t.bi] == 0 || col_dims[t.bj] == 0 {
                continue;
            }
            let term = match t.operand {
                Operand::Scalar(_) => {
                    let m = rmul(t.bj, lmul(t.bi, t.right.as_ref())?.as_ref())?;
                    Term {
                        left: None,
                        right: m,
                        ..t.clone()
                    }
                }
                Operand::Matrix { .. } => Term {
                    left: lmul(t.bi, t.left.as_ref())?,
                    right: rmul(t.bj, t.right.as_ref())?,
                    ..t.clone()
                },
            };
            out.terms.push(term);
        }
        Ok(out)
    }

    /// `blkdiag(W)^T F blkdiag(W)` for a square expression.
    pub fn congruence(&self, w: &[Option<Mat>]) -> Result<Self> {
        let wt: Vec<Option<Mat>> = w.iter().map(|m| m.as_ref().map(|m| m.transpose())).collect();
        self.map_blocks(&wt, w)
    }
}

/// Expanded affine matrix: `F(y) = F0 + sum_u y_u F_u` with sparse `F_u`.
#[derive(Debug, Clone)]
struct Affine {
    rows: usize,
    cols: usize,
    constant: Mat,
    /// (unknown, row, col, value), sorted
    coeffs: Vec<(usize, usize, usize, f64)>,
}

impl Affine {
    fn value(&self, y: &[f64]) -> Mat {
        let mut out = self.constant.clone();
        for &(u, r, c, v) in &self.coeffs {
            out[(r, c)] += v * y[u];
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Lmi {
    label: String,
    sense: Sense,
    affine: Affine,
    /// Norm that scales the strict margin; the constant's norm by default.
    data_norm: Option<f64>,
}

#[derive(Debug, Clone)]
struct Equality {
    label: String,
    affine: Affine,
    symmetric: bool,
}

/// Declarative SDP.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    vars: Vec<VarLayout>,
    scalars: Vec<ScalarLayout>,
    names: BTreeSet<String>,
    unknowns: usize,
    lmis: Vec<Lmi>,
    equalities: Vec<Equality>,
    objective: Vec<(usize, f64)>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    fn claim_name(&mut self, name: &str) -> Result<()> {
        if !self.names.insert(name.to_string()) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        Ok(())
    }

    fn fresh(&mut self) -> usize {
        self.unknowns += 1;
        self.unknowns - 1
    }

    fn push_var(&mut self, name: &str, rows: usize, cols: usize, entries: Vec<Option<usize>>) -> MatVar {
        self.vars.push(VarLayout {
            name: name.to_string(),
            rows,
            cols,
            entries,
        });
        MatVar(self.vars.len() - 1)
    }

    /// Symmetric block-diagonal variable, optionally with positive blocks.
    pub fn add_sym_blocks(&mut self, name: &str, blocks: &[usize], def: Option<Definiteness>) -> Result<MatVar> {
        if blocks.contains(&0) {
            return Err(Error::Dimension(format!("variable {name} has an empty block")));
        }
        self.claim_name(name)?;
        let n: usize = blocks.iter().sum();
        let mut entries = vec![None; n * n];
        for (&off, &d) in linalg::offsets(blocks).iter().zip(blocks) {
            for i in 0..d {
                for j in i..d {
                    let u = self.fresh();
                    entries[(off + i) * n + off + j] = Some(u);
                    entries[(off + j) * n + off + i] = Some(u);
                }
            }
        }
        let var = self.push_var(name, n, n, entries);
        if let Some(def) = def {
            let sense = match def {
                Definiteness::Positive => Sense::PositiveDefinite,
                Definiteness::NonNegative => Sense::PositiveSemidefinite,
            };
            for (k, (&off, &d)) in linalg::offsets(blocks).iter().zip(blocks).enumerate() {
                let mut sel = Mat::zeros(d, n);
                for i in 0..d {
                    sel[(i, off + i)] = 1.0;
                }
                let mut e = MatrixExpr::square(&[d]);
                e.term(0, 0, 1.0, Some(&sel), var, false, Some(&sel.transpose()));
                self.add_lmi(&format!("{name}[{k}] positive"), &e, sense)?;
            }
        }
        Ok(var)
    }

    /// Full symmetric `n x n` variable.
    pub fn add_symmetric(&mut self, name: &str, n: usize, def: Option<Definiteness>) -> Result<MatVar> {
        self.add_sym_blocks(name, &[n], def)
    }

    /// General (unsymmetric) block-diagonal variable with square blocks.
    pub fn add_square_blocks(&mut self, name: &str, blocks: &[usize]) -> Result<MatVar> {
        let owner: Vec<usize> = blocks
            .iter()
            .enumerate()
            .flat_map(|(k, &d)| core::iter::repeat_n(k, d))
            .collect();
        let n = owner.len();
        self.add_masked(name, n, n, |r, c| owner[r] == owner[c])
    }

    /// General `rows x cols` variable whose entry `(r, c)` exists iff `mask(r, c)`.
    pub fn add_masked(
        &mut self,
        name: &str,
        rows: usize,
        cols: usize,
        mask: impl Fn(usize, usize) -> bool,
    ) -> Result<MatVar> {
        self.claim_name(name)?;
        let mut entries = vec![None; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                if mask(r, c) {
                    entries[r * cols + c] = Some(self.fresh());
                }
            }
        }
        Ok(self.push_var(name, rows, cols, entries))
    }

    pub fn add_scalar(&mut self, name: &str, bound: ScalarBound) -> Result<ScalarVar> {
        self.claim_name(name)?;
        let unknown = self.fresh();
        self.scalars.push(ScalarLayout {
            name: name.to_string(),
            unknown,
        });
        let s = ScalarVar(self.scalars.len() - 1);
        let one = Mat::identity(1, 1);
        match bound {
            ScalarBound::Free => {}
            ScalarBound::AtLeast(lo) => {
                let mut e = MatrixExpr::square(&[1]);
                e.scalar(0, 0, 1.0, s, &one)
                    .constant(0, 0, &Mat::from_element(1, 1, -lo));
                self.add_lmi(&format!("{name} lower bound"), &e, Sense::PositiveSemidefinite)?;
            }
            ScalarBound::Positive => {
                let mut e = MatrixExpr::square(&[1]);
                e.scalar(0, 0, 1.0, s, &one);
                self.add_lmi(&format!("{name} > 0"), &e, Sense::PositiveDefinite)?;
            }
        }
        Ok(s)
    }

    pub fn var_shape(&self, v: MatVar) -> (usize, usize) {
        let l = &self.vars[v.0];
        (l.rows, l.cols)
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns
    }

    pub fn lmi_count(&self) -> usize {
        self.lmis.len()
    }

    /// Adds `F <sense> 0`. Fails on dimension mismatch or a non-symmetric `F`.
    pub fn add_lmi(&mut self, label: &str, expr: &MatrixExpr, sense: Sense) -> Result<()> {
        self.add_lmi_scaled(label, expr, sense, None)
    }

    /// [`add_lmi`](Self::add_lmi) with the strict margin scaled by
    /// `1 + data_norm` instead of the norm of the constant part. Lifted
    /// LMIs use the data norm of the problem they came from, so that
    /// strictness means the same thing in both coordinates.
    pub fn add_lmi_scaled(
        &mut self,
        label: &str,
        expr: &MatrixExpr,
        sense: Sense,
        data_norm: Option<f64>,
    ) -> Result<()> {
        if expr.row_dims != expr.col_dims {
            return Err(Error::Dimension(format!(
                "{label}: LMI must use one partition for rows and columns"
            )));
        }
        let affine = self.expand(label, expr)?;
        let scale = 1.0 + linalg::max_abs(&affine.constant);
        if linalg::asymmetry(&affine.constant) > 1e-12 * scale {
            return Err(Error::NotSymmetric(format!("{label}: constant part")));
        }
        let mut sym: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for &(u, r, c, v) in &affine.coeffs {
            sym.insert((u, r, c), v);
        }
        for (&(u, r, c), &v) in &sym {
            let w = sym.get(&(u, c, r)).copied().unwrap_or(0.0);
            if (v - w).abs() > 1e-10 * (1.0 + v.abs().max(w.abs())) {
                return Err(Error::NotSymmetric(format!(
                    "{label}: coefficient of unknown {u} at ({r}, {c})"
                )));
            }
        }
        let affine = Affine {
            constant: linalg::symmetrize(&affine.constant),
            ..affine
        };
        self.lmis.push(Lmi {
            label: label.to_string(),
            sense,
            affine,
            data_norm,
        });
        Ok(())
    }

    /// Adds the matrix equality `F = 0`. With `symmetric`, only the upper
    /// triangle is imposed.
    pub fn add_equality(&mut self, label: &str, expr: &MatrixExpr, symmetric: bool) -> Result<()> {
        let affine = self.expand(label, expr)?;
        if symmetric && affine.rows != affine.cols {
            return Err(Error::Dimension(format!("{label}: symmetric equality must be square")));
        }
        self.equalities.push(Equality {
            label: label.to_string(),
            affine,
            symmetric,
        });
        Ok(())
    }

    /// Minimise `sum coef * s`.
    pub fn set_objective(&mut self, terms: &[(ScalarVar, f64)]) {
        self.objective = terms.iter().map(|(s, c)| (self.scalars[s.0].unknown, *c)).collect();
    }

    fn expand(&self, label: &str, expr: &MatrixExpr) -> Result<Affine> {
        let (rd, cd) = (&expr.row_dims, &expr.col_dims);
        let (ro, co) = (linalg::offsets(rd), linalg::offsets(cd));
        let (rows, cols) = (rd.iter().sum(), cd.iter().sum());
        let dim_err = |what: String| Error::Dimension(format!("{label}: {what}"));
        let check_block = |bi: usize, bj: usize| -> Result<()> {
            if bi >= rd.len() || bj >= cd.len() {
                return Err(dim_err(format!("block ({bi}, {bj}) outside the partition")));
            }
            Ok(())
        };
        let mut constant = Mat::zeros(rows, cols);
        for (bi, bj, m) in &expr.constants {
            check_block(*bi, *bj)?;
            if m.shape() != (rd[*bi], cd[*bj]) {
                return Err(dim_err(format!("constant at ({bi}, {bj}) has shape {:?}", m.shape())));
            }
            let mut view = constant.view_mut((ro[*bi], co[*bj]), m.shape());
            view += m;
        }
        let mut acc: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for t in &expr.terms {
            check_block(t.bi, t.bj)?;
            let (h, w) = (rd[t.bi], cd[t.bj]);
            match t.operand {
                Operand::Scalar(s) => {
                    let m = t.right.as_ref().expect("scalar terms carry their matrix");
                    if m.shape() != (h, w) {
                        return Err(dim_err(format!(
                            "scalar coefficient at ({}, {}) has shape {:?}",
                            t.bi,
                            t.bj,
                            m.shape()
                        )));
                    }
                    let u = self.scalars[s.0].unknown;
                    for c in 0..w {
                        for r in 0..h {
                            let v = m[(r, c)];
                            if v != 0.0 {
                                *acc.entry((u, ro[t.bi] + r, co[t.bj] + c)).or_insert(0.0) += t.coef * v;
                            }
                        }
                    }
                }
                Operand::Matrix { var, transposed } => {
                    let lay = &self.vars[var.0];
                    let (vr, vc) = if transposed {
                        (lay.cols, lay.rows)
                    } else {
                        (lay.rows, lay.cols)
                    };
                    let lcols: Vec<Vec<(usize, f64)>> = match &t.left {
                        Some(l) => {
                            if l.shape() != (h, vr) {
                                return Err(dim_err(format!(
                                    "left factor is {:?}, expected ({h}, {vr}) for {}",
                                    l.shape(),
                                    lay.name
                                )));
                            }
                            (0..vr).map(|i| nonzeros(l.column(i).iter())).collect()
                        }
                        None => {
                            if vr != h {
                                return Err(dim_err(format!("{} has {vr} rows, block has {h}", lay.name)));
                            }
                            (0..vr).map(|i| vec![(i, 1.0)]).collect()
                        }
                    };
                    let rrows: Vec<Vec<(usize, f64)>> = match &t.right {
                        Some(r) => {
                            if r.shape() != (vc, w) {
                                return Err(dim_err(format!(
                                    "right factor is {:?}, expected ({vc}, {w}) for {}",
                                    r.shape(),
                                    lay.name
                                )));
                            }
                            (0..vc).map(|j| nonzeros(r.row(j).iter())).collect()
                        }
                        None => {
                            if vc != w {
                                return Err(dim_err(format!("{} has {vc} columns, block has {w}", lay.name)));
                            }
                            (0..vc).map(|j| vec![(j, 1.0)]).collect()
                        }
                    };
                    for r in 0..lay.rows {
                        for c in 0..lay.cols {
                            let Some(u) = lay.entries[r * lay.cols + c] else {
                                continue;
                            };
                            let (i, j) = if transposed { (c, r) } else { (r, c) };
                            for &(a, lv) in &lcols[i] {
                                for &(b, rv) in &rrows[j] {
                                    *acc.entry((u, ro[t.bi] + a, co[t.bj] + b)).or_insert(0.0) += t.coef * lv * rv;
                                }
                            }
                        }
                    }
                }
            }
        }
        let coeffs = acc
            .into_iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|((u, r, c), v)| (u, r, c, v))
            .collect();
        Ok(Affine {
            rows,
            cols,
            constant,
            coeffs,
        })
    }
}

fn nonzeros<'a>(it: impl Iterator<Item = &'a f64>) -> Vec<(usize, f64)> {
    it.enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i, *v))
        .collect()
}

/// Entry of a symmetric coefficient matrix (`row <= col`; the mirror is implied).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub val: f64,
}

/// Standard form `min c^T x  s.t.  h - G x in S_+^{d_1} x ... x S_+^{d_k}`.
/// Column `u` of `G` is the symmetric block matrix listed in `cols[u]`.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub dims: Vec<usize>,
    pub c: Vec<f64>,
    pub h: Vec<Mat>,
    pub cols: Vec<Vec<Entry>>,
    /// A point is accepted when `lambda_min(h_k - (G x)_k) >= -accept_tol[k]` for every block.
    pub accept_tol: Vec<f64>,
}

impl ConicProblem {
    pub fn slack(&self, x: &[f64]) -> Vec<Mat> {
        let mut s = self.h.clone();
        for (u, col) in self.cols.iter().enumerate() {
            for e in col {
                let v = e.val * x[u];
                s[e.block][(e.row, e.col)] -= v;
                if e.row != e.col {
                    s[e.block][(e.col, e.row)] -= v;
                }
            }
        }
        s
    }

    /// Cholesky test of the shifted slack blocks.
    pub fn acceptable(&self, x: &[f64]) -> bool {
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        self.slack(x).into_iter().zip(&self.accept_tol).all(|(mut s, &tol)| {
            for i in 0..s.nrows() {
                s[(i, i)] += tol;
            }
            s.cholesky().is_some()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicStatus {
    Optimal,
    /// Accepted point of a pure feasibility problem.
    Feasible,
    Infeasible,
    Unbounded,
    Stalled,
}

#[derive(Debug, Clone)]
pub struct ConicOutcome {
    pub status: ConicStatus,
    pub x: Vec<f64>,
    pub iterations: usize,
    pub note: String,
    /// `(objective, relative gap)` of the best nearly optimal iterate of a
    /// stalled run, even if that iterate was not acceptable.
    pub near_optimal: Option<(f64, f64)>,
}

impl ConicOutcome {
    pub fn new(status: ConicStatus, x: Vec<f64>, iterations: usize, note: String) -> Self {
        Self {
            status,
            x,
            iterations,
            note,
            near_optimal: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConicSettings {
    pub max_iters: usize,
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub infeas_tol: f64,
    pub step_fraction: f64,
    /// Stop at the first accepted point instead of driving the gap down.
    pub feasibility_only: bool,
}

impl Default for ConicSettings {
    fn default() -> Self {
        Self {
            max_iters: 100,
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            infeas_tol: 1e-8,
            step_fraction: 0.99,
            feasibility_only: false,
        }
    }
}

/// Adapter contract for conic backends.
pub trait ConicSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, problem: &ConicProblem, settings: &ConicSettings) -> ConicOutcome;
}

/// Reference dense interior-point backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct InteriorPoint;

impl ConicSolver for InteriorPoint {
    fn name(&self) -> &'static str {
        "ipm"
    }

    fn solve(&self, problem: &ConicProblem, settings: &ConicSettings) -> ConicOutcome {
        ipm::solve(problem, settings)
    }
}

/// Registered backends, by id.
pub fn backend(id: &str) -> Option<Box<dyn ConicSolver>> {
    match id {
        "ipm" => Some(Box::new(InteriorPoint)),
        _ => None,
    }
}

pub const BACKENDS: &[&str] = &["ipm"];

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub feas_tol: f64,
    pub strict_eps: f64,
    pub gap_tol: f64,
    pub max_iters: usize,
    pub backend: String,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            strict_eps: 1e-7,
            gap_tol: 1e-8,
            max_iters: 100,
            backend: "ipm".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Feasible,
    Infeasible,
    NumericalFailure,
}

impl SdpStatus {
    pub fn is_solved(self) -> bool {
        matches!(self, SdpStatus::Optimal | SdpStatus::Feasible)
    }
}

/// Residual of one inequality at the returned point.
#[derive(Debug, Clone)]
pub struct LmiResidual {
    pub label: String,
    /// Margin required by the encoding (`eps` for strict, 0 otherwise).
    pub margin: f64,
    /// `lambda_min(sign * F)`: positive means the inequality holds strictly.
    pub slack: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Residuals {
    /// Largest violation of a non-strict inequality or of a strict one
    /// with zero margin.
    pub max_violation: f64,
    /// Smallest `slack` over all inequalities.
    pub min_slack: f64,
    pub equality: f64,
    pub per_lmi: Vec<LmiResidual>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub objective: Option<f64>,
    pub iterations: usize,
    pub residuals: Residuals,
    pub diagnostics: String,
    values: Vec<f64>,
    layouts: Vec<VarLayout>,
    scalars: Vec<ScalarLayout>,
}

impl SdpSolution {
    /// Value of a matrix variable (zeros when unsolved).
    pub fn matrix(&self, v: MatVar) -> Mat {
        self.layouts[v.0].value(&self.values)
    }

    pub fn scalar(&self, s: ScalarVar) -> f64 {
        self.values.get(self.scalars[s.0].unknown).copied().unwrap_or(0.0)
    }

    /// `(name, value)` of every matrix variable.
    pub fn named_matrices(&self) -> Vec<(String, Mat)> {
        self.layouts
            .iter()
            .map(|l| (l.name.clone(), l.value(&self.values)))
            .collect()
    }

    /// `(name, value)` of every scalar variable.
    pub fn named_scalars(&self) -> Vec<(String, f64)> {
        self.scalars
            .iter()
            .map(|s| (s.name.clone(), self.values.get(s.unknown).copied().unwrap_or(0.0)))
            .collect()
    }
}

/// Solves with the backend named in the config.
pub fn solve(problem: &SdpProblem, config: &SolverConfig) -> SdpSolution {
    match backend(&config.backend) {
        Some(b) => solve_with(problem, config, b.as_ref()),
        None => failed(problem, format!("unknown backend `{}`", config.backend)),
    }
}

fn failed(problem: &SdpProblem, diagnostics: String) -> SdpSolution {
    SdpSolution {
        status: SdpStatus::NumericalFailure,
        objective: None,
        iterations: 0,
        residuals: Residuals::default(),
        diagnostics,
        values: vec![0.0; problem.unknowns],
        layouts: problem.vars.clone(),
        scalars: problem.scalars.clone(),
    }
}

struct Lowered {
    conic: ConicProblem,
    /// `y = offset + basis * t` (basis `None` means identity)
    offset: Vec<f64>,
    basis: Option<Mat>,
    /// conic column -> reduced unknown
    kept: Vec<usize>,
    reduced: usize,
}

fn margins(problem: &SdpProblem, config: &SolverConfig) -> Vec<f64> {
    problem
        .lmis
        .iter()
        .map(|l| {
            if l.sense.strict() {
                config.strict_eps * (1.0 + l.data_norm.unwrap_or_else(|| spectral_norm(&l.affine.constant)))
            } else {
                0.0
            }
        })
        .collect()
}

fn lower(problem: &SdpProblem, config: &SolverConfig, eps: &[f64]) -> core::result::Result<Lowered, SdpStatus> {
    let n = problem.unknowns;
    // equality presolve: y = y0 + N t
    let rows: Vec<(Vec<(usize, f64)>, f64)> = problem.equalities.iter().flat_map(equality_rows).collect();
    let (offset, basis) = if rows.is_empty() {
        (vec![0.0; n], None)
    } else {
        let mut a = Mat::zeros(rows.len(), n);
        let mut b = DVector::zeros(rows.len());
        for (i, (coef, rhs)) in rows.iter().enumerate() {
            for &(u, v) in coef {
                a[(i, u)] += v;
            }
            b[i] = *rhs;
        }
        let y0 = linalg::lstsq(&a, &b, 1e-10);
        let res = (&a * &y0 - &b).amax();
        if res > 1e-9 * (1.0 + b.amax()) {
            return Err(SdpStatus::Infeasible);
        }
        (y0.iter().copied().collect(), Some(linalg::null_space(&a, 1e-10)))
    };
    let reduced = basis.as_ref().map_or(n, |b| b.ncols());

    let mut dims = Vec::new();
    let mut h = Vec::new();
    let mut accept = Vec::new();
    // per reduced unknown: entries
    let mut cols: Vec<BTreeMap<(usize, usize, usize), f64>> = vec![BTreeMap::new(); reduced];
    for (k, (lmi, &e)) in problem.lmis.iter().zip(eps).enumerate() {
        let sign = lmi.sense.sign();
        let d = lmi.affine.rows;
        // s = sign F(y) - e I = h - G y
        let mut hk = lmi.affine.constant.clone() * sign;
        for &(u, r, c, v) in &lmi.affine.coeffs {
            hk[(r, c)] += sign * v * offset[u];
        }
        for i in 0..d {
            hk[(i, i)] -= e;
        }
        for &(u, r, c, v) in &lmi.affine.coeffs {
            if r > c {
                continue;
            }
            let g = -sign * v;
            match &basis {
                None => *cols[u].entry((k, r, c)).or_insert(0.0) += g,
                Some(nb) => {
                    for t in 0..reduced {
                        let w = nb[(u, t)];
                        if w != 0.0 {
                            *cols[t].entry((k, r, c)).or_insert(0.0) += g * w;
                        }
                    }
                }
            }
        }
        let tol = if lmi.sense.strict() {
            e / 2.0
        } else {
            config.feas_tol * spectral_norm(&lmi.affine.constant).max(1.0)
        };
        dims.push(d);
        h.push(hk);
        accept.push(tol);
    }
    let mut cvec = vec![0.0; reduced];
    for &(u, v) in &problem.objective {
        match &basis {
            None => cvec[u] += v,
            Some(nb) => {
                for t in 0..reduced {
                    cvec[t] += v * nb[(u, t)];
                }
            }
        }
    }
    let mut kept = Vec::new();
    let mut conic_cols = Vec::new();
    let mut c = Vec::new();
    let col_max = |col: &BTreeMap<(usize, usize, usize), f64>| col.values().fold(0.0_f64, |a, v| a.max(v.abs()));
    // columns at rounding level of the largest one are directions the
    // cone cannot see; keeping them lets the solver run off along them
    let floor = 1e-12 * cols.iter().map(col_max).fold(0.0, f64::max);
    let cmax = cvec.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    for (t, col) in cols.into_iter().enumerate() {
        let big = col_max(&col);
        if big <= floor {
            if cvec[t].abs() > 1e-12 * cmax {
                return Err(SdpStatus::NumericalFailure);
            }
            continue;
        }
        let entries: Vec<Entry> = col
            .into_iter()
            .filter(|(_, v)| v.abs() > 1e-14 * big)
            .map(|((block, row, col), val)| Entry { block, row, col, val })
            .collect();
        if entries.is_empty() {
            if cvec[t] != 0.0 {
                return Err(SdpStatus::NumericalFailure);
            }
            continue;
        }
        kept.push(t);
        conic_cols.push(entries);
        c.push(cvec[t]);
    }
    Ok(Lowered {
        conic: ConicProblem {
            dims,
            c,
            h,
            cols: conic_cols,
            accept_tol: accept,
        },
        offset,
        basis,
        kept,
        reduced,
    })
}

fn equality_rows(eq: &Equality) -> Vec<(Vec<(usize, f64)>, f64)> {
    let a = &eq.affine;
    let mut rows: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for &(u, r, c, v) in &a.coeffs {
        let key = if eq.symmetric { (r.min(c), r.max(c)) } else { (r, c) };
        if eq.symmetric && r > c {
            continue;
        }
        rows.entry(key).or_default().push((u, v));
    }
    let mut out = Vec::new();
    for r in 0..a.rows {
        for c in 0..a.cols {
            if eq.symmetric && r > c {
                continue;
            }
            let coef = rows.remove(&(r, c)).unwrap_or_default();
            let k = a.constant[(r, c)];
            if coef.is_empty() && k == 0.0 {
                continue;
            }
            out.push((coef, -k));
        }
    }
    out
}

/// Lowers, solves with `backend`, maps back and re-verifies every constraint
/// with dense eigenvalues.
pub fn solve_with(problem: &SdpProblem, config: &SolverConfig, backend: &dyn ConicSolver) -> SdpSolution {
    let eps = margins(problem, config);
    let mut sol = failed(problem, String::new());
    let lowered = match lower(problem, config, &eps) {
        Ok(l) => l,
        Err(SdpStatus::Infeasible) => {
            sol.status = SdpStatus::Infeasible;
            sol.diagnostics = "linear equalities are inconsistent".into();
            return sol;
        }
        Err(_) => {
            sol.diagnostics = "objective unbounded along an unconstrained direction".into();
            return sol;
        }
    };
    let settings = ConicSettings {
        max_iters: config.max_iters,
        feas_tol: config.feas_tol,
        gap_tol: config.gap_tol,
        infeas_tol: config.feas_tol,
        step_fraction: 0.99,
        feasibility_only: problem.objective.iter().all(|(_, c)| *c == 0.0),
    };
    let out = if lowered.conic.c.is_empty() {
        // nothing left to choose: the offset point decides
        let ok = lowered.conic.acceptable(&[]);
        let status = if ok {
            ConicStatus::Feasible
        } else {
            ConicStatus::Infeasible
        };
        ConicOutcome::new(status, Vec::new(), 0, String::new())
    } else {
        let out = backend.solve(&lowered.conic, &settings);
        match (out.status, out.near_optimal) {
            (ConicStatus::Stalled, Some(b)) => restore(&lowered.conic, &settings, backend, b, out),
            _ => out,
        }
    };
    sol.iterations = out.iterations;
    sol.diagnostics = format!("{}: {}", backend.name(), out.note);
    match out.status {
        ConicStatus::Infeasible => {
            sol.status = SdpStatus::Infeasible;
            return sol;
        }
        ConicStatus::Unbounded | ConicStatus::Stalled => return sol,
        ConicStatus::Optimal | ConicStatus::Feasible => {}
    }
    let mut t = vec![0.0; lowered.reduced];
    for (i, &k) in lowered.kept.iter().enumerate() {
        t[k] = out.x[i];
    }
    let y: Vec<f64> = match &lowered.basis {
        None => t.iter().zip(&lowered.offset).map(|(a, b)| a + b).collect(),
        Some(nb) => {
            let tv = DVector::from_vec(t);
            let y = nb * tv;
            y.iter().zip(&lowered.offset).map(|(a, b)| a + b).collect()
        }
    };
    sol.values = y;
    let (ok, residuals, why) = check_point(problem, config, &eps, &sol.values);
    sol.residuals = residuals;
    if !ok {
        sol.diagnostics = format!("{}; rejected on re-verification: {why}", sol.diagnostics);
        return sol;
    }
    sol.status = if out.status == ConicStatus::Optimal {
        SdpStatus::Optimal
    } else {
        SdpStatus::Feasible
    };
    sol.objective = Some(problem.objective.iter().map(|&(u, c)| c * sol.values[u]).sum());
    sol
}

/// Narrowest relative objective slack granted to [`restore`].
const RESTORE_RTOL: f64 = 1e-7;
/// Widest cut tried before giving up.
const RESTORE_MAX_RTOL: f64 = 1e-3;
const RESTORE_BISECTIONS: usize = 4;

/// Second phase for an optimisation that stalled next to its optimum `b`
/// (known to relative accuracy `gap`): find an acceptable point with
/// `c^T x <= b + w max(|b|, 1)`. `w` starts at `RESTORE_RTOL` and grows
/// tenfold until the cut problem is solved, then a few geometric bisection
/// steps pull it back towards the optimum. The cut leaves room around the
/// optimal face, which is what the first phase could not resolve.
fn restore(
    conic: &ConicProblem,
    settings: &ConicSettings,
    backend: &dyn ConicSolver,
    (b, gap): (f64, f64),
    first: ConicOutcome,
) -> ConicOutcome {
    let phase2 = ConicSettings {
        feasibility_only: true,
        ..*settings
    };
    let scale = b.abs().max(1.0);
    let mut spent = first.iterations;
    let mut attempt = |w: f64| {
        let mut cut = conic.clone();
        let block = cut.dims.len();
        cut.dims.push(1);
        cut.h.push(Mat::from_element(1, 1, b + w * scale));
        cut.accept_tol.push(0.0);
        for (col, &c) in cut.cols.iter_mut().zip(&conic.c) {
            if c != 0.0 {
                col.push(Entry {
                    block,
                    row: 0,
                    col: 0,
                    val: c,
                });
            }
        }
        cut.c = vec![0.0; conic.c.len()];
        let out = backend.solve(&cut, &phase2);
        spent += out.iterations;
        (out.status == ConicStatus::Feasible).then_some(out.x)
    };
    // the recorded objective comes from a slightly infeasible iterate, so
    // the cut is widened until the restricted problem becomes feasible
    let mut widths = vec![RESTORE_RTOL];
    let mut w = RESTORE_RTOL.max(2.0 * gap);
    while w <= RESTORE_MAX_RTOL {
        if w > widths[widths.len() - 1] {
            widths.push(w);
        }
        w *= 10.0;
    }
    let mut lo = 0.0;
    let mut found = None;
    for w in widths {
        match attempt(w) {
            Some(x) => {
                found = Some((w, x));
                break;
            }
            None => lo = w,
        }
    }
    let Some((mut hi, mut x)) = found else {
        return first;
    };
    // tighten a wide cut: the optimum lies somewhere in (lo, hi]
    if lo > 0.0 {
        for _ in 0..RESTORE_BISECTIONS {
            let mid = linalg::sqrt(lo * hi);
            match attempt(mid) {
                Some(xm) => {
                    hi = mid;
                    x = xm;
                }
                None => lo = mid,
            }
        }
    }
    let note = format!("objective cut at {b:.6e} (+{hi:.1e}) after: {}", first.note);
    ConicOutcome::new(ConicStatus::Feasible, x, spent, note)
}

fn check_point(problem: &SdpProblem, config: &SolverConfig, eps: &[f64], y: &[f64]) -> (bool, Residuals, String) {
    let mut res = Residuals {
        min_slack: f64::INFINITY,
        ..Residuals::default()
    };
    let mut why = String::new();
    for (lmi, &e) in problem.lmis.iter().zip(eps) {
        let f = lmi.affine.value(y) * lmi.sense.sign();
        let slack = linalg::lambda_min(&f);
        let norm0 = spectral_norm(&lmi.affine.constant).max(1.0);
        let (pass, violation) = if lmi.sense.strict() {
            (slack >= e / 2.0, (-slack).max(0.0))
        } else {
            let tol = config.feas_tol * norm0;
            (slack >= -tol, (-slack).max(0.0))
        };
        if !pass && why.is_empty() {
            why = format!("`{}` slack {slack:.3e}", lmi.label);
        }
        res.max_violation = res.max_violation.max(violation);
        res.min_slack = res.min_slack.min(slack);
        res.per_lmi.push(LmiResidual {
            label: lmi.label.clone(),
            margin: e,
            slack,
        });
    }
    for eq in &problem.equalities {
        let v = eq.affine.value(y);
        let scale = 1.0 + linalg::max_abs(&eq.affine.constant);
        let r = linalg::max_abs(&v);
        res.equality = res.equality.max(r);
        if r > 1e-8 * scale && why.is_empty() {
            why = format!("equality `{}` residual {r:.3e}", eq.label);
        }
    }
    (why.is_empty(), res, why)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_lyapunov() {
        for (a, want) in [(-1.0, SdpStatus::Feasible), (1.0, SdpStatus::Infeasible)] {
            let mut p = SdpProblem::new();
            let x = p.add_symmetric("p", 1, Some(Definiteness::Positive)).unwrap();
            let mut e = MatrixExpr::square(&[1]);
            e.term_sym(0, 0, 1.0, Some(&Mat::from_element(1, 1, a)), x, None);
            p.add_lmi("lyap", &e, Sense::NegativeDefinite).unwrap();
            let sol = solve(&p, &SolverConfig::default());
            assert_eq!(sol.status, want, "{}", sol.diagnostics);
            if want == SdpStatus::Feasible {
                assert!(sol.matrix(x)[(0, 0)] >= 0.5e-7);
                assert!(sol.residuals.max_violation <= 1e-8);
            }
        }
    }

    #[test]
    fn duplicate_names_and_bad_dims() {
        let mut p = SdpProblem::new();
        p.add_symmetric("q", 2, None).unwrap();
        assert!(matches!(p.add_symmetric("q", 2, None), Err(Error::DuplicateName(_))));
        let z = p.add_masked("z", 2, 3, |_, _| true).unwrap();
        let mut e = MatrixExpr::square(&[2]);
        e.term(0, 0, 1.0, None, z, false, None);
        assert!(matches!(
            p.add_lmi("bad", &e, Sense::NegativeDefinite),
            Err(Error::Dimension(_))
        ));
        let mut e = MatrixExpr::square(&[2]);
        e.term(
            0,
            0,
            1.0,
            None,
            z,
            false,
            Some(&Mat::from_row_slice(3, 2, &[1., 0., 0., 0., 0., 0.])),
        );
        assert!(matches!(
            p.add_lmi("asym", &e, Sense::NegativeDefinite),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn minimise_gamma_scalar_bounded_real() {
        // G(s) = 1/(s+1): [[-2p, p, 1], [p, -g, 0], [1, 0, -g]] < 0, min g = 1
        let mut p = SdpProblem::new();
        let x = p.add_symmetric("p", 1, Some(Definiteness::Positive)).unwrap();
        let g = p.add_scalar("gamma", ScalarBound::Free).unwrap();
        let one = Mat::identity(1, 1);
        let mut e = MatrixExpr::square(&[1, 1, 1]);
        e.term_sym(0, 0, -1.0, None, x, None)
            .term_sym(0, 1, 1.0, None, x, None)
            .constant_sym(0, 2, &one)
            .scalar(1, 1, -1.0, g, &one)
            .scalar(2, 2, -1.0, g, &one);
        p.add_lmi("brl", &e, Sense::NegativeDefinite).unwrap();
        p.set_objective(&[(g, 1.0)]);
        let sol = solve(&p, &SolverConfig::default());
        assert_eq!(sol.status, SdpStatus::Optimal, "{}", sol.diagnostics);
        let gamma = sol.scalar(g);
        assert!((gamma - 1.0).abs() < 1e-5, "gamma {gamma}");
    }

    #[test]
    fn equality_presolve() {
        // x symmetric 2x2 positive with x11 = 2 x22 and x12 = 0.3, min trace via t >= x11 + x22
        let mut p = SdpProblem::new();
        let x = p.add_symmetric("x", 2, Some(Definiteness::Positive)).unwrap();
        let mut eq = MatrixExpr::square(&[2]);
        let w = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        eq.term(0, 0, 1.0, Some(&w), x, false, Some(&w));
        let mut eq2 = MatrixExpr::new(&[1], &[1]);
        let r1 = Mat::from_row_slice(1, 2, &[1.0, 0.0]);
        let r2 = Mat::from_row_slice(1, 2, &[0.0, 1.0]);
        eq2.term(0, 0, 1.0, Some(&r1), x, false, Some(&r1.transpose())).term(
            0,
            0,
            -2.0,
            Some(&r2),
            x,
            false,
            Some(&r2.transpose()),
        );
        p.add_equality("ratio", &eq2, false).unwrap();
        let mut eq3 = MatrixExpr::new(&[1], &[1]);
        eq3.term(0, 0, 1.0, Some(&r1), x, false, Some(&r2.transpose()))
            .constant(0, 0, &Mat::from_element(1, 1, -0.3));
        p.add_equality("offdiag", &eq3, false).unwrap();
        let _ = eq;
        let t = p.add_scalar("t", ScalarBound::Free).unwrap();
        let mut tr = MatrixExpr::square(&[1]);
        tr.scalar(0, 0, 1.0, t, &Mat::identity(1, 1))
            .term(0, 0, -1.0, Some(&r1), x, false, Some(&r1.transpose()))
            .term(0, 0, -1.0, Some(&r2), x, false, Some(&r2.transpose()));
        p.add_lmi("t >= tr x", &tr, Sense::PositiveSemidefinite).unwrap();
        p.set_objective(&[(t, 1.0)]);
        let sol = solve(&p, &SolverConfig::default());
        assert_eq!(sol.status, SdpStatus::Optimal, "{}", sol.diagnostics);
        let xv = sol.matrix(x);
        // x = [[2a, .3], [.3, a]] > 0 needs 2a^2 > 0.09, so a -> 0.3/sqrt 2
        let a = xv[(1, 1)];
        assert!((xv[(0, 0)] - 2.0 * a).abs() < 1e-9);
        assert!((xv[(0, 1)] - 0.3).abs() < 1e-9);
        assert!((a - 0.3 / 2f64.sqrt()).abs() < 1e-4, "a = {a}");
        assert!(sol.residuals.equality < 1e-9);
    }
}
