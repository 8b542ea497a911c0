//! Distributed controller synthesis and sparse-certificate analysis.
//!
//! Every `synth_*` entry point builds one SDP, solves it, recovers the gain
//! in the coordinates of the plant it was given and runs
//! [`verify::certify`] before reporting success. Gains are `m x n` for state
//! feedback and `m x p` for output feedback.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::graph::{self, CliqueSet, Graph};
use crate::lifting::{self, BlockPartition, Lifting, PaddedPlant, Plant, SparsityPattern};
use crate::linalg::{self, lambda_min, sqrt};
use crate::sdp::{
    self, Definiteness, MatVar, MatrixExpr, ScalarBound, ScalarVar, SdpProblem, SdpSolution, SdpStatus, Sense,
    SolverConfig,
};
use crate::verify::{self, VerificationReport};
use crate::{Error, Mat, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    BlockDiag,
    Proposed1,
    Proposed2,
    Proposed3,
    Extended {
        alpha: f64,
    },
    Combined {
        alpha: f64,
    },
    OutputFeedback,
    /// Dense `Q` and `Z`: the unstructured baseline.
    Centralized,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::BlockDiag => "bd",
            Method::Proposed1 => "p1",
            Method::Proposed2 => "p2",
            Method::Proposed3 => "p3",
            Method::Extended { .. } => "ext",
            Method::Combined { .. } => "comb",
            Method::OutputFeedback => "ofb",
            Method::Centralized => "cen",
        }
    }

    /// Whether a solved SDP implies a stabilizing gain.
    pub fn guaranteed(&self) -> bool {
        !matches!(self, Method::Proposed3)
    }

    /// Parses a label; `alpha` is used by `ext` and `comb`.
    pub fn parse(label: &str, alpha: f64) -> Option<Self> {
        Some(match label {
            "bd" => Method::BlockDiag,
            "p1" => Method::Proposed1,
            "p2" => Method::Proposed2,
            "p3" => Method::Proposed3,
            "ext" => Method::Extended { alpha },
            "comb" => Method::Combined { alpha },
            "ofb" => Method::OutputFeedback,
            "cen" => Method::Centralized,
            _ => return None,
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::parse(s, 1.0).ok_or_else(|| Error::Invalid(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Stabilize,
    HinfFixed(f64),
    HinfMinimize,
}

impl ProblemKind {
    pub fn is_hinf(&self) -> bool {
        !matches!(self, ProblemKind::Stabilize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthStatus {
    Optimal,
    Feasible,
    Infeasible,
    NumericalFailure,
    /// The SDP was solved but the gain does not stabilize the plant.
    PosthocUnstable,
}

impl SynthStatus {
    pub fn is_success(self) -> bool {
        matches!(self, SynthStatus::Optimal | SynthStatus::Feasible)
    }

    pub fn label(self) -> &'static str {
        match self {
            SynthStatus::Optimal => "optimal",
            SynthStatus::Feasible => "feasible",
            SynthStatus::Infeasible => "infeasible",
            SynthStatus::NumericalFailure => "numerical_failure",
            SynthStatus::PosthocUnstable => "posthoc_unstable",
        }
    }
}

/// Outcome of a sparse-certificate analysis LMI.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisOutcome {
    /// `P = E^T P~ E`, scaled to `lambda_min(P) = 1`.
    Certified(Mat),
    /// `conclusive` is set when the clique set is the maximal-clique set of
    /// a chordal graph, where infeasibility rules out any certificate in `S`.
    Infeasible {
        conclusive: bool,
    },
    NumericalFailure(String),
}

#[derive(Debug, Clone)]
pub struct SdpSummary {
    pub status: SdpStatus,
    pub iterations: usize,
    pub objective: Option<f64>,
    pub max_violation: f64,
    pub min_slack: f64,
    pub equality_residual: f64,
    pub unknowns: usize,
    pub diagnostics: String,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub method: Method,
    pub kind: ProblemKind,
    pub status: SynthStatus,
    /// Gain in the plant's own input coordinates.
    pub k: Option<Mat>,
    /// Lyapunov certificate, scaled to `lambda_min(P) = 1`.
    pub p: Option<Mat>,
    /// H-infinity bound: the SDP level, or the computed closed-loop norm
    /// for methods without a guarantee.
    pub gamma: Option<f64>,
    /// Raw SDP variables by name.
    pub variables: Vec<(String, Mat)>,
    pub scalars: Vec<(String, f64)>,
    pub pattern: SparsityPattern,
    /// `C` for output feedback, so that the closed loop is `A + B K C`.
    pub output_map: Option<Mat>,
    pub sdp: Option<SdpSummary>,
    pub report: Option<VerificationReport>,
    /// Post-hoc sparse certificate search for methods without a guarantee.
    pub posthoc: Option<AnalysisOutcome>,
    /// One report per vertex for polytopic designs.
    pub vertex_reports: Vec<VerificationReport>,
    pub notes: Vec<String>,
}

impl SynthesisResult {
    fn empty(method: Method, kind: ProblemKind, pattern: SparsityPattern) -> Self {
        Self {
            method,
            kind,
            status: SynthStatus::NumericalFailure,
            k: None,
            p: None,
            gamma: None,
            variables: Vec::new(),
            scalars: Vec::new(),
            pattern,
            output_map: None,
            sdp: None,
            report: None,
            posthoc: None,
            vertex_reports: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn requires_posthoc_verification(&self) -> bool {
        !self.method.guaranteed()
    }
}

/// `gamma` as a constant or as the minimised variable.
#[derive(Debug, Clone, Copy)]
enum Gamma {
    Fixed(f64),
    Var(ScalarVar),
}

struct Perf<'a> {
    bw: &'a Mat,
    c: &'a Mat,
    d: &'a Mat,
    dw: &'a Mat,
}

/// Bounded-real block
/// `[He(A Q + B Z R) + rho M, Bw, (C Q + D Z R)^T; ., -g I, Dw^T; ., ., -g I]`
/// (only the first block when `perf` is absent). `R` defaults to identity.
#[allow(clippy::too_many_arguments)]
fn closed_loop_block(
    a: &Mat,
    b: &Mat,
    q: MatVar,
    z: MatVar,
    z_right: Option<&Mat>,
    rho: Option<(ScalarVar, &Mat)>,
    perf: Option<&Perf<'_>>,
    gamma: Option<Gamma>,
) -> MatrixExpr {
    let n = a.nrows();
    let mut e = match perf {
        Some(p) => MatrixExpr::square(&[n, p.bw.ncols(), p.c.nrows()]),
        None => MatrixExpr::square(&[n]),
    };
    e.term_sym(0, 0, 1.0, Some(a), q, None);
    e.term_sym(0, 0, 1.0, Some(b), z, z_right);
    if let Some((s, m)) = rho {
        e.scalar(0, 0, 1.0, s, m);
    }
    if let Some(p) = perf {
        let (nw, nz) = (p.bw.ncols(), p.c.nrows());
        e.constant_sym(0, 1, p.bw);
        e.term_sym(2, 0, 1.0, Some(p.c), q, None);
        e.term_sym(2, 0, 1.0, Some(p.d), z, z_right);
        e.constant_sym(2, 1, p.dw);
        match gamma.expect("bounded-real block needs gamma") {
            Gamma::Fixed(g) => {
                e.constant(1, 1, &(-Mat::identity(nw, nw) * g));
                e.constant(2, 2, &(-Mat::identity(nz, nz) * g));
            }
            Gamma::Var(s) => {
                e.scalar(1, 1, -1.0, s, &Mat::identity(nw, nw));
                e.scalar(2, 2, -1.0, s, &Mat::identity(nz, nz));
            }
        }
    }
    e
}

/// Orthonormal bases of `Im E` and of its complement `Im M`.
fn lifted_bases(l: &Lifting) -> (Mat, Mat) {
    let mut v = l.e.clone();
    for (j, g) in l.gram.iter().enumerate() {
        v.column_mut(j).scale_mut(1.0 / sqrt(*g));
    }
    let u = linalg::null_space(&l.e.transpose(), 1e-10);
    (v, u)
}

/// `X~ M + M X~^T >= eta M` for a clique-block-diagonal `X~` (symmetric
/// or not). Any feasible `X~` maps `Im E` into itself, so the constraint is
/// imposed as `U^T X~ E = 0` plus `U^T (X~ + X~^T) U >= eta I` with `U` an
/// orthonormal basis of `Im M`. Returns `eta` unless `M = 0`.
fn add_eta_constraint(prob: &mut SdpProblem, x: MatVar, l: &Lifting, u: &Mat) -> Result<Option<ScalarVar>> {
    let r = u.ncols();
    if r == 0 {
        return Ok(None);
    }
    let (nl, n) = l.e.shape();
    let ut = u.transpose();
    let mut inv = MatrixExpr::new(&[r], &[n]);
    inv.term(0, 0, 1.0, Some(&ut), x, false, Some(&l.e));
    prob.add_equality("Im E invariance", &inv, false)?;
    let eta = prob.add_scalar("eta", ScalarBound::Positive)?;
    let mut e = MatrixExpr::square(&[r]);
    e.term_sym(0, 0, 1.0, Some(&ut), x, Some(u));
    e.scalar(0, 0, -1.0, eta, &Mat::identity(r, r));
    prob.add_lmi("eta", &e, Sense::PositiveSemidefinite)?;
    debug_assert_eq!(nl, u.nrows());
    Ok(Some(eta))
}

/// `F < 0` for an expression whose first diagonal block has an identically
/// zero quadratic form on `Im M`. `F` can only be negative semidefinite
/// there, so the rows of `F` along `Im M` are pinned to zero and the strict
/// inequality is imposed on `blkdiag(V, I, ..)^T F blkdiag(V, I, ..)`.
fn add_on_face(
    prob: &mut SdpProblem,
    label: &str,
    expr: &MatrixExpr,
    dims: &[usize],
    (v, u): (&Mat, &Mat),
    data_norm: Option<f64>,
) -> Result<()> {
    if u.ncols() == 0 {
        return prob.add_lmi_scaled(label, expr, Sense::NegativeDefinite, data_norm);
    }
    let mut right: Vec<Option<Mat>> = vec![Some(u.clone())];
    right.extend(dims[1..].iter().map(|&d| Some(Mat::zeros(d, 0))));
    let left: Vec<Option<Mat>> = vec![None; dims.len()];
    let pinned = expr.map_blocks(&left, &right)?;
    prob.add_equality(&format!("{label} on Im M"), &pinned, false)?;
    let mut w: Vec<Option<Mat>> = vec![Some(v.clone())];
    w.extend(dims[1..].iter().map(|_| None));
    prob.add_lmi_scaled(label, &expr.congruence(&w)?, Sense::NegativeDefinite, data_norm)
}

/// Norm of the constant part `[0, Bw, 0; Bw^T, 0, Dw^T; 0, Dw, 0]` of the
/// unlifted bounded-real block.
fn bounded_real_data_norm(perf: &lifting::PerformanceData) -> f64 {
    let (n, nw, nz) = (perf.bw.nrows(), perf.bw.ncols(), perf.c.nrows());
    let mut f = Mat::zeros(n + nw + nz, n + nw + nz);
    f.view_mut((0, n), (n, nw)).copy_from(&perf.bw);
    f.view_mut((n, 0), (nw, n)).copy_from(&perf.bw.transpose());
    f.view_mut((n + nw, n), (nz, nw)).copy_from(&perf.dw);
    f.view_mut((n, n + nw), (nw, nz)).copy_from(&perf.dw.transpose());
    linalg::spectral_norm(&f)
}

fn summarize(prob: &SdpProblem, sol: &SdpSolution) -> SdpSummary {
    SdpSummary {
        status: sol.status,
        iterations: sol.iterations,
        objective: sol.objective,
        max_violation: sol.residuals.max_violation,
        min_slack: sol.residuals.min_slack,
        equality_residual: sol.residuals.equality,
        unknowns: prob.unknown_count(),
        diagnostics: sol.diagnostics.clone(),
    }
}

fn normalize_certificate(p: Mat) -> Mat {
    let p = linalg::symmetrize(&p);
    let lo = lambda_min(&p);
    if lo > 0.0 {
        p / lo
    } else {
        p
    }
}

fn require_perf(plant: &Plant, kind: ProblemKind) -> Result<Option<lifting::PerformanceData>> {
    if let ProblemKind::HinfFixed(g) = kind {
        if !(g > 0.0) {
            return Err(Error::Invalid(format!("gamma must be positive, got {g}")));
        }
    }
    if !kind.is_hinf() {
        return Ok(None);
    }
    plant
        .performance()
        .map(Some)
        .ok_or_else(|| Error::Invalid("H-infinity problems need Bw and C".into()))
}

fn add_gamma(prob: &mut SdpProblem, kind: ProblemKind) -> Result<Option<Gamma>> {
    Ok(match kind {
        ProblemKind::Stabilize => None,
        ProblemKind::HinfFixed(g) => Some(Gamma::Fixed(g)),
        ProblemKind::HinfMinimize => {
            let g = prob.add_scalar("gamma", ScalarBound::Positive)?;
            prob.set_objective(&[(g, 1.0)]);
            Some(Gamma::Var(g))
        }
    })
}

fn gamma_value(gamma: Option<Gamma>, sol: &SdpSolution) -> Option<f64> {
    gamma.map(|g| match g {
        Gamma::Fixed(v) => v,
        Gamma::Var(s) => sol.scalar(s),
    })
}

/// Gain and certificate in the solver's coordinates.
struct Recovered {
    k: Mat,
    p: Option<Mat>,
}

/// Shared tail of every synthesis: status mapping, recovery, verification.
#[allow(clippy::too_many_arguments)]
fn finish(
    plant: &Plant,
    padded: Option<&PaddedPlant>,
    mut result: SynthesisResult,
    prob: &SdpProblem,
    sol: &SdpSolution,
    gamma: Option<Gamma>,
    cliques: Option<&CliqueSet>,
    config: &SolverConfig,
    recover: impl FnOnce(&SdpSolution) -> Result<Recovered>,
) -> Result<SynthesisResult> {
    result.sdp = Some(summarize(prob, sol));
    match sol.status {
        SdpStatus::Infeasible => {
            result.status = SynthStatus::Infeasible;
            return Ok(result);
        }
        SdpStatus::NumericalFailure => {
            result.status = SynthStatus::NumericalFailure;
            result.notes.push(sol.diagnostics.clone());
            return Ok(result);
        }
        SdpStatus::Optimal | SdpStatus::Feasible => {}
    }
    result.variables = sol.named_matrices();
    result.scalars = sol.named_scalars();
    let rec = match recover(sol) {
        Ok(r) => r,
        Err(e) => {
            result.status = SynthStatus::NumericalFailure;
            result.notes.push(format!("recovery failed: {e}"));
            return Ok(result);
        }
    };
    result.k = Some(match padded {
        Some(pp) if result.output_map.is_none() => pp.original_gain(&rec.k),
        Some(pp) => &pp.input_map * &rec.k,
        None => rec.k,
    });
    result.p = rec.p.map(normalize_certificate);
    result.gamma = gamma_value(gamma, sol);
    let sdp_status = if sol.status == SdpStatus::Optimal {
        SynthStatus::Optimal
    } else {
        SynthStatus::Feasible
    };

    if result.method.guaranteed() {
        let report = verify::certify(plant, &result)?;
        result.status = if report.passed {
            sdp_status
        } else {
            result.notes.push("certificate check failed".into());
            SynthStatus::NumericalFailure
        };
        result.report = Some(report);
        return Ok(result);
    }

    // no guarantee: judge the gain by the closed loop alone
    let k = result.k.clone().expect("gain set above");
    let acl = verify::closed_loop(plant, &k, result.output_map.as_ref())?;
    let (hurwitz, _) = verify::is_hurwitz(&acl)?;
    if hurwitz && result.kind.is_hinf() {
        let perf = plant.performance().expect("checked by require_perf");
        let ccl = &perf.c + &perf.d * &k;
        match verify::hinf_norm(&acl, &perf.bw, &ccl, &perf.dw) {
            Ok(g) => result.gamma = Some(g),
            Err(e) => result.notes.push(format!("norm computation failed: {e}")),
        }
    }
    let report = verify::certify(plant, &result)?;
    result.status = if !report.hurwitz {
        SynthStatus::PosthocUnstable
    } else if report.passed {
        sdp_status
    } else {
        SynthStatus::NumericalFailure
    };
    if hurwitz && !result.kind.is_hinf() {
        if let Some(cs) = cliques {
            result.posthoc = Some(analysis_lyapunov(plant, &k, cs, config)?);
        }
    }
    result.report = Some(report);
    Ok(result)
}

fn all_allowed(n_agents: usize) -> Result<CliqueSet> {
    CliqueSet::from_cliques(n_agents, vec![(0..n_agents).collect()])
}

fn check_cliques(plant: &Plant, cs: &CliqueSet) -> Result<()> {
    plant.validate()?;
    if cs.node_count() != plant.agents() {
        return Err(Error::Dimension(format!(
            "clique set covers {} nodes, plant has {} agents",
            cs.node_count(),
            plant.agents()
        )));
    }
    Ok(())
}

fn check_graph(plant: &Plant, g: &Graph) -> Result<()> {
    plant.validate()?;
    if g.node_count() != plant.agents() {
        return Err(Error::Dimension(format!(
            "graph has {} nodes, plant has {} agents",
            g.node_count(),
            plant.agents()
        )));
    }
    Ok(())
}

/// `Q = blkdiag(Q_i) > 0`, `Z in S`, `He(A Q + B Z) < 0` (with the
/// bounded-real extension for H-infinity kinds); `K = Z Q^{-1}`.
pub fn synth_blockdiag(plant: &Plant, g: &Graph, kind: ProblemKind, config: &SolverConfig) -> Result<SynthesisResult> {
    check_graph(plant, g)?;
    let pattern = SparsityPattern::from_graph(g, &plant.partition_u, &plant.partition_x)?;
    let cs = graph::maximal_cliques(g);
    direct_design(plant, pattern, Method::BlockDiag, kind, Some(&cs), config)
}

/// Unstructured design with dense `Q` and `Z`.
pub fn synth_centralized(plant: &Plant, kind: ProblemKind, config: &SolverConfig) -> Result<SynthesisResult> {
    plant.validate()?;
    let cs = all_allowed(plant.agents())?;
    let pattern = SparsityPattern::from_cliques(&cs, &plant.partition_u, &plant.partition_x)?;
    direct_design(plant, pattern, Method::Centralized, kind, Some(&cs), config)
}

/// `Some(result)` when a bound minimisation cannot have a finite optimum.
///
/// The leading block of the bounded-real LMI is the stabilization LMI of
/// the same class, and a strictly feasible stabilization certificate yields
/// a finite level after scaling. When the stabilization problem is
/// infeasible the bound can only drift to infinity, which the solver does
/// not detect reliably, so it is settled first.
fn unbounded_minimisation(stab: SynthesisResult, method: Method, kind: ProblemKind) -> Option<SynthesisResult> {
    if kind != ProblemKind::HinfMinimize || stab.status != SynthStatus::Infeasible {
        return None;
    }
    let mut r = SynthesisResult::empty(method, kind, stab.pattern);
    r.status = SynthStatus::Infeasible;
    r.sdp = stab.sdp;
    r.notes
        .push("no stabilizing gain of this class, so no finite bound".into());
    Some(r)
}

fn direct_design(
    plant: &Plant,
    pattern: SparsityPattern,
    method: Method,
    kind: ProblemKind,
    cs: Option<&CliqueSet>,
    config: &SolverConfig,
) -> Result<SynthesisResult> {
    let perf = require_perf(plant, kind)?;
    if kind == ProblemKind::HinfMinimize {
        let stab = direct_design(plant, pattern.clone(), method, ProblemKind::Stabilize, cs, config)?;
        if let Some(r) = unbounded_minimisation(stab, method, kind) {
            return Ok(r);
        }
    }
    let (n, m) = (plant.n(), plant.m());
    let mut prob = SdpProblem::new();
    let q = if method == Method::Centralized {
        prob.add_symmetric("Q", n, Some(Definiteness::Positive))?
    } else {
        prob.add_sym_blocks("Q", plant.partition_x.sizes(), Some(Definiteness::Positive))?
    };
    let z = prob.add_masked("Z", m, n, |r, c| pattern.entry_allowed(r, c))?;
    let gamma = add_gamma(&mut prob, kind)?;
    let p = perf.as_ref().map(|p| Perf {
        bw: &p.bw,
        c: &p.c,
        d: &p.d,
        dw: &p.dw,
    });
    let lmi = closed_loop_block(&plant.a, &plant.b, q, z, None, None, p.as_ref(), gamma);
    prob.add_lmi("closed loop", &lmi, Sense::NegativeDefinite)?;
    let sol = sdp::solve(&prob, config);
    let result = SynthesisResult::empty(method, kind, pattern);
    let blocks = if method == Method::Centralized {
        vec![n]
    } else {
        plant.partition_x.sizes().to_vec()
    };
    finish(plant, None, result, &prob, &sol, gamma, cs, config, |sol| {
        let qi = linalg::spd_block_inverse(&sol.matrix(q), &blocks)?;
        Ok(Recovered {
            k: sol.matrix(z) * &qi,
            p: Some(qi),
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relaxation {
    /// `+ rho M` and the `eta` constraint.
    One,
    /// no `rho`, strict inequality on the face.
    Two,
    /// `+ rho M`, no `eta`.
    Three,
}

fn relaxation(method: Method) -> Result<Relaxation> {
    match method {
        Method::Proposed1 => Ok(Relaxation::One),
        Method::Proposed2 => Ok(Relaxation::Two),
        Method::Proposed3 => Ok(Relaxation::Three),
        other => Err(Error::Invalid(format!("{other} is not a clique-lifted method"))),
    }
}

/// Lifted design with `Q~, Z~` clique-block-diagonal and
/// `K = (E^T E)^{-1} E^T Z~ Q~^{-1} E`; one closed-loop LMI per entry of
/// `vertices` (the nominal `A` when empty).
fn lifted_design(
    plant: &Plant,
    cs: &CliqueSet,
    method: Method,
    kind: ProblemKind,
    vertices: &[Mat],
    config: &SolverConfig,
) -> Result<SynthesisResult> {
    check_cliques(plant, cs)?;
    let rlx = relaxation(method)?;
    let perf = require_perf(plant, kind)?;
    if kind == ProblemKind::HinfMinimize {
        let stab = lifted_design(plant, cs, method, ProblemKind::Stabilize, vertices, config)?;
        if let Some(r) = unbounded_minimisation(stab, method, kind) {
            return Ok(r);
        }
    }
    let pattern = SparsityPattern::from_cliques(cs, &plant.partition_u, &plant.partition_x)?;
    let padded = lifting::pad_inputs(plant)?;
    let lift = Lifting::new(cs, &plant.partition_x)?;
    let sys = lifting::lift_plant(&padded.plant, &lift)?;
    let (v, u) = lifted_bases(&lift);
    let nl = lift.lifted_dim();

    let mut prob = SdpProblem::new();
    let q = prob.add_sym_blocks("Q~", &lift.blocks, Some(Definiteness::Positive))?;
    let z = prob.add_square_blocks("Z~", &lift.blocks)?;
    let rho = match rlx {
        Relaxation::Two => None,
        _ => Some(prob.add_scalar("rho", ScalarBound::Free)?),
    };
    if rlx == Relaxation::One {
        add_eta_constraint(&mut prob, q, &lift, &u)?;
    }
    let gamma = add_gamma(&mut prob, kind)?;
    let lp = perf.as_ref().map(|_| Perf {
        bw: sys.bw.as_ref().expect("lifted with performance"),
        c: sys.c.as_ref().expect("lifted with performance"),
        d: sys.d.as_ref().expect("lifted with performance"),
        dw: sys.dw.as_ref().expect("lifted with performance"),
    });
    let data_norm = perf.as_ref().map(bounded_real_data_norm);
    let li = lift.left_inverse();
    let lifted_a: Vec<Mat> = if vertices.is_empty() {
        vec![sys.a.clone()]
    } else {
        vertices.iter().map(|ap| &lift.e * ap * &li).collect()
    };
    for (idx, a) in lifted_a.iter().enumerate() {
        let label = if lifted_a.len() == 1 {
            "closed loop".to_string()
        } else {
            format!("closed loop, vertex {idx}")
        };
        let lmi = closed_loop_block(a, &sys.b, q, z, None, rho.map(|r| (r, &lift.m)), lp.as_ref(), gamma);
        if rlx == Relaxation::Two {
            let mut dims = vec![nl];
            if let Some(p) = &lp {
                dims.extend([p.bw.ncols(), p.c.nrows()]);
            }
            add_on_face(&mut prob, &label, &lmi, &dims, (&v, &u), data_norm)?;
        } else {
            prob.add_lmi_scaled(&label, &lmi, Sense::NegativeDefinite, data_norm)?;
        }
    }
    let sol = sdp::solve(&prob, config);
    let result = SynthesisResult::empty(method, kind, pattern);
    let guaranteed = method.guaranteed();
    finish(
        plant,
        Some(&padded),
        result,
        &prob,
        &sol,
        gamma,
        Some(cs),
        config,
        |sol| {
            let (zv, qv) = (sol.matrix(z), sol.matrix(q));
            Ok(Recovered {
                k: lifting::recover_gain(&zv, &qv, &lift)?,
                p: if guaranteed {
                    Some(lifting::recover_lyapunov(&qv, &lift)?)
                } else {
                    None
                },
            })
        },
    )
}

/// Proposed method 1: `Phi(Q~, Z~) + rho M < 0`, `Q~ M + M Q~ >= eta M`.
pub fn synth_method1(plant: &Plant, cs: &CliqueSet, config: &SolverConfig) -> Result<SynthesisResult> {
    lifted_design(plant, cs, Method::Proposed1, ProblemKind::Stabilize, &[], config)
}

/// Proposed method 2: `Phi(Q~, Z~) < 0`. The quadratic form of `Phi`
/// vanishes on `Im M`, so strictness is imposed on the face `Phi M = 0`.
pub fn synth_method2(plant: &Plant, cs: &CliqueSet, config: &SolverConfig) -> Result<SynthesisResult> {
    lifted_design(plant, cs, Method::Proposed2, ProblemKind::Stabilize, &[], config)
}

/// Proposed method 3: `Phi(Q~, Z~) + rho M < 0`; success needs a Hurwitz
/// closed loop.
pub fn synth_method3(plant: &Plant, cs: &CliqueSet, config: &SolverConfig) -> Result<SynthesisResult> {
    lifted_design(plant, cs, Method::Proposed3, ProblemKind::Stabilize, &[], config)
}

/// H-infinity design with `BlockDiag`, `Proposed1`, `Proposed2` or
/// `Proposed3`; the pattern is the one induced by `cs`.
pub fn synth_hinf(
    plant: &Plant,
    cs: &CliqueSet,
    method: Method,
    kind: ProblemKind,
    config: &SolverConfig,
) -> Result<SynthesisResult> {
    if !kind.is_hinf() {
        return Err(Error::Invalid("synth_hinf needs an H-infinity problem kind".into()));
    }
    match method {
        Method::BlockDiag => {
            check_cliques(plant, cs)?;
            let pattern = SparsityPattern::from_cliques(cs, &plant.partition_u, &plant.partition_x)?;
            direct_design(plant, pattern, method, kind, Some(cs), config)
        }
        Method::Centralized => synth_centralized(plant, kind, config),
        Method::Proposed1 | Method::Proposed2 | Method::Proposed3 => {
            lifted_design(plant, cs, method, kind, &[], config)
        }
        other => Err(Error::Invalid(format!("{other} has no H-infinity variant"))),
    }
}

fn extended_block(
    a: &Mat,
    b: &Mat,
    q: MatVar,
    g: MatVar,
    z: MatVar,
    alpha: f64,
    rho: Option<(ScalarVar, &Mat)>,
) -> MatrixExpr {
    let n = a.nrows();
    let (at, bt) = (a.transpose(), b.transpose());
    let mut e = MatrixExpr::square(&[n, n]);
    // He([G^T A^T + Z^T B^T; -G^T] [I, alpha I]) + [0 Q; Q 0]
    e.term_sym_t(0, 0, 1.0, None, g, Some(&at));
    e.term_sym_t(0, 0, 1.0, None, z, Some(&bt));
    e.term_sym_t(0, 1, alpha, None, g, Some(&at));
    e.term_sym_t(0, 1, alpha, None, z, Some(&bt));
    e.term_sym(0, 1, -1.0, None, g, None);
    e.term_sym(0, 1, 1.0, None, q, None);
    e.term_sym(1, 1, -alpha, None, g, None);
    if let Some((s, m)) = rho {
        e.scalar(0, 0, 1.0, s, m);
        e.scalar(1, 1, 1.0, s, m);
    }
    e
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("alpha must be positive, got {alpha}")))
    }
}

/// Extended LMI with `G = blkdiag(G_i)`, `Z in S`, dense `Q > 0`;
/// `K = Z G^{-1}`, `P = G^{-T} Q G^{-1}`.
pub fn synth_extended(plant: &Plant, g: &Graph, alpha: f64, config: &SolverConfig) -> Result<SynthesisResult> {
    check_graph(plant, g)?;
    check_alpha(alpha)?;
    let pattern = SparsityPattern::from_graph(g, &plant.partition_u, &plant.partition_x)?;
    let (n, m) = (plant.n(), plant.m());
    let mut prob = SdpProblem::new();
    let q = prob.add_symmetric("Q", n, Some(Definiteness::Positive))?;
    let gv = prob.add_square_blocks("G", plant.partition_x.sizes())?;
    let z = prob.add_masked("Z", m, n, |r, c| pattern.entry_allowed(r, c))?;
    let lmi = extended_block(&plant.a, &plant.b, q, gv, z, alpha, None);
    prob.add_lmi("extended", &lmi, Sense::NegativeDefinite)?;
    let sol = sdp::solve(&prob, config);
    let method = Method::Extended { alpha };
    let result = SynthesisResult::empty(method, ProblemKind::Stabilize, pattern);
    let cs = graph::maximal_cliques(g);
    let blocks = plant.partition_x.sizes().to_vec();
    finish(plant, None, result, &prob, &sol, None, Some(&cs), config, |sol| {
        let gi = linalg::block_inverse(&sol.matrix(gv), &blocks)?;
        let p = gi.transpose() * sol.matrix(q) * &gi;
        Ok(Recovered {
            k: sol.matrix(z) * &gi,
            p: Some(p),
        })
    })
}

/// Lifted extended LMI with `rho M` terms, dense `Q~ > 0` and
/// `G~^T M + M G~ >= eta M`; `K = (E^T E)^{-1} E^T Z~ G~^{-1} E`,
/// `P = E^T G~^{-T} Q~ G~^{-1} E`.
pub fn synth_combined(plant: &Plant, cs: &CliqueSet, alpha: f64, config: &SolverConfig) -> Result<SynthesisResult> {
    check_cliques(plant, cs)?;
    check_alpha(alpha)?;
    let pattern = SparsityPattern::from_cliques(cs, &plant.partition_u, &plant.partition_x)?;
    let padded = lifting::pad_inputs(plant)?;
    let lift = Lifting::new(cs, &plant.partition_x)?;
    let sys = lifting::lift_plant(&padded.plant, &lift)?;
    let (_, u) = lifted_bases(&lift);
    let nl = lift.lifted_dim();
    let mut prob = SdpProblem::new();
    let q = prob.add_symmetric("Q~", nl, Some(Definiteness::Positive))?;
    let gv = prob.add_square_blocks("G~", &lift.blocks)?;
    let z = prob.add_square_blocks("Z~", &lift.blocks)?;
    let rho = prob.add_scalar("rho", ScalarBound::Free)?;
    add_eta_constraint(&mut prob, gv, &lift, &u)?;
    let lmi = extended_block(&sys.a, &sys.b, q, gv, z, alpha, Some((rho, &lift.m)));
    prob.add_lmi("extended", &lmi, Sense::NegativeDefinite)?;
    let sol = sdp::solve(&prob, config);
    let method = Method::Combined { alpha };
    let result = SynthesisResult::empty(method, ProblemKind::Stabilize, pattern);
    finish(
        plant,
        Some(&padded),
        result,
        &prob,
        &sol,
        None,
        Some(cs),
        config,
        |sol| {
            let gm = sol.matrix(gv);
            let sym = linalg::he(&gm);
            if lambda_min(&sym) <= 0.0 {
                return Err(Error::Singular("G~ + G~^T is not positive definite".into()));
            }
            let gi = linalg::block_inverse(&gm, &lift.blocks)?;
            let k = lift.restrict(&(sol.matrix(z) * &gi));
            let h = &gi * &lift.e;
            let p = h.transpose() * sol.matrix(q) * &h;
            Ok(Recovered { k, p: Some(p) })
        },
    )
}

/// Per-agent output blocks of a block-diagonal `C`.
pub fn output_partition(c: &Mat, px: &BlockPartition) -> Result<BlockPartition> {
    if c.ncols() != px.total() {
        return Err(Error::Dimension(format!(
            "C has {} columns, plant has {} states",
            c.ncols(),
            px.total()
        )));
    }
    let mut sizes = vec![0usize; px.len()];
    let mut last = 0;
    for r in 0..c.nrows() {
        let owners: Vec<usize> = (0..c.ncols())
            .filter(|&j| c[(r, j)] != 0.0)
            .map(|j| px.block_of(j))
            .collect();
        let Some(&first) = owners.first() else {
            return Err(Error::Invalid(format!("row {} of C is zero", r + 1)));
        };
        if owners.iter().any(|&o| o != first) || first < last {
            return Err(Error::Invalid("C is not block diagonal in agent order".into()));
        }
        last = first;
        sizes[first] += 1;
    }
    if let Some(i) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Invalid(format!("agent {} has no output", i + 1)));
    }
    BlockPartition::new(sizes)
}

fn row_rank(c: &Mat) -> usize {
    let sv = c.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-10 * top.max(f64::MIN_POSITIVE)).count()
}

/// Clique-block-diagonal copy of a block-diagonal `C`: `C^ E_x = E_y C`.
fn lifted_output_map(c: &Mat, cs: &CliqueSet, px: &BlockPartition, py: &BlockPartition) -> Mat {
    let (nl, pl): (usize, usize) = cs
        .cliques()
        .iter()
        .flatten()
        .fold((0, 0), |(a, b), &i| (a + px.size(i), b + py.size(i)));
    let mut out = Mat::zeros(pl, nl);
    let (mut r0, mut c0) = (0, 0);
    for &i in cs.cliques().iter().flatten() {
        let blk = c.view((py.offset(i), px.offset(i)), (py.size(i), px.size(i)));
        out.view_mut((r0, c0), (py.size(i), px.size(i))).copy_from(&blk);
        r0 += py.size(i);
        c0 += px.size(i);
    }
    out
}

/// Static output feedback `u = K y`, `y = C x` with block-diagonal `C`.
/// With `C^` the clique copy of `C`:
/// `He(A~ Q~ + B~ Z~ C^) + rho M < 0`, `W~ C^ = C^ Q~`, the `eta`
/// constraint on `Q~`, and `K = (E^T E)^{-1} E^T Z~ W~^{-1} E_y`.
pub fn synth_output_feedback(plant: &Plant, c: &Mat, cs: &CliqueSet, config: &SolverConfig) -> Result<SynthesisResult> {
    check_cliques(plant, cs)?;
    if row_rank(c) < c.nrows() {
        return Err(Error::Invalid("C does not have full row rank".into()));
    }
    let py = output_partition(c, &plant.partition_x)?;
    let pattern = SparsityPattern::from_cliques(cs, &plant.partition_u, &py)?;
    let padded = lifting::pad_inputs(plant)?;
    let lift = Lifting::new(cs, &plant.partition_x)?;
    let lift_y = Lifting::new(cs, &py)?;
    let sys = lifting::lift_plant(&padded.plant, &lift)?;
    let (_, u) = lifted_bases(&lift);
    let chat = lifted_output_map(c, cs, &plant.partition_x, &py);
    let (pl, nl) = chat.shape();

    let mut prob = SdpProblem::new();
    let q = prob.add_sym_blocks("Q~", &lift.blocks, Some(Definiteness::Positive))?;
    let own_x = lift.block_mask();
    let own_y = lift_y.block_mask();
    let z = prob.add_masked("Z~", nl, pl, |r, col| own_x[r] == own_y[col])?;
    let w = prob.add_square_blocks("W~", &lift_y.blocks)?;
    let rho = prob.add_scalar("rho", ScalarBound::Free)?;
    add_eta_constraint(&mut prob, q, &lift, &u)?;
    let lmi = closed_loop_block(&sys.a, &sys.b, q, z, Some(&chat), Some((rho, &lift.m)), None, None);
    prob.add_lmi("closed loop", &lmi, Sense::NegativeDefinite)?;
    let mut eq = MatrixExpr::new(&[pl], &[nl]);
    eq.term(0, 0, 1.0, None, w, false, Some(&chat));
    eq.term(0, 0, -1.0, Some(&chat), q, false, None);
    prob.add_equality("W~ C^ = C^ Q~", &eq, false)?;
    let sol = sdp::solve(&prob, config);
    let mut result = SynthesisResult::empty(Method::OutputFeedback, ProblemKind::Stabilize, pattern);
    result.output_map = Some(c.clone());
    finish(
        plant,
        Some(&padded),
        result,
        &prob,
        &sol,
        None,
        Some(cs),
        config,
        |sol| {
            let wi = linalg::block_inverse(&sol.matrix(w), &lift_y.blocks)?;
            let k = lift.left_inverse() * sol.matrix(z) * wi * &lift_y.e;
            let p = lifting::recover_lyapunov(&sol.matrix(q), &lift)?;
            Ok(Recovered { k, p: Some(p) })
        },
    )
}

/// Residual `||W~ C^ - C^ Q~||_max` of an output-feedback result.
pub fn output_feedback_residual(result: &SynthesisResult, c: &Mat, cs: &CliqueSet, px: &BlockPartition) -> Result<f64> {
    let py = output_partition(c, px)?;
    let chat = lifted_output_map(c, cs, px, &py);
    let get = |name: &str| {
        result
            .variables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m.clone())
            .ok_or_else(|| Error::Invalid(format!("result has no variable {name}")))
    };
    let (w, q) = (get("W~")?, get("Q~")?);
    Ok(linalg::max_abs(&(w * &chat - &chat * q)))
}

/// One gain for every vertex `A_p` of a polytope (shared `Q~`, `Z~`, `rho`).
/// Supports `BlockDiag` and the three lifted methods.
pub fn synth_polytopic(
    vertices: &[Mat],
    template: &Plant,
    cs: &CliqueSet,
    method: Method,
    config: &SolverConfig,
) -> Result<SynthesisResult> {
    if vertices.is_empty() {
        return Err(Error::Invalid("polytope needs at least one vertex".into()));
    }
    if let Some(bad) = vertices.iter().position(|a| a.shape() != template.a.shape()) {
        return Err(Error::Dimension(format!(
            "vertex {bad} has shape {:?}",
            vertices[bad].shape()
        )));
    }
    let mut result = match method {
        Method::BlockDiag => {
            check_cliques(template, cs)?;
            let pattern = SparsityPattern::from_cliques(cs, &template.partition_u, &template.partition_x)?;
            polytopic_blockdiag(vertices, template, pattern, config)?
        }
        Method::Proposed1 | Method::Proposed2 | Method::Proposed3 => lifted_design(
            &with_a(template, &vertices[0])?,
            cs,
            method,
            ProblemKind::Stabilize,
            vertices,
            config,
        )?,
        other => return Err(Error::Invalid(format!("{other} has no polytopic variant"))),
    };
    let Some(k) = result.k.clone() else {
        return Ok(result);
    };
    let mut all_passed = true;
    for a in vertices {
        let vp = with_a(template, a)?;
        let mut probe = result.clone();
        probe.k = Some(k.clone());
        let report = verify::certify(&vp, &probe)?;
        all_passed &= report.passed;
        result.vertex_reports.push(report);
    }
    if result.status.is_success() && !all_passed {
        result.status = if method.guaranteed() {
            SynthStatus::NumericalFailure
        } else {
            SynthStatus::PosthocUnstable
        };
        result.notes.push("a vertex failed verification".into());
    }
    Ok(result)
}

fn with_a(template: &Plant, a: &Mat) -> Result<Plant> {
    let mut p = template.clone();
    p.a = a.clone();
    p.validate()?;
    Ok(p)
}

fn polytopic_blockdiag(
    vertices: &[Mat],
    template: &Plant,
    pattern: SparsityPattern,
    config: &SolverConfig,
) -> Result<SynthesisResult> {
    let (n, m) = (template.n(), template.m());
    let mut prob = SdpProblem::new();
    let q = prob.add_sym_blocks("Q", template.partition_x.sizes(), Some(Definiteness::Positive))?;
    let z = prob.add_masked("Z", m, n, |r, c| pattern.entry_allowed(r, c))?;
    for (idx, a) in vertices.iter().enumerate() {
        let lmi = closed_loop_block(a, &template.b, q, z, None, None, None, None);
        prob.add_lmi(&format!("closed loop, vertex {idx}"), &lmi, Sense::NegativeDefinite)?;
    }
    let sol = sdp::solve(&prob, config);
    let result = SynthesisResult::empty(Method::BlockDiag, ProblemKind::Stabilize, pattern);
    let nominal = with_a(template, &vertices[0])?;
    let blocks = template.partition_x.sizes().to_vec();
    finish(&nominal, None, result, &prob, &sol, None, None, config, |sol| {
        let qi = linalg::spd_block_inverse(&sol.matrix(q), &blocks)?;
        Ok(Recovered {
            k: sol.matrix(z) * &qi,
            p: Some(qi),
        })
    })
}

/// Dispatches on `method` with the maximal cliques of `g`.
pub fn synthesize(
    plant: &Plant,
    g: &Graph,
    method: Method,
    kind: ProblemKind,
    config: &SolverConfig,
) -> Result<SynthesisResult> {
    check_graph(plant, g)?;
    let cs = graph::maximal_cliques(g);
    match (method, kind) {
        (Method::BlockDiag, ProblemKind::Stabilize) => synth_blockdiag(plant, g, kind, config),
        (Method::Centralized, _) => synth_centralized(plant, kind, config),
        (Method::Proposed1 | Method::Proposed2 | Method::Proposed3, ProblemKind::Stabilize) => {
            lifted_design(plant, &cs, method, kind, &[], config)
        }
        (Method::Extended { alpha }, ProblemKind::Stabilize) => synth_extended(plant, g, alpha, config),
        (Method::Combined { alpha }, ProblemKind::Stabilize) => synth_combined(plant, &cs, alpha, config),
        (Method::OutputFeedback, ProblemKind::Stabilize) => {
            let c = plant
                .c
                .as_ref()
                .ok_or_else(|| Error::Invalid("output feedback needs C".into()))?;
            synth_output_feedback(plant, c, &cs, config)
        }
        (_, ProblemKind::HinfFixed(_) | ProblemKind::HinfMinimize) => synth_hinf(plant, &cs, method, kind, config),
    }
}

fn conclusive(cs: &CliqueSet) -> bool {
    let n = cs.node_count();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if cs.shared(i, j) > 0 {
                edges.push((i, j));
            }
        }
    }
    let Ok(g) = Graph::new(n, &edges) else {
        return false;
    };
    graph::is_chordal(&g).0 && graph::maximal_cliques(&g).cliques() == cs.cliques()
}

fn analysis_problem(
    plant: &Plant,
    k: &Mat,
    cs: &CliqueSet,
    gamma: Option<f64>,
) -> Result<(SdpProblem, MatVar, Lifting)> {
    check_cliques(plant, cs)?;
    let pattern = SparsityPattern::from_cliques(cs, &plant.partition_u, &plant.partition_x)?;
    pattern.check(k)?;
    let acl = verify::closed_loop(plant, k, None)?;
    let lift = Lifting::new(cs, &plant.partition_x)?;
    let li = lift.left_inverse();
    let at = (&lift.e * &acl * &li).transpose();
    let nl = lift.lifted_dim();
    let mut prob = SdpProblem::new();
    let p = prob.add_sym_blocks("P~", &lift.blocks, Some(Definiteness::Positive))?;
    let rho = prob.add_scalar("rho", ScalarBound::Free)?;
    let mut e = match gamma {
        None => MatrixExpr::square(&[nl]),
        Some(g) => {
            let perf = plant
                .performance()
                .ok_or_else(|| Error::Invalid("H-infinity analysis needs Bw and C".into()))?;
            let (nw, nz) = (perf.bw.ncols(), perf.c.nrows());
            let mut e = MatrixExpr::square(&[nl, nw, nz]);
            let bw = &lift.e * &perf.bw;
            let ccl = (&perf.c + &perf.d * k) * &li;
            e.term_sym(0, 1, 1.0, None, p, Some(&bw));
            e.constant_sym(2, 0, &ccl);
            e.constant(1, 1, &(-Mat::identity(nw, nw) * g));
            e.constant(2, 2, &(-Mat::identity(nz, nz) * g));
            e.constant_sym(2, 1, &perf.dw);
            e
        }
    };
    e.term_sym(0, 0, 1.0, Some(&at), p, None);
    e.scalar(0, 0, 1.0, rho, &lift.m);
    prob.add_lmi("analysis", &e, Sense::NegativeDefinite)?;
    Ok((prob, p, lift))
}

fn analysis_outcome(
    prob: &SdpProblem,
    p: MatVar,
    lift: &Lifting,
    cs: &CliqueSet,
    acl: &Mat,
    config: &SolverConfig,
) -> Result<AnalysisOutcome> {
    let sol = sdp::solve(prob, config);
    Ok(match sol.status {
        SdpStatus::Infeasible => AnalysisOutcome::Infeasible {
            conclusive: conclusive(cs),
        },
        SdpStatus::NumericalFailure => AnalysisOutcome::NumericalFailure(sol.diagnostics),
        _ => {
            let pm = normalize_certificate(lift.e.transpose() * sol.matrix(p) * &lift.e);
            let (he, lo) = verify::lyapunov_residual(&pm, acl)?;
            if he < 0.0 && lo > 0.0 {
                AnalysisOutcome::Certified(pm)
            } else {
                AnalysisOutcome::NumericalFailure(format!("certificate check failed: {he:e}, {lo:e}"))
            }
        }
    })
}

/// Searches a Lyapunov certificate `P = E^T P~ E` for `A + B K` with
/// `P~` clique-block-diagonal: `A~^T P~ + P~ A~ + rho M < 0`.
pub fn analysis_lyapunov(plant: &Plant, k: &Mat, cs: &CliqueSet, config: &SolverConfig) -> Result<AnalysisOutcome> {
    let (prob, p, lift) = analysis_problem(plant, k, cs, None)?;
    let acl = verify::closed_loop(plant, k, None)?;
    analysis_outcome(&prob, p, &lift, cs, &acl, config)
}

/// Bounded-real version of [`analysis_lyapunov`] at level `gamma`.
pub fn analysis_hinf(
    plant: &Plant,
    k: &Mat,
    gamma: f64,
    cs: &CliqueSet,
    config: &SolverConfig,
) -> Result<AnalysisOutcome> {
    if !(gamma > 0.0) {
        return Err(Error::Invalid(format!("gamma must be positive, got {gamma}")));
    }
    let (prob, p, lift) = analysis_problem(plant, k, cs, Some(gamma))?;
    let acl = verify::closed_loop(plant, k, None)?;
    analysis_outcome(&prob, p, &lift, cs, &acl, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_complete, make_path, make_ring};

    fn scalar_plant(a: Mat, b: Mat) -> Plant {
        let n = a.nrows();
        let m = b.ncols();
        let px = BlockPartition::uniform(n, 1).unwrap();
        let pu = BlockPartition::uniform(m, 1).unwrap();
        Plant::new(px, pu, a, b).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn fig1() -> Graph {
        make_path(3).unwrap()
    }

    fn assert_certified(r: &SynthesisResult) {
        assert!(r.status.is_success(), "{:?}: {:?} {:?}", r.method, r.status, r.notes);
        let rep = r.report.as_ref().unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn stable_plant_feasible_for_bd_p2_ext() {
        let p = scalar_plant(-Mat::identity(4, 4), Mat::identity(4, 4));
        let g = make_ring(4).unwrap();
        let cs = graph::maximal_cliques(&g);
        assert_certified(&synth_blockdiag(&p, &g, ProblemKind::Stabilize, &cfg()).unwrap());
        assert_certified(&synth_method2(&p, &cs, &cfg()).unwrap());
        assert_certified(&synth_extended(&p, &g, 1.0, &cfg()).unwrap());
    }

    #[test]
    fn decoupled_unstable_agents_on_ring() {
        let p = scalar_plant(Mat::identity(5, 5), Mat::identity(5, 5));
        let g = make_ring(5).unwrap();
        let r = synth_blockdiag(&p, &g, ProblemKind::Stabilize, &cfg()).unwrap();
        assert_certified(&r);
    }

    #[test]
    fn fig1_method1_respects_pattern() {
        let a = Mat::from_row_slice(3, 3, &[1., 1., 0., 1., 1., 1., 0., 1., 1.]);
        let p = scalar_plant(a, Mat::identity(3, 3));
        let g = fig1();
        let cs = graph::maximal_cliques(&g);
        let r = synth_method1(&p, &cs, &cfg()).unwrap();
        assert_certified(&r);
        let k = r.k.as_ref().unwrap();
        assert!(k[(0, 2)].abs() <= SparsityPattern::zero_tolerance(k));
        assert!(k[(2, 0)].abs() <= SparsityPattern::zero_tolerance(k));
        let (he, lo) = verify::lyapunov_residual(r.p.as_ref().unwrap(), &(&p.a + &p.b * k)).unwrap();
        assert!(he <= -cfg().strict_eps / 2.0 && lo > 0.0, "{he} {lo}");
    }

    #[test]
    fn complete_graph_all_lifted_methods_agree() {
        let a = Mat::from_row_slice(3, 3, &[0.5, 1., -0.3, 0.2, 0.1, 1., -1., 0.4, 0.3]);
        let p = scalar_plant(a, Mat::identity(3, 3));
        let g = make_complete(3).unwrap();
        let cs = graph::maximal_cliques(&g);
        for m in [Method::Proposed1, Method::Proposed2, Method::Proposed3] {
            let r = lifted_design(&p, &cs, m, ProblemKind::Stabilize, &[], &cfg()).unwrap();
            assert!(r.status.is_success(), "{m}: {:?}", r.status);
            assert!(r.report.unwrap().hurwitz);
        }
        let r = synth_combined(&p, &cs, 1.0, &cfg()).unwrap();
        assert_certified(&r);
    }

    #[test]
    fn method3_reports_posthoc_analysis() {
        let a = Mat::from_row_slice(3, 3, &[1., 1., 0., 1., 1., 1., 0., 1., 1.]);
        let p = scalar_plant(a, Mat::identity(3, 3));
        let cs = graph::maximal_cliques(&fig1());
        let r = synth_method3(&p, &cs, &cfg()).unwrap();
        assert!(r.p.is_none());
        assert!(r.requires_posthoc_verification());
        if r.status.is_success() {
            assert!(
                matches!(r.posthoc, Some(AnalysisOutcome::Certified(_))),
                "{:?}",
                r.posthoc
            );
        }
    }

    #[test]
    fn combined_on_path() {
        let a = Mat::from_row_slice(3, 3, &[1., 1., 0., 1., 1., 1., 0., 1., 1.]);
        let p = scalar_plant(a, Mat::identity(3, 3));
        let cs = graph::maximal_cliques(&fig1());
        assert_certified(&synth_combined(&p, &cs, 1.0, &cfg()).unwrap());
    }

    #[test]
    fn polytopic_interval_scalar() {
        let t = scalar_plant(Mat::from_element(1, 1, 0.5), Mat::from_element(1, 1, 1.0));
        let cs = CliqueSet::from_cliques(1, vec![vec![0]]).unwrap();
        let verts = [Mat::from_element(1, 1, 0.5), Mat::from_element(1, 1, 1.0)];
        for m in [Method::BlockDiag, Method::Proposed1] {
            let r = synth_polytopic(&verts, &t, &cs, m, &cfg()).unwrap();
            assert!(r.status.is_success(), "{m}: {:?}", r.status);
            let k = r.k.unwrap()[(0, 0)];
            assert!(k < -1.0, "{k}");
            assert_eq!(r.vertex_reports.len(), 2);
            assert!(r.vertex_reports.iter().all(|v| v.passed));
        }
        let one = synth_polytopic(&verts[1..], &t, &cs, Method::BlockDiag, &cfg()).unwrap();
        assert!(one.status.is_success());
    }

    #[test]
    fn output_feedback_identity_and_stable() {
        let a = Mat::from_row_slice(3, 3, &[1., 1., 0., 1., 1., 1., 0., 1., 1.]);
        let p = scalar_plant(a, Mat::identity(3, 3));
        let cs = graph::maximal_cliques(&fig1());
        let c = Mat::identity(3, 3);
        let r = synth_output_feedback(&p, &c, &cs, &cfg()).unwrap();
        assert_certified(&r);
        assert!(output_feedback_residual(&r, &c, &cs, &p.partition_x).unwrap() <= 1e-8);

        let px = BlockPartition::uniform(3, 2).unwrap();
        let pu = BlockPartition::uniform(3, 1).unwrap();
        let mut b = Mat::zeros(6, 3);
        for i in 0..3 {
            b[(2 * i + 1, i)] = 1.0;
        }
        let stable = Plant::new(px, pu, -Mat::identity(6, 6), b).unwrap();
        let mut c = Mat::zeros(3, 6);
        for i in 0..3 {
            c[(i, 2 * i)] = 1.0;
            c[(i, 2 * i + 1)] = 0.5;
        }
        let r = synth_output_feedback(&stable, &c, &cs, &cfg()).unwrap();
        assert_certified(&r);
        assert_eq!(r.k.as_ref().unwrap().shape(), (3, 3));
    }

    #[test]
    fn output_feedback_rejects_bad_c() {
        let p = scalar_plant(-Mat::identity(2, 2), Mat::identity(2, 2));
        let cs = CliqueSet::from_cliques(2, vec![vec![0, 1]]).unwrap();
        let rank_deficient = Mat::from_row_slice(2, 2, &[1., 0., 2., 0.]);
        assert!(synth_output_feedback(&p, &rank_deficient, &cs, &cfg()).is_err());
        let missing = Mat::from_row_slice(1, 2, &[1., 0.]);
        assert!(synth_output_feedback(&p, &missing, &cs, &cfg()).is_err());
    }

    fn hinf_plant() -> Plant {
        let a = Mat::from_row_slice(3, 3, &[0.2, 1., 0., -0.5, 0.1, 0.7, 0., 0.3, -0.4]);
        let n = 3;
        let mut c = Mat::zeros(2 * n, n);
        let mut d = Mat::zeros(2 * n, n);
        for i in 0..n {
            c[(i, i)] = 1.0;
            d[(n + i, i)] = 1.0;
        }
        scalar_plant(a, Mat::identity(3, 3))
            .with_performance(Mat::identity(3, 3), c, Some(d), None)
            .unwrap()
    }

    #[test]
    fn hinf_minimize_and_monotone() {
        let p = hinf_plant();
        let g = fig1();
        let cs = graph::maximal_cliques(&g);
        let cen = synth_centralized(&p, ProblemKind::HinfMinimize, &cfg()).unwrap();
        assert_certified(&cen);
        let gc = cen.gamma.unwrap();
        for m in [Method::BlockDiag, Method::Proposed1, Method::Proposed2] {
            let r = synth_hinf(&p, &cs, m, ProblemKind::HinfMinimize, &cfg()).unwrap();
            assert_certified(&r);
            let g = r.gamma.unwrap();
            assert!(g >= gc * (1.0 - 1e-6), "{m}: {g} < {gc}");
            let fixed = synth_hinf(&p, &cs, m, ProblemKind::HinfFixed(2.0 * g), &cfg()).unwrap();
            assert_certified(&fixed);
        }
        let r3 = synth_hinf(&p, &cs, Method::Proposed3, ProblemKind::HinfMinimize, &cfg()).unwrap();
        if r3.status.is_success() {
            let k = r3.k.unwrap();
            let acl = &p.a + &p.b * &k;
            let perf = p.performance().unwrap();
            let norm = verify::hinf_norm(&acl, &perf.bw, &(&perf.c + &perf.d * &k), &perf.dw).unwrap();
            assert!((norm - r3.gamma.unwrap()).abs() <= 1e-6 * norm);
        }
    }

    #[test]
    fn analysis_examples() {
        let p = scalar_plant(-Mat::identity(3, 3), Mat::identity(3, 3));
        let cs = graph::maximal_cliques(&fig1());
        let k = Mat::zeros(3, 3);
        assert!(matches!(
            analysis_lyapunov(&p, &k, &cs, &cfg()).unwrap(),
            AnalysisOutcome::Certified(_)
        ));
        let unstable = scalar_plant(Mat::identity(3, 3), Mat::identity(3, 3));
        assert_eq!(
            analysis_lyapunov(&unstable, &k, &cs, &cfg()).unwrap(),
            AnalysisOutcome::Infeasible { conclusive: true }
        );
        let mut bad = Mat::zeros(3, 3);
        bad[(0, 2)] = 1.0;
        assert!(analysis_lyapunov(&p, &bad, &cs, &cfg()).is_err());
    }

    #[test]
    fn analysis_hinf_levels() {
        let p = scalar_plant(-Mat::identity(2, 2), Mat::identity(2, 2))
            .with_performance(Mat::identity(2, 2), Mat::identity(2, 2), None, None)
            .unwrap();
        let cs = CliqueSet::from_cliques(2, vec![vec![0, 1]]).unwrap();
        let k = Mat::zeros(2, 2);
        assert!(matches!(
            analysis_hinf(&p, &k, 100.0, &cs, &cfg()).unwrap(),
            AnalysisOutcome::Certified(_)
        ));
        assert!(matches!(
            analysis_hinf(&p, &k, 0.5, &cs, &cfg()).unwrap(),
            AnalysisOutcome::Infeasible { .. }
        ));
    }

    #[test]
    fn method_labels_round_trip() {
        for l in ["bd", "p1", "p2", "p3", "ext", "comb", "ofb", "cen"] {
            assert_eq!(Method::parse(l, 1.0).unwrap().label(), l);
        }
        assert!("nope".parse::<Method>().is_err());
        assert!(!Method::Proposed3.guaranteed());
    }
}
