//! Random instance generation and benchmark suites.
//!
//! Instance `i` of an experiment draws from its own ChaCha8 stream (`seed`, stream
//! `i`), so the instance set does not depend on how the work is scheduled.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cliquelmi_core::graph::{self, Graph};
use cliquelmi_core::lifting::{BlockPartition, Plant};
use cliquelmi_core::sdp::SolverConfig;
use cliquelmi_core::synth::{self, Method, ProblemKind, SynthesisResult};
use cliquelmi_core::{verify, Mat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{self, PlantFile, ResultFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Stabilize,
    Hinf,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// `ring`, `wheel`, `path`, `complete` or a file name.
    pub family: String,
    pub graph: Graph,
    pub state_dim: usize,
    pub input_dim: usize,
    pub samples: usize,
    pub seed: u64,
    /// 0-based agents with `B_i = 0`.
    pub unactuated: Vec<usize>,
    pub methods: Vec<Method>,
    pub kind: SuiteKind,
    pub solver: SolverConfig,
    /// Keep only matrices with exactly this many eigenvalues in `Re > 0`.
    pub unstable_count: Option<usize>,
    pub resample_budget: usize,
    /// Directory for per-instance replay records.
    pub audit_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Desk-scale defaults: `N = 10`, 50 samples, scalar agents, agents 1
    /// and 5 unactuated.
    pub fn new(family: &str, agents: usize) -> Result<Self> {
        let graph = family_graph(family, agents)?;
        let unactuated = if agents >= 5 { vec![0, 4] } else { vec![0] };
        Ok(Self {
            family: family.to_string(),
            graph,
            state_dim: 1,
            input_dim: 1,
            samples: 50,
            seed: 7,
            unactuated,
            methods: table_methods(1.0),
            kind: SuiteKind::Stabilize,
            solver: SolverConfig::default(),
            unstable_count: None,
            resample_budget: 10_000,
            audit_dir: None,
        })
    }

    pub fn agents(&self) -> usize {
        self.graph.node_count()
    }

    fn validate(&self) -> Result<()> {
        if self.state_dim == 0 || self.input_dim == 0 {
            bail!("per-agent dimensions must be positive");
        }
        if let Some(&i) = self.unactuated.iter().find(|&&i| i >= self.agents()) {
            bail!("unactuated agent {} out of range", i + 1);
        }
        if self.methods.is_empty() {
            bail!("no methods selected");
        }
        Ok(())
    }
}

pub fn family_graph(family: &str, agents: usize) -> Result<Graph> {
    Ok(match family {
        "ring" => graph::make_ring(agents)?,
        "wheel" => graph::make_wheel(agents)?,
        "path" => graph::make_path(agents)?,
        "complete" => graph::make_complete(agents)?,
        other => bail!("unknown graph family '{other}'"),
    })
}

/// Methods in table column order.
pub fn table_methods(alpha: f64) -> Vec<Method> {
    vec![
        Method::Proposed1,
        Method::Proposed2,
        Method::Proposed3,
        Method::BlockDiag,
        Method::Extended { alpha },
        Method::Combined { alpha },
    ]
}

fn column_rank(m: &Method) -> usize {
    match m {
        Method::Proposed1 => 0,
        Method::Proposed2 => 1,
        Method::Proposed3 => 2,
        Method::BlockDiag => 3,
        Method::Extended { .. } => 4,
        Method::Combined { .. } => 5,
        Method::OutputFeedback => 6,
        Method::Centralized => 7,
    }
}

fn normal_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

fn input_matrix(spec: &ExperimentSpec) -> Mat {
    let (n, m) = (spec.state_dim, spec.input_dim);
    let blocks: Vec<Mat> = (0..spec.agents())
        .map(|i| {
            if spec.unactuated.contains(&i) {
                Mat::zeros(n, m)
            } else {
                Mat::identity(n, m)
            }
        })
        .collect();
    let mut b = Mat::zeros(n * blocks.len(), m * blocks.len());
    for (i, blk) in blocks.iter().enumerate() {
        b.view_mut((i * n, i * m), (n, m)).copy_from(blk);
    }
    b
}

/// Draws instance `index`: Gaussian `A`, resampled until it has an
/// eigenvalue in `Re > 0` (the requested number, if set) and `(A, B)` is
/// stabilizable. H-infinity suites get `B_w = I`, `C = [20 I; 0]`,
/// `D = [0; I]`, `D_w = 0`.
pub fn gen_random_plant(spec: &ExperimentSpec, index: usize) -> Result<Plant> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let agents = spec.agents();
    let (n, m) = (spec.state_dim * agents, spec.input_dim * agents);
    let b = input_matrix(spec);
    for _ in 0..spec.resample_budget {
        let a = normal_matrix(&mut rng, n, n);
        let unstable = cliquelmi_core::linalg::eigenvalues(&a)?
            .iter()
            .filter(|z| z.re > 0.0)
            .count();
        let wanted = match spec.unstable_count {
            Some(k) => unstable == k,
            None => unstable > 0,
        };
        if !wanted || !verify::is_stabilizable(&a, &b)? {
            continue;
        }
        let plant = Plant::new(
            BlockPartition::uniform(agents, spec.state_dim)?,
            BlockPartition::uniform(agents, spec.input_dim)?,
            a,
            b,
        )?;
        return Ok(match spec.kind {
            SuiteKind::Stabilize => plant,
            SuiteKind::Hinf => {
                let mut c = Mat::zeros(n + m, n);
                let mut d = Mat::zeros(n + m, m);
                c.view_mut((0, 0), (n, n)).copy_from(&(Mat::identity(n, n) * 20.0));
                d.view_mut((n, 0), (m, m)).copy_from(&Mat::identity(m, m));
                plant.with_performance(Mat::identity(n, n), c, Some(d), None)?
            }
        });
    }
    bail!(
        "instance {index}: no admissible matrix in {} draws",
        spec.resample_budget
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodOutcome {
    pub method: String,
    pub status: String,
    pub success: bool,
    pub gamma: Option<f64>,
    /// `gamma / gamma_cen` for H-infinity suites.
    pub ratio: Option<f64>,
    /// Verified closed-loop norm.
    pub verified_norm: Option<f64>,
    pub time_ms: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub gamma_cen: Option<f64>,
    pub outcomes: Vec<MethodOutcome>,
    #[serde(skip)]
    pub results: Vec<SynthesisResult>,
    #[serde(skip)]
    pub plant: Option<Plant>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub success: usize,
    pub infeasible: usize,
    pub numerical_failure: usize,
    pub posthoc_unstable: usize,
    /// Instances that could not be generated.
    pub errors: usize,
    pub mean_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub mean_time_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchTable {
    pub family: String,
    pub agents: usize,
    pub samples: usize,
    pub seed: u64,
    pub kind: SuiteKind,
    pub methods: Vec<MethodSummary>,
    pub instances: Vec<InstanceRecord>,
}

impl BenchTable {
    pub fn summary(&self, label: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == label)
    }

    /// Per-instance success flags of one method.
    pub fn successes(&self, label: &str) -> Vec<bool> {
        self.instances
            .iter()
            .map(|r| r.outcomes.iter().any(|o| o.method == label && o.success))
            .collect()
    }
}

fn run_method(
    plant: &Plant,
    g: &Graph,
    method: Method,
    kind: ProblemKind,
    cfg: &SolverConfig,
) -> (std::result::Result<SynthesisResult, String>, f64) {
    let t0 = Instant::now();
    let r = synth::synthesize(plant, g, method, kind, cfg).map_err(|e| e.to_string());
    (r, t0.elapsed().as_secs_f64() * 1e3)
}

fn run_instance(spec: &ExperimentSpec, index: usize) -> InstanceRecord {
    let mut rec = InstanceRecord {
        index,
        gamma_cen: None,
        outcomes: Vec::new(),
        results: Vec::new(),
        plant: None,
        error: None,
    };
    let plant = match gen_random_plant(spec, index) {
        Ok(p) => p,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let kind = match spec.kind {
        SuiteKind::Stabilize => ProblemKind::Stabilize,
        SuiteKind::Hinf => ProblemKind::HinfMinimize,
    };
    if spec.kind == SuiteKind::Hinf {
        if let (Ok(cen), _) = run_method(&plant, &spec.graph, Method::Centralized, kind, &spec.solver) {
            if cen.status.is_success() {
                rec.gamma_cen = cen.gamma;
            }
        }
    }
    for &method in &spec.methods {
        let (r, ms) = run_method(&plant, &spec.graph, method, kind, &spec.solver);
        let r = match r {
            Ok(r) => r,
            Err(e) => {
                rec.outcomes.push(MethodOutcome {
                    method: method.label().to_string(),
                    status: "error".to_string(),
                    success: false,
                    gamma: None,
                    ratio: None,
                    verified_norm: None,
                    time_ms: ms,
                    note: e,
                });
                continue;
            }
        };
        let success = r.status.is_success();
        let verified_norm = r.report.as_ref().and_then(|v| v.hinf.as_ref()).map(|h| h.norm);
        let ratio = match (success, r.gamma, rec.gamma_cen) {
            (true, Some(g), Some(c)) if c > 0.0 => Some(g / c),
            _ => None,
        };
        rec.outcomes.push(MethodOutcome {
            method: method.label().to_string(),
            status: r.status.label().to_string(),
            success,
            gamma: if success { r.gamma } else { None },
            ratio,
            verified_norm,
            time_ms: ms,
            note: r.notes.join("; "),
        });
        rec.results.push(r);
    }
    rec.plant = Some(plant);
    rec
}

fn summarize(spec: &ExperimentSpec, instances: &[InstanceRecord]) -> Vec<MethodSummary> {
    let mut methods = spec.methods.clone();
    methods.sort_by_key(column_rank);
    methods
        .iter()
        .map(|m| {
            let label = m.label();
            let mut s = MethodSummary {
                method: label.to_string(),
                success: 0,
                infeasible: 0,
                numerical_failure: 0,
                posthoc_unstable: 0,
                errors: 0,
                mean_ratio: None,
                max_ratio: None,
                mean_time_ms: 0.0,
            };
            let mut ratios = Vec::new();
            let mut time = 0.0;
            for rec in instances {
                let Some(o) = rec.outcomes.iter().find(|o| o.method == label) else {
                    s.errors += 1;
                    continue;
                };
                time += o.time_ms;
                match o.status.as_str() {
                    "optimal" | "feasible" => s.success += 1,
                    "infeasible" => s.infeasible += 1,
                    "posthoc_unstable" => s.posthoc_unstable += 1,
                    // solver trouble and input errors alike
                    _ => s.numerical_failure += 1,
                }
                ratios.extend(o.ratio);
            }
            let ran = instances.len() - s.errors;
            if ran > 0 {
                s.mean_time_ms = time / ran as f64;
            }
            if !ratios.is_empty() {
                s.mean_ratio = Some(ratios.iter().sum::<f64>() / ratios.len() as f64);
                s.max_ratio = ratios.iter().copied().reduce(f64::max);
            }
            s
        })
        .collect()
}

fn write_audit(dir: &Path, spec: &ExperimentSpec, rec: &InstanceRecord) -> Result<()> {
    #[derive(Serialize)]
    struct Audit<'a> {
        index: usize,
        seed: u64,
        plant: Option<PlantFile>,
        gamma_cen: Option<f64>,
        results: Vec<ResultFile>,
        error: &'a Option<String>,
    }
    let audit = Audit {
        index: rec.index,
        seed: spec.seed,
        plant: rec.plant.as_ref().map(|p| PlantFile::from_plant(p, Some(&spec.graph))),
        gamma_cen: rec.gamma_cen,
        results: rec.results.iter().map(ResultFile::from_result).collect(),
        error: &rec.error,
    };
    io::write_json(&dir.join(format!("instance_{:04}.json", rec.index)), &audit)
}

fn run_suite(spec: &ExperimentSpec) -> Result<BenchTable> {
    spec.validate()?;
    let instances: Vec<InstanceRecord> = (0..spec.samples)
        .into_par_iter()
        .map(|i| run_instance(spec, i))
        .collect();
    if let Some(dir) = &spec.audit_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for rec in &instances {
            write_audit(dir, spec, rec)?;
        }
    }
    Ok(BenchTable {
        family: spec.family.clone(),
        agents: spec.agents(),
        samples: spec.samples,
        seed: spec.seed,
        kind: spec.kind,
        methods: summarize(spec, &instances),
        instances,
    })
}

/// Success counts per method; success means a verified stabilizing gain.
pub fn run_stabilization_suite(spec: &ExperimentSpec) -> Result<BenchTable> {
    if spec.kind != SuiteKind::Stabilize {
        bail!("experiment is not a stabilization suite");
    }
    run_suite(spec)
}

/// Minimised bounds per method and their ratios to the centralized optimum.
pub fn run_hinf_suite(spec: &ExperimentSpec) -> Result<BenchTable> {
    if spec.kind != SuiteKind::Hinf {
        bail!("experiment is not an H-infinity suite");
    }
    run_suite(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

/// CSV holds counts (and ratios for H-infinity) only, so it is reproducible
/// byte for byte; JSON adds timing and per-instance outcomes.
pub fn render_table(table: &BenchTable, format: TableFormat) -> Result<String> {
    Ok(match format {
        TableFormat::Json => serde_json::to_string_pretty(table)? + "\n",
        TableFormat::Csv => {
            let mut out = String::from(
                "graph,agents,samples,seed,method,success,infeasible,numerical_failure,posthoc_unstable,errors",
            );
            if table.kind == SuiteKind::Hinf {
                out.push_str(",mean_ratio,max_ratio");
            }
            out.push('\n');
            for m in &table.methods {
                write!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    table.family,
                    table.agents,
                    table.samples,
                    table.seed,
                    m.method,
                    m.success,
                    m.infeasible,
                    m.numerical_failure,
                    m.posthoc_unstable,
                    m.errors
                )?;
                if table.kind == SuiteKind::Hinf {
                    write!(out, ",{},{}", opt(m.mean_ratio), opt(m.max_ratio))?;
                }
                out.push('\n');
            }
            out
        }
    })
}

pub fn emit_table(table: &BenchTable, format: TableFormat, path: &std::path::Path) -> Result<()> {
    fs::write(path, render_table(table, format)?).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(kind: SuiteKind) -> ExperimentSpec {
        let mut s = ExperimentSpec::new("ring", 4).unwrap();
        s.samples = 3;
        s.kind = kind;
        s
    }

    #[test]
    fn instances_are_reproducible_and_admissible() {
        let s = tiny(SuiteKind::Stabilize);
        let a = gen_random_plant(&s, 2).unwrap();
        let b = gen_random_plant(&s, 2).unwrap();
        assert_eq!(a.a, b.a);
        assert_ne!(gen_random_plant(&s, 1).unwrap().a, a.a);
        assert!(verify::spectral_abscissa(&a.a).unwrap() > 0.0);
        assert!(verify::is_stabilizable(&a.a, &a.b).unwrap());
        assert_eq!(a.b[(0, 0)], 0.0);
        assert_eq!(a.b[(1, 1)], 1.0);
    }

    #[test]
    fn unactuated_unstable_rejected_by_budget() {
        let mut s = tiny(SuiteKind::Stabilize);
        s.unactuated = vec![0, 1, 2, 3];
        s.resample_budget = 20;
        assert!(gen_random_plant(&s, 0).is_err());
    }

    #[test]
    fn unstable_count_filter() {
        let mut s = tiny(SuiteKind::Stabilize);
        s.unstable_count = Some(2);
        let p = gen_random_plant(&s, 0).unwrap();
        let k = cliquelmi_core::linalg::eigenvalues(&p.a)
            .unwrap()
            .iter()
            .filter(|z| z.re > 0.0)
            .count();
        assert_eq!(k, 2);
    }

    #[test]
    fn hinf_plant_shape() {
        let s = tiny(SuiteKind::Hinf);
        let p = gen_random_plant(&s, 0).unwrap();
        let perf = p.performance().unwrap();
        assert_eq!(perf.c.shape(), (8, 4));
        assert_eq!(perf.c[(0, 0)], 20.0);
        assert_eq!(perf.d[(4, 0)], 1.0);
    }

    #[test]
    fn table_counts_and_csv() {
        let t = run_stabilization_suite(&tiny(SuiteKind::Stabilize)).unwrap();
        let order: Vec<&str> = t.methods.iter().map(|m| m.method.as_str()).collect();
        assert_eq!(order, ["p1", "p2", "p3", "bd", "ext", "comb"]);
        for m in &t.methods {
            assert_eq!(
                m.success + m.infeasible + m.numerical_failure + m.posthoc_unstable + m.errors,
                3
            );
        }
        let csv = render_table(&t, TableFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 7);
        let again = render_table(
            &run_stabilization_suite(&tiny(SuiteKind::Stabilize)).unwrap(),
            TableFormat::Csv,
        )
        .unwrap();
        assert_eq!(csv, again);
    }

    #[test]
    fn complete_graph_everything_succeeds() {
        let mut s = ExperimentSpec::new("complete", 3).unwrap();
        s.samples = 3;
        s.unactuated.clear();
        let t = run_stabilization_suite(&s).unwrap();
        for m in &t.methods {
            assert_eq!(m.success, 3, "{m:?}");
        }
    }
}
