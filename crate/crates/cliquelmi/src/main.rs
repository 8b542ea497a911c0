#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cliquelmi::bench::{self, ExperimentSpec, SuiteKind, TableFormat};
use cliquelmi::io::{self, GainFile, GraphFile, PlantFile, ResultFile};
use cliquelmi_core::graph::{self, Graph};
use cliquelmi_core::lifting::{Plant, SparsityPattern};
use cliquelmi_core::sdp::{self, SolverConfig};
use cliquelmi_core::synth::{self, Method, ProblemKind, SynthStatus, SynthesisResult};
use cliquelmi_core::verify;

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! out {
    ($($t:tt)*) => {
        writeln!(std::io::stdout().lock(), $($t)*)?
    };
}

#[derive(Parser)]
#[command(
    name = "cliquelmi",
    version,
    about = "Sparse distributed controller synthesis with clique-lifted LMIs"
)]
struct Cli {
    #[command(flatten)]
    solver: SolverArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverArgs {
    /// Primal/dual residual tolerance of the SDP solver.
    #[arg(long, global = true, default_value_t = 1e-8)]
    feas_tol: f64,
    /// Strict inequalities `F > 0` are imposed as `F >= eps (1 + ||F0||)`.
    #[arg(long, global = true, default_value_t = 1e-7)]
    strict_eps: f64,
    /// Slack scalar of the extended and combined LMIs.
    #[arg(long, global = true, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, global = true, env = "CLIQUELMI_BACKEND", default_value = "ipm")]
    backend: String,
    #[arg(long, global = true, default_value_t = 100)]
    max_iters: usize,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        if sdp::backend(&self.backend).is_none() {
            bail!("unknown backend '{}'", self.backend);
        }
        Ok(SolverConfig {
            feas_tol: self.feas_tol,
            strict_eps: self.strict_eps,
            max_iters: self.max_iters,
            backend: self.backend.clone(),
            ..SolverConfig::default()
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Graph utilities.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Designs a gain for a plant file.
    Synthesize(SynthArgs),
    /// Re-checks a result file against its plant.
    Verify {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        result: PathBuf,
        /// Graph file; defaults to the graph stored in the plant file.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Prints the closed-loop H-infinity norm for a gain.
    Hinf {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        gain: PathBuf,
    },
    /// Runs a random-instance benchmark.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Chordality, maximal cliques and clique statistics.
    Info(GraphSource),
}

#[derive(Args)]
struct GraphSource {
    /// JSON file `{"n": .., "edges": [[i, j], ..]}` with 1-based nodes.
    #[arg(long, conflicts_with = "family")]
    file: Option<PathBuf>,
    #[arg(long, value_parser = ["ring", "wheel", "path", "complete"])]
    family: Option<String>,
    #[arg(long, default_value_t = 10)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Stab,
    Hinf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_parser = ["bd", "p1", "p2", "p3", "ext", "comb", "ofb", "cen"])]
    method: String,
    #[arg(long, value_enum, default_value = "stab")]
    problem: Problem,
    #[arg(long, conflicts_with = "minimize_gamma")]
    gamma: Option<f64>,
    #[arg(long)]
    minimize_gamma: bool,
    #[arg(long)]
    plant: PathBuf,
    /// Graph file; defaults to the graph stored in the plant file.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "ring", value_parser = ["ring", "wheel", "path", "complete"])]
    graph: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "p1,p2,p3,bd,ext,comb")]
    methods: String,
    #[arg(long, value_enum, default_value = "stab")]
    problem: Problem,
    /// 1-based agents without actuation; defaults to 1 and 5.
    #[arg(long, value_delimiter = ',')]
    unactuated: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    state_dim: usize,
    #[arg(long, default_value_t = 1)]
    input_dim: usize,
    /// Keep only matrices with exactly this many unstable eigenvalues.
    #[arg(long)]
    unstable_count: Option<usize>,
    /// CSV output (counts only).
    #[arg(long)]
    out: PathBuf,
    /// JSON output with timing and per-instance outcomes.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Directory for per-instance replay records.
    #[arg(long)]
    audit: Option<PathBuf>,
}

fn load_graph(source: &GraphSource) -> Result<Graph> {
    match (&source.file, &source.family) {
        (Some(f), _) => io::read_json::<GraphFile>(f)?.to_graph(),
        (None, Some(fam)) => bench::family_graph(fam, source.n),
        (None, None) => bail!("give --file or --family"),
    }
}

fn plant_and_graph(plant: &Path, graph: &Option<PathBuf>) -> Result<(Plant, Graph)> {
    let pf: PlantFile = io::read_json(plant)?;
    let p = pf.to_plant()?;
    let g = match (graph, &pf.graph) {
        (Some(path), _) => io::read_json::<GraphFile>(path)?.to_graph()?,
        (None, Some(g)) => g.to_graph()?,
        (None, None) => bail!("plant file has no graph; pass --graph"),
    };
    Ok((p, g))
}

fn graph_info(g: &Graph) -> Result<()> {
    let (chordal, _) = graph::is_chordal(g);
    let cs = graph::maximal_cliques(g);
    out!("nodes: {}", g.node_count());
    out!("edges: {}", g.edges().len());
    out!("connected: {}", g.is_connected());
    out!("chordal: {chordal}");
    out!("maximal cliques: {}", cs.len());
    for c in cs.cliques() {
        let names: Vec<String> = c.iter().map(|v| (v + 1).to_string()).collect();
        out!("  {{{}}}", names.join(","));
    }
    let lifted: usize = cs.cliques().iter().map(Vec::len).sum();
    out!("lifted dimension (scalar agents): {lifted}");
    match graph::assumption2_violation(&cs, g) {
        None => out!("clique cover: every edge is covered"),
        Some(why) => out!("clique cover: {why}"),
    }
    Ok(())
}

fn problem_kind(problem: Problem, gamma: Option<f64>, minimize: bool) -> Result<ProblemKind> {
    Ok(match (problem, gamma, minimize) {
        (Problem::Stab, None, false) => ProblemKind::Stabilize,
        (Problem::Stab, _, _) => bail!("--gamma and --minimize-gamma need --problem hinf"),
        (Problem::Hinf, Some(g), _) => ProblemKind::HinfFixed(g),
        (Problem::Hinf, None, _) => ProblemKind::HinfMinimize,
    })
}

fn synthesize(args: &SynthArgs, cfg: &SolverConfig, alpha: f64) -> Result<()> {
    let (plant, g) = plant_and_graph(&args.plant, &args.graph)?;
    let method = Method::parse(&args.method, alpha).context("unknown method")?;
    let kind = problem_kind(args.problem, args.gamma, args.minimize_gamma)?;
    let result = synth::synthesize(&plant, &g, method, kind, cfg)?;
    let file = ResultFile::from_result(&result);
    out!("status: {}", file.status);
    if let Some(gm) = result.gamma {
        out!("gamma: {gm:.8e}");
    }
    if let Some(v) = &file.verification {
        out!("verified: {}", v.passed);
    }
    for n in &file.notes {
        out!("note: {n}");
    }
    match &args.out {
        Some(out) => io::write_json(out, &file)?,
        None => out!("{}", serde_json::to_string_pretty(&file)?),
    }
    if !result.status.is_success() {
        std::process::exit(2);
    }
    Ok(())
}

fn verify_result(plant: &Path, result: &Path, graph: &Option<PathBuf>) -> Result<()> {
    let (plant, g) = plant_and_graph(plant, graph)?;
    let rf: ResultFile = io::read_json(result)?;
    let method = Method::parse(&rf.method, 1.0).with_context(|| format!("unknown method '{}'", rf.method))?;
    let k = io::from_rows(rf.k.as_ref().context("result has no gain")?, "K")?;
    let output_map = rf.output_map.as_ref().map(|c| io::from_rows(c, "C")).transpose()?;
    let cols = match &output_map {
        Some(c) => synth::output_partition(c, &plant.partition_x)?,
        None => plant.partition_x.clone(),
    };
    let pattern = match method {
        Method::Centralized => {
            SparsityPattern::from_graph(&graph::make_complete(plant.agents())?, &plant.partition_u, &cols)?
        }
        _ => SparsityPattern::from_graph(&g, &plant.partition_u, &cols)?,
    };
    let kind = match (rf.problem.starts_with("hinf"), rf.gamma_achieved) {
        (true, Some(gm)) => ProblemKind::HinfFixed(gm),
        _ => ProblemKind::Stabilize,
    };
    let probe = SynthesisResult {
        method,
        kind,
        status: SynthStatus::Feasible,
        k: Some(k),
        p: rf.p.as_ref().map(|p| io::from_rows(p, "P")).transpose()?,
        gamma: rf.gamma_achieved,
        variables: Vec::new(),
        scalars: Vec::new(),
        pattern,
        output_map,
        sdp: None,
        report: None,
        posthoc: None,
        vertex_reports: Vec::new(),
        notes: Vec::new(),
    };
    let report = verify::certify(&plant, &probe)?;
    out!(
        "{}",
        serde_json::to_string_pretty(&io::VerificationJson::from(&report))?
    );
    if !report.passed {
        std::process::exit(2);
    }
    Ok(())
}

fn hinf(plant: &Path, gain: &Path) -> Result<()> {
    let plant = io::read_json::<PlantFile>(plant)?.to_plant()?;
    let k = io::read_json::<GainFile>(gain)?.to_mat()?;
    let perf = plant.performance().context("plant needs Bw and C")?;
    let acl = verify::closed_loop(&plant, &k, None)?;
    let norm = verify::hinf_norm(&acl, &perf.bw, &(&perf.c + &perf.d * &k), &perf.dw)?;
    out!("{norm:.10e}");
    Ok(())
}

fn run_bench(args: &BenchArgs, cfg: &SolverConfig, alpha: f64) -> Result<()> {
    let mut spec = ExperimentSpec::new(&args.graph, args.n)?;
    spec.samples = args.samples;
    spec.seed = args.seed;
    spec.state_dim = args.state_dim;
    spec.input_dim = args.input_dim;
    spec.unstable_count = args.unstable_count;
    spec.solver = cfg.clone();
    spec.audit_dir = args.audit.clone();
    if let Some(list) = &args.unactuated {
        if list.contains(&0) {
            bail!("--unactuated takes 1-based agent numbers");
        }
        spec.unactuated = list.iter().map(|i| i - 1).collect();
    }
    spec.methods = args
        .methods
        .split(',')
        .map(|m| Method::parse(m.trim(), alpha).with_context(|| format!("unknown method '{m}'")))
        .collect::<Result<_>>()?;
    let table = match args.problem {
        Problem::Stab => bench::run_stabilization_suite(&spec)?,
        Problem::Hinf => {
            spec.kind = SuiteKind::Hinf;
            bench::run_hinf_suite(&spec)?
        }
    };
    bench::emit_table(&table, TableFormat::Csv, &args.out)?;
    if let Some(j) = &args.json {
        bench::emit_table(&table, TableFormat::Json, j)?;
    }
    write!(
        std::io::stdout().lock(),
        "{}",
        bench::render_table(&table, TableFormat::Csv)?
    )?;
    Ok(())
}

fn main() -> Result<()> {
    match run() {
        // reader went away, e.g. piped into `head`
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            Ok(())
        }
        r => r,
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let cfg = cli.solver.config()?;
    let alpha = cli.solver.alpha;
    if !(alpha > 0.0) {
        bail!("--alpha must be positive");
    }
    match &cli.command {
        Command::Graph {
            command: GraphCommand::Info(src),
        } => graph_info(&load_graph(src)?)?,
        Command::Synthesize(args) => synthesize(args, &cfg, alpha)?,
        Command::Verify { plant, result, graph } => verify_result(plant, result, graph)?,
        Command::Hinf { plant, gain } => hinf(plant, gain)?,
        Command::Bench(args) => run_bench(args, &cfg, alpha)?,
    }
    Ok(())
}
