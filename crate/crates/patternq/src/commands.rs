//! Subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use patternq_core::cell::fixed_point;
use patternq_core::existence::{certify, lift, solve_reduced, Strategy};
use patternq_core::lattice::{builtin_examples, Lattice};
use patternq_core::partition::{
    block_decompose, coarsest_equitable_refinement, is_equitable, orbits_from_generators,
    quotient, Equitability,
};
use patternq_core::simulate::{integrate, perturbed_start, SimOptions, CLUSTER_REL_TOL};
use patternq_core::stability::{analyze as stability_analyze, Methods};
use patternq_core::{HillMap, Partition, ScaledAdjacency, StaticMap};

use crate::bundle::{
    self, method_str, warning_str, AnalysisBundle, AnalyzeOptions, CertificateSection,
    PartitionChoice, QuotientSection, StabilitySection,
};
use crate::error::{AtStage, CliError, Stage};
use crate::json::{g17, to_pretty, GraphFile};
use crate::load::{self, LoadedGraph};
use crate::render::{self, Layout};
use crate::report;

#[derive(Debug, Parser)]
#[command(
    name = "patternq",
    version,
    about = "Certify steady-state patterns of lateral-inhibition networks",
    after_help = "Set PATTERNQ_LOG=error|info|debug for diagnostics on stderr."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a built-in lattice as graph JSON
    Gen(GenArgs),
    /// List the built-in example partitions
    Examples,
    /// Check, refine or compute an equitable partition
    Partition(PartitionArgs),
    /// Quotient matrix, its spectrum and reduced graph
    Quotient(QuotientArgs),
    /// Existence certificate and reduced solution
    Exist(ExistArgs),
    /// Stability of a lifted pattern
    Stability(StabilityArgs),
    /// Integrate the network and classify the final state
    Simulate(SimulateArgs),
    /// Draw the final state of a trace
    Render(RenderArgs),
    /// Run the whole pipeline and write a bundle
    Analyze(AnalyzeArgs),
    /// Summarise a bundle
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GraphSource {
    /// Graph JSON file
    #[arg(long, conflicts_with = "gen")]
    pub graph: Option<PathBuf>,
    /// Generator spec, e.g. `torus_mesh:4,4`, `hex_torus:6,6`, `buckyball`
    #[arg(long, value_name = "SPEC")]
    pub gen: Option<String>,
}

impl GraphSource {
    fn load(&self) -> Result<LoadedGraph, CliError> {
        load::graph(self.graph.as_deref(), self.gen.as_deref())
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Path,
    Cycle,
    TorusMesh,
    HexTorus,
    Buckyball,
    Fig5,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Vertex count for paths and cycles
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PartitionMode {
    Check,
    Refine,
    Orbits,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_enum)]
    pub mode: PartitionMode,
    /// Partition to check, or the seed to refine (default: one class)
    #[arg(long)]
    pub seed: Option<PathBuf>,
    /// Automorphism generators for `orbits`
    #[arg(long)]
    pub perms: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuotientArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub partition: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Newton,
    Ode,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Newton => Strategy::Newton,
            StrategyArg::Ode => Strategy::Ode,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExistArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub partition: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "newton")]
    pub strategy: StrategyArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Full,
    Block,
    Smallgain,
    All,
}

impl From<MethodArg> for Methods {
    fn from(m: MethodArg) -> Self {
        let only = |full, block, small_gain| Methods {
            full,
            block,
            small_gain,
        };
        match m {
            MethodArg::Full => only(true, false, false),
            MethodArg::Block => only(false, true, false),
            MethodArg::Smallgain => only(false, false, true),
            MethodArg::All => Methods::ALL,
        }
    }
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub partition: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// JSON with the class values under `z`, e.g. the output of `exist`
    #[arg(long)]
    pub pattern: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub method: MethodArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub model: PathBuf,
    /// Initial state as a JSON array
    #[arg(long, conflicts_with = "perturb")]
    pub x0: Option<PathBuf>,
    /// Start from u* nudged along `vr`, `cell:<k>` or `random:<seed>`
    #[arg(long, default_value = "vr")]
    pub perturb: String,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Partition whose v_r is used by `--perturb vr` (default: bipartition)
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Step (default 0.01 tau)
    #[arg(long)]
    pub step: Option<f64>,
    /// Horizon (default 1e4 tau)
    #[arg(long)]
    pub max_time: Option<f64>,
    /// CSV trace destination
    #[arg(long)]
    pub out: PathBuf,
    /// Classification JSON destination (default stdout)
    #[arg(long)]
    pub classification: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Ascii,
    Svg,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// `torus[:R,C]`, `hex[:R,C]`, `bucky` or `line`
    #[arg(long)]
    pub layout: String,
    #[arg(long, value_enum, default_value = "ascii")]
    pub format: Format,
    /// Clustering gap (default 1e-4 of the largest value)
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Graph JSON file
    #[arg(long, conflicts_with_all = ["gen", "example"])]
    pub graph: Option<PathBuf>,
    /// Generator spec, e.g. `torus_mesh:4,4`
    #[arg(long, value_name = "SPEC", conflicts_with = "example")]
    pub gen: Option<String>,
    /// Built-in example (graph and partition); see `patternq examples`
    #[arg(long)]
    pub example: Option<String>,
    #[arg(long, conflicts_with_all = ["auto_bipartite", "auto_refine", "example"])]
    pub partition: Option<PathBuf>,
    /// Use the two-colouring of a bipartite graph
    #[arg(long, conflicts_with_all = ["auto_refine", "example"])]
    pub auto_bipartite: bool,
    /// Use the coarsest equitable refinement of the degree partition
    #[arg(long, conflicts_with = "example")]
    pub auto_refine: bool,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "newton")]
    pub strategy: StrategyArg,
    /// Also verify by simulation from a v_r-perturbed start
    #[arg(long)]
    pub simulate: bool,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Leave the timestamp out of the bundle
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub bundle: PathBuf,
    /// Also write an SVG of the pattern (lattice graphs only)
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Append an ASCII picture of the pattern
    #[arg(long)]
    pub ascii: bool,
}

/// Runs a command and returns its exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Gen(a) => gen(&a),
        Command::Examples => examples(),
        Command::Partition(a) => partition(&a),
        Command::Quotient(a) => quotient_cmd(&a),
        Command::Exist(a) => exist(&a),
        Command::Stability(a) => stability(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Render(a) => render_cmd(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Report(a) => report_cmd(&a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::new(Stage::Write, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn scaled(g: &LoadedGraph) -> Result<ScaledAdjacency, CliError> {
    g.graph.scaled_adjacency().at(Stage::Load)
}

fn gen(a: &GenArgs) -> Result<i32, CliError> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| CliError::new(Stage::Load, format!("--{flag} is required for this kind")))
    };
    let lattice = match a.kind {
        Kind::Path => Lattice::Path(need(a.n, "n")?),
        Kind::Cycle => Lattice::Cycle(need(a.n, "n")?),
        Kind::TorusMesh => Lattice::TorusMesh {
            rows: need(a.rows, "rows")?,
            cols: need(a.cols, "cols")?,
        },
        Kind::HexTorus => Lattice::HexTorus {
            rows: need(a.rows, "rows")?,
            cols: need(a.cols, "cols")?,
        },
        Kind::Buckyball => Lattice::Buckyball,
        Kind::Fig5 => Lattice::Barbell,
    };
    let g = lattice.generate().at(Stage::Load)?;
    emit(a.out.as_deref(), &to_pretty(&GraphFile::from_graph(&g)))?;
    Ok(0)
}

fn examples() -> Result<i32, CliError> {
    for ex in builtin_examples() {
        let (_, pi) = ex.build();
        let sizes: Vec<String> = pi.classes().iter().map(|c| c.len().to_string()).collect();
        println!("{:<20} {:<16} classes {}", ex.name, ex.lattice.to_string(), sizes.join("/"));
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct WitnessOut {
    from: usize,
    to: usize,
    vertices: (usize, usize),
    sums: (f64, f64),
}

#[derive(Debug, Serialize)]
struct PartitionOut {
    classes: Vec<Vec<usize>>,
    equitable: bool,
    witness: Option<WitnessOut>,
    quotient: Option<QuotientSection>,
}

fn partition(a: &PartitionArgs) -> Result<i32, CliError> {
    let g = a.source.load()?;
    let sa = scaled(&g)?;
    let n = g.graph.n();
    let seed = || -> Result<Partition, CliError> {
        match &a.seed {
            Some(p) => load::partition(p, n),
            None => Ok(Partition::trivial(n)),
        }
    };
    let pi = match a.mode {
        PartitionMode::Check => {
            let p = a
                .seed
                .as_deref()
                .ok_or_else(|| CliError::new(Stage::Load, "--mode check needs --seed"))?;
            load::partition(p, n)?
        }
        PartitionMode::Refine => coarsest_equitable_refinement(&sa, &seed()?).at(Stage::Partition)?,
        PartitionMode::Orbits => {
            let p = a
                .perms
                .as_deref()
                .ok_or_else(|| CliError::new(Stage::Load, "--mode orbits needs --perms"))?;
            orbits_from_generators(&g.graph, &load::perms(p)?).at(Stage::Partition)?
        }
    };
    let out = match is_equitable(&sa, &pi).at(Stage::Partition)? {
        Equitability::Equitable { .. } => {
            let q = quotient(&sa, &pi).at(Stage::Quotient)?;
            PartitionOut {
                classes: pi.classes().to_vec(),
                equitable: true,
                witness: None,
                quotient: Some(QuotientSection::new(&q)?),
            }
        }
        Equitability::NotEquitable(w) => PartitionOut {
            classes: pi.classes().to_vec(),
            equitable: false,
            witness: Some(WitnessOut {
                from: w.from,
                to: w.to,
                vertices: w.vertices,
                sums: w.sums,
            }),
            quotient: None,
        },
    };
    emit(a.out.as_deref(), &to_pretty(&out))?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct QuotientOut {
    classes: Vec<Vec<usize>>,
    #[serde(flatten)]
    quotient: QuotientSection,
    lambda_r: f64,
    /// Least `|T'(u*)|` that certifies existence, when `lambda_r < 0`.
    slope_threshold: Option<f64>,
}

fn quotient_cmd(a: &QuotientArgs) -> Result<i32, CliError> {
    let g = a.source.load()?;
    let sa = scaled(&g)?;
    let pi = load::partition(&a.partition, g.graph.n())?;
    let q = quotient(&sa, &pi).at(Stage::Quotient)?;
    let section = QuotientSection::new(&q)?;
    let lambda_r = section.spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    let out = QuotientOut {
        classes: pi.classes().to_vec(),
        slope_threshold: (lambda_r < -1e-9).then(|| -1.0 / lambda_r),
        lambda_r,
        quotient: section,
    };
    emit(a.out.as_deref(), &to_pretty(&out))?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct Residuals {
    reduced: f64,
    full: f64,
}

#[derive(Debug, Serialize)]
struct ExistOut {
    verdict: String,
    lambda_r: f64,
    z: Vec<f64>,
    u: Vec<f64>,
    x: Vec<f64>,
    residuals: Residuals,
    homogeneous: bool,
    method: String,
    warning: Option<String>,
    alternatives: Vec<Vec<f64>>,
    certificate: CertificateSection,
}

fn exist(a: &ExistArgs) -> Result<i32, CliError> {
    let g = a.source.load()?;
    let sa = scaled(&g)?;
    let pi = load::partition(&a.partition, g.graph.n())?;
    let model = load::model(&a.model)?;
    let q = quotient(&sa, &pi).at(Stage::Quotient)?;
    let cert = certify(&q, &model).at(Stage::Certify)?;
    let red = solve_reduced(&q, &model, &cert, a.strategy.into()).at(Stage::Solve)?;
    let p = lift(&sa, &pi, &red, &model).at(Stage::Lift)?;
    let out = ExistOut {
        verdict: String::from(cert.verdict.as_str()),
        lambda_r: cert.lambda_r,
        z: p.z,
        u: p.u,
        x: p.x,
        residuals: Residuals {
            reduced: p.residual_reduced,
            full: p.residual_full,
        },
        homogeneous: p.homogeneous,
        method: String::from(method_str(p.method)),
        warning: p.warning.map(|w| String::from(warning_str(w))),
        alternatives: p.alternatives,
        certificate: CertificateSection::new(&cert),
    };
    emit(a.out.as_deref(), &to_pretty(&out))?;
    Ok(0)
}

#[derive(Debug, Deserialize)]
struct PatternIn {
    z: Vec<f64>,
}

fn stability(a: &StabilityArgs) -> Result<i32, CliError> {
    let g = a.source.load()?;
    let sa = scaled(&g)?;
    let pi = load::partition(&a.partition, g.graph.n())?;
    let model = load::model(&a.model)?;
    let z = load::read_json::<PatternIn>(&a.pattern)?.z;
    let q = quotient(&sa, &pi).at(Stage::Quotient)?;
    let methods: Methods = a.method.into();
    let decomp = if methods.block {
        Some(block_decompose(&sa, &pi).at(Stage::Stability)?)
    } else {
        None
    };
    let r = stability_analyze(&sa, &q, decomp.as_ref(), &model, &z, methods)
        .at(Stage::Stability)?;
    emit(a.out.as_deref(), &to_pretty(&StabilitySection::new(&r)))?;
    Ok(0)
}

/// Direction of the initial nudge for `simulate`.
fn direction(a: &SimulateArgs, g: &LoadedGraph, model: &HillMap) -> Result<Vec<f64>, CliError> {
    let n = g.graph.n();
    let bad = || CliError::new(Stage::Load, format!("bad --perturb `{}`", a.perturb));
    if a.perturb == "vr" {
        let sa = scaled(g)?;
        let pi = match &a.partition {
            Some(p) => load::partition(p, n)?,
            None => bundle::choose_partition(&g.graph, &sa, &PartitionChoice::Bipartite)
                .map_err(|e| {
                    CliError::new(e.stage, format!("{}; pass --partition", e.message))
                })?
                .0,
        };
        let q = quotient(&sa, &pi).at(Stage::Quotient)?;
        let cert = certify(&q, model).at(Stage::Certify)?;
        return Ok(pi.lift(&cert.v_r));
    }
    if let Some(k) = a.perturb.strip_prefix("cell:") {
        let k: usize = k.parse().map_err(|_| bad())?;
        if k >= n {
            return Err(CliError::new(Stage::Load, format!("cell {k} out of range")));
        }
        let mut d = vec![0.0; n];
        d[k] = 1.0;
        return Ok(d);
    }
    if let Some(seed) = a.perturb.strip_prefix("random:") {
        let seed: u64 = seed.parse().map_err(|_| bad())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if d.iter().all(|&v| v == 0.0) {
            d[0] = 1.0;
        }
        return Ok(d);
    }
    Err(bad())
}

#[derive(Debug, Serialize)]
struct Classification {
    converged: bool,
    final_time: f64,
    steps: usize,
    final_derivative_norm: f64,
    /// Cell groups by final value, highest first; absent if not converged.
    groups: Option<Vec<Vec<usize>>>,
    values: Option<Vec<f64>>,
    sizes: Option<Vec<usize>>,
}

fn simulate(a: &SimulateArgs) -> Result<i32, CliError> {
    let g = a.source.load()?;
    let sa = scaled(&g)?;
    let model = load::model(&a.model)?;
    let n = g.graph.n();
    let x0 = match &a.x0 {
        Some(p) => load::state(p, n)?,
        None => {
            let u_star = fixed_point(&model).u_star;
            let dir = direction(a, &g, &model)?;
            perturbed_start(u_star, &dir, a.eps, model.upper_bound())
        }
    };
    let defaults = SimOptions::for_tau(model.tau);
    let opts = SimOptions {
        step: a.step.unwrap_or(defaults.step),
        max_time: a.max_time.unwrap_or(defaults.max_time),
        conv_tol: defaults.conv_tol,
    };
    let tr = integrate(&sa, &model, &x0, &opts).at(Stage::Simulate)?;
    log::info!("simulation: {} steps, converged = {}", tr.steps, tr.converged);

    let mut w = csv::Writer::from_path(&a.out)
        .map_err(|e| CliError::new(Stage::Write, format!("{}: {e}", a.out.display())))?;
    let mut header = vec![String::from("t")];
    header.extend((0..n).map(|i| format!("x_{i}")));
    w.write_record(&header).at(Stage::Write)?;
    for (t, x) in tr.times.iter().zip(&tr.states) {
        let mut row = vec![g17(*t)];
        row.extend(x.iter().map(|&v| g17(v)));
        w.write_record(&row).at(Stage::Write)?;
    }
    w.flush().at(Stage::Write)?;

    let groups = tr
        .converged
        .then(|| patternq_core::simulate::cluster(&tr.final_state, CLUSTER_REL_TOL * model.upper_bound()));
    let out = Classification {
        converged: tr.converged,
        final_time: tr.final_time,
        steps: tr.steps,
        final_derivative_norm: tr.final_derivative_norm,
        sizes: groups.as_ref().map(|e| e.sizes()),
        values: groups.as_ref().map(|e| e.values.clone()),
        groups: groups.map(|e| e.groups),
    };
    emit(a.classification.as_deref(), &to_pretty(&out))?;
    Ok(0)
}

/// Final state recorded in a trace CSV.
pub fn final_state(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::new(Stage::Load, format!("{}: {e}", path.display())))?;
    let mut last = None;
    for rec in r.records() {
        last = Some(rec.at(Stage::Load)?);
    }
    let rec = last.ok_or_else(|| CliError::new(Stage::Load, format!("{}: empty trace", path.display())))?;
    rec.iter()
        .skip(1)
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::new(Stage::Load, format!("{}: {e}", path.display())))
}

fn render_cmd(a: &RenderArgs) -> Result<i32, CliError> {
    let x = final_state(&a.trace)?;
    let layout = Layout::parse(&a.layout, x.len())?;
    let tol = a.tol.unwrap_or_else(|| render::default_tol(&x));
    let text = match a.format {
        Format::Ascii => render::ascii(&x, layout, tol),
        Format::Svg => render::svg(&x, layout, tol),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn analyze(a: &AnalyzeArgs) -> Result<i32, CliError> {
    let (g, choice) = match &a.example {
        Some(name) => {
            let (g, pi) = load::example(name)?;
            let choice = PartitionChoice::Given {
                partition: pi,
                method: String::from("example"),
            };
            (g, choice)
        }
        None => {
            let g = load::graph(a.graph.as_deref(), a.gen.as_deref())?;
            let choice = match (&a.partition, a.auto_bipartite, a.auto_refine) {
                (Some(p), false, false) => PartitionChoice::Given {
                    partition: load::partition(p, g.graph.n())?,
                    method: String::from("file"),
                },
                (None, true, false) => PartitionChoice::Bipartite,
                (None, false, true) => PartitionChoice::Refine,
                _ => {
                    return Err(CliError::new(
                        Stage::Load,
                        "give one of --partition, --auto-bipartite and --auto-refine",
                    ))
                }
            };
            (g, choice)
        }
    };
    let model = load::model(&a.model)?;
    let timestamp = (!a.no_timestamp).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    });
    let opts = AnalyzeOptions {
        strategy: a.strategy.into(),
        simulate: a.simulate,
        eps: a.eps,
        timestamp,
    };
    let b = bundle::analyze(&g, &choice, &model, &opts)?;
    emit(a.out.as_deref(), &to_pretty(&b))?;
    log::info!("outcome: {}", b.outcome.status);
    Ok(b.outcome.exit_code)
}

fn report_cmd(a: &ReportArgs) -> Result<i32, CliError> {
    let b: AnalysisBundle = load::read_json(&a.bundle)?;
    b.verify()
        .map_err(|e| CliError::new(Stage::Report, format!("bad bundle: {e}")))?;
    let mut text = report::report(&b);
    let layout = b
        .graph
        .lattice
        .as_deref()
        .and_then(|s| Lattice::parse(s).ok())
        .map(|l| Layout::for_lattice(&l));
    let tol = CLUSTER_REL_TOL * b.model.a;
    if a.ascii {
        text.push_str(&render::ascii(&b.pattern.x, layout.unwrap_or(Layout::Line), tol));
    }
    if let Some(path) = &a.svg {
        let layout = layout.ok_or_else(|| {
            CliError::new(Stage::Render, "graph has no lattice layout to draw")
        })?;
        emit(Some(path), &render::svg(&b.pattern.x, layout, tol))?;
    }
    print!("{text}");
    Ok(0)
}

