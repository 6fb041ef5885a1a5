//! The `analyze` pipeline and the bundle it writes.
//!
//! Each section of the bundle is hashed together with the hashes of the
//! sections it was computed from, so editing any section invalidates its
//! own hash and every hash downstream of it.

use serde::{Deserialize, Serialize};

use patternq_core::existence::{
    certify, lift_values, solve_reduced, SolveMethod, SolveWarning, Strategy, Verdict,
};
use patternq_core::partition::{block_decompose, coarsest_equitable_refinement, quotient};
use patternq_core::simulate::{verify_certificate, SimOptions, VerifyReport};
use patternq_core::spectral::eigen_reversible;
use patternq_core::stability::{
    analyze as stability_analyze, full_jacobian_stability, Methods, SmallGainVerdict,
    StabilityReport, StabilityVerdict,
};
use patternq_core::{
    ExistenceCertificate, HillMap, Partition, PatternSolution, QuotientModel, ScaledAdjacency,
    WeightedGraph,
};

use crate::error::{AtStage, CliError, Stage};
use crate::json::{sha256_hex, to_canonical, GraphFile, ModelFile};
use crate::load::LoadedGraph;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: String::from(env!("CARGO_PKG_NAME")),
            version: String::from(env!("CARGO_PKG_VERSION")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSection {
    pub source: String,
    /// Generator spec when the graph is a built-in lattice.
    pub lattice: Option<String>,
    pub n: usize,
    pub edges: usize,
    /// Hash of the graph in its file format.
    pub sha256: String,
}

impl GraphSection {
    pub fn new(g: &LoadedGraph) -> Self {
        Self {
            source: g.source.clone(),
            lattice: g.lattice.map(|l| l.to_string()),
            n: g.graph.n(),
            edges: g.graph.edges().len(),
            sha256: graph_hash(&g.graph),
        }
    }
}

pub fn graph_hash(g: &WeightedGraph) -> String {
    sha256_hex(&[&to_canonical(&GraphFile::from_graph(g))])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSection {
    /// `file`, `example`, `bipartite` or `refine`.
    pub method: String,
    pub classes: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSection {
    pub pbar: Vec<Vec<f64>>,
    pub dbar: Vec<f64>,
    pub spectrum: Vec<f64>,
    pub reduced_edges: Vec<(usize, usize)>,
    pub reduced_bipartite: bool,
    /// Two-colouring of the reduced graph, when it has one.
    pub colouring: Option<Vec<bool>>,
}

impl QuotientSection {
    pub fn new(q: &QuotientModel) -> Result<Self, CliError> {
        let spec = eigen_reversible(&q.pbar, &q.dbar).at(Stage::Quotient)?;
        Ok(Self {
            pbar: q.pbar.to_rows(),
            dbar: q.dbar.clone(),
            spectrum: spec.values,
            reduced_edges: q.reduced_edges.clone(),
            reduced_bipartite: q.reduced_bipartite.is_some(),
            colouring: q.reduced_bipartite.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSection {
    pub verdict: String,
    pub u_star: f64,
    pub t_prime_star: f64,
    pub lambda_r: f64,
    pub lambda_r_multiplicity: usize,
    pub v_r: Vec<f64>,
    /// `|T'(u*)| lambda_r`; existence is certified below `-1`.
    pub condition_value: f64,
    /// Least `|T'(u*)|` that certifies, when `lambda_r < 0`.
    pub slope_threshold: Option<f64>,
    pub assumption1: bool,
}

impl CertificateSection {
    pub fn new(c: &ExistenceCertificate) -> Self {
        Self {
            verdict: String::from(c.verdict.as_str()),
            u_star: c.u_star,
            t_prime_star: c.t_prime_star,
            lambda_r: c.lambda_r,
            lambda_r_multiplicity: c.lambda_r_multiplicity,
            v_r: c.v_r.clone(),
            condition_value: c.condition_value,
            slope_threshold: c.slope_threshold(),
            assumption1: c.assumption1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub z: Vec<f64>,
    pub residual_full: f64,
    pub abscissa: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSection {
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub residual_reduced: f64,
    pub residual_full: f64,
    pub homogeneous: bool,
    pub method: String,
    pub warning: Option<String>,
    /// `solver` when the solver's root is reported, `stable_alternative`
    /// when another root was preferred for being stable.
    pub selection: String,
    pub candidates: Vec<Candidate>,
}

pub fn method_str(m: SolveMethod) -> &'static str {
    match m {
        SolveMethod::Newton => "newton",
        SolveMethod::Ode => "ode",
        SolveMethod::Homogeneous => "homogeneous",
    }
}

pub fn warning_str(w: SolveWarning) -> &'static str {
    match w {
        SolveWarning::NotCertified => "not certified; homogeneous state returned",
        SolveWarning::NewtonFellBack => "newton found only the homogeneous root; ode route used",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullSection {
    pub abscissa: f64,
    pub verdict: String,
    pub approximate: bool,
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSection {
    pub abscissa: f64,
    pub representative: Vec<f64>,
    pub transverse: Vec<f64>,
    /// Distance between the block union and the full spectrum.
    pub consistency: f64,
    pub transverse_trace_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallGainSection {
    pub gamma_bar: Vec<f64>,
    pub rho_full: f64,
    pub rho_reduced: f64,
    pub perron_reduced: Vec<f64>,
    pub verdict: String,
    pub m_matrix: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySection {
    pub verdict: String,
    pub full: Option<FullSection>,
    pub blocks: Option<BlockSection>,
    pub small_gain: Option<SmallGainSection>,
    /// `|rho(P Gamma) - rho(Pbar Gammabar)|`.
    pub lifting_gap: Option<f64>,
}

impl StabilitySection {
    pub fn new(r: &StabilityReport) -> Self {
        let verdict = r
            .full
            .as_ref()
            .map(|f| f.verdict)
            .or_else(|| {
                r.blocks
                    .as_ref()
                    .map(|b| StabilityVerdict::from_abscissa(b.abscissa()))
            });
        // the small-gain test is only sufficient
        let verdict = match (verdict, &r.small_gain) {
            (Some(v), _) => v.as_str(),
            (None, Some(s)) if s.verdict == SmallGainVerdict::CertifiedStable => "STABLE",
            (None, Some(_)) => "INCONCLUSIVE",
            (None, None) => "NOT_COMPUTED",
        };
        Self {
            verdict: String::from(verdict),
            full: r.full.as_ref().map(|f| FullSection {
                abscissa: f.abscissa,
                verdict: String::from(f.verdict.as_str()),
                approximate: f.approximate,
                spectrum: f.spectrum.clone(),
            }),
            blocks: r.blocks.as_ref().map(|b| BlockSection {
                abscissa: b.abscissa(),
                representative: b.representative.clone(),
                transverse: b.transverse.clone(),
                consistency: b.consistency,
                transverse_trace_defect: b.transverse_trace_defect,
            }),
            small_gain: r.small_gain.as_ref().map(|s| SmallGainSection {
                gamma_bar: s.gamma_bar.clone(),
                rho_full: s.rho_full,
                rho_reduced: s.rho_reduced,
                perron_reduced: s.perron_reduced.clone(),
                verdict: String::from(s.verdict.as_str()),
                m_matrix: s.m_matrix,
            }),
            lifting_gap: r.lifting_gap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSection {
    pub outcome: String,
    pub note: Option<String>,
    pub converged: bool,
    pub final_time: f64,
    pub steps: usize,
    pub groups: Vec<Vec<usize>>,
    pub values: Vec<f64>,
    pub same_grouping: bool,
    /// Largest `|u_final - u_pattern|` over cells.
    pub deviation: f64,
}

impl SimulationSection {
    pub fn new(r: &VerifyReport) -> Self {
        let (groups, values) = r
            .empirical
            .as_ref()
            .map_or((Vec::new(), Vec::new()), |e| (e.groups.clone(), e.values.clone()));
        Self {
            outcome: String::from(r.outcome.as_str()),
            note: r.note.map(String::from),
            converged: r.trace.converged,
            final_time: r.trace.final_time,
            steps: r.trace.steps,
            groups,
            values,
            same_grouping: r.same_grouping,
            deviation: r.deviation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// `CERTIFIED_STABLE`, `INCONCLUSIVE`, `ASSUMPTION_FAILED`, `UNSTABLE`
    /// or `MARGINAL`.
    pub status: String,
    pub exit_code: i32,
}

impl Outcome {
    pub fn new(cert: Verdict, stability: &str) -> Self {
        let (status, exit_code) = match cert {
            Verdict::Inconclusive | Verdict::AssumptionFailed => (cert.as_str(), 2),
            Verdict::Certified => match stability {
                "STABLE" => ("CERTIFIED_STABLE", 0),
                "MARGINAL" => ("MARGINAL", 3),
                _ => ("UNSTABLE", 3),
            },
        };
        Self {
            status: String::from(status),
            exit_code,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageHash {
    pub stage: String,
    pub inputs: Vec<String>,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub schema: u32,
    pub tool: ToolInfo,
    /// Seconds since the epoch; the only field excluded from hashing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub graph: GraphSection,
    pub model: ModelFile,
    pub partition: PartitionSection,
    pub quotient: QuotientSection,
    pub certificate: CertificateSection,
    pub pattern: PatternSection,
    pub stability: StabilitySection,
    pub simulation: Option<SimulationSection>,
    pub outcome: Outcome,
    pub hashes: Vec<StageHash>,
}

impl AnalysisBundle {
    /// Recomputes the hash chain from the section contents.
    pub fn compute_hashes(&self) -> Vec<StageHash> {
        let mut out: Vec<StageHash> = Vec::new();
        fn push<T: Serialize>(out: &mut Vec<StageHash>, stage: &str, deps: &[&str], section: &T) {
            let inputs: Vec<String> = deps
                .iter()
                .map(|d| {
                    out.iter()
                        .find(|h| h.stage == *d)
                        .expect("upstream stage hashed first")
                        .output
                        .clone()
                })
                .collect();
            let body = to_canonical(section);
            let mut parts: Vec<&[u8]> = vec![stage.as_bytes()];
            parts.extend(inputs.iter().map(|s| s.as_bytes()));
            parts.push(&body);
            let output = sha256_hex(&parts);
            out.push(StageHash {
                stage: String::from(stage),
                inputs,
                output,
            });
        }
        let header = (self.schema, &self.tool);
        push(&mut out, "header", &[], &header);
        push(&mut out, "graph", &[], &self.graph);
        push(&mut out, "model", &[], &self.model);
        push(&mut out, "partition", &["graph"], &self.partition);
        push(&mut out, "quotient", &["partition"], &self.quotient);
        push(&mut out, "certificate", &["quotient", "model"], &self.certificate);
        push(&mut out, "pattern", &["certificate"], &self.pattern);
        push(&mut out, "stability", &["pattern"], &self.stability);
        push(&mut out, "simulation", &["pattern"], &self.simulation);
        push(
            &mut out,
            "outcome",
            &["header", "certificate", "stability", "simulation"],
            &self.outcome,
        );
        out
    }

    /// Checks the schema and that the recorded hashes match the contents.
    pub fn verify(&self) -> Result<(), String> {
        if self.schema != SCHEMA {
            return Err(format!("unsupported schema {}", self.schema));
        }
        let want = self.compute_hashes();
        if self.hashes.len() != want.len() {
            return Err(String::from("hash chain has the wrong length"));
        }
        for (got, want) in self.hashes.iter().zip(&want) {
            if got != want {
                return Err(format!("hash mismatch at stage `{}`", want.stage));
            }
        }
        Ok(())
    }
}

/// Where the analysed partition comes from.
#[derive(Debug, Clone)]
pub enum PartitionChoice {
    Given { partition: Partition, method: String },
    /// The two-colouring of a bipartite graph.
    Bipartite,
    /// Coarsest equitable refinement of the degree partition.
    Refine,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub strategy: Strategy,
    pub simulate: bool,
    pub eps: f64,
    pub timestamp: Option<u64>,
}

/// Degree classes, the seed used by `--auto-refine`.
///
/// Scaled-weight row sums are all one, so the single-class partition is
/// already equitable and would never split; degrees are the coarsest seed
/// that carries information.
pub fn degree_partition(g: &WeightedGraph) -> Partition {
    let keys: Vec<u64> = g.degrees().iter().map(|d| d.to_bits()).collect();
    Partition::from_labels(&keys)
}

pub fn choose_partition(
    g: &WeightedGraph,
    sa: &ScaledAdjacency,
    choice: &PartitionChoice,
) -> Result<(Partition, String), CliError> {
    match choice {
        PartitionChoice::Given { partition, method } => Ok((partition.clone(), method.clone())),
        PartitionChoice::Bipartite => {
            let (a, b) = g
                .bipartition()
                .at(Stage::Partition)?
                .ok_or_else(|| CliError::new(Stage::Partition, "graph is not bipartite"))?;
            let pi = Partition::new(g.n(), vec![a, b]).at(Stage::Partition)?;
            Ok((pi, String::from("bipartite")))
        }
        PartitionChoice::Refine => {
            let pi = coarsest_equitable_refinement(sa, &degree_partition(g)).at(Stage::Partition)?;
            Ok((pi, String::from("refine")))
        }
    }
}

/// Runs the whole pipeline.
pub fn analyze(
    g: &LoadedGraph,
    choice: &PartitionChoice,
    model: &HillMap,
    opts: &AnalyzeOptions,
) -> Result<AnalysisBundle, CliError> {
    let sa = g.graph.scaled_adjacency().at(Stage::Load)?;
    let (pi, method) = choose_partition(&g.graph, &sa, choice)?;
    log::info!("partition: {} classes ({method})", pi.r());

    let q = quotient(&sa, &pi).at(Stage::Quotient)?;
    let quotient_section = QuotientSection::new(&q)?;

    let cert = certify(&q, model).at(Stage::Certify)?;
    log::info!(
        "certificate: {} (lambda_r = {}, T'(u*) = {})",
        cert.verdict.as_str(),
        cert.lambda_r,
        cert.t_prime_star
    );

    let red = solve_reduced(&q, model, &cert, opts.strategy).at(Stage::Solve)?;
    let mut candidates = Vec::new();
    for z in std::iter::once(&red.z).chain(&red.alternatives) {
        let (u, _, residual_full) = lift_values(&sa, &pi, z, model).at(Stage::Lift)?;
        let s = full_jacobian_stability(&sa, model, &u).at(Stage::Stability)?;
        candidates.push(Candidate {
            z: z.clone(),
            residual_full,
            abscissa: s.abscissa,
            verdict: String::from(s.verdict.as_str()),
        });
    }
    let chosen = candidates
        .iter()
        .position(|c| c.verdict == StabilityVerdict::Stable.as_str())
        .unwrap_or(0);
    if chosen != 0 {
        log::info!("solver root is {}; using stable root {chosen}", candidates[0].verdict);
    }
    let z = candidates[chosen].z.clone();
    let (u, x, residual_full) = lift_values(&sa, &pi, &z, model).at(Stage::Lift)?;
    let pattern = PatternSolution {
        z: z.clone(),
        u,
        x,
        residual_reduced: if chosen == 0 {
            red.residual_reduced
        } else {
            reduced_residual(&q, model, &z)
        },
        residual_full,
        homogeneous: red.homogeneous,
        method: red.method,
        warning: red.warning,
        alternatives: red.alternatives.clone(),
    };

    let decomp = block_decompose(&sa, &pi).at(Stage::Stability)?;
    let report =
        stability_analyze(&sa, &q, Some(&decomp), model, &z, Methods::ALL).at(Stage::Stability)?;
    let stability = StabilitySection::new(&report);

    let simulation = if opts.simulate {
        let sim = SimOptions::for_tau(model.tau);
        let r = verify_certificate(&sa, &pi, model, &cert, &pattern, opts.eps, &sim)
            .at(Stage::Simulate)?;
        log::info!("simulation: {}", r.outcome.as_str());
        Some(SimulationSection::new(&r))
    } else {
        None
    };

    let outcome = Outcome::new(cert.verdict, &stability.verdict);
    let mut bundle = AnalysisBundle {
        schema: SCHEMA,
        tool: ToolInfo::current(),
        timestamp: opts.timestamp,
        graph: GraphSection::new(g),
        model: ModelFile::from_model(model),
        partition: PartitionSection {
            method,
            classes: pi.classes().to_vec(),
        },
        quotient: quotient_section,
        certificate: CertificateSection::new(&cert),
        pattern: PatternSection {
            z: pattern.z,
            u: pattern.u,
            x: pattern.x,
            residual_reduced: pattern.residual_reduced,
            residual_full: pattern.residual_full,
            homogeneous: pattern.homogeneous,
            method: String::from(method_str(pattern.method)),
            warning: pattern.warning.map(|w| String::from(warning_str(w))),
            selection: String::from(if chosen == 0 {
                "solver"
            } else {
                "stable_alternative"
            }),
            candidates,
        },
        stability,
        simulation,
        outcome,
        hashes: Vec::new(),
    };
    bundle.hashes = bundle.compute_hashes();
    Ok(bundle)
}

/// `||z - Pbar T(z)||_inf`.
fn reduced_residual(q: &QuotientModel, model: &HillMap, z: &[f64]) -> f64 {
    use patternq_core::StaticMap;
    let t: Vec<f64> = z.iter().map(|&v| model.value(v)).collect();
    q.pbar
        .mul_vec(&t)
        .iter()
        .zip(z)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
