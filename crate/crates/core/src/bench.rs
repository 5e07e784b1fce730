//! Experiment harness: seeded campaigns across workflows and algorithms,
//! stability statistics, and CSV/JSON reporting.
//!
//! A campaign builds one crisp instance per workflow to derive its
//! deadline, then for every repeat index freezes one fuzzification
//! realization that all algorithms share, so comparisons are paired.
//! Records are ordered by (workflow, algorithm, seed) regardless of
//! completion order; reruns with the same configuration are byte-identical
//! up to the timestamp header line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deadline::{deadline, CrispInstance};
use crate::optimizers::{
    adpso_run, ga_run, pso_run, rs_run, AdpsoParams, OptimizerError, OptimizerResult, TracePoint,
};
use crate::platform::{
    build_reference_platform, Bandwidths, InstanceConfig, PlatformConfig, PlatformError,
    ProblemInstance, Server,
};
use crate::rng::{derive_seed, tag};
use crate::simulator::{Fitness, Particle};
use crate::tfn::{FuzzificationParams, Tfn};
use crate::workflow::{parse_dax, parse_fixture_text, Workflow, WorkflowError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    FileNotFound {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid experiment configuration: {0}")]
    ConfigInvalid(String),
    #[error("sample variance needs at least two values, got {0}")]
    TooFewSamples(usize),
    #[error("cannot normalize an all-zero variance vector")]
    AllZero,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Platform(#[from] PlatformError),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Adpso,
    Pso,
    Ga,
    Rs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Adpso,
        Algorithm::Pso,
        Algorithm::Ga,
        Algorithm::Rs,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Adpso => "adpso",
            Algorithm::Pso => "pso",
            Algorithm::Ga => "ga",
            Algorithm::Rs => "rs",
        }
    }

    pub fn run(
        &self,
        inst: &ProblemInstance,
        params: &AdpsoParams,
    ) -> Result<OptimizerResult, OptimizerError> {
        match self {
            Algorithm::Adpso => adpso_run(inst, params),
            Algorithm::Pso => pso_run(inst, params),
            Algorithm::Ga => ga_run(inst, params),
            Algorithm::Rs => rs_run(inst, params),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "adpso" => Ok(Algorithm::Adpso),
            "pso" => Ok(Algorithm::Pso),
            "ga" => Ok(Algorithm::Ga),
            "rs" => Ok(Algorithm::Rs),
            other => Err(format!(
                "unknown algorithm '{other}' (expected adpso|pso|ga|rs)"
            )),
        }
    }
}

/// Campaign description; also the schema of the `bench` subcommand's JSON
/// configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub workflows: Vec<PathBuf>,
    /// Platform configuration file; the reference platform when absent.
    #[serde(default)]
    pub platform: Option<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    /// Independent repeats per (workflow, algorithm).
    pub repeats: usize,
    pub base_seed: u64,
    /// Population size per optimizer.
    pub population: usize,
    /// Iteration count per optimizer.
    pub iterations: usize,
    pub quantum_seconds: f64,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::FileNotFound {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| BenchError::ConfigInvalid(e.to_string()))
    }

    fn validate(&self) -> Result<(), BenchError> {
        if self.workflows.is_empty() {
            return Err(BenchError::ConfigInvalid("no workflows listed".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::ConfigInvalid("no algorithms listed".into()));
        }
        if self.repeats < 2 {
            return Err(BenchError::ConfigInvalid(format!(
                "repeats must be >= 2 for variance statistics, got {}",
                self.repeats
            )));
        }
        if !(self.quantum_seconds > 0.0) {
            return Err(BenchError::ConfigInvalid("quantum must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub workflow: String,
    pub task_count: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub best_cost: Tfn,
    pub fitness: Fitness,
    pub feasible: bool,
    pub makespan: Tfn,
    pub deadline_secs: f64,
    pub wall_secs: f64,
    pub trace: Vec<TracePoint>,
    pub best_particle: Particle,
}

/// Load a workflow from a `.dax`/`.xml` document or, for any other
/// extension, the line-oriented fixture format.
pub fn load_workflow(path: &Path) -> Result<Workflow, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::FileNotFound {
        path: path.to_path_buf(),
        source,
    })?;
    let by_ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let mut workflow = if matches!(by_ext, "dax" | "xml") || text.trim_start().starts_with('<') {
        parse_dax(&text)?
    } else {
        parse_fixture_text(&text)?
    };
    if workflow.name == "fixture" || workflow.name == "workflow" {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            workflow.name = stem.to_string();
        }
    }
    workflow.validate()?;
    Ok(workflow)
}

pub fn resolve_platform(
    cfg: &ExperimentConfig,
) -> Result<(Vec<Server>, Bandwidths, FuzzificationParams), BenchError> {
    match &cfg.platform {
        None => {
            let (servers, bw) = build_reference_platform();
            let fuzz = FuzzificationParams::new(0.85, 1.2, 1.0).expect("reference parameters");
            Ok((servers, bw, fuzz))
        }
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|source| BenchError::FileNotFound {
                    path: path.clone(),
                    source,
                })?;
            let config = PlatformConfig::from_json(&text)?;
            Ok(config.resolve()?)
        }
    }
}

/// Run the whole campaign. Records come back ordered by (workflow,
/// algorithm, seed); independent runs execute in parallel.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, BenchError> {
    cfg.validate()?;
    let (servers, bandwidths, fuzz) = resolve_platform(cfg)?;

    struct Prepared {
        name: String,
        task_count: usize,
        deadline_secs: f64,
        /// One shared fuzzification realization per repeat index.
        instances: Vec<Arc<ProblemInstance>>,
    }

    let mut prepared = Vec::with_capacity(cfg.workflows.len());
    for (wi, path) in cfg.workflows.iter().enumerate() {
        let workflow = load_workflow(path)?;
        let crisp = CrispInstance::build(&workflow, &servers, &bandwidths)?;
        let deadline_secs = deadline(&crisp)?;
        let instances = (0..cfg.repeats)
            .map(|rep| {
                let instance_seed = derive_seed(
                    cfg.base_seed,
                    &[tag::EXPERIMENT_INSTANCE, wi as u64, rep as u64],
                );
                let icfg = InstanceConfig {
                    fuzz,
                    billing_quantum_secs: cfg.quantum_seconds,
                    seed: instance_seed,
                    crisp_transfer_cost: false,
                };
                crate::platform::build_problem_instance(&workflow, &servers, &bandwidths, &icfg)
                    .map(|inst| Arc::new(inst.with_deadline(deadline_secs)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        prepared.push(Prepared {
            name: workflow.name.clone(),
            task_count: workflow.task_count(),
            deadline_secs,
            instances,
        });
    }

    // Output order: workflow (config order), algorithm (config order), seed.
    let descriptors: Vec<(usize, Algorithm, usize)> = prepared
        .iter()
        .enumerate()
        .flat_map(|(wi, _)| {
            cfg.algorithms
                .iter()
                .flat_map(move |&algo| (0..cfg.repeats).map(move |rep| (wi, algo, rep)))
        })
        .collect();

    descriptors
        .par_iter()
        .map(|&(wi, algorithm, rep)| {
            let p = &prepared[wi];
            let inst = &p.instances[rep];
            let seed = cfg.base_seed + rep as u64;
            let params = AdpsoParams::defaults(p.task_count, cfg.population, cfg.iterations, seed);
            let started = Instant::now();
            let result = algorithm.run(inst, &params)?;
            Ok(RunRecord {
                workflow: p.name.clone(),
                task_count: p.task_count,
                algorithm,
                seed,
                best_cost: result.best_cost,
                fitness: result.best_fitness,
                feasible: result.feasible,
                makespan: result.best_makespan,
                deadline_secs: p.deadline_secs,
                wall_secs: started.elapsed().as_secs_f64(),
                trace: result.trace,
                best_particle: result.best_particle,
            })
        })
        .collect()
}

/// Unbiased sample variance `sum((F_j - mean)^2) / (h - 1)`.
pub fn sample_variance(values: &[f64]) -> Result<f64, BenchError> {
    let h = values.len();
    if h < 2 {
        return Err(BenchError::TooFewSamples(h));
    }
    let mean = values.iter().sum::<f64>() / h as f64;
    Ok(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (h - 1) as f64)
}

/// Scale a variance vector to unit Euclidean norm.
pub fn normalize_variances(vars: &[f64]) -> Result<Vec<f64>, BenchError> {
    let norm = vars.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(BenchError::AllZero);
    }
    Ok(vars.iter().map(|v| v / norm).collect())
}

/// Size bucket by task count, used in the variance table.
pub fn size_category(task_count: usize) -> &'static str {
    if task_count < 40 {
        "tiny"
    } else if task_count < 75 {
        "small"
    } else {
        "medium"
    }
}

/// Format with six significant digits; large magnitudes switch to
/// scientific notation so the digit budget holds.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if mag >= 6 {
        format!("{x:.5e}")
    } else {
        format!("{:.*}", (5 - mag).max(0) as usize, x)
    }
}

/// One summary row per (workflow, algorithm): the best run's cost triple
/// and the componentwise mean over repeats, each with its defuzzified
/// value; a `*` flags rows built from deadline-violating runs.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub workflow: String,
    pub algorithm: Algorithm,
    pub optimal_cost: [f64; 3],
    pub optimal_fitness: f64,
    pub optimal_infeasible: bool,
    pub mean_cost: [f64; 3],
    pub mean_fitness: f64,
    pub any_infeasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceRow {
    pub size: &'static str,
    pub workflow: String,
    pub algorithm: Algorithm,
    pub normalized_variance: f64,
}

/// Group records by (workflow, algorithm) preserving record order.
fn grouped(records: &[RunRecord]) -> Vec<((&str, Algorithm), Vec<&RunRecord>)> {
    let mut groups: Vec<((&str, Algorithm), Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let key = (r.workflow.as_str(), r.algorithm);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
}

pub fn summarize(records: &[RunRecord], eta: f64) -> Vec<SummaryRow> {
    grouped(records)
        .into_iter()
        .map(|((workflow, algorithm), runs)| {
            let best = runs
                .iter()
                .min_by(|a, b| a.fitness.cmp(&b.fitness))
                .expect("groups are non-empty");
            let n = runs.len() as f64;
            let mean_cost = Tfn::new(
                runs.iter().map(|r| r.best_cost.lower()).sum::<f64>() / n,
                runs.iter().map(|r| r.best_cost.modal()).sum::<f64>() / n,
                runs.iter().map(|r| r.best_cost.upper()).sum::<f64>() / n,
            )
            .expect("componentwise mean of valid triples is valid");
            SummaryRow {
                workflow: workflow.to_string(),
                algorithm,
                optimal_cost: [
                    best.best_cost.lower(),
                    best.best_cost.modal(),
                    best.best_cost.upper(),
                ],
                optimal_fitness: best.best_cost.defuzzify(eta),
                optimal_infeasible: !best.feasible,
                mean_cost: [mean_cost.lower(), mean_cost.modal(), mean_cost.upper()],
                mean_fitness: mean_cost.defuzzify(eta),
                any_infeasible: runs.iter().any(|r| !r.feasible),
            }
        })
        .collect()
}

pub fn variance_table(records: &[RunRecord]) -> Result<Vec<VarianceRow>, BenchError> {
    let mut workflows: Vec<(&str, usize)> = Vec::new();
    for r in records {
        if !workflows.iter().any(|(w, _)| *w == r.workflow.as_str()) {
            workflows.push((r.workflow.as_str(), r.task_count));
        }
    }
    let mut rows = Vec::new();
    for (workflow, task_count) in workflows {
        let mut algorithms: Vec<Algorithm> = Vec::new();
        for r in records.iter().filter(|r| r.workflow == workflow) {
            if !algorithms.contains(&r.algorithm) {
                algorithms.push(r.algorithm);
            }
        }
        let vars = algorithms
            .iter()
            .map(|&a| {
                let fits: Vec<f64> = records
                    .iter()
                    .filter(|r| r.workflow == workflow && r.algorithm == a)
                    .map(|r| r.fitness.value)
                    .collect();
                sample_variance(&fits)
            })
            .collect::<Result<Vec<_>, _>>()?;
        // A fully converged campaign has nothing to normalize; report
        // zeros rather than failing the emit.
        let normalized = normalize_variances(&vars).unwrap_or_else(|_| vec![0.0; vars.len()]);
        let size = size_category(task_count);
        for (a, v) in algorithms.iter().zip(normalized) {
            rows.push(VarianceRow {
                size,
                workflow: workflow.to_string(),
                algorithm: *a,
                normalized_variance: v,
            });
        }
    }
    Ok(rows)
}

fn timestamp_header() -> String {
    let unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated_unix {unix}\n")
}

pub fn traces_csv(records: &[RunRecord]) -> String {
    let mut out = timestamp_header();
    out.push_str("workflow,algorithm,seed,iteration,best_cost,best_upper_time,feasible\n");
    for r in records {
        for (i, pt) in r.trace.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.workflow,
                r.algorithm,
                r.seed,
                i,
                sig6(pt.best_cost),
                sig6(pt.best_upper_time),
                pt.feasible_found,
            ));
        }
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = timestamp_header();
    out.push_str(
        "workflow,algorithm,opt_cost_l,opt_cost_m,opt_cost_u,opt_fitness,opt_flag,\
         mean_cost_l,mean_cost_m,mean_cost_u,mean_fitness,mean_flag\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.workflow,
            r.algorithm,
            sig6(r.optimal_cost[0]),
            sig6(r.optimal_cost[1]),
            sig6(r.optimal_cost[2]),
            sig6(r.optimal_fitness),
            if r.optimal_infeasible { "*" } else { "" },
            sig6(r.mean_cost[0]),
            sig6(r.mean_cost[1]),
            sig6(r.mean_cost[2]),
            sig6(r.mean_fitness),
            if r.any_infeasible { "*" } else { "" },
        ));
    }
    out
}

pub fn variance_csv(rows: &[VarianceRow]) -> String {
    let mut out = timestamp_header();
    out.push_str("size,workflow,algorithm,normalized_variance\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.size,
            r.workflow,
            r.algorithm,
            sig6(r.normalized_variance)
        ));
    }
    out
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonMirror<'a> {
    generated_unix: u64,
    summary: &'a [SummaryRow],
    variances: &'a [VarianceRow],
    runs: Vec<JsonRun<'a>>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonRun<'a> {
    workflow: &'a str,
    algorithm: Algorithm,
    seed: u64,
    best_cost: [f64; 3],
    fitness_value: f64,
    feasible: bool,
    makespan: [f64; 3],
    deadline_secs: f64,
    trace: Vec<[f64; 2]>,
    trace_feasible: Vec<bool>,
}

/// Write `traces.csv`, `summary.csv`, `variance.csv`, and `results.json`
/// into the configured output directory.
pub fn emit_outputs(records: &[RunRecord], cfg: &ExperimentConfig) -> Result<(), BenchError> {
    if records.is_empty() {
        return Err(BenchError::ConfigInvalid("no records to emit".into()));
    }
    let (_, _, fuzz) = resolve_platform(cfg)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let summary = summarize(records, fuzz.eta);
    let variances = variance_table(records)?;

    std::fs::write(cfg.out_dir.join("traces.csv"), traces_csv(records))?;
    std::fs::write(cfg.out_dir.join("summary.csv"), summary_csv(&summary))?;
    std::fs::write(cfg.out_dir.join("variance.csv"), variance_csv(&variances))?;

    let mirror = JsonMirror {
        generated_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        summary: &summary,
        variances: &variances,
        runs: records
            .iter()
            .map(|r| JsonRun {
                workflow: &r.workflow,
                algorithm: r.algorithm,
                seed: r.seed,
                best_cost: [
                    r.best_cost.lower(),
                    r.best_cost.modal(),
                    r.best_cost.upper(),
                ],
                fitness_value: r.fitness.value,
                feasible: r.feasible,
                makespan: [r.makespan.lower(), r.makespan.modal(), r.makespan.upper()],
                deadline_secs: r.deadline_secs,
                trace: r
                    .trace
                    .iter()
                    .map(|p| [p.best_cost, p.best_upper_time])
                    .collect(),
                trace_feasible: r.trace.iter().map(|p| p.feasible_found).collect(),
            })
            .collect(),
    };
    std::fs::write(
        cfg.out_dir.join("results.json"),
        serde_json::to_string_pretty(&mirror).expect("mirror serializes"),
    )?;
    Ok(())
}
