//! Batch runner for stochastic proximal point experiments: JSON configs,
//! seeded replicas on a bounded worker pool, CSV traces.

pub mod config;
pub mod output;

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use serde_json::json;
use sppa_core::problems::{distance_to, ProblemKind};
use sppa_core::{run, DiagnosticsConfig, Error as CoreError, ProblemInstance, SampleStream};

pub use config::{BuildError, ConfigError, ExperimentConfig};
pub use output::ReplicaSummary;

/// Largest constraint violation accepted for a certified point.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric abort in replica {replica}: {source}")]
    Numeric { replica: u64, source: CoreError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("certificate failed: {0}")]
    Certificate(String),
}

impl CliError {
    /// 1 for I/O, 2 for invalid configuration, 3 for a numeric abort, 4 for a
    /// failed certificate.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Certificate(_) => 4,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn csv(path: &Path, e: csv::Error) -> Self {
        let source = match e.into_kind() {
            csv::ErrorKind::Io(io) => io,
            other => std::io::Error::other(format!("{other:?}")),
        };
        CliError::io(path, source)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    /// Replaces `master_seed`.
    pub seed: Option<u64>,
    /// Replaces `iterations`.
    pub iters: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub summaries: Vec<ReplicaSummary>,
    pub trace_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
}

/// Loads the config, applies command-line overrides and validates.
pub fn load_config(args: &RunArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(iters) = args.iters {
        config.iterations = iters;
    }
    config.validate()?;
    Ok(config)
}

/// `run`: every replica, one trace file each, then the summary.
pub fn cmd_run(args: &RunArgs) -> Result<RunOutcome, CliError> {
    let config = load_config(args)?;
    let instance = config.instance().map_err(|e| match e {
        BuildError::Config(c) => c,
        BuildError::Oracle(e) => ConfigError::Invalid { field: "problem".into(), message: e.to_string() },
    })?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    write_solution(&config, &instance, &args.out)?;
    run_experiment(&config, &instance, &args.out)
}

/// Runs the replicas of an already built experiment into `out`.
pub fn run_experiment(config: &ExperimentConfig, instance: &ProblemInstance, out: &Path) -> Result<RunOutcome, CliError> {
    let schedule = config.step_schedule()?;
    let x0 = config.start()?;
    let diagnostics = DiagnosticsConfig {
        stride: config.stride(),
        solution: instance.solution().cloned(),
        feasible_set: instance.feasible_set.clone(),
        objective: instance.objective.clone(),
        burn_in: config.burn_in,
    };
    let replicas = config.replicas;
    let workers = config
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, replicas.min(usize::MAX as u64) as usize);

    let next = AtomicU64::new(0);
    let failed = AtomicBool::new(false);
    let slots: Mutex<Vec<Option<Result<ReplicaSummary, CliError>>>> =
        Mutex::new((0..replicas).map(|_| None).collect());

    let run_one = |replica: u64| -> Result<ReplicaSummary, CliError> {
        let mut stream = SampleStream::for_replica(config.master_seed, replica);
        let report = run(&instance.family, &schedule, x0.clone(), config.iterations, &mut stream, &diagnostics)
            .map_err(|source| CliError::Numeric { replica, source })?;
        let path = out.join(config.output.trace_file(replica));
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        output::write_trace(BufWriter::new(file), &report.rows).map_err(|e| CliError::csv(&path, e))?;
        Ok(ReplicaSummary::from_report(replica, &report))
    };

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let replica = next.fetch_add(1, Ordering::Relaxed);
                if replica >= replicas {
                    break;
                }
                let result = run_one(replica);
                if result.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                slots.lock().expect("worker panicked")[replica as usize] = Some(result);
            });
        }
    });

    let mut summaries = Vec::with_capacity(replicas as usize);
    for slot in slots.into_inner().expect("worker panicked") {
        match slot {
            Some(Ok(s)) => summaries.push(s),
            Some(Err(e)) => return Err(e),
            // Skipped after another replica failed; that error comes first.
            None => continue,
        }
    }

    let summary_file = out.join(&config.output.summary);
    let file = File::create(&summary_file).map_err(|e| CliError::io(&summary_file, e))?;
    output::write_summary(BufWriter::new(file), x0.dim(), config.burn_in > 0, &summaries)
        .map_err(|e| CliError::csv(&summary_file, e))?;
    let trace_files = (0..replicas).map(|r| out.join(config.output.trace_file(r))).collect();
    Ok(RunOutcome { summaries, trace_files, summary_file })
}

fn kind_name(kind: &ProblemKind) -> &'static str {
    match kind {
        ProblemKind::Feasibility => "feasibility",
        ProblemKind::ConstrainedProgram { .. } => "constrained_program",
        ProblemKind::Saddle(_) => "saddle",
        ProblemKind::StronglyMonotone { .. } => "strongly_monotone",
        ProblemKind::Custom => "custom",
    }
}

fn write_solution(config: &ExperimentConfig, instance: &ProblemInstance, out: &Path) -> Result<(), CliError> {
    let path = out.join(&config.output.solution);
    let doc = json!({
        "schema_version": config::SCHEMA_VERSION,
        "kind": kind_name(&instance.kind),
        "dimension": instance.family.dim(),
        "members": instance.family.len(),
        "solution": instance.solution().map(|x| x.as_slice().to_vec()),
        "certificate_residual": instance.known_solution.as_ref().map(|s| s.residual),
        "master_seed": config.master_seed,
        "iterations": config.iterations,
        "replicas": config.replicas,
        "schedule": config.schedule,
    });
    let text = serde_json::to_string_pretty(&doc).expect("solution serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

/// What `verify` certified.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub kind: &'static str,
    pub dimension: usize,
    pub solution: Option<Vec<f64>>,
    /// Mean-operator or KKT residual at the solution.
    pub residual: Option<f64>,
    /// Largest distance to a member constraint set, when there are any.
    pub feasibility_residual: Option<f64>,
    /// Distance to the intersection computed by Dykstra's algorithm.
    pub intersection_distance: Option<f64>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind: {}", self.kind)?;
        writeln!(f, "dimension: {}", self.dimension)?;
        match &self.solution {
            Some(x) => {
                let coords: Vec<String> = x.iter().map(|&c| output::float(c)).collect();
                writeln!(f, "x*: [{}]", coords.join(", "))?;
            }
            None => writeln!(f, "x*: none (no reference oracle for this problem)")?,
        }
        if let Some(r) = self.residual {
            writeln!(f, "certificate residual: {}", output::float(r))?;
        }
        if let Some(r) = self.feasibility_residual {
            writeln!(f, "feasibility residual: {}", output::float(r))?;
        }
        if let Some(r) = self.intersection_distance {
            writeln!(f, "distance to intersection: {}", output::float(r))?;
        }
        Ok(())
    }
}

/// `verify`: builds the problem, re-runs its oracle and certificate checks,
/// and reports the certified solution without running the algorithm.
pub fn cmd_verify(config_path: &Path) -> Result<VerifyReport, CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let instance = config.instance().map_err(|e| match e {
        BuildError::Config(c) => CliError::Config(c),
        BuildError::Oracle(e) => CliError::Certificate(format!("{e} [{e:?}]")),
    })?;
    let residual = instance.verify().map_err(|e| CliError::Certificate(format!("{e} [{e:?}]")))?;
    let mut report = VerifyReport {
        kind: kind_name(&instance.kind),
        dimension: instance.family.dim(),
        solution: instance.solution().map(|x| x.as_slice().to_vec()),
        residual,
        feasibility_residual: None,
        intersection_distance: None,
    };
    if let (Some(set), Some(x)) = (&instance.feasible_set, instance.solution()) {
        let violation = set
            .members()
            .iter()
            .map(|m| m.project(x).map(|p| p.distance(x)))
            .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
            .map_err(|e| CliError::Certificate(e.to_string()))?;
        let distance = distance_to(set, x).map_err(|e| CliError::Certificate(format!("{e} [{e:?}]")))?;
        report.feasibility_residual = Some(violation);
        report.intersection_distance = Some(distance);
        if violation > FEASIBILITY_TOL || distance > FEASIBILITY_TOL {
            return Err(CliError::Certificate(format!(
                "x* violates the constraints by {violation:e} (distance to intersection {distance:e})"
            )));
        }
    }
    Ok(report)
}
