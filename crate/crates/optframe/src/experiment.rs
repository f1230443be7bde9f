//! Running experiments and writing their traces and summaries.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use optframe_core::function::{check_capabilities, CapabilityDiagnostic, CapabilitySet};
use optframe_core::optimizer::{Monitor, Silent, TracePoint};
use optframe_core::problems::ProblemError;
use optframe_core::validation::{self, ValidationError};
use optframe_core::{OptimizationResult, OptimizeError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::registry::{build_optimizer, build_problem, ProblemKind};
use crate::spec::{ExperimentSpec, Initializer, SpecError};

pub const TRACE_HEADER: [&str; 5] = ["iteration", "evaluations", "objective", "gradient_norm", "elapsed_seconds"];
pub const SUMMARY_FILE: &str = "summary.json";
pub const GRADIENT_CHECK_POINTS: usize = 20;
pub const GRADIENT_CHECK_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Capability(#[from] CapabilityDiagnostic),
    #[error("invalid problem: {0}")]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("optimization failed: {0}")]
    Optimize(OptimizeError),
    #[error("gradient check failed to run: {0}")]
    Validation(ValidationError),
}

impl From<OptimizeError> for RunError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Capability(d) => RunError::Capability(d),
            other => RunError::Optimize(other),
        }
    }
}

impl From<ValidationError> for RunError {
    fn from(e: ValidationError) -> Self {
        match e {
            ValidationError::Capability(d) => RunError::Capability(d),
            other => RunError::Validation(other),
        }
    }
}

impl RunError {
    /// Process exit status: 2 for unknown names and invalid settings, 3 for
    /// a capability mismatch, 4 for file I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Spec(_) | RunError::Problem(_) => 2,
            RunError::Capability(_) => 3,
            RunError::Data(_) | RunError::Io { .. } => 4,
            RunError::Optimize(_) | RunError::Validation(_) => 1,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// Formats a float with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a trace as CSV with a header row.
pub fn write_trace<W: Write>(out: W, trace: &[TracePoint]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for p in trace {
        w.write_record([
            p.iteration.to_string(),
            p.evaluations.to_string(),
            format_float(p.objective),
            format_float(p.gradient_norm),
            format_float(p.elapsed_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepSummary {
    pub rep: u32,
    pub seed: u64,
    pub initial_params: Vec<f64>,
    pub best_objective: f64,
    pub best_params: Vec<f64>,
    /// Objective in the last trace row.
    pub final_objective: f64,
    pub final_params: Vec<f64>,
    pub iterations: u64,
    pub evaluations: u64,
    pub termination: String,
    pub warnings: Vec<String>,
    pub trace_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    /// SHA-256 of `config`.
    pub spec_hash: String,
    /// The resolved spec in config-file syntax.
    pub config: String,
    pub problem: String,
    pub optimizer: String,
    pub seeds: Vec<u64>,
    pub repetitions: Vec<RepSummary>,
    pub best_objective_mean: f64,
    pub best_objective_min: f64,
}

/// Hex SHA-256 of `text`.
pub fn spec_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

struct WallClock(Instant);

impl Monitor for WallClock {
    fn elapsed_seconds(&mut self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

fn load_data(spec: &ExperimentSpec) -> Result<Option<Dataset>, RunError> {
    let Some(path) = spec.data.as_deref() else {
        return Ok(None);
    };
    if spec.problem != ProblemKind::LogisticRegression {
        return Err(SpecError::InvalidValue {
            key: "data".into(),
            value: path.display().to_string(),
            reason: format!("{} does not read a dataset", spec.problem),
        }
        .into());
    }
    let data = Dataset::load(path, spec.header)?;
    if let Initializer::Explicit(v) = &spec.x0 {
        if v.len() != data.features() + 1 {
            return Err(SpecError::InvalidValue {
                key: "x0".into(),
                value: spec.x0.to_string(),
                reason: format!("the dataset needs {} entries", data.features() + 1),
            }
            .into());
        }
    }
    Ok(Some(data))
}

/// Checks names, data and capabilities without running anything.
pub fn prepare(spec: &ExperimentSpec) -> Result<Option<Dataset>, RunError> {
    let data = load_data(spec)?;
    let problem = build_problem(spec, data.as_ref())?;
    let optimizer = build_optimizer(spec, spec.seed)?;
    optimizer.check(problem.as_ref())?;
    Ok(data)
}

fn run_rep(spec: &ExperimentSpec, data: Option<&Dataset>, rep: u32) -> Result<(RepSummary, OptimizationResult), RunError> {
    let seed = spec.rep_seed(rep);
    let mut problem = build_problem(spec, data)?;
    let optimizer = build_optimizer(spec, seed)?;
    let x0 = spec.x0.point(problem.dimension(), seed);
    let result = if spec.timing {
        optimizer.optimize_monitored(problem.as_mut(), &x0, &mut WallClock(Instant::now()))?
    } else {
        optimizer.optimize_monitored(problem.as_mut(), &x0, &mut Silent)?
    };
    let trace_file = format!("trace_rep{rep}.csv");
    let path = spec.out.join(&trace_file);
    let file = fs::File::create(&path).map_err(io_error(&path))?;
    write_trace(io::BufWriter::new(file), &result.trace)
        .map_err(|e| RunError::Io { path: path.clone(), source: e.into() })?;
    let summary = RepSummary {
        rep,
        seed,
        initial_params: x0,
        best_objective: result.best_objective,
        best_params: result.best_params.clone(),
        final_objective: result.trace.last().map_or(f64::NAN, |p| p.objective),
        final_params: result.final_params.clone(),
        iterations: result.iterations,
        evaluations: result.evaluations,
        termination: result.termination.as_str().to_string(),
        warnings: result.warnings.iter().map(ToString::to_string).collect(),
        trace_file,
    };
    Ok((summary, result))
}

/// Runs every repetition, writes `trace_rep{r}.csv` and `summary.json` under
/// `spec.out`, and returns the summary. Repetitions run on separate threads;
/// the summary lists them in repetition order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Summary, RunError> {
    let data = prepare(spec)?;
    fs::create_dir_all(&spec.out).map_err(io_error(&spec.out))?;
    let outcomes: Vec<Result<(RepSummary, OptimizationResult), RunError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..spec.reps)
            .map(|rep| {
                let data = data.as_ref();
                scope.spawn(move || run_rep(spec, data, rep))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("repetition thread panicked")).collect()
    });
    let mut repetitions = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        repetitions.push(outcome?.0);
    }
    let config = spec.echo();
    let bests: Vec<f64> = repetitions.iter().map(|r| r.best_objective).collect();
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        spec_hash: spec_hash(&config),
        config,
        problem: spec.problem.to_string(),
        optimizer: spec.optimizer.to_string(),
        seeds: repetitions.iter().map(|r| r.seed).collect(),
        best_objective_mean: bests.iter().sum::<f64>() / bests.len() as f64,
        best_objective_min: bests.iter().copied().fold(f64::INFINITY, f64::min),
        repetitions,
    };
    let path = spec.out.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&path, json + "\n").map_err(io_error(&path))?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckOutput {
    pub problem: String,
    pub seed: u64,
    pub step: f64,
    pub threshold: f64,
    pub points_checked: usize,
    pub max_relative_error: f64,
    pub worst_coordinate: usize,
    pub worst_point: Vec<f64>,
    pub passed: bool,
}

/// Compares the problem's gradient with central differences at
/// [`GRADIENT_CHECK_POINTS`] seeded points.
pub fn check_gradient(spec: &ExperimentSpec) -> Result<GradientCheckOutput, RunError> {
    let data = load_data(spec)?;
    let problem = build_problem(spec, data.as_ref())?;
    check_capabilities(problem.capabilities(), CapabilitySet::DIFFERENTIABLE, "check-gradient", problem.name())?;
    let report = validation::check_gradient(
        problem.as_ref(),
        GRADIENT_CHECK_POINTS,
        spec.seed,
        validation::DEFAULT_STEP,
        GRADIENT_CHECK_THRESHOLD,
    )?;
    Ok(GradientCheckOutput {
        problem: spec.problem.to_string(),
        seed: spec.seed,
        step: validation::DEFAULT_STEP,
        threshold: report.threshold,
        points_checked: report.points_checked,
        max_relative_error: report.max_relative_error,
        worst_coordinate: report.worst_coordinate,
        worst_point: report.worst_point,
        passed: report.passed,
    })
}
