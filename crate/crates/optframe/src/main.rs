use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use optframe::{check_gradient, run_experiment, ExperimentSpec, RunError, Settings, SEED_ENV};

/// Run optimizer × problem experiments and write convergence traces.
///
/// Settings come from `--config` first; flags override them. Exit status:
/// 0 success, 1 optimizer failure, 2 unknown name or invalid setting,
/// 3 capability mismatch, 4 file I/O failure.
#[derive(Debug, Parser)]
#[command(name = "optframe", version)]
struct Cli {
    /// Config file of `key = value` lines using the flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem name (four_quadratics, sphere, rosenbrock, sparse_quadratic, logistic_regression, nogradient_toy).
    #[arg(long)]
    problem: Option<String>,
    /// Optimizer name (gradient_descent, sgd, modular_sgd, scd, lbfgs, simulated_annealing).
    #[arg(long)]
    optimizer: Option<String>,
    /// Step size.
    #[arg(long)]
    lr: Option<f64>,
    /// Mini-batch size for the SGD optimizers.
    #[arg(long)]
    batch: Option<usize>,
    /// Maximum iterations (steps for SGD and SCD, temperature blocks for annealing).
    #[arg(long)]
    iters: Option<u64>,
    /// Base seed; repetition r uses seed + r. Defaults to $OPTFRAME_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of repetitions.
    #[arg(long)]
    reps: Option<u32>,
    /// Starting point: zeros, ones, uniform(lo,hi) or a comma-separated vector.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Output directory for traces and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also trace every N-th SGD step.
    #[arg(long)]
    trace_every: Option<u64>,
    /// Check the problem's gradient against finite differences and print the report as JSON.
    #[arg(long)]
    check_gradient: bool,
    /// Record wall-clock time in traces (makes them non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Dimension of sphere, sparse_quadratic and nogradient_toy.
    #[arg(long)]
    dim: Option<usize>,
    /// Active-set size of sparse_quadratic components.
    #[arg(long)]
    k: Option<usize>,
    /// Rows of the synthetic logistic_regression dataset.
    #[arg(long)]
    rows: Option<usize>,
    /// Features of the synthetic logistic_regression dataset.
    #[arg(long)]
    features: Option<usize>,
    /// CSV dataset for logistic_regression (label in the last column).
    #[arg(long)]
    data: Option<PathBuf>,
    /// The dataset has a header row.
    #[arg(long)]
    header: bool,
    /// SGD update policy (vanilla, momentum, adagrad, adadelta, rmsprop, adam, adamax, smorms3).
    #[arg(long)]
    policy: Option<String>,
    /// L-BFGS memory.
    #[arg(long)]
    memory: Option<usize>,
    /// Warm-restart period in epochs for SGD; 0 disables restarts.
    #[arg(long)]
    restart_period: Option<f64>,
    /// Warm-restart period multiplier.
    #[arg(long)]
    restart_mult: Option<f64>,
    /// SCD coordinate order (cyclic or random).
    #[arg(long)]
    order: Option<String>,
    /// Annealing initial temperature.
    #[arg(long)]
    temperature: Option<f64>,
    /// Annealing cooling factor in (0, 1).
    #[arg(long)]
    cooling: Option<f64>,
    /// Annealing moves per temperature.
    #[arg(long)]
    moves: Option<u64>,
    /// Annealing proposal scale.
    #[arg(long)]
    move_scale: Option<f64>,
    /// Stop when the objective changes by less than this between full evaluations.
    #[arg(long)]
    objective_tolerance: Option<f64>,
    /// Stop when the gradient norm falls below this.
    #[arg(long)]
    gradient_tolerance: Option<f64>,
}

impl Cli {
    fn settings(&self) -> Settings {
        let mut s = Settings::new();
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                s.set(key, v).expect("flag names are valid keys");
            }
        };
        let text = |v: &Option<PathBuf>| v.as_ref().map(|p| p.display().to_string());
        put("problem", self.problem.clone());
        put("optimizer", self.optimizer.clone());
        put("lr", self.lr.map(|v| format!("{v:?}")));
        put("batch", self.batch.map(|v| v.to_string()));
        put("iters", self.iters.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("reps", self.reps.map(|v| v.to_string()));
        put("x0", self.x0.clone());
        put("out", text(&self.out));
        put("trace-every", self.trace_every.map(|v| v.to_string()));
        put("check-gradient", self.check_gradient.then(|| "true".into()));
        put("timing", self.timing.then(|| "true".into()));
        put("dim", self.dim.map(|v| v.to_string()));
        put("k", self.k.map(|v| v.to_string()));
        put("rows", self.rows.map(|v| v.to_string()));
        put("features", self.features.map(|v| v.to_string()));
        put("data", text(&self.data));
        put("header", self.header.then(|| "true".into()));
        put("policy", self.policy.clone());
        put("memory", self.memory.map(|v| v.to_string()));
        put("restart-period", self.restart_period.map(|v| format!("{v:?}")));
        put("restart-mult", self.restart_mult.map(|v| format!("{v:?}")));
        put("order", self.order.clone());
        put("temperature", self.temperature.map(|v| format!("{v:?}")));
        put("cooling", self.cooling.map(|v| format!("{v:?}")));
        put("moves", self.moves.map(|v| v.to_string()));
        put("move-scale", self.move_scale.map(|v| format!("{v:?}")));
        put("objective-tolerance", self.objective_tolerance.map(|v| format!("{v:?}")));
        put("gradient-tolerance", self.gradient_tolerance.map(|v| format!("{v:?}")));
        s
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentSpec, RunError> {
    let mut settings = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| RunError::Io { path: path.clone(), source })?;
            Settings::parse(&text)?
        }
        None => Settings::new(),
    };
    settings.merge(&cli.settings());
    if !settings.contains("seed") {
        if let Ok(seed) = std::env::var(SEED_ENV) {
            settings.set("seed", seed.trim())?;
        }
    }
    Ok(ExperimentSpec::from_settings(&settings)?)
}

fn run(cli: &Cli) -> Result<ExitCode, RunError> {
    let spec = resolve(cli)?;
    if spec.check_gradient {
        let report = check_gradient(&spec)?;
        let _ = writeln!(io::stdout(), "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        return Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }
    let summary = run_experiment(&spec)?;
    let mut out = io::stdout().lock();
    for rep in &summary.repetitions {
        let _ = writeln!(
            out,
            "rep {} seed {}: best objective {} ({}, {} iterations)",
            rep.rep, rep.seed, rep.best_objective, rep.termination, rep.iterations
        );
    }
    let _ = writeln!(out, "objective: {}", summary.best_objective_min);
    let _ = writeln!(out, "wrote {}", spec.out.join(optframe::experiment::SUMMARY_FILE).display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
