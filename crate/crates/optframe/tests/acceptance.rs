//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use optframe::registry::{OptimizerKind, ProblemKind};
use optframe::{run_experiment, ExperimentSpec, Settings};
use optframe_core::function::adapter::{adapt_separable_to_full, evaluate_full, gradient_full};
use optframe_core::function::{BatchRange, CapabilitySet, Function, FunctionError, Gradient};
use optframe_core::optimizer::{CoordinateOrder, GradientDescent, Lbfgs, ModularSgd, Scd, Sgd};
use optframe_core::policy::{PolicyKind, PolicyState};
use optframe_core::problems::{AbsoluteSum, FourQuadratics, LogisticRegression, Rosenbrock, SparseQuadratic, Sphere};
use optframe_core::validation::{brute_force_grid_min, check_gradient, finite_difference_gradient, DEFAULT_STEP};
use optframe_core::{seeded_rng, OptimizeError, Optimizer, Termination};
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn golden_reproduction() -> Outcome {
    let (result, elapsed) = timed(|| ModularSgd::default().minimize(&mut FourQuadratics::new(), &[0.0; 4]));
    let r = result.map_err(|e| e.to_string())?;
    let err = (r.best_objective - 123.75).abs();
    ensure!(err <= 1e-6, "objective {} is {err:e} from 123.75", r.best_objective);
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("objective: {} (|error| {err:.1e}, {elapsed:.2?})", r.best_objective))
}

/// Evaluate-only problem counting every method call.
struct Counting {
    inner: AbsoluteSum,
    calls: std::cell::Cell<u64>,
}

impl Function for Counting {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn capabilities(&self) -> CapabilitySet {
        self.inner.capabilities()
    }
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64, FunctionError> {
        self.calls.set(self.calls.get() + 1);
        self.inner.evaluate(x)
    }
    fn gradient(&self, _: &[f64]) -> Result<Gradient, FunctionError> {
        self.calls.set(self.calls.get() + 1);
        Err(FunctionError::Unsupported(optframe_core::function::Method::Gradient))
    }
}

fn compile_fail_check() -> Result<(), String> {
    let ui = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/ui/lbfgs_without_gradient.stderr");
    let expected = std::fs::read_to_string(&ui).map_err(|e| format!("{}: {e}", ui.display()))?;
    ensure!(expected.contains("Gradient"), "expected compiler output does not name Gradient");
    let previous = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let outcome = panic::catch_unwind(|| {
        let t = trybuild::TestCases::new();
        t.compile_fail("tests/ui/lbfgs_without_gradient.rs");
    });
    panic::set_hook(previous);
    outcome.map_err(|_| "compile-fail test did not produce the expected error".to_string())
}

fn capability_diagnostic() -> Outcome {
    let mut f = Counting { inner: AbsoluteSum::new(2).unwrap(), calls: Default::default() };
    let err = Lbfgs::default().optimize(&mut f, &[1.0, -1.0]);
    let message = match err {
        Err(OptimizeError::Capability(d)) => d.to_string(),
        other => return Err(format!("expected a capability rejection, got {other:?}")),
    };
    ensure!(message.contains("Gradient"), "message lacks `Gradient`: {message}");
    ensure!(f.calls.get() == 0, "{} evaluations before rejection", f.calls.get());
    compile_fail_check()?;
    Ok(format!("runtime: \"{message}\"; 0 evaluations; compile-fail test matched"))
}

fn gradient_oracle_suite() -> Outcome {
    let problems: Vec<(Box<dyn Function>, bool)> = vec![
        (Box::new(FourQuadratics::new()), true),
        (Box::new(Sphere::new(5).unwrap()), true),
        (Box::new(SparseQuadratic::new(vec![1.0, 1.5, 2.0, 2.5, 1.0, 1.5, 2.0, 2.5], 2).unwrap()), true),
        (Box::new(Rosenbrock::new()), false),
        (Box::new(LogisticRegression::synthetic(100, 3, 0).unwrap()), false),
    ];
    let mut details = Vec::new();
    let (outcome, elapsed) = timed(|| -> Result<(), String> {
        for (f, quadratic) in &problems {
            let threshold = if *quadratic { 1e-8 } else { 1e-5 };
            let report = check_gradient(f.as_ref(), 20, 0, DEFAULT_STEP, threshold).map_err(|e| e.to_string())?;
            ensure!(report.passed, "{}: max relative error {:e} >= {threshold:e}", f.name(), report.max_relative_error);
            if *quadratic {
                // The relative measure divides by max(1, |a|, |b|); check the
                // absolute difference at the same 20 points too.
                let mut rng = seeded_rng(0);
                for _ in 0..20 {
                    let x: Vec<f64> = (0..f.dimension()).map(|_| rng.random_range(-2.0..=2.0)).collect();
                    let analytic = gradient_full(f.as_ref(), &x).map_err(|e| e.to_string())?.into_dense();
                    let numeric = finite_difference_gradient(f.as_ref(), &x, DEFAULT_STEP).map_err(|e| e.to_string())?;
                    let abs = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    ensure!(abs < 1e-8, "{}: absolute error {abs:e} at {x:?}", f.name());
                }
            }
            details.push(format!("{} {:.1e}", f.name(), report.max_relative_error));
        }
        Ok(())
    });
    outcome?;
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("{} ({elapsed:.2?})", details.join(", ")))
}

fn partition_identities(f: &mut dyn Function, partitions: u64, label: &str) -> Result<f64, String> {
    let n = f.num_functions().map_err(|e| e.to_string())?;
    let d = f.dimension();
    let mut worst: f64 = 0.0;
    for p in 0..partitions {
        let mut rng = seeded_rng(1000 + p);
        f.shuffle(rng.random()).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut cuts: Vec<usize> = (0..rng.random_range(0..n)).map(|_| rng.random_range(1..n)).collect();
        cuts.push(0);
        cuts.push(n);
        cuts.sort_unstable();
        cuts.dedup();
        let mut value = 0.0;
        let mut grad = vec![0.0; d];
        for w in cuts.windows(2) {
            let range = BatchRange::new(w[0], w[1] - w[0]);
            value += f.evaluate_batch(&x, range).map_err(|e| e.to_string())?;
            f.gradient_batch(&x, range).map_err(|e| e.to_string())?.add_scaled_to(&mut grad, 1.0);
        }
        let full = evaluate_full(&*f, &x).map_err(|e| e.to_string())?;
        let full_grad = gradient_full(&*f, &x).map_err(|e| e.to_string())?.into_dense();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        worst = worst.max(rel(value, full));
        for (a, b) in grad.iter().zip(&full_grad) {
            worst = worst.max(rel(*a, *b));
        }
        ensure!(worst <= 1e-10, "{label}: partition {p} ({} batches) off by {worst:e}", cuts.len() - 1);
    }
    Ok(worst)
}

fn partition_suite() -> Outcome {
    let fq = partition_identities(&mut FourQuadratics::new(), 50, "four_quadratics")?;
    // The closed form checks the full objective itself.
    let f = FourQuadratics::new();
    let x = [0.5, -1.0, 2.0, 3.0];
    let closed: f64 = (0..4).map(|i| x[i] * x[i] + f.coefficients()[i] * x[i] + f.intercepts()[i]).sum();
    let adapted = adapt_separable_to_full(FourQuadratics::new()).unwrap().evaluate(&x).map_err(|e| e.to_string())?;
    ensure!((closed - adapted).abs() <= 1e-12, "closed form {closed} vs {adapted}");
    let lr = partition_identities(&mut LogisticRegression::synthetic(100, 3, 42).unwrap(), 50, "logistic_regression")?;
    Ok(format!("50 partitions each; worst relative error four_quadratics {fq:.1e}, logistic_regression {lr:.1e}"))
}

fn record_iterates(opt: &dyn Optimizer, f: &mut dyn Function, x0: &[f64]) -> Result<Vec<Vec<f64>>, String> {
    let mut seen = Vec::new();
    let mut monitor = |_: u64, x: &[f64]| seen.push(x.to_vec());
    opt.optimize_monitored(f, x0, &mut monitor).map_err(|e| e.to_string())?;
    Ok(seen)
}

fn full_batch_equivalence() -> Outcome {
    let (lr, n) = (0.02, 4);
    let sgd = Sgd::new(lr, n).with_termination(Termination::iterations_only(100));
    let gd = GradientDescent::new(lr / n as f64).with_termination(Termination::iterations_only(100));
    let a = record_iterates(&sgd, &mut FourQuadratics::new(), &[0.0; 4])?;
    let mut adapted = adapt_separable_to_full(FourQuadratics::new()).unwrap();
    let b = record_iterates(&gd, &mut adapted, &[0.0; 4])?;
    ensure!(a.len() == 100 && b.len() == 100, "iterate counts {} and {}", a.len(), b.len());
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(&b) {
        for (p, q) in x.iter().zip(y) {
            worst = worst.max((p - q).abs());
        }
    }
    ensure!(worst <= 1e-12, "max coordinate difference {worst:e}");
    Ok(format!("100 iterates, max coordinate difference {worst:.1e} (SGD lr {lr} on the batch mean, GD lr {} on the sum)", lr / n as f64))
}

fn lbfgs_benchmarks() -> Outcome {
    let ((rosen, sphere), elapsed) = timed(|| {
        let lbfgs = Lbfgs::default().with_termination(
            Termination::default().with_max_iterations(100).with_objective_tolerance(0.0).with_gradient_tolerance(0.0),
        );
        let rosen = lbfgs.minimize(&mut Rosenbrock::new(), &[-1.2, 1.0]);
        let sphere = Lbfgs::default()
            .with_termination(Termination::iterations_only(3))
            .minimize(&mut Sphere::new(10).unwrap(), &[1.0; 10]);
        (rosen, sphere)
    });
    let rosen = rosen.map_err(|e| e.to_string())?;
    let sphere = sphere.map_err(|e| e.to_string())?;
    // First iteration at which f < 1e-8.
    let hit = rosen.trace.iter().find(|p| p.objective < 1e-8).map(|p| p.iteration);
    ensure!(hit.is_some_and(|i| i <= 100), "Rosenbrock best {} after {} iterations", rosen.best_objective, rosen.iterations);
    let monotone = rosen.trace.windows(2).all(|w| w[1].objective <= w[0].objective);
    ensure!(monotone, "accepted objectives increased");
    let norm = sphere.best_params.iter().map(|v| v * v).sum::<f64>().sqrt();
    ensure!(norm < 1e-8 && sphere.iterations <= 3, "sphere |x| = {norm:e} after {} iterations", sphere.iterations);
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!(
        "Rosenbrock f < 1e-8 at iteration {}, monotone; Sphere |x| = {norm:.1e} in {} iterations ({elapsed:.2?})",
        hit.unwrap(),
        sphere.iterations
    ))
}

fn scd_correctness() -> Outcome {
    let scd = Scd::new(0.25, CoordinateOrder::Cyclic).with_termination(Termination::iterations_only(400));
    let mut f = FourQuadratics::new();
    let x0 = [0.0; 4];
    let mut seen = Vec::new();
    let mut monitor = |_: u64, x: &[f64]| seen.push(x.to_vec());
    let r = scd.optimize_monitored(&mut f, &x0, &mut monitor).map_err(|e| e.to_string())?;
    let err = (r.best_objective - 123.75).abs();
    ensure!(err <= 1e-6 && r.iterations <= 400, "objective {} after {} steps", r.best_objective, r.iterations);
    let mut prev = x0.to_vec();
    for (step, x) in seen.iter().enumerate() {
        let j = step % 4;
        let support: Vec<usize> = f.partial_gradient(&prev, j).map_err(|e| e.to_string())?.indices().collect();
        for i in (0..4).filter(|i| !support.contains(i)) {
            ensure!(x[i].to_bits() == prev[i].to_bits(), "step {} changed off-support coordinate {i}", step + 1);
        }
        prev = x.clone();
    }
    Ok(format!("objective {} (|error| {err:.1e}) in {} steps; {} steps off-support bitwise unchanged", r.best_objective, r.iterations, seen.len()))
}

fn grid_oracle() -> Outcome {
    let f = adapt_separable_to_full(FourQuadratics::new()).unwrap();
    let m = brute_force_grid_min(&f, &[-10.0; 4], &[10.0; 4], 0.5).map_err(|e| e.to_string())?;
    ensure!(m.params == [2.0, 1.0, 1.5, 4.0] && m.objective == 123.75, "got ({:?}, {})", m.params, m.objective);
    Ok(format!("({:?}, {}) over {} points", m.params, m.objective, m.points_evaluated))
}

fn spec_for(problem: ProblemKind, optimizer: OptimizerKind, extra: &[(&str, &str)], out: &Path) -> ExperimentSpec {
    let mut s = Settings::new();
    s.set("problem", problem.name()).unwrap();
    s.set("optimizer", optimizer.name()).unwrap();
    s.set("seed", "2024").unwrap();
    s.set("out", out.display().to_string()).unwrap();
    for (k, v) in extra {
        s.set(k, *v).unwrap();
    }
    ExperimentSpec::from_settings(&s).unwrap()
}

fn determinism() -> Outcome {
    let runs: Vec<(ProblemKind, OptimizerKind, Vec<(&str, &str)>)> = vec![
        (ProblemKind::Sphere, OptimizerKind::GradientDescent, vec![("lr", "0.1"), ("x0", "uniform(-2,2)"), ("dim", "5")]),
        (ProblemKind::LogisticRegression, OptimizerKind::Sgd, vec![("batch", "7"), ("iters", "400"), ("policy", "adam"), ("restart-period", "1"), ("restart-mult", "2"), ("trace-every", "3")]),
        (ProblemKind::FourQuadratics, OptimizerKind::ModularSgd, vec![]),
        (ProblemKind::SparseQuadratic, OptimizerKind::Scd, vec![("order", "random"), ("lr", "0.2"), ("iters", "300"), ("x0", "ones")]),
        (ProblemKind::Rosenbrock, OptimizerKind::Lbfgs, vec![("x0", "-1.2,1")]),
        (ProblemKind::NogradientToy, OptimizerKind::SimulatedAnnealing, vec![("x0", "uniform(-3,3)"), ("iters", "50")]),
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (i, (problem, optimizer, extra)) in runs.into_iter().enumerate() {
        let mut extra = extra;
        extra.push(("reps", "2"));
        let traces: Vec<Vec<Vec<u8>>> = (0..2)
            .map(|attempt| -> Result<Vec<Vec<u8>>, String> {
                let dir = tmp.path().join(format!("{i}-{attempt}"));
                let spec = spec_for(problem, optimizer, &extra, &dir);
                let summary = run_experiment(&spec).map_err(|e| e.to_string())?;
                summary
                    .repetitions
                    .iter()
                    .map(|r| std::fs::read(dir.join(&r.trace_file)).map_err(|e| e.to_string()))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        ensure!(traces[0] == traces[1], "{optimizer} on {problem}: traces differ between identical runs");
        files += traces[0].len();
    }
    Ok(format!("6 optimizers, {files} trace files byte-identical across reruns"))
}

fn policy_first_step() -> Outcome {
    let mut rng = seeded_rng(10);
    let mut checked = 0;
    for kind in PolicyKind::ALL {
        let adaptive = !matches!(kind, PolicyKind::Vanilla | PolicyKind::Momentum);
        for trial in 0..200 {
            let dim = 1 + trial % 7;
            let lr = 10f64.powf(rng.random_range(-4.0..0.0));
            let g: Vec<f64> = (0..dim)
                .map(|_| {
                    let magnitude = 10f64.powf(rng.random_range(-6.0..6.0));
                    if rng.random::<bool>() { magnitude } else { -magnitude }
                })
                .collect();
            let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut state = PolicyState::new(kind.default_config(), dim).map_err(|e| e.to_string())?;
            let (x, _) = state.updated(&x0, lr, &g).map_err(|e| e.to_string())?;
            for i in 0..dim {
                let step = x[i] - x0[i];
                ensure!(step != 0.0 && step.signum() == -g[i].signum(), "{kind}: g = {} moved by {step}", g[i]);
                if adaptive {
                    ensure!(step.abs() <= lr * (1.0 + 1e-6), "{kind}: |step| {} > lr {lr}", step.abs());
                }
                checked += 1;
            }
        }
    }
    Ok(format!("8 policies, {checked} coordinates"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 golden reproduction", golden_reproduction),
        ("2 capability diagnostic", capability_diagnostic),
        ("3 gradient oracle suite", gradient_oracle_suite),
        ("4 adapter/partition suite", partition_suite),
        ("5 full-batch equivalence", full_batch_equivalence),
        ("6 L-BFGS benchmarks", lbfgs_benchmarks),
        ("7 SCD correctness", scd_correctness),
        ("8 grid oracle", grid_oracle),
        ("9 determinism", determinism),
        ("10 update-policy first step", policy_first_step),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {}", p.downcast_ref::<String>().cloned().unwrap_or_default())));
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
