#![allow(clippy::type_complexity)]

use std::cell::Cell;

use optframe_core::function::adapter::{adapt_separable_to_full, evaluate_full};
use optframe_core::function::{CapabilitySet, Function, FunctionError, Gradient};
use optframe_core::optimizer::{
    AnnealingSchedule, CoordinateOrder, GradientDescent, Lbfgs, ModularSgd, Scd, Sgd,
    SimulatedAnnealing, WarmRestarts, Warning,
};
use optframe_core::problems::{AbsoluteSum, FourQuadratics, LogisticRegression, Rosenbrock, Sphere};
use optframe_core::{OptimizationResult, OptimizeError, Optimizer, Termination, TerminationReason};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Records every iterate a run produces.
fn iterates(opt: &dyn Optimizer, f: &mut dyn Function, x0: &[f64]) -> (OptimizationResult, Vec<Vec<f64>>) {
    let mut seen = Vec::new();
    let mut monitor = |_: u64, x: &[f64]| seen.push(x.to_vec());
    let result = opt.optimize_monitored(f, x0, &mut monitor).unwrap();
    (result, seen)
}

#[test]
fn gd_sphere_contracts_below_1e_10() {
    let gd = GradientDescent::new(0.1).with_termination(Termination::iterations_only(200));
    let r = gd.minimize(&mut Sphere::new(2).unwrap(), &[4.0, -4.0]).unwrap();
    assert!(r.best_objective < 1e-10, "{}", r.best_objective);
    assert!(r.iterations <= 200);
}

#[test]
fn gd_one_step_to_exact_minimum() {
    let gd = GradientDescent::new(0.5).with_termination(Termination::iterations_only(1));
    let r = gd.minimize(&mut Sphere::new(1).unwrap(), &[9.0]).unwrap();
    assert_eq!(r.final_params, vec![0.0]);
    assert_eq!(r.best_objective, 0.0);
    assert_eq!(r.iterations, 1);
}

#[test]
fn gd_on_adapted_four_quadratics() {
    let gd = GradientDescent::new(0.02).with_termination(Termination::iterations_only(2000));
    let mut f = adapt_separable_to_full(FourQuadratics::new()).unwrap();
    let r = gd.minimize(&mut f, &[0.0; 4]).unwrap();
    assert!((r.best_objective - 123.75).abs() < 1e-6, "{}", r.best_objective);
}

#[test]
fn gd_divergence_is_rejected() {
    // |1 - 2 lr| = 2 grows the iterate threefold per step.
    let gd = GradientDescent::new(1.5).with_termination(Termination::iterations_only(10_000));
    let r = gd.minimize(&mut Sphere::new(2).unwrap(), &[1.0, 1.0]).unwrap();
    assert_eq!(r.termination, TerminationReason::Rejected);
    assert_eq!(r.best_params, vec![1.0, 1.0]);
    assert!(r.iterations < 300);
}

#[test]
fn gd_lr_one_oscillates_without_progress() {
    let gd = GradientDescent::new(1.0).with_termination(Termination::iterations_only(50));
    let r = gd.minimize(&mut Sphere::new(1).unwrap(), &[3.0]).unwrap();
    assert_eq!(r.best_objective, 9.0);
    assert!(r.trace.iter().all(|p| p.objective == 9.0));
}

#[test]
fn golden_four_quadratics() {
    let r = ModularSgd::default().minimize(&mut FourQuadratics::new(), &[0.0; 4]).unwrap();
    assert!((r.best_objective - 123.75).abs() < 1e-6, "{}", r.best_objective);
}

#[test]
fn epoch_sgd_on_four_quadratics() {
    let sgd = Sgd::new(0.02, 1).with_termination(Termination::default().with_max_iterations(5000));
    let r = sgd.minimize(&mut FourQuadratics::new(), &[0.0; 4]).unwrap();
    assert!((r.best_objective - 123.75).abs() < 1e-6, "{}", r.best_objective);
}

#[test]
fn full_batch_sgd_matches_gradient_descent() {
    let lr = 0.02;
    let n = 4.0;
    let sgd = Sgd::new(lr, 4).with_termination(Termination::iterations_only(100));
    let gd = GradientDescent::new(lr / n).with_termination(Termination::iterations_only(100));
    let (_, a) = iterates(&sgd, &mut FourQuadratics::new(), &[0.0; 4]);
    let mut adapted = adapt_separable_to_full(FourQuadratics::new()).unwrap();
    let (_, b) = iterates(&gd, &mut adapted, &[0.0; 4]);
    assert_eq!(a.len(), 100);
    assert_eq!(b.len(), 100);
    for (x, y) in a.iter().zip(&b) {
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() <= 1e-12, "{x:?} vs {y:?}");
        }
    }
}

#[test]
fn sgd_zero_gradient_keeps_parameters() {
    let mut f = optframe_core::function::adapter::adapt_full_to_separable(Sphere::new(3).unwrap()).unwrap();
    let sgd = Sgd::new(0.1, 1).with_termination(Termination::iterations_only(25));
    let (r, seen) = iterates(&sgd, &mut f, &[0.0; 3]);
    assert!(seen.iter().all(|x| x == &[0.0; 3]));
    assert_eq!(r.final_params, vec![0.0; 3]);
}

#[test]
fn sgd_clamps_oversized_batch() {
    let sgd = Sgd::new(0.02, 10).with_termination(Termination::iterations_only(5));
    let r = sgd.minimize(&mut FourQuadratics::new(), &[0.0; 4]).unwrap();
    assert!(r.warnings.contains(&Warning::BatchSizeClamped { requested: 10, used: 4 }));
}

#[test]
fn sgd_with_restarts_and_adaptive_policies_converges() {
    use optframe_core::policy::PolicyKind;
    for kind in PolicyKind::ALL {
        let sgd = Sgd::new(0.05, 1)
            .with_policy(kind.default_config())
            .with_restarts(WarmRestarts::new(10.0, 2.0).unwrap())
            .with_termination(Termination::iterations_only(20_000));
        let r = sgd.minimize(&mut FourQuadratics::new(), &[0.0; 4]).unwrap();
        assert!(r.best_objective.is_finite(), "{kind}");
        assert!(r.best_objective < 147.0, "{kind}: {}", r.best_objective);
    }
}

#[test]
fn sgd_on_logistic_regression_decreases_loss() {
    let mut f = LogisticRegression::synthetic(100, 3, 7).unwrap();
    let x0 = vec![0.0; 4];
    let f0 = evaluate_full(&f, &x0).unwrap();
    let sgd = Sgd::new(0.1, 10).with_termination(Termination::iterations_only(500));
    let r = sgd.minimize(&mut f, &x0).unwrap();
    assert!(r.best_objective < 0.9 * f0, "{} vs {f0}", r.best_objective);
}

#[test]
fn sgdr_schedule_shape() {
    let r = WarmRestarts::new(2.0, 2.0).unwrap();
    // Periods [0,2), [2,6), [6,14).
    let boundaries = [0.0, 2.0, 6.0, 14.0];
    for w in boundaries.windows(2) {
        assert_eq!(r.step_size(0.1, w[0]), 0.1);
        let mut prev = f64::INFINITY;
        let steps = 200;
        for i in 0..steps {
            let t = w[0] + (w[1] - w[0]) * i as f64 / steps as f64;
            let lr = r.step_size(0.1, t);
            assert!(lr <= prev, "not monotone at {t}");
            assert!((0.0..=0.1).contains(&lr));
            prev = lr;
        }
    }
}

#[test]
fn scd_cyclic_four_quadratics() {
    let scd = Scd::new(0.25, CoordinateOrder::Cyclic).with_termination(Termination::iterations_only(400));
    let r = scd.minimize(&mut FourQuadratics::new(), &[0.0; 4]).unwrap();
    assert!((r.best_objective - 123.75).abs() < 1e-6, "{}", r.best_objective);
}

#[test]
fn scd_one_pass_zeroes_sphere() {
    let scd = Scd::new(0.5, CoordinateOrder::Cyclic).with_termination(Termination::iterations_only(3));
    let r = scd.minimize(&mut Sphere::new(3).unwrap(), &[1.0, -2.0, 3.5]).unwrap();
    assert_eq!(r.final_params, vec![0.0; 3]);
}

#[test]
fn scd_leaves_off_support_coordinates_untouched() {
    let mut problems: Vec<Box<dyn Function>> = vec![
        Box::new(FourQuadratics::new()),
        Box::new(Sphere::new(5).unwrap()),
        Box::new(optframe_core::problems::SparseQuadratic::new(vec![1.0, 2.0, 0.5, 3.0, 1.5, 2.5], 2).unwrap()),
    ];
    for order in [CoordinateOrder::Cyclic, CoordinateOrder::Random] {
        for p in &mut problems {
            check_locality(p.as_mut(), order);
        }
    }
}

fn check_locality(f: &mut dyn Function, order: CoordinateOrder) {
    let d = f.dimension();
    let x0: Vec<f64> = (0..d).map(|i| 0.7 * i as f64 - 1.0).collect();
    let steps = 3 * d as u64;
    let scd = Scd::new(0.1, order).with_termination(Termination::iterations_only(steps).with_seed(11));
    let (_, seen) = iterates(&scd, f, &x0);
    assert_eq!(seen.len() as u64, steps);
    let mut prev = x0;
    for x in &seen {
        let changed: Vec<usize> = (0..d).filter(|&i| x[i].to_bits() != prev[i].to_bits()).collect();
        // Some partial gradient's support must cover every changed coordinate.
        let covered = (0..d).any(|j| {
            let g = f.partial_gradient(&prev, j).unwrap();
            changed.iter().all(|i| g.indices().any(|k| k == *i))
        });
        assert!(covered, "{}: step moved {changed:?}", f.name());
        prev = x.clone();
    }
}

#[test]
fn lbfgs_sphere_three_iterations() {
    let lbfgs = Lbfgs::default().with_termination(Termination::iterations_only(3));
    let r = lbfgs.minimize(&mut Sphere::new(10).unwrap(), &[1.0; 10]).unwrap();
    assert!(norm(&r.best_params) < 1e-8, "{:?}", r.best_params);
    assert!(r.iterations <= 3);
}

#[test]
fn lbfgs_rosenbrock() {
    let lbfgs = Lbfgs::default().with_termination(
        Termination::default().with_max_iterations(100).with_objective_tolerance(0.0).with_gradient_tolerance(1e-12),
    );
    let r = lbfgs.minimize(&mut Rosenbrock::new(), &[-1.2, 1.0]).unwrap();
    assert!(r.best_objective < 1e-8, "{}", r.best_objective);
    assert!(r.iterations <= 100);
    assert!((r.best_params[0] - 1.0).abs() < 1e-3 && (r.best_params[1] - 1.0).abs() < 1e-3);
    for w in r.trace.windows(2) {
        assert!(w[1].objective <= w[0].objective);
    }
}

#[test]
fn lbfgs_adapted_four_quadratics() {
    let mut f = adapt_separable_to_full(FourQuadratics::new()).unwrap();
    let r = Lbfgs::default().minimize(&mut f, &[0.0; 4]).unwrap();
    assert!((r.best_objective - 123.75).abs() < 1e-8, "{}", r.best_objective);
}

#[test]
fn lbfgs_memory_one_still_converges() {
    let r = Lbfgs::new(1).minimize(&mut Sphere::new(4).unwrap(), &[3.0, -1.0, 2.0, 0.5]).unwrap();
    assert!(r.best_objective < 1e-12);
    assert!(Lbfgs::new(0).minimize(&mut Sphere::new(1).unwrap(), &[1.0]).is_err());
}

#[test]
fn annealing_zero_temperature_never_increases() {
    let sa = SimulatedAnnealing::new(AnnealingSchedule { initial_temperature: 1e-300, ..Default::default() })
        .with_termination(Termination::iterations_only(40).with_seed(5));
    let r = sa.minimize(&mut Rosenbrock::new(), &[-1.2, 1.0]).unwrap();
    for w in r.trace.windows(2) {
        assert!(w[1].objective <= w[0].objective);
    }
}

#[test]
fn annealing_sphere_seed_42() {
    let sa = SimulatedAnnealing::new(AnnealingSchedule {
        initial_temperature: 10.0,
        cooling: 0.95,
        moves_per_temperature: 50,
        move_scale: 0.5,
    })
    .with_termination(Termination::iterations_only(200).with_seed(42));
    let r = sa.minimize(&mut Sphere::new(2).unwrap(), &[5.0, 5.0]).unwrap();
    assert!(r.best_objective < 0.01, "{}", r.best_objective);
}

#[test]
fn annealing_best_never_worse_than_start() {
    for seed in 0..20 {
        let sa = SimulatedAnnealing::new(AnnealingSchedule { initial_temperature: 1e6, ..Default::default() })
            .with_termination(Termination::iterations_only(5).with_seed(seed));
        let x0 = [0.5, -0.25];
        let r = sa.minimize(&mut AbsoluteSum::new(2).unwrap(), &x0).unwrap();
        assert!(r.best_objective <= 0.75);
    }
}

#[test]
fn annealing_rejects_non_finite_proposals() {
    struct Wall;
    impl Function for Wall {
        fn dimension(&self) -> usize {
            1
        }
        fn capabilities(&self) -> CapabilitySet {
            CapabilitySet::FULL_EVALUATE
        }
        fn name(&self) -> &str {
            "wall"
        }
        fn evaluate(&self, x: &[f64]) -> Result<f64, FunctionError> {
            Ok(if x[0] < 0.0 { f64::NAN } else { x[0] })
        }
    }
    let cold = AnnealingSchedule { initial_temperature: 1e-3, ..Default::default() };
    let sa = SimulatedAnnealing::new(cold).with_termination(Termination::iterations_only(10));
    let r = sa.optimize(&mut Wall, &[0.1]).unwrap();
    assert!(r.final_params[0] >= 0.0);
    assert!(r.warnings.iter().any(|w| matches!(w, Warning::RejectedProposals { .. })));
}

/// Evaluate-only problem that counts every call.
struct Counting {
    calls: Cell<u64>,
    caps: CapabilitySet,
}

impl Function for Counting {
    fn dimension(&self) -> usize {
        2
    }
    fn capabilities(&self) -> CapabilitySet {
        self.caps
    }
    fn name(&self) -> &str {
        "counting"
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64, FunctionError> {
        self.calls.set(self.calls.get() + 1);
        Ok(x[0].abs() + x[1].abs())
    }
    fn gradient(&self, _: &[f64]) -> Result<Gradient, FunctionError> {
        self.calls.set(self.calls.get() + 1);
        Ok(Gradient::Dense(vec![0.0; 2]))
    }
}

fn all_optimizers() -> Vec<Box<dyn Optimizer>> {
    let t = Termination::iterations_only(20);
    vec![
        Box::new(GradientDescent::new(0.1).with_termination(t)),
        Box::new(Sgd::new(0.1, 1).with_termination(t)),
        Box::new(ModularSgd::default()),
        Box::new(Scd::new(0.1, CoordinateOrder::Cyclic).with_termination(t)),
        Box::new(Lbfgs::default().with_termination(t)),
        Box::new(SimulatedAnnealing::new(AnnealingSchedule::default()).with_termination(t)),
    ]
}

#[test]
fn capability_gating_happens_before_any_evaluation() {
    for opt in all_optimizers() {
        let mut f = Counting { calls: Cell::new(0), caps: CapabilitySet::empty() };
        let err = opt.optimize(&mut f, &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, OptimizeError::Capability(_)), "{}", opt.name());
        assert_eq!(f.calls.get(), 0);
    }
    for opt in all_optimizers() {
        let mut f = Counting { calls: Cell::new(0), caps: CapabilitySet::FULL_EVALUATE };
        let outcome = opt.optimize(&mut f, &[1.0, 1.0]);
        if opt.required_capabilities().contains(CapabilitySet::FULL_EVALUATE)
            && !opt.required_capabilities().intersects(
                CapabilitySet::FULL_GRADIENT | CapabilitySet::BATCH_GRADIENT | CapabilitySet::PARTIAL_GRADIENT,
            )
        {
            assert!(outcome.is_ok());
            continue;
        }
        let message = outcome.unwrap_err().to_string();
        assert!(message.contains("Gradient"), "{}: {message}", opt.name());
        assert_eq!(f.calls.get(), 0, "{}", opt.name());
    }
}

#[test]
fn lbfgs_on_evaluate_only_names_gradient() {
    let err = Lbfgs::default().optimize(&mut AbsoluteSum::new(2).unwrap(), &[1.0, 2.0]).unwrap_err();
    let message = err.to_string();
    assert!(message.contains("Gradient()"), "{message}");
    assert!(message.contains("nogradient_toy"), "{message}");
}

#[test]
fn invalid_inputs_are_errors() {
    let gd = GradientDescent::new(0.1);
    let mut s = Sphere::new(2).unwrap();
    assert!(matches!(gd.optimize(&mut s, &[1.0]), Err(OptimizeError::DimensionMismatch { .. })));
    assert!(matches!(gd.optimize(&mut s, &[1.0, f64::NAN]), Err(OptimizeError::NonFiniteInitialPoint)));
    assert!(GradientDescent::new(-1.0).optimize(&mut s, &[1.0, 1.0]).is_err());
    assert!(Sgd::new(0.1, 0).optimize(&mut FourQuadratics::new(), &[0.0; 4]).is_err());
}

fn all_runs() -> Vec<(Box<dyn Optimizer>, Box<dyn Function>, Vec<f64>)> {
    let t = Termination::iterations_only(200).with_seed(3);
    vec![
        (Box::new(GradientDescent::new(0.1).with_termination(t)), Box::new(Sphere::new(3).unwrap()), vec![1.0, 2.0, 3.0]),
        (Box::new(Sgd::new(0.05, 2).with_termination(t)), Box::new(FourQuadratics::new()), vec![0.0; 4]),
        (Box::new(Sgd::new(0.05, 7).with_termination(t)), Box::new(LogisticRegression::synthetic(50, 2, 1).unwrap()), vec![0.0; 3]),
        (Box::new(ModularSgd { seed: 3, ..Default::default() }), Box::new(FourQuadratics::new()), vec![0.0; 4]),
        (Box::new(Scd::new(0.2, CoordinateOrder::Random).with_termination(t)), Box::new(FourQuadratics::new()), vec![0.0; 4]),
        (Box::new(Lbfgs::default().with_termination(t)), Box::new(Rosenbrock::new()), vec![-1.2, 1.0]),
        (Box::new(SimulatedAnnealing::new(AnnealingSchedule::default()).with_termination(t)), Box::new(Rosenbrock::new()), vec![0.0, 0.0]),
    ]
}

#[test]
fn identical_seeds_give_bitwise_identical_traces() {
    for ((opt, mut f, x0), (_, mut g, _)) in all_runs().into_iter().zip(all_runs()) {
        let a = opt.optimize(f.as_mut(), &x0).unwrap();
        let b = opt.optimize(g.as_mut(), &x0).unwrap();
        let bits = |r: &OptimizationResult| {
            r.trace
                .iter()
                .map(|p| (p.iteration, p.evaluations, p.objective.to_bits(), p.gradient_norm.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b), "{}", opt.name());
        assert_eq!(a.best_params, b.best_params);
    }
}

#[test]
fn best_objective_matches_reevaluation() {
    for (opt, mut f, x0) in all_runs() {
        let r = opt.optimize(f.as_mut(), &x0).unwrap();
        let again = evaluate_full(f.as_ref(), &r.best_params).unwrap();
        let scale = again.abs().max(1.0);
        assert!((again - r.best_objective).abs() <= 1e-12 * scale, "{}", opt.name());
        assert!(r.best_objective <= evaluate_full(f.as_ref(), &x0).unwrap() || opt.name() == "ModularSGD");
    }
}

#[test]
fn optimizers_are_send() {
    fn send<T: Send>() {}
    send::<GradientDescent>();
    send::<Sgd>();
    send::<ModularSgd>();
    send::<Scd>();
    send::<Lbfgs>();
    send::<SimulatedAnnealing>();
    send::<OptimizationResult>();
}
