use super::*;
use approx::assert_relative_eq;

// y'(t) = b y(t) + a y(t - 1) has the exact solution exp(lambda t) for all t
// when the history is exp(lambda t) and lambda = b + a exp(-lambda).
const LAMBDA: f64 = -0.5;
const B: f64 = -0.3;

fn exp_problem() -> (DelayFn<impl Fn(f64, &[f64; 1], f64) -> [f64; 1]>, impl Fn(f64) -> [f64; 1]) {
    let a = (LAMBDA - B) * LAMBDA.exp();
    (
        DelayFn::new(0, move |_t, y: &[f64; 1], lag| [B * y[0] + a * lag]),
        |t: f64| [(LAMBDA * t).exp()],
    )
}

fn negative_feedback() -> DelayFn<impl Fn(f64, &[f64; 1], f64) -> [f64; 1]> {
    DelayFn::new(0, |_t, _y: &[f64; 1], lag| [-lag])
}

#[test]
fn first_delay_interval_is_linear() {
    let sys = negative_feedback();
    let traj = integrate(&sys, &ConstantHistory([1.0]), (0.0, 1.0), 1.0, &SolverConfig::default()).unwrap();
    assert_eq!(traj.t_end(), 1.0);
    for (&t, y) in traj.times().iter().zip(traj.states()) {
        assert!((y[0] - (1.0 - t)).abs() < 1e-14, "t = {t}");
    }
    for k in 0..traj.len() - 1 {
        let mid = 0.5 * (traj.times()[k] + traj.times()[k + 1]);
        assert!((traj.sample(mid).unwrap()[0] - (1.0 - mid)).abs() < 1e-12);
    }
    assert!((traj.sample(0.37).unwrap()[0] - 0.63).abs() < 1e-12);
}

#[test]
fn second_delay_interval_matches_method_of_steps() {
    let sys = negative_feedback();
    let traj = integrate(&sys, &ConstantHistory([1.0]), (0.0, 2.0), 1.0, &SolverConfig::default()).unwrap();
    // y = 1 - t + (t - 1)^2 / 2 on [1, 2]
    for t in [1.25, 1.5, 1.9, 2.0] {
        let exact = 1.0 - t + 0.5 * (t - 1.0) * (t - 1.0);
        assert!((traj.sample(t).unwrap()[0] - exact).abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn mesh_nodes_sample_bitwise() {
    let (sys, hist) = exp_problem();
    let traj = integrate(&sys, &hist, (0.0, 6.0), 1.0, &SolverConfig::default()).unwrap();
    for (&t, y) in traj.times().iter().zip(traj.states()) {
        assert_eq!(traj.sample(t).unwrap(), *y);
    }
}

#[test]
fn steps_never_exceed_the_delay_and_hit_its_multiples() {
    let (sys, hist) = exp_problem();
    let cfg = SolverConfig::with_tolerances(1e-3, 1e-3);
    let traj = integrate(&sys, &hist, (0.0, 10.0), 1.0, &cfg).unwrap();
    for w in traj.times().windows(2) {
        assert!(w[1] > w[0]);
        assert!(w[1] - w[0] <= 1.0 + 1e-12);
    }
    for k in 1..=10 {
        assert!(traj.times().contains(&(k as f64)), "missing node {k}");
    }
}

#[test]
fn exponential_solution_is_tracked() {
    let (sys, hist) = exp_problem();
    let traj = integrate(&sys, &hist, (0.0, 10.0), 1.0, &SolverConfig::with_tolerances(1e-9, 1e-12)).unwrap();
    for t in [0.5, 3.3, 7.1, 10.0] {
        assert_relative_eq!(traj.sample(t).unwrap()[0], (LAMBDA * t).exp(), max_relative = 1e-7);
    }
}

#[test]
fn fixed_step_convergence_order_is_at_least_three() {
    let (sys, hist) = exp_problem();
    let err = |h: f64| {
        let traj = integrate(&sys, &hist, (0.0, 8.0), 1.0, &SolverConfig::fixed_step(h)).unwrap();
        (traj.last_state()[0] - (LAMBDA * 8.0).exp()).abs()
    };
    let (e1, e2) = (err(0.25), err(0.125));
    let order = (e1 / e2).log2();
    assert!(order >= 3.0, "order {order}: {e1:e} -> {e2:e}");
}

#[test]
fn tighter_tolerance_reduces_error() {
    let (sys, hist) = exp_problem();
    let exact = (LAMBDA * 8.0).exp();
    let err = |tol: f64| {
        let traj = integrate(&sys, &hist, (0.0, 8.0), 1.0, &SolverConfig::with_tolerances(tol, tol)).unwrap();
        (traj.last_state()[0] - exact).abs()
    };
    let (loose, tight) = (err(1e-5), err(1e-9));
    assert!(tight < loose);
    assert!(tight < 1e-8);
}

#[test]
fn zero_delay_is_an_ode_solver() {
    let sys = DelayFn::new(0, |_t, y: &[f64; 2], lag| [-lag, y[0]]);
    let traj = integrate(&sys, &ConstantHistory([1.0, 0.0]), (0.0, 5.0), 0.0, &SolverConfig::with_tolerances(1e-10, 1e-12)).unwrap();
    let y = traj.last_state();
    assert_relative_eq!(y[0], (-5.0f64).exp(), max_relative = 1e-8);
    assert_relative_eq!(y[1], 1.0 - (-5.0f64).exp(), max_relative = 1e-8);
    // No cap: a delay of 1e-3 alone would force 5000 steps.
    assert!(traj.len() < 1000);
}

#[test]
fn dense_output_agrees_with_refined_integration() {
    use rand::{Rng, SeedableRng};
    let (sys, hist) = exp_problem();
    let cfg = SolverConfig::with_tolerances(1e-6, 1e-9);
    let fine = SolverConfig::with_tolerances(1e-6 / 32.0, 1e-9 / 32.0);
    let coarse = integrate(&sys, &hist, (0.0, 12.0), 1.0, &cfg).unwrap();
    let reference = integrate(&sys, &hist, (0.0, 12.0), 1.0, &fine).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let t = rng.random_range(0.0..12.0);
        let a = coarse.sample(t).unwrap()[0];
        let b = reference.sample(t).unwrap()[0];
        let tol = cfg.rel_tol * b.abs() + cfg.abs_tol;
        assert!((a - b).abs() <= 10.0 * tol, "t = {t}: {a} vs {b}");
    }
}

#[test]
fn analytic_history_is_read_before_t0() {
    let sys = DelayFn::new(0, |_t, _y: &[f64; 1], lag| [lag]);
    // y' = y(t - 2) with history t gives y = 1 + (t - 2)^2 / 2 - 2 on [1, 3].
    let traj = integrate(&sys, &|t: f64| [t], (1.0, 3.0), 2.0, &SolverConfig::default()).unwrap();
    for t in [1.5, 2.2, 3.0] {
        let exact = 1.0 + 0.5 * ((t - 2.0) * (t - 2.0) - 1.0);
        assert!((traj.sample(t).unwrap()[0] - exact).abs() < 1e-12);
    }
}

#[test]
fn out_of_span_is_rejected() {
    let sys = negative_feedback();
    let traj = integrate(&sys, &ConstantHistory([1.0]), (0.0, 1.0), 1.0, &SolverConfig::default()).unwrap();
    assert!(matches!(traj.sample(1.5), Err(DdeError::OutOfSpan { .. })));
    assert!(matches!(traj.sample(-0.1), Err(DdeError::OutOfSpan { .. })));
    assert!(matches!(traj.sample(f64::NAN), Err(DdeError::OutOfSpan { .. })));
}

#[test]
fn step_budget_is_enforced() {
    let (sys, hist) = exp_problem();
    let cfg = SolverConfig {
        max_steps: 5,
        ..SolverConfig::default()
    };
    assert!(matches!(
        integrate(&sys, &hist, (0.0, 100.0), 1.0, &cfg),
        Err(DdeError::StepBudgetExceeded { max_steps: 5, .. })
    ));
}

#[test]
fn non_finite_values_are_reported() {
    let sys = DelayFn::new(0, |t, _y: &[f64; 1], _lag| [if t > 0.5 { f64::NAN } else { 1.0 }]);
    assert!(matches!(
        integrate(&sys, &ConstantHistory([0.0]), (0.0, 1.0), 0.0, &SolverConfig::default()),
        Err(DdeError::NonFiniteState { .. })
    ));
    let sys = negative_feedback();
    assert!(matches!(
        integrate(&sys, &ConstantHistory([f64::INFINITY]), (0.0, 1.0), 1.0, &SolverConfig::default()),
        Err(DdeError::NonFiniteState { .. })
    ));
}

#[test]
fn invalid_inputs_are_rejected() {
    let sys = negative_feedback();
    let h = ConstantHistory([1.0]);
    let cfg = SolverConfig::default();
    assert!(matches!(integrate(&sys, &h, (1.0, 1.0), 1.0, &cfg), Err(DdeError::InvalidInput(_))));
    assert!(matches!(integrate(&sys, &h, (0.0, 1.0), -1.0, &cfg), Err(DdeError::InvalidInput(_))));
    let bad = SolverConfig { rel_tol: 0.0, ..cfg };
    assert!(matches!(integrate(&sys, &h, (0.0, 1.0), 1.0, &bad), Err(DdeError::InvalidInput(_))));
    let bad = SolverConfig { h_max: -1.0, ..cfg };
    assert!(bad.validate().is_err());
    let wrong = DelayFn::new(3, |_t, _y: &[f64; 1], lag| [-lag]);
    assert!(matches!(integrate(&wrong, &h, (0.0, 1.0), 1.0, &cfg), Err(DdeError::InvalidInput(_))));
}

#[test]
fn trajectory_exports_requested_times() {
    let sys = negative_feedback();
    let traj = integrate(&sys, &ConstantHistory([1.0]), (0.0, 1.0), 1.0, &SolverConfig::default()).unwrap();
    let table = traj.to_table(&[0.0, 0.5, 1.0], &["y"]).unwrap();
    assert_eq!(table.columns, ["t", "y"]);
    assert_eq!(table.rows.len(), 3);
    assert!((table.rows[1][1] - 0.5).abs() < 1e-12);
    assert!(traj.to_table(&[2.0], &["y"]).is_err());
}
