use super::*;
use crate::model::rhs_reduced;
use proptest::prelude::*;

fn fitted_u6() -> ModelParams {
    ModelParams::uganda_fit(6.0).unwrap()
}

/// Fitted constants with strong protected-class transmission: the relative
/// weight exceeds `D0`, so a backward bifurcation opens up for large `tau`.
fn backward(tau: f64) -> ModelParams {
    ModelParams {
        beta1: 0.02,
        beta2: 0.02,
        ..fitted_u6()
    }
    .with_tau(tau)
}

// Same G written as one fraction over (mu + b0 I)(mu + beta1 I)(mu + beta2 I).
fn g_single_fraction(i: f64, p: &ModelParams) -> f64 {
    let tau = p.q / p.eta;
    let b0 = p.beta0 + tau * (p.gamma0 + p.gamma1 + p.gamma2);
    let (m1, m2) = (p.mu + p.beta1 * i, p.mu + p.beta2 * i);
    let num = p.beta0 * m1 * m2 + tau * i * (p.beta1 * p.gamma1 * m2 + p.beta2 * p.gamma2 * m1);
    p.b * num / ((p.mu + b0 * i) * m1 * m2)
}

fn sign_changes(p: &ModelParams, hi: f64, n: usize) -> usize {
    let target = p.mu + p.d;
    let mut count = 0;
    let mut prev = eval_g(0.0, p) - target;
    for k in 1..=n {
        let v = eval_g(hi * k as f64 / n as f64, p) - target;
        if v != 0.0 && prev != 0.0 && v.signum() != prev.signum() {
            count += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    count
}

prop_compose! {
    fn any_params()(
        b in 0.1..2.0f64, mu in 0.005..0.05f64, d in 0.05..0.5f64,
        g0 in 0.0..0.5f64, g1 in 0.01..1.0f64, g2 in 0.01..1.0f64,
        f0 in 0.2..3.0f64, f1 in 0.01..50.0f64, f2 in 0.01..50.0f64,
        eta in 0.01..1.0f64, tau in 0.01..100.0f64,
    ) -> ModelParams {
        let d0 = mu * (mu + d) / b;
        ModelParams {
            b, mu, d, gamma0: g0, gamma1: g1, gamma2: g2,
            beta0: f0 * d0, beta1: f1 * d0, beta2: f2 * d0,
            q: tau * eta, eta, u: 0.0,
        }
    }
}

#[test]
fn g_at_zero_on_the_threshold_is_mu_plus_d() {
    let base = fitted_u6();
    let p = ModelParams { beta0: base.d0(), ..base };
    let g = eval_g(0.0, &p);
    assert!((g - (p.mu + p.d)).abs() <= 2.0 * f64::EPSILON * g);
    assert_eq!(eval_g(0.0, &base), base.beta0 * base.b / base.mu);
}

#[test]
fn g_at_published_endemic_level() {
    let p = fitted_u6();
    let g = eval_g(1.2561, &p);
    assert!((g / 0.15176 - 1.0).abs() < 1e-3, "G = {g}");
}

#[test]
fn g_vanishes_at_infinity() {
    let p = fitted_u6();
    assert!(eval_g(1e12, &p) < 1e-9);
    assert!(dg_di(1e12, &p).abs() < 1e-20);
}

#[test]
fn disease_free_point() {
    let p = fitted_u6();
    let e = disease_free(&p);
    assert_eq!(e.kind, EquilibriumKind::DiseaseFree);
    assert_eq!(e.state.s0, 0.55 / 0.01176);
    assert!((e.state.s0 - 46.768707).abs() < 1e-6);
    assert_eq!(e.state.to_reduced()[1..], [0.0; 4]);
    assert_eq!(rhs_reduced(&p, &e.state.to_reduced(), 0.0), [0.0; 5]);
}

#[test]
fn fitted_u6_has_published_endemic_state() {
    let p = fitted_u6();
    let report = classify_roots(&p).unwrap();
    assert_eq!(report.case, RootCase::UniqueSupercritical);
    assert_eq!(report.roots.len(), 1);
    assert!(report.slopes[0] < 0.0);
    let e = solve_endemic(&p).unwrap().unwrap();
    assert_eq!(e.kind, EquilibriumKind::Endemic);
    let s = e.state;
    let got = [s.s0, s.s1, s.s2, s.z, s.i];
    let published = [0.2083, 3.5866, 16.6702, 2.2580, 1.2561];
    for (g, w) in got.iter().zip(published) {
        assert_eq!((g * 1e4).round() / 1e4, w, "{got:?}");
    }
}

#[test]
fn threshold_beta0_with_light_weight_has_only_the_zero_root() {
    let base = ModelParams {
        beta1: 0.001,
        beta2: 0.001,
        ..fitted_u6()
    };
    assert!(base.derived().rel_weight <= base.d0());
    let p = ModelParams { beta0: base.d0(), ..base };
    let report = classify_roots(&p).unwrap();
    assert_eq!(report.case, RootCase::BoundaryUnique);
    assert_eq!(report.roots, [0.0]);
    assert_eq!(report.positive_roots().count(), 0);
    assert_eq!(solve_endemic(&p).unwrap(), None);
}

#[test]
fn threshold_beta0_with_heavy_weight_adds_a_positive_root() {
    let base = backward(1.8);
    let p = ModelParams { beta0: base.d0(), ..base };
    let report = classify_roots(&p).unwrap();
    assert_eq!(report.case, RootCase::BoundaryUnique);
    assert_eq!(report.roots.len(), 2);
    assert_eq!(report.roots[0], 0.0);
    assert!(report.slopes[1] < 0.0);
}

#[test]
fn backward_bifurcation_gives_two_roots() {
    let base = backward(1.8);
    let d0 = base.d0();
    assert!(d1_tau(&base, 1.8) > d0);
    let b0t = beta0_tau(&base, 1.8);
    assert!(b0t < d0);
    let p = ModelParams {
        beta0: 0.5 * (b0t + d0),
        ..base
    };
    let report = classify_roots(&p).unwrap();
    assert_eq!(report.case, RootCase::TwoRoots);
    let [minus, plus] = report.roots[..] else { panic!("{report:?}") };
    assert!(0.0 < minus && minus < plus);
    let i_max = report.i_max.unwrap();
    assert!(minus < i_max && i_max < plus);
    assert!(report.slopes[0] > 0.0 && report.slopes[1] < 0.0);
    assert_eq!(sign_changes(&p, p.b / p.mu, 10_000), 2);
    assert_eq!(solve_endemic(&p).unwrap(), None);
}

#[test]
fn tangent_threshold_is_boundary_unique() {
    let tau = 2.0 * tau_star(&backward(1.0)).unwrap();
    let base = backward(tau);
    let b0t = beta0_tau(&base, tau);
    assert!(0.0 < b0t && b0t < base.d0());
    let p = ModelParams { beta0: b0t, ..base };
    let report = classify_roots(&p).unwrap();
    // At beta0^tau the maximum of G just touches mu + d.
    let (i_max, g_max) = max_g(&p);
    assert!((g_max / (p.mu + p.d) - 1.0).abs() < 1e-12);
    match report.case {
        RootCase::BoundaryUnique => assert!((report.roots[0] - i_max).abs() < 1e-6 * i_max),
        RootCase::TwoRoots => assert!((report.roots[1] - report.roots[0]) < 1e-4 * i_max),
        other => panic!("{other:?}"),
    }
}

#[test]
fn below_threshold_without_information_benefit_has_no_endemic_state() {
    let base = fitted_u6();
    let p = ModelParams {
        beta0: 0.5 * base.d0(),
        beta1: 0.1 * base.d0(),
        beta2: 0.4 * base.d0(),
        ..base
    };
    assert_eq!(classify_roots(&p).unwrap().case, RootCase::NoRoot);
    assert_eq!(solve_endemic(&p).unwrap(), None);
}

#[test]
fn d1_tau_solves_its_quadratic_and_increases() {
    let p = backward(1.0);
    let gamma = p.gamma_total();
    let sigma = p.weighted_beta_sum();
    let mut prev = 0.0;
    for tau in [0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0] {
        let d1 = d1_tau(&p, tau);
        let residual = d1 * (d1 + tau * gamma) - tau * sigma;
        assert!(residual.abs() <= 1e-12 * tau * sigma, "tau = {tau}: {residual:e}");
        assert!(d1 > prev);
        prev = d1;
    }
    assert!(d1_tau(&p, 1e-12) < 1e-6);
    assert!(d1_tau(&p, 1e9) < p.derived().rel_weight);
}

#[test]
fn tau_star_closed_form_matches_inversion() {
    let p = backward(1.0);
    let ts = tau_star(&p).unwrap();
    assert!((d1_tau(&p, ts) - p.d0()).abs() <= 1e-12 * p.d0());
    let numeric = tau_star_numeric(&p).unwrap();
    assert!((ts - numeric).abs() <= 1e-10 * ts);
    // The threshold flips across tau*.
    assert_eq!(beta0_tau(&p, 0.999 * ts), p.d0());
    assert!(beta0_tau(&p, 1.001 * ts) < p.d0());
}

#[test]
fn light_weight_has_no_tau_star_and_fixed_threshold() {
    let p = ModelParams {
        beta1: 0.001,
        beta2: 0.001,
        ..fitted_u6()
    };
    assert_eq!(tau_star(&p), None);
    assert_eq!(tau_star_numeric(&p), None);
    for tau in [0.01, 1.0, 100.0, 1e4] {
        assert_eq!(beta0_tau(&p, tau), p.d0());
    }
}

#[test]
fn beta0_tau_below_d0_iff_d0_below_d1() {
    let p = backward(1.0);
    for tau in [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 5.0, 50.0] {
        let below = beta0_tau(&p, tau) < p.d0();
        assert_eq!(below, p.d0() < d1_tau(&p, tau), "tau = {tau}");
    }
}

#[test]
fn i_star_limit_for_fitted_parameters_is_positive() {
    let p = fitted_u6();
    let i_inf = i_star_limit(&p).unwrap();
    assert!(i_inf > 0.0);
    let gamma = p.gamma_total();
    let rhs = p.mu / gamma
        * (p.beta1 * p.gamma1 / (p.mu + p.beta1 * i_inf) + p.beta2 * p.gamma2 / (p.mu + p.beta2 * i_inf));
    assert!((rhs - p.d0()).abs() < 1e-12);
    let rows = sweep_tau(&p, &[1e2, 1e3, 1e4, 1e5]).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| (r.i - i_inf).abs()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[3] < 1e-3 * i_inf);
}

#[test]
fn i_star_limit_vanishes_for_light_weight() {
    let p = ModelParams {
        beta1: 0.001,
        beta2: 0.001,
        ..fitted_u6()
    };
    assert_eq!(i_star_limit(&p).unwrap(), 0.0);
}

#[test]
fn limits_require_dominant_supercritical_beta0() {
    let p = ModelParams {
        beta1: 0.05,
        ..backward(1.0)
    };
    assert!(matches!(i_star_limit(&p), Err(EquilibriumError::PreconditionViolated(_))));
    assert!(s_star_limits(&p).is_err());
    let sub = ModelParams {
        beta0: 0.5 * p.d0(),
        beta1: 0.0001,
        beta2: 0.0001,
        ..p
    };
    assert!(sweep_tau(&sub, &[1.0]).is_err());
    assert!(sweep_tau(&fitted_u6(), &[0.0]).is_err());
}

#[test]
fn s_limits_equal_weight_sum_to_b_over_mu() {
    // Without the removed class the three susceptible limits exhaust B / mu.
    let base = ModelParams {
        gamma0: 0.0,
        ..fitted_u6()
    };
    let d0 = base.d0();
    let gamma = base.gamma_total();
    // beta2 chosen so that beta1 gamma1 + beta2 gamma2 = D0 gamma exactly.
    let beta1 = 0.1 * d0;
    let p = ModelParams {
        beta1,
        beta2: (d0 * gamma - beta1 * base.gamma1) / base.gamma2,
        ..base
    };
    let lim = s_star_limits(&p).unwrap();
    assert_eq!(lim.regime, WeightRegime::EqualD0);
    assert_eq!(lim.s0, 0.0);
    assert!((lim.s0 + lim.s1 + lim.s2 - p.b / p.mu).abs() < 1e-12 * p.b / p.mu);
}

#[test]
fn s_limits_light_weight_use_explicit_z_limit() {
    let base = fitted_u6();
    let p = ModelParams {
        beta1: 0.05 * base.d0(),
        beta2: 0.1 * base.d0(),
        ..base
    };
    let lim = s_star_limits(&p).unwrap();
    assert_eq!(lim.regime, WeightRegime::BelowD0);
    let z = lim.z_inf.unwrap();
    let gamma = p.gamma_total();
    let residual = p.mu * (p.beta0 + z / p.mu * p.weighted_beta_sum()) / (p.mu + gamma * z) - p.d0();
    assert!(residual.abs() < 1e-12);
    // Z* = tau I* approaches the limit, and tau I* stays bounded.
    let taus: Vec<f64> = (0..=12).map(|k| 10f64.powf(-1.0 + 0.5 * k as f64)).collect();
    let rows = sweep_tau(&p, &taus).unwrap();
    for r in &rows {
        assert!(r.tau * r.i <= 1.01 * z, "tau = {}: {}", r.tau, r.tau * r.i);
    }
    let last = rows.last().unwrap();
    assert!((last.z / z - 1.0).abs() < 1e-3);
    assert!((last.s0 / lim.s0 - 1.0).abs() < 1e-3);
    assert!((last.s1 / lim.s1 - 1.0).abs() < 1e-3);
}

#[test]
fn s_limits_heavy_weight_match_large_tau_sweep() {
    let p = fitted_u6();
    let lim = s_star_limits(&p).unwrap();
    assert_eq!(lim.regime, WeightRegime::AboveD0);
    let row = sweep_tau(&p, &[1e4]).unwrap()[0];
    let scale = p.b / p.mu;
    assert!(row.s0 <= 0.01 * scale);
    assert!((row.s1 / lim.s1 - 1.0).abs() < 0.01);
    assert!((row.s2 / lim.s2 - 1.0).abs() < 0.01);
}

#[test]
fn sweep_is_monotone_and_within_bounds() {
    let p = fitted_u6();
    let taus: Vec<f64> = (0..60).map(|k| 0.05 * 1.2f64.powi(k)).collect();
    let rows = sweep_tau(&p, &taus).unwrap();
    assert_eq!(rows.len(), taus.len());
    for w in rows.windows(2) {
        assert!(w[1].i < w[0].i);
    }
    for r in &rows {
        assert!(r.lower_bound <= r.i && r.i <= r.upper_bound, "{r:?}");
        assert!(r.i <= p.mu / p.d0());
    }
    let table = sweep_table(&rows);
    assert_eq!(table.columns.join(","), "τ,I*,S0*,S1*,S2*,Z*,lower_bound,upper_bound");
}

#[test]
fn g_curve_has_requested_shape() {
    let p = fitted_u6();
    let t = g_curve(&p, 5.0, 11);
    assert_eq!(t.rows.len(), 11);
    assert_eq!(t.rows[10][0], 5.0);
    assert_eq!(t.rows[0][1], eval_g(0.0, &p));
}

proptest! {
    #[test]
    fn g_matches_single_fraction(p in any_params(), i in 0.0..100.0f64) {
        let a = eval_g(i, &p);
        let b = g_single_fraction(i, &p);
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(b.abs()) + 1e-300);
    }

    #[test]
    fn derivative_matches_central_difference(p in any_params(), i in 0.01..50.0f64) {
        let h = 1e-5 * i;
        let fd = (eval_g(i + h, &p) - eval_g(i - h, &p)) / (2.0 * h);
        let exact = dg_di(i, &p);
        let scale = exact.abs().max(1e-6 * eval_g(i, &p) / i);
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "fd {fd:e} exact {exact:e}");
    }

    #[test]
    fn g_decreases_when_beta0_dominates(p in any_params(), i in 0.001..100.0f64) {
        let beta0 = p.beta0.max(p.beta1).max(p.beta2).max(p.d0());
        let p = ModelParams { beta0, ..p };
        prop_assert!(dg_di(i, &p) < 0.0);
    }

    #[test]
    fn classification_matches_grid_scan(p in any_params()) {
        let d0 = p.d0();
        let report = classify_roots(&p).unwrap();
        let target = p.mu + p.d;
        for (&r, &s) in report.roots.iter().zip(&report.slopes) {
            prop_assert!((eval_g(r, &p) - target).abs() < 1e-10 * target);
            match report.case {
                RootCase::UniqueSupercritical => prop_assert!(s < 0.0),
                RootCase::TwoRoots => {}
                _ => {}
            }
        }
        if report.case == RootCase::TwoRoots {
            prop_assert!(p.beta0 < d0);
            prop_assert!(report.slopes[0] > 0.0 && report.slopes[1] < 0.0);
        }
        if p.beta0 > d0 {
            prop_assert_eq!(report.case, RootCase::UniqueSupercritical);
        }
        // Skip draws whose maximum sits within grid resolution of the level.
        let (_, g_max) = max_g(&p);
        prop_assume!((g_max / target - 1.0).abs() > 1e-6);
        // Every equilibrium has I <= B / (mu + d) < B / mu.
        let expected = report.positive_roots().count();
        prop_assert_eq!(sign_changes(&p, p.b / p.mu, 10_000), expected);
    }

    #[test]
    fn endemic_states_are_stationary(p in any_params()) {
        let p = ModelParams { beta0: p.beta0.max(1.01 * p.d0()), ..p };
        let e = solve_endemic(&p).unwrap().unwrap();
        let s = e.state;
        let target = p.mu + p.d;
        prop_assert!((eval_g(s.i, &p) - target).abs() < 1e-10);
        let r = rhs_reduced(&p, &s.to_reduced(), s.i);
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm < 1e-9, "{r:?}");
        let tau = p.q / p.eta;
        prop_assert!((s.z - tau * s.i).abs() <= 1e-12 * s.z);
    }

    #[test]
    fn max_g_increases_with_beta0(p in any_params(), f in 1.001..2.0f64) {
        let hi = ModelParams { beta0: f * p.beta0, ..p };
        prop_assert!(max_g(&hi).1 > max_g(&p).1);
    }
}
