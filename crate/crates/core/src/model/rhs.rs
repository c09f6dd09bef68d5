use super::{index, ModelParams};
use crate::dde::DelaySystem;

/// Time derivatives of `(S0, S1, S2, Z, I, R)`.
///
/// `i_delayed` stands for `I(t - u)`; every other coupling uses current values.
pub fn rhs_full(p: &ModelParams, y: &[f64; 6], i_delayed: f64) -> [f64; 6] {
    let [s0, s1, s2, z, i, r] = *y;
    let [ds0, ds1, ds2, dz, di] = rhs_reduced(p, &[s0, s1, s2, z, i], i_delayed);
    let dr = p.gamma0 * s0 * z - p.mu * r;
    [ds0, ds1, ds2, dz, di, dr]
}

/// Time derivatives of the sub-system `(S0, S1, S2, Z, I)`, which does not
/// depend on `R`.
pub fn rhs_reduced(p: &ModelParams, y: &[f64; 5], i_delayed: f64) -> [f64; 5] {
    let [s0, s1, s2, z, i] = *y;
    let gamma = p.gamma_total();
    let inf0 = p.beta0 * s0 * i_delayed;
    let inf1 = p.beta1 * s1 * i_delayed;
    let inf2 = p.beta2 * s2 * i_delayed;
    [
        p.b - gamma * s0 * z - inf0 - p.mu * s0,
        p.gamma1 * s0 * z - inf1 - p.mu * s1,
        p.gamma2 * s0 * z - inf2 - p.mu * s2,
        p.q * i - p.eta * z,
        inf0 + inf1 + inf2 - (p.mu + p.d) * i,
    ]
}

/// Information-free SI model: returns `(dS0/dt, dI/dt)`.
pub fn rhs_si(p: &ModelParams, s0: f64, i: f64, i_delayed: f64) -> (f64, f64) {
    let incidence = p.beta0 * s0 * i_delayed;
    (p.b - incidence - p.mu * s0, incidence - (p.mu + p.d) * i)
}

/// Six-compartment model as an integrable delay system.
#[derive(Debug, Clone, Copy)]
pub struct FullModel<'a>(pub &'a ModelParams);

/// Five-compartment sub-system as an integrable delay system.
#[derive(Debug, Clone, Copy)]
pub struct ReducedModel<'a>(pub &'a ModelParams);

/// SI model `(S0, I)` as an integrable delay system.
#[derive(Debug, Clone, Copy)]
pub struct SiModel<'a>(pub &'a ModelParams);

impl DelaySystem<6> for FullModel<'_> {
    fn lagged_component(&self) -> usize {
        index::I
    }

    fn rhs(&self, _t: f64, y: &[f64; 6], lagged: f64) -> [f64; 6] {
        rhs_full(self.0, y, lagged)
    }
}

impl DelaySystem<5> for ReducedModel<'_> {
    fn lagged_component(&self) -> usize {
        index::I
    }

    fn rhs(&self, _t: f64, y: &[f64; 5], lagged: f64) -> [f64; 5] {
        rhs_reduced(self.0, y, lagged)
    }
}

impl DelaySystem<2> for SiModel<'_> {
    fn lagged_component(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, y: &[f64; 2], lagged: f64) -> [f64; 2] {
        let (ds0, di) = rhs_si(self.0, y[0], y[1], lagged);
        [ds0, di]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::State;
    use proptest::prelude::*;

    fn table3(beta0: f64) -> ModelParams {
        ModelParams {
            beta0,
            beta1: 0.05 * beta0,
            beta2: 0.40 * beta0,
            ..ModelParams::default()
        }
    }

    #[test]
    fn disease_free_state_is_stationary() {
        let p = table3(0.021509);
        let dfe = State::disease_free(&p);
        assert_eq!(rhs_full(&p, &dfe.to_full(), 0.0), [0.0; 6]);
        assert_eq!(rhs_reduced(&p, &dfe.to_reduced(), 0.0), [0.0; 5]);
        assert_eq!(rhs_si(&p, p.b / p.mu, 0.0, 0.0), (0.0, 0.0));
    }

    #[test]
    fn infection_terms_vanish_without_delayed_infectives_or_information() {
        let p = table3(0.021509);
        let y = [3.0, 1.0, 2.0, 0.0, 0.7, 0.5];
        let dy = rhs_full(&p, &y, 0.0);
        assert_eq!(dy[index::S0], p.b - p.mu * 3.0);
        assert_eq!(dy[index::I], -(p.mu + p.d) * 0.7);
        let (_, di) = rhs_si(&p, 4.0, 0.3, 0.0);
        assert_eq!(di, -(p.mu + p.d) * 0.3);
    }

    #[test]
    fn information_decays_without_infectives() {
        let p = ModelParams::default();
        let dy = rhs_reduced(&p, &[2.0, 1.0, 1.0, 0.4, 0.0], 0.0);
        assert_eq!(dy[index::Z], -p.eta * 0.4);
        assert!(dy[index::Z] < 0.0);
    }

    #[test]
    fn si_matches_hand_evaluation() {
        let p = table3(0.021509);
        let (s0, i) = (5.014983, 0.884997);
        let (ds0, di) = rhs_si(&p, s0, i, i);
        // B - beta0 S0 I - mu S0 and beta0 S0 I - (mu + d) I
        let inc = 0.021509 * 5.014983 * 0.884997;
        assert!((ds0 - (0.55 - inc - 0.01176 * 5.014983)).abs() < 1e-15);
        assert!((di - (inc - (0.01176 + 0.14) * 0.884997)).abs() < 1e-15);
        assert!(ds0.is_finite() && di.is_finite());
    }

    #[test]
    fn full_and_reduced_agree_on_shared_components() {
        let p = ModelParams::default();
        let y = [2.0, 1.5, 4.0, 0.6, 0.9, 3.0];
        let full = rhs_full(&p, &y, 0.8);
        let reduced = rhs_reduced(&p, &[y[0], y[1], y[2], y[3], y[4]], 0.8);
        assert_eq!(&full[..5], &reduced[..]);
        assert_eq!(full[index::R], p.gamma0 * 2.0 * 0.6 - p.mu * 3.0);
    }

    proptest! {
        // dN/dt <= B - mu N with N = S0 + S1 + S2 + I when I(t-u) = I(t).
        #[test]
        fn total_population_obeys_comparison_inequality(
            s0 in 0.0..50.0f64, s1 in 0.0..20.0f64, s2 in 0.0..20.0f64,
            z in 0.0..5.0f64, i in 0.0..5.0f64,
        ) {
            let p = ModelParams::default();
            let dy = rhs_reduced(&p, &[s0, s1, s2, z, i], i);
            let dn = dy[0] + dy[1] + dy[2] + dy[4];
            let n = s0 + s1 + s2 + i;
            prop_assert!(dn <= p.b - p.mu * n + 1e-12);
        }

        #[test]
        fn rhs_is_deterministic(s0 in 0.0..50.0f64, i in 0.0..5.0f64, lag in 0.0..5.0f64) {
            let p = ModelParams::default();
            let y = [s0, 1.0, 2.0, 0.3, i, 0.5];
            prop_assert_eq!(rhs_full(&p, &y, lag), rhs_full(&p, &y, lag));
        }
    }
}
