//! Threshold `beta0^tau`, the curve `D1(tau)` and the behaviour of the endemic
//! equilibrium as `tau = q / eta` grows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assemble, classify_roots, max_g, near, EquilibriumError, RootCase};
use crate::model::ModelParams;
use crate::scalar::bisect;
use crate::table::Table;

/// Position of the relative infection weight `(beta1 gamma1 + beta2 gamma2) / gamma`
/// with respect to `D0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightRegime {
    /// `D0 > weight`: `I*` vanishes like `1 / tau`.
    BelowD0,
    EqualD0,
    /// `D0 < weight`: `I*` stays bounded away from zero.
    AboveD0,
}

impl WeightRegime {
    pub fn of(p: &ModelParams) -> Self {
        let d0g = p.d0() * p.gamma_total();
        let sigma = p.weighted_beta_sum();
        if near(d0g, sigma) {
            WeightRegime::EqualD0
        } else if d0g > sigma {
            WeightRegime::BelowD0
        } else {
            WeightRegime::AboveD0
        }
    }
}

/// `D1(tau)`: the positive root of `beta (beta + tau gamma) = tau sum_j beta_j gamma_j`.
pub fn d1_tau(p: &ModelParams, tau: f64) -> f64 {
    let gamma = p.gamma_total();
    let sigma = p.weighted_beta_sum();
    2.0 * sigma / gamma / (1.0 + (1.0 + 4.0 * sigma / (tau * gamma * gamma)).sqrt())
}

/// Smallest `beta0` for which `max_I G >= mu + d`, with `beta1`, `beta2` held at
/// their values in `p`.
pub fn beta0_tau(p: &ModelParams, tau: f64) -> f64 {
    let d0 = p.d0();
    if d0 >= d1_tau(p, tau) {
        return d0;
    }
    let base = p.with_tau(tau);
    let target = p.mu + p.d;
    let reaches = |beta0: f64| max_g(&ModelParams { beta0, ..base }).1 >= target;
    if reaches(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, d0);
    while hi - lo > 4.0 * f64::EPSILON * d0 {
        let mid = 0.5 * (lo + hi);
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `tau*` with `D1(tau*) = D0`, when the relative weight exceeds `D0`.
pub fn tau_star(p: &ModelParams) -> Option<f64> {
    let d0 = p.d0();
    let excess = p.weighted_beta_sum() - d0 * p.gamma_total();
    (excess > 0.0 && WeightRegime::of(p) == WeightRegime::AboveD0).then(|| d0 * d0 / excess)
}

/// `tau*` by inverting `D1(tau) = D0` numerically.
pub fn tau_star_numeric(p: &ModelParams) -> Option<f64> {
    if WeightRegime::of(p) != WeightRegime::AboveD0 {
        return None;
    }
    let d0 = p.d0();
    let mut hi = 1.0;
    while d1_tau(p, hi) < d0 {
        hi *= 2.0;
    }
    let mut lo = hi;
    while d1_tau(p, lo) > d0 {
        lo *= 0.5;
    }
    bisect(|t| d1_tau(p, t) - d0, lo, hi)
}

fn require_supercritical(p: &ModelParams) -> Result<(), EquilibriumError> {
    if p.beta0 >= p.beta1 && p.beta0 >= p.beta2 && p.beta0 > p.d0() {
        Ok(())
    } else {
        Err(EquilibriumError::PreconditionViolated(
            "requires beta0 = max(beta0, beta1, beta2) > D0",
        ))
    }
}

/// Limit of `I*` as `tau -> infinity`.
pub fn i_star_limit(p: &ModelParams) -> Result<f64, EquilibriumError> {
    require_supercritical(p)?;
    if WeightRegime::of(p) != WeightRegime::AboveD0 {
        return Ok(0.0);
    }
    let d0 = p.d0();
    let gamma = p.gamma_total();
    let rhs = |i: f64| {
        p.mu / gamma
            * (p.beta1 * p.gamma1 / (p.mu + p.beta1 * i) + p.beta2 * p.gamma2 / (p.mu + p.beta2 * i))
    };
    let mut hi = p.b / p.mu;
    while rhs(hi) > d0 {
        hi *= 2.0;
    }
    bisect(|i| rhs(i) - d0, 0.0, hi).ok_or(EquilibriumError::BracketFailure { lo: 0.0, hi })
}

/// Limit of `Z*` as `tau -> infinity` when `D0` exceeds the relative weight.
///
/// The defining equation is linear in `Z`, so the root is explicit.
pub fn z_star_limit(p: &ModelParams) -> Result<Option<f64>, EquilibriumError> {
    require_supercritical(p)?;
    if WeightRegime::of(p) != WeightRegime::BelowD0 {
        return Ok(None);
    }
    let d0 = p.d0();
    Ok(Some(
        p.mu * (p.beta0 - d0) / (d0 * p.gamma_total() - p.weighted_beta_sum()),
    ))
}

/// Limits of `(S0*, S1*, S2*)` as `tau -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SLimits {
    pub regime: WeightRegime,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub z_inf: Option<f64>,
    pub i_inf: f64,
}

pub fn s_star_limits(p: &ModelParams) -> Result<SLimits, EquilibriumError> {
    require_supercritical(p)?;
    let (b, mu, gamma) = (p.b, p.mu, p.gamma_total());
    let regime = WeightRegime::of(p);
    Ok(match regime {
        WeightRegime::EqualD0 => SLimits {
            regime,
            s0: 0.0,
            s1: p.gamma1 * b / (mu * gamma),
            s2: p.gamma2 * b / (mu * gamma),
            z_inf: None,
            i_inf: 0.0,
        },
        WeightRegime::BelowD0 => {
            let z = z_star_limit(p)?.expect("regime checked");
            let den = mu + gamma * z;
            SLimits {
                regime,
                s0: b / den,
                s1: p.gamma1 * b * z / (mu * den),
                s2: p.gamma2 * b * z / (mu * den),
                z_inf: Some(z),
                i_inf: 0.0,
            }
        }
        WeightRegime::AboveD0 => {
            let i = i_star_limit(p)?;
            SLimits {
                regime,
                s0: 0.0,
                s1: p.gamma1 * b / (gamma * (mu + p.beta1 * i)),
                s2: p.gamma2 * b / (gamma * (mu + p.beta2 * i)),
                z_inf: None,
                i_inf: i,
            }
        }
    })
}

/// Lower and upper bounds on `I*` for `beta0 > D0`.
pub fn i_star_bounds(p: &ModelParams) -> (f64, f64) {
    let d0 = p.d0();
    let excess = p.b * (p.beta0 - d0);
    let lower = excess / ((p.mu + p.d) * (p.beta0 + p.tau() * p.gamma_total()));
    let upper = (excess / (p.mu * p.beta0)).min(p.mu / d0);
    (lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub i: f64,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub z: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

pub const SWEEP_HEADER: [&str; 8] = ["τ", "I*", "S0*", "S1*", "S2*", "Z*", "lower_bound", "upper_bound"];

/// Endemic equilibrium along a grid of `tau` values (`q` scaled, `eta` fixed).
pub fn sweep_tau(p: &ModelParams, taus: &[f64]) -> Result<Vec<SweepRow>, EquilibriumError> {
    if !(p.beta0 > p.d0()) {
        return Err(EquilibriumError::PreconditionViolated("sweep requires beta0 > D0"));
    }
    if taus.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(EquilibriumError::PreconditionViolated("tau grid must be positive"));
    }
    taus.par_iter()
        .map(|&tau| {
            let pt = p.with_tau(tau);
            let report = classify_roots(&pt)?;
            debug_assert_eq!(report.case, RootCase::UniqueSupercritical);
            let s = assemble(&pt, report.roots[0]);
            let (lower_bound, upper_bound) = i_star_bounds(&pt);
            Ok(SweepRow {
                tau,
                i: s.i,
                s0: s.s0,
                s1: s.s1,
                s2: s.s2,
                z: s.z,
                lower_bound,
                upper_bound,
            })
        })
        .collect()
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut table = Table::new(SWEEP_HEADER);
    for r in rows {
        table
            .push(vec![r.tau, r.i, r.s0, r.s1, r.s2, r.z, r.lower_bound, r.upper_bound])
            .expect("eight columns");
    }
    table
}
