//! Equilibria of the reduced system.
//!
//! An equilibrium with `I > 0` is fixed by its `I` coordinate, which must
//! solve `G(I) = mu + d` where
//!
//! ```text
//! G(I) = [beta0 B + B tau sum_j beta_j gamma_j I / (mu + beta_j I)] / (mu + b0 I)
//! ```
//!
//! with `tau = q / eta` and `b0 = beta0 + tau gamma`.

mod asymptotics;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelParams, State};
use crate::scalar::{bisect, brent};
use crate::table::Table;

pub use asymptotics::{
    beta0_tau, d1_tau, i_star_bounds, i_star_limit, s_star_limits, sweep_table, sweep_tau, tau_star,
    tau_star_numeric, z_star_limit, SLimits, SweepRow, WeightRegime, SWEEP_HEADER,
};

/// Relative tolerance used to decide threshold equalities such as `beta0 = D0`.
pub const EQ_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("root bracket [{lo}, {hi}] does not change sign")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    DiseaseFree,
    Endemic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    /// Includes `R* = gamma0 S0* Z* / mu` for endemic states.
    pub state: State,
    /// Linear stability verdict, when known.
    pub stability_hint: Option<bool>,
}

/// Shape of the solution set of `G(I) = mu + d` on `I >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootCase {
    NoRoot,
    /// `I- < I+`, with `G' > 0` at `I-` and `G' < 0` at `I+`.
    TwoRoots,
    /// `beta0` sits on a threshold: either `beta0 = D0` (root at zero, plus
    /// `I+` when the maximum of `G` is interior) or tangency at `I_max`.
    BoundaryUnique,
    /// `beta0 > D0`: a single positive root with `G' < 0`.
    UniqueSupercritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub case: RootCase,
    /// Nonnegative roots in increasing order.
    pub roots: Vec<f64>,
    /// `dG/dI` at each root.
    pub slopes: Vec<f64>,
    /// Interior maximiser of `G`, if `G` is not decreasing from zero.
    pub i_max: Option<f64>,
}

impl RootReport {
    pub fn positive_roots(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().copied().filter(|&r| r > 0.0)
    }
}

/// `G(I)` for the parameters in `p`.
pub fn eval_g(i: f64, p: &ModelParams) -> f64 {
    let tau = p.tau();
    let b0 = p.beta0 + tau * p.gamma_total();
    let info = p.beta1 * p.gamma1 * i / (p.mu + p.beta1 * i)
        + p.beta2 * p.gamma2 * i / (p.mu + p.beta2 * i);
    p.b * (p.beta0 + tau * info) / (p.mu + b0 * i)
}

/// Closed-form `dG/dI`.
pub fn dg_di(i: f64, p: &ModelParams) -> f64 {
    let tau = p.tau();
    let b0 = p.beta0 + tau * p.gamma_total();
    let mu = p.mu;
    let term = |beta: f64, gamma: f64| {
        let den = mu + beta * i;
        gamma * beta * (mu * mu - beta * b0 * i * i) / (den * den)
    };
    let den = mu + b0 * i;
    p.b / (den * den) * (-p.beta0 * b0 + tau * (term(p.beta1, p.gamma1) + term(p.beta2, p.gamma2)))
}

/// `E0 = (B/mu, 0, 0, 0, 0)`.
pub fn disease_free(p: &ModelParams) -> Equilibrium {
    Equilibrium {
        kind: EquilibriumKind::DiseaseFree,
        state: State::disease_free(p),
        stability_hint: None,
    }
}

/// Equilibrium state determined by its infective level `i`.
pub fn assemble(p: &ModelParams, i: f64) -> State {
    let tau = p.tau();
    let b0 = p.beta0 + tau * p.gamma_total();
    let s0 = p.b / (p.mu + b0 * i);
    let z = tau * i;
    let sj = |beta: f64, gamma: f64| tau * gamma * i * p.b / ((p.mu + beta * i) * (p.mu + b0 * i));
    State {
        s0,
        s1: sj(p.beta1, p.gamma1),
        s2: sj(p.beta2, p.gamma2),
        z,
        i,
        r: p.gamma0 * s0 * z / p.mu,
    }
}

/// Location and value of the maximum of `G` on `I >= 0`.
///
/// `dG/dI` changes sign at most once (from + to -), so the maximiser is zero
/// or the unique root of the derivative.
pub fn max_g(p: &ModelParams) -> (f64, f64) {
    if dg_di(0.0, p) <= 0.0 {
        return (0.0, eval_g(0.0, p));
    }
    let mut hi = p.b / p.mu;
    while dg_di(hi, p) >= 0.0 {
        hi *= 2.0;
    }
    let i_max = bisect(|i| dg_di(i, p), 0.0, hi).expect("derivative changes sign");
    (i_max, eval_g(i_max, p))
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQ_RTOL * a.abs().max(b.abs())
}

fn root_in(p: &ModelParams, lo: f64, hi: f64) -> Result<f64, EquilibriumError> {
    let target = p.mu + p.d;
    brent(|i| eval_g(i, p) - target, lo, hi, 0.0).ok_or(EquilibriumError::BracketFailure { lo, hi })
}

// Root beyond `from` on the decreasing branch of G.
fn upper_root(p: &ModelParams, from: f64, hi: f64) -> Result<f64, EquilibriumError> {
    root_in(p, from, hi).or_else(|_| root_in(p, from, p.b / p.mu))
}

/// Finds and classifies every nonnegative root of `G(I) = mu + d`.
pub fn classify_roots(p: &ModelParams) -> Result<RootReport, EquilibriumError> {
    p.validate().map_err(|_| EquilibriumError::PreconditionViolated("invalid parameters"))?;
    let d0 = p.d0();
    let target = p.mu + p.d;
    let (i_max, g_max) = max_g(p);
    let i_max = (i_max > 0.0).then_some(i_max);
    let report = |case, roots: Vec<f64>| {
        let slopes = roots.iter().map(|&r| dg_di(r, p)).collect();
        RootReport {
            case,
            roots,
            slopes,
            i_max,
        }
    };

    if p.beta0 > d0 && !near(p.beta0, d0) {
        let hi = p.b * (p.beta0 - d0) / (p.mu * p.beta0) + 1.0;
        let root = upper_root(p, i_max.unwrap_or(0.0), hi)?;
        return Ok(report(RootCase::UniqueSupercritical, vec![root]));
    }

    let hi = p.b / p.mu;
    if near(p.beta0, d0) {
        // G(0) equals the target; a second root exists only past an interior maximum.
        return Ok(match i_max {
            Some(im) if g_max > target && !near(g_max, target) => {
                let plus = upper_root(p, im, hi)?;
                report(RootCase::BoundaryUnique, vec![0.0, plus])
            }
            _ => report(RootCase::BoundaryUnique, vec![0.0]),
        });
    }

    match i_max {
        Some(im) if near(g_max, target) => Ok(report(RootCase::BoundaryUnique, vec![im])),
        Some(im) if g_max > target => {
            let minus = root_in(p, 0.0, im)?;
            let plus = upper_root(p, im, hi)?;
            Ok(report(RootCase::TwoRoots, vec![minus, plus]))
        }
        _ => Ok(report(RootCase::NoRoot, Vec::new())),
    }
}

/// Unique endemic equilibrium when `beta0 > D0`, otherwise `None`.
pub fn solve_endemic(p: &ModelParams) -> Result<Option<Equilibrium>, EquilibriumError> {
    let report = classify_roots(p)?;
    if report.case != RootCase::UniqueSupercritical {
        return Ok(None);
    }
    Ok(Some(Equilibrium {
        kind: EquilibriumKind::Endemic,
        state: assemble(p, report.roots[0]),
        stability_hint: None,
    }))
}

/// Samples `G` on `n` evenly spaced points of `[0, i_hi]` with the level `mu + d`.
pub fn g_curve(p: &ModelParams, i_hi: f64, n: usize) -> Table {
    let mut table = Table::new(["I", "G", "mu_plus_d"]);
    let n = n.max(2);
    for k in 0..n {
        let i = i_hi * k as f64 / (n - 1) as f64;
        table
            .push(vec![i, eval_g(i, p), p.mu + p.d])
            .expect("three columns");
    }
    table
}

#[cfg(test)]
mod tests;
