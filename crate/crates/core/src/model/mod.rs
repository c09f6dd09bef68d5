//! Parameters, state and right-hand sides of the epidemic model.
//!
//! Units are millions of people and years throughout. All classes share the
//! natural death rate `mu`; incidence is mass action (`beta * S * I`).

mod param_file;
mod rhs;
mod simulate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use param_file::{load_param_file, parse_param_file, write_param_file, ParamFileError};
pub use rhs::{rhs_full, rhs_reduced, rhs_si, FullModel, ReducedModel, SiModel};
pub use simulate::{simulate, simulate_si};

/// Component positions inside the array form of a [`State`].
///
/// The reduced system uses the first five slots, the full model appends `R`.
pub mod index {
    pub const S0: usize = 0;
    pub const S1: usize = 1;
    pub const S2: usize = 2;
    pub const Z: usize = 3;
    pub const I: usize = 4;
    pub const R: usize = 5;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// Rate constants of the model plus the intracellular delay `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Recruitment rate (millions / year).
    #[serde(rename = "B")]
    pub b: f64,
    /// Natural death rate (1 / year).
    pub mu: f64,
    /// Disease-induced death rate (1 / year).
    pub d: f64,
    /// Response rate of `S0` to information, moving people into `R`.
    pub gamma0: f64,
    /// Response rate of `S0` to information, moving people into `S1`.
    pub gamma1: f64,
    /// Response rate of `S0` to information, moving people into `S2`.
    pub gamma2: f64,
    /// Transmission rate for `S0` (per million per year).
    pub beta0: f64,
    /// Transmission rate for `S1`.
    pub beta1: f64,
    /// Transmission rate for `S2`.
    pub beta2: f64,
    /// Information growth per infective (1 / year).
    pub q: f64,
    /// Information decay rate (1 / year).
    pub eta: f64,
    /// Intracellular delay (years).
    pub u: f64,
}

/// Scalars derived from [`ModelParams`] that drive the threshold analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// `gamma0 + gamma1 + gamma2`.
    pub gamma_total: f64,
    /// `beta0 + tau * gamma_total`.
    pub b0u: f64,
    /// Effective education dissemination rate `q / eta`.
    pub tau: f64,
    /// Critical death rate `mu (mu + d) / B`.
    pub d0: f64,
    /// Basic reproduction number `B beta0 / (mu (mu + d))`.
    pub r0: f64,
    /// Relative infection weight `(beta1 gamma1 + beta2 gamma2) / gamma_total`.
    pub rel_weight: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("B", self.b),
            ("mu", self.mu),
            ("d", self.d),
            ("eta", self.eta),
            ("q", self.q),
            ("beta0", self.beta0),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        let nonneg = [
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("u", self.u),
        ];
        for (name, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and >= 0",
                });
            }
        }
        if self.gamma_total() <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "gamma0",
                value: self.gamma0,
                reason: "gamma0 + gamma1 + gamma2 must be > 0",
            });
        }
        Ok(())
    }

    pub fn gamma_total(&self) -> f64 {
        self.gamma0 + self.gamma1 + self.gamma2
    }

    pub fn tau(&self) -> f64 {
        self.q / self.eta
    }

    /// Critical death rate: per-capita death rate of an infective in a fully
    /// susceptible population.
    pub fn d0(&self) -> f64 {
        self.mu * (self.mu + self.d) / self.b
    }

    /// `beta1 gamma1 + beta2 gamma2`, the numerator of the relative infection
    /// weight.
    pub fn weighted_beta_sum(&self) -> f64 {
        self.beta1 * self.gamma1 + self.beta2 * self.gamma2
    }

    /// Largest of the three transmission rates.
    pub fn beta_max(&self) -> f64 {
        self.beta0.max(self.beta1).max(self.beta2)
    }

    pub fn derived(&self) -> DerivedQuantities {
        let gamma_total = self.gamma_total();
        let tau = self.tau();
        DerivedQuantities {
            gamma_total,
            b0u: self.beta0 + tau * gamma_total,
            tau,
            d0: self.d0(),
            r0: self.b * self.beta0 / (self.mu * (self.mu + self.d)),
            rel_weight: self.weighted_beta_sum() / gamma_total,
        }
    }

    /// Same parameters with `tau` moved by rescaling `q` at fixed `eta`.
    pub fn with_tau(&self, tau: f64) -> Self {
        Self {
            q: tau * self.eta,
            ..*self
        }
    }

    pub fn with_delay(&self, u: f64) -> Self {
        Self { u, ..*self }
    }

    /// Fixed Uganda constants merged with one fitted row.
    pub fn uganda(row: &FittedRow) -> Self {
        UGANDA_FIXED.params(row.beta0, row.eta, row.gamma0, row.q, row.u)
    }

    /// Uganda parameters for one of the fitted delays `u in {0, 3, 6, 9, 12}`.
    pub fn uganda_fit(u: f64) -> Option<Self> {
        FittedRow::for_delay(u).map(Self::uganda)
    }
}

impl Default for ModelParams {
    /// Uganda fit at `u = 6`.
    fn default() -> Self {
        Self::uganda(&UGANDA_FITS[2])
    }
}

/// Parameters held fixed while fitting, with `beta1` and `beta2` tied to
/// `beta0` through constant ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub b: f64,
    pub mu: f64,
    pub d: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta1_ratio: f64,
    pub beta2_ratio: f64,
}

impl FixedParams {
    /// Builds full parameters from the four free ones, re-applying the ties.
    pub fn params(&self, beta0: f64, eta: f64, gamma0: f64, q: f64, u: f64) -> ModelParams {
        ModelParams {
            b: self.b,
            mu: self.mu,
            d: self.d,
            gamma0,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            beta0,
            beta1: self.beta1_ratio * beta0,
            beta2: self.beta2_ratio * beta0,
            q,
            eta,
            u,
        }
    }
}

/// Fixed Uganda constants (adults 15-59, millions, years).
pub const UGANDA_FIXED: FixedParams = FixedParams {
    b: 0.55,
    mu: 0.01176,
    d: 0.14,
    gamma1: 0.1,
    gamma2: 0.8,
    beta1_ratio: 0.05,
    beta2_ratio: 0.40,
};

/// One published fit of `(beta0, eta, gamma0, q)` at a given delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedRow {
    pub u: f64,
    pub beta0: f64,
    pub eta: f64,
    pub gamma0: f64,
    pub q: f64,
    /// Reported fit error.
    pub sse: f64,
}

impl FittedRow {
    pub fn tau(&self) -> f64 {
        self.q / self.eta
    }

    pub fn for_delay(u: f64) -> Option<&'static FittedRow> {
        UGANDA_FITS.iter().find(|row| row.u == u)
    }
}

/// Published Uganda fits for `u = 0, 3, 6, 9, 12`.
pub const UGANDA_FITS: [FittedRow; 5] = [
    FittedRow { u: 0.0, beta0: 0.025801, eta: 0.041590, gamma0: 0.249756, q: 0.087683, sse: 1.377340 },
    FittedRow { u: 3.0, beta0: 0.023290, eta: 0.049984, gamma0: 0.252212, q: 0.094138, sse: 1.350753 },
    FittedRow { u: 6.0, beta0: 0.021509, eta: 0.055251, gamma0: 0.252445, q: 0.099323, sse: 1.309197 },
    FittedRow { u: 9.0, beta0: 0.020364, eta: 0.061623, gamma0: 0.252566, q: 0.105675, sse: 1.267271 },
    FittedRow { u: 12.0, beta0: 0.019605, eta: 0.063318, gamma0: 0.253071, q: 0.107944, sse: 1.238921 },
];

/// Compartment values. `r` is only meaningful for full-model runs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub z: f64,
    pub i: f64,
    pub r: f64,
}

impl State {
    /// Disease-free state `(B/mu, 0, 0, 0, 0, 0)`.
    pub fn disease_free(p: &ModelParams) -> Self {
        Self {
            s0: p.b / p.mu,
            ..Self::default()
        }
    }

    /// 1992 Uganda starting point used by the fits.
    pub fn uganda_1992() -> Self {
        Self {
            s0: 5.014983,
            s1: 0.0,
            s2: 0.0,
            z: 0.20,
            i: 0.884997,
            r: 0.0,
        }
    }

    pub fn from_reduced(y: &[f64; 5]) -> Self {
        Self {
            s0: y[index::S0],
            s1: y[index::S1],
            s2: y[index::S2],
            z: y[index::Z],
            i: y[index::I],
            r: 0.0,
        }
    }

    pub fn from_full(y: &[f64; 6]) -> Self {
        Self {
            r: y[index::R],
            ..Self::from_reduced(&[y[0], y[1], y[2], y[3], y[4]])
        }
    }

    pub fn to_reduced(&self) -> [f64; 5] {
        [self.s0, self.s1, self.s2, self.z, self.i]
    }

    pub fn to_full(&self) -> [f64; 6] {
        [self.s0, self.s1, self.s2, self.z, self.i, self.r]
    }

    /// `S0 + S1 + S2`.
    pub fn susceptible(&self) -> f64 {
        self.s0 + self.s1 + self.s2
    }

    /// `N = S0 + S1 + S2 + I`.
    pub fn living_at_risk(&self) -> f64 {
        self.susceptible() + self.i
    }
}
