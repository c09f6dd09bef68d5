//! Linear stability of equilibria and permanence bounds.
//!
//! The characteristic function of the linearisation at an equilibrium `E` is
//! `P(lambda) = det(lambda I - M(lambda; E))`, where `M` is the Jacobian of the
//! reduced system with every delayed-`I` column scaled by `exp(-lambda u)`.

mod eigen;

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibria::{self, EquilibriumError, EQ_RTOL};
use crate::model::{ModelParams, State};
use crate::scalar::bisect;
use crate::table::{fmt_num, Table};

pub use eigen::{char_poly, poly_roots};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("root iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(&'static str),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}

pub type Matrix5 = [[f64; 5]; 5];

/// `M(lambda; E)` in the component order `(S0, S1, S2, Z, I)`.
pub fn char_matrix(lambda: Complex64, e: &State, p: &ModelParams) -> [[Complex64; 5]; 5] {
    let lag = (-lambda * p.u).exp();
    let re = |x: f64| Complex64::new(x, 0.0);
    let gamma = p.gamma_total();
    let (s0, s1, s2, z, i) = (e.s0, e.s1, e.s2, e.z, e.i);
    let infection = p.beta0 * s0 + p.beta1 * s1 + p.beta2 * s2;
    [
        [re(-p.b / s0), re(0.0), re(0.0), re(-gamma * s0), -lag * (p.beta0 * s0)],
        [re(p.gamma1 * z), re(-(p.mu + p.beta1 * i)), re(0.0), re(p.gamma1 * s0), -lag * (p.beta1 * s1)],
        [re(p.gamma2 * z), re(0.0), re(-(p.mu + p.beta2 * i)), re(p.gamma2 * s0), -lag * (p.beta2 * s2)],
        [re(0.0), re(0.0), re(0.0), re(-p.eta), re(p.q)],
        [re(p.beta0 * i), re(p.beta1 * i), re(p.beta2 * i), re(0.0), lag * infection - (p.mu + p.d)],
    ]
}

/// Determinant by LU factorisation with partial pivoting.
pub fn det_complex<const N: usize>(mut a: [[Complex64; N]; N]) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .expect("nonempty range");
        if a[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let d = a[col][col];
        det *= d;
        for row in col + 1..N {
            let factor = a[row][col] / d;
            for k in col..N {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
        }
    }
    det
}

/// `P(lambda) = det(lambda I - M(lambda; E))`.
pub fn char_function(lambda: Complex64, e: &State, p: &ModelParams) -> Complex64 {
    let mut a = char_matrix(lambda, e, p);
    for (k, row) in a.iter_mut().enumerate() {
        for x in row.iter_mut() {
            *x = -*x;
        }
        row[k] += lambda;
    }
    det_complex(a)
}

/// `P` on the rectangular grid `re x im`, one row per point.
pub fn char_function_grid(e: &State, p: &ModelParams, re: &[f64], im: &[f64]) -> Table {
    let mut table = Table::new(["re", "im", "P_re", "P_im", "abs"]);
    for &x in re {
        for &y in im {
            let v = char_function(Complex64::new(x, y), e, p);
            table.push(vec![x, y, v.re, v.im, v.norm()]).expect("five columns");
        }
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DfeVerdict {
    Stable,
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfeStability {
    pub verdict: DfeVerdict,
    /// The real root `lambda >= 0` of the DFE factor when it exists.
    pub positive_root: Option<f64>,
}

/// Unique positive root of `lambda + D0 B/mu - (beta0 B/mu) exp(-lambda u)`
/// when `beta0 > D0`.
pub fn dfe_positive_root(p: &ModelParams) -> Option<f64> {
    let d0 = p.d0();
    if p.beta0 <= d0 {
        return None;
    }
    let (a, c) = (d0 * p.b / p.mu, p.beta0 * p.b / p.mu);
    bisect(|l| l + a - c * (-l * p.u).exp(), 0.0, c)
}

/// Linear stability of the disease-free equilibrium, decided by `beta0` vs `D0`.
pub fn dfe_stability(p: &ModelParams) -> DfeStability {
    let d0 = p.d0();
    if (p.beta0 - d0).abs() <= EQ_RTOL * d0 {
        DfeStability {
            verdict: DfeVerdict::Marginal,
            positive_root: Some(0.0),
        }
    } else if p.beta0 < d0 {
        DfeStability {
            verdict: DfeVerdict::Stable,
            positive_root: None,
        }
    } else {
        DfeStability {
            verdict: DfeVerdict::Unstable,
            positive_root: dfe_positive_root(p),
        }
    }
}

/// Jacobian of the reduced system at `e` with the delay collapsed (`u = 0`).
pub fn jacobian_u0(e: &State, p: &ModelParams) -> Matrix5 {
    let p0 = p.with_delay(0.0);
    char_matrix(Complex64::new(0.0, 0.0), e, &p0).map(|row| row.map(|x| x.re))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted by decreasing real part.
    pub eigenvalues: Vec<Complex64>,
    pub max_real_part: f64,
    pub stable: bool,
}

impl SpectrumReport {
    fn from_eigenvalues(eigenvalues: Vec<Complex64>) -> Self {
        let max_real_part = eigenvalues.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
        Self {
            eigenvalues,
            max_real_part,
            stable: max_real_part < 0.0,
        }
    }

    /// `re,im` rows followed by a `max_real_part,stable` summary.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "re,im")?;
        for z in &self.eigenvalues {
            writeln!(out, "{},{}", fmt_num(z.re), fmt_num(z.im))?;
        }
        writeln!(out, "max_real_part,stable")?;
        writeln!(out, "{},{}", fmt_num(self.max_real_part), self.stable)
    }
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues<const N: usize>(m: &[[f64; N]; N]) -> Result<SpectrumReport, StabilityError> {
    let roots = poly_roots(&char_poly(m))?;
    Ok(SpectrumReport::from_eigenvalues(roots))
}

pub fn eigenvalues_5x5(m: &Matrix5) -> Result<SpectrumReport, StabilityError> {
    eigenvalues(m)
}

/// Spectrum of the `u = 0` Jacobian at the endemic equilibrium.
pub fn endemic_stable_u0(p: &ModelParams) -> Result<SpectrumReport, StabilityError> {
    if p.u != 0.0 {
        return Err(StabilityError::PreconditionViolated("requires u = 0"));
    }
    let e = equilibria::solve_endemic(p)?
        .ok_or(StabilityError::PreconditionViolated("requires beta0 > D0"))?;
    eigenvalues_5x5(&jacobian_u0(&e.state, p))
}

/// `D0 (D0 + tau gamma) >= tau (beta1 gamma1 + beta2 gamma2)`, the hypothesis
/// under which the `u = 0` endemic state is stable just above `beta0 = D0`.
pub fn weak_protection_condition(p: &ModelParams) -> bool {
    let d0 = p.d0();
    let tau = p.tau();
    d0 * (d0 + tau * p.gamma_total()) >= tau * p.weighted_beta_sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beta0Scan {
    /// `(beta0, max real part)` for each candidate, increasing in `beta0`.
    pub samples: Vec<(f64, f64)>,
    /// Smallest scanned `beta0` whose endemic state is not stable.
    pub first_unstable: Option<f64>,
}

/// Scans `beta0 = D0 (1 + 1e-3) ratio^k` up to `cap_factor D0` at `u = 0`,
/// with `beta1`, `beta2` held fixed.
pub fn scan_beta0_max(p: &ModelParams, ratio: f64, cap_factor: f64) -> Result<Beta0Scan, StabilityError> {
    if !(ratio > 1.0 && cap_factor > 1.0) {
        return Err(StabilityError::PreconditionViolated("need ratio > 1 and cap_factor > 1"));
    }
    let d0 = p.d0();
    let mut candidates = Vec::new();
    let mut b = d0 * (1.0 + 1e-3);
    while b <= cap_factor * d0 {
        candidates.push(b);
        b *= ratio;
    }
    let base = p.with_delay(0.0);
    let samples = candidates
        .par_iter()
        .map(|&beta0| {
            let report = endemic_stable_u0(&ModelParams { beta0, ..base })?;
            Ok((beta0, report.max_real_part))
        })
        .collect::<Result<Vec<_>, StabilityError>>()?;
    let first_unstable = samples.iter().find(|s| s.1 >= 0.0).map(|s| s.0);
    Ok(Beta0Scan {
        samples,
        first_unstable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceBounds {
    /// Lower bound on `limsup I(t)`.
    pub weak_lower: f64,
    /// Eventual upper bound on `limsup I(t)`.
    pub upper: f64,
}

pub fn persistence_bounds(p: &ModelParams) -> Result<PersistenceBounds, StabilityError> {
    let d0 = p.d0();
    if !(p.beta0 > d0 && p.beta0 >= p.beta1 && p.beta0 >= p.beta2) {
        return Err(StabilityError::PreconditionViolated(
            "requires beta0 = max(beta0, beta1, beta2) > D0",
        ));
    }
    let excess = p.beta0 - d0;
    Ok(PersistenceBounds {
        weak_lower: p.mu * excess / (d0 * (p.beta0 + p.tau() * p.gamma_total())),
        upper: (p.mu + p.d) * excess / (d0 * p.beta0),
    })
}
