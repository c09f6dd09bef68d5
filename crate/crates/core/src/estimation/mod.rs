//! Relative SSE between the full model and yearly data, and its minimisation
//! over `(beta0, eta, gamma0, q)` with `beta1`, `beta2` tied to `beta0`.

mod dataset;
mod nelder_mead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dde::{DdeError, SolverConfig, Trajectory};
use crate::model::{simulate, FixedParams, ModelParams, State, UGANDA_FIXED};
use crate::table::Table;

pub use dataset::{builtin_uganda, load_dataset, Dataset, DatasetError, DATASET_HEADER};
pub use nelder_mead::{initial_simplex, nelder_mead, NmConfig, NmError, NmResult, NmTraceEntry};

/// Objective value returned for nonpositive parameters or failed runs.
pub const PENALTY: f64 = 1e12;

/// Initial guesses `(beta0, eta, gamma0, q)` used for the Uganda fits.
pub const UGANDA_GUESS: [f64; 4] = [0.028, 0.041, 0.264, 0.071];

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("free parameters must be > 0, got {0:?}")]
    NonpositiveParameter([f64; 4]),
    #[error(transparent)]
    Solver(#[from] DdeError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Optimizer(#[from] NmError),
}

/// Free parameters of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParams {
    pub beta0: f64,
    pub eta: f64,
    pub gamma0: f64,
    pub q: f64,
}

impl FreeParams {
    pub fn from_array(x: [f64; 4]) -> Self {
        Self {
            beta0: x[0],
            eta: x[1],
            gamma0: x[2],
            q: x[3],
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.beta0, self.eta, self.gamma0, self.q]
    }

    pub fn from_params(p: &ModelParams) -> Self {
        Self {
            beta0: p.beta0,
            eta: p.eta,
            gamma0: p.gamma0,
            q: p.q,
        }
    }

    pub fn tau(&self) -> f64 {
        self.q / self.eta
    }
}

/// Everything held fixed while `(beta0, eta, gamma0, q)` vary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitProblem {
    pub fixed: FixedParams,
    pub u: f64,
    pub initial: State,
    pub solver: SolverConfig,
}

impl FitProblem {
    /// Uganda constants, 1992 initial state and `rel_tol = 1e-7`.
    pub fn uganda(u: f64) -> Self {
        Self {
            fixed: UGANDA_FIXED,
            u,
            initial: State::uganda_1992(),
            solver: SolverConfig::with_tolerances(1e-7, 1e-10),
        }
    }

    pub fn with_delay(&self, u: f64) -> Self {
        Self { u, ..*self }
    }

    /// Full parameter set with the tie constraints applied.
    pub fn params(&self, x: &FreeParams) -> ModelParams {
        self.fixed.params(x.beta0, x.eta, x.gamma0, x.q, self.u)
    }

    /// Model run over `[0, max observation time]`.
    pub fn simulate(&self, x: &FreeParams, ds: &Dataset) -> Result<Trajectory<6>, EstimationError> {
        if x.to_array().iter().any(|v| !(*v > 0.0)) {
            return Err(EstimationError::NonpositiveParameter(x.to_array()));
        }
        let t_end = ds.max_time().max(f64::EPSILON);
        Ok(simulate(&self.params(x), &self.initial, (0.0, t_end), &self.solver)?)
    }

    pub fn sse_terms(&self, x: &FreeParams, ds: &Dataset) -> Result<SseTerms, EstimationError> {
        let traj = self.simulate(x, ds)?;
        sse_terms_of(&traj, ds)
    }

    pub fn sse(&self, x: &FreeParams, ds: &Dataset) -> Result<f64, EstimationError> {
        Ok(self.sse_terms(x, ds)?.total())
    }

    /// `sse`, with [`PENALTY`] in place of any error.
    pub fn objective(&self, x: &FreeParams, ds: &Dataset) -> f64 {
        match self.sse(x, ds) {
            Ok(v) if v.is_finite() => v,
            _ => PENALTY,
        }
    }
}

/// The three sums making up the relative SSE.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SseTerms {
    /// `sum |S0 + S1 + S2 - S_data|^2 / S_data`.
    pub susceptible: f64,
    /// `sum |I - I_data|^2 / I_data`.
    pub infected: f64,
    /// `sum |Z - Z_data|^2 / Z_data`.
    pub info: f64,
}

impl SseTerms {
    pub fn total(&self) -> f64 {
        self.susceptible + self.infected + self.info
    }
}

fn relative_sq(model: f64, data: f64) -> f64 {
    (model - data).powi(2) / data.abs()
}

/// Relative SSE of an existing trajectory (time origin at the dataset epoch).
pub fn sse_terms_of(traj: &Trajectory<6>, ds: &Dataset) -> Result<SseTerms, EstimationError> {
    let at = |year: f64| traj.sample(year - ds.epoch_year).map(|y| State::from_full(&y));
    let mut terms = SseTerms::default();
    for &(year, v) in &ds.susceptible_obs {
        terms.susceptible += relative_sq(at(year)?.susceptible(), v);
    }
    for &(year, v) in &ds.infected_obs {
        terms.infected += relative_sq(at(year)?.i, v);
    }
    for &(year, v) in &ds.info_obs {
        terms.info += relative_sq(at(year)?.z, v);
    }
    Ok(terms)
}

/// Model and data side by side at every observation year; missing data is NaN.
pub fn overlay_table(traj: &Trajectory<6>, ds: &Dataset) -> Result<Table, EstimationError> {
    let mut table = Table::new([
        "year",
        "t",
        "S_model",
        "S_data",
        "I_model",
        "I_data",
        "Z_model",
        "Z_data",
    ]);
    let lookup = |obs: &[(f64, f64)], year: f64| obs.iter().find(|o| o.0 == year).map_or(f64::NAN, |o| o.1);
    for year in ds.years() {
        let t = year - ds.epoch_year;
        if t < traj.t0() || t > traj.t_end() {
            continue;
        }
        let s = State::from_full(&traj.sample(t)?);
        table
            .push(vec![
                year,
                t,
                s.susceptible(),
                lookup(&ds.susceptible_obs, year),
                s.i,
                lookup(&ds.infected_obs, year),
                s.z,
                lookup(&ds.info_obs, year),
            ])
            .expect("eight columns");
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTraceEntry {
    pub iteration: usize,
    pub params: FreeParams,
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub u: f64,
    pub params: FreeParams,
    pub sse: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Vec<FitTraceEntry>,
}

impl FitResult {
    pub fn tau(&self) -> f64 {
        self.params.tau()
    }

    /// One row per iteration: `iteration, beta0, eta, gamma0, q, sse`.
    pub fn trace_table(&self) -> Table {
        let mut table = Table::new(["iteration", "beta0", "eta", "gamma0", "q", "sse"]);
        for e in &self.trace {
            let p = e.params;
            table
                .push(vec![e.iteration as f64, p.beta0, p.eta, p.gamma0, p.q, e.sse])
                .expect("six columns");
        }
        table
    }
}

/// Minimises the relative SSE from `x0`. Running out of iterations is not an
/// error: the best point is returned with `converged = false`.
pub fn fit(problem: &FitProblem, ds: &Dataset, x0: &FreeParams, cfg: &NmConfig) -> Result<FitResult, EstimationError> {
    ds.validate()?;
    if x0.to_array().iter().any(|v| !(*v > 0.0)) {
        return Err(EstimationError::NonpositiveParameter(x0.to_array()));
    }
    problem.sse(x0, ds)?;
    let objective = |x: &[f64]| problem.objective(&FreeParams::from_array([x[0], x[1], x[2], x[3]]), ds);
    let nm = match nelder_mead(objective, &x0.to_array(), cfg) {
        Ok(r) => r,
        Err(NmError::MaxIterations(r)) => *r,
        Err(e) => return Err(e.into()),
    };
    let to_free = |x: &[f64]| FreeParams::from_array([x[0], x[1], x[2], x[3]]);
    Ok(FitResult {
        u: problem.u,
        params: to_free(&nm.x),
        sse: nm.f,
        iterations: nm.iterations,
        evaluations: nm.evaluations,
        converged: nm.converged,
        trace: nm
            .trace
            .iter()
            .map(|e| FitTraceEntry {
                iteration: e.iteration,
                params: to_free(&e.x),
                sse: e.f,
            })
            .collect(),
    })
}

/// Independent fits for each delay, run in parallel.
pub fn fit_grid(
    problem: &FitProblem,
    ds: &Dataset,
    delays: &[f64],
    x0: &FreeParams,
    cfg: &NmConfig,
) -> Vec<Result<FitResult, EstimationError>> {
    delays
        .par_iter()
        .map(|&u| fit(&problem.with_delay(u), ds, x0, cfg))
        .collect()
}

/// Summary of a delay grid: `u, beta0, eta, gamma0, q, tau, sse, converged`.
pub fn fit_summary_table(results: &[FitResult]) -> Table {
    let mut table = Table::new(["u", "beta0", "eta", "gamma0", "q", "tau", "sse", "converged"]);
    for r in results {
        let p = r.params;
        table
            .push(vec![
                r.u,
                p.beta0,
                p.eta,
                p.gamma0,
                p.q,
                p.tau(),
                r.sse,
                if r.converged { 1.0 } else { 0.0 },
            ])
            .expect("eight columns");
    }
    table
}
