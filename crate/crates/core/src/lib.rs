//! Numerical toolkit for a time-delayed HIV/AIDS epidemic model with
//! education campaigns.
//!
//! The population is split into three susceptible classes (`S0` general,
//! `S1` abstinence/faithfulness, `S2` condom use), an information density
//! `Z`, infectives `I` and a removed class `R`. Infection acts through the
//! delayed infective count `I(t - u)` with mass-action incidence.
//!
//! Modules:
//!
//! * [`model`]: parameters, derived thresholds and right-hand sides.
//! * [`dde`]: adaptive method-of-steps integrator with dense output.
//! * [`equilibria`]: disease-free and endemic equilibria, root
//!   classification and the asymptotics in the education dissemination
//!   rate `tau = q / eta`.
//! * [`stability`]: characteristic function, DFE verdict, the `u = 0`
//!   endemic spectrum and explicit permanence bounds.
//! * [`estimation`]: Uganda 1992-2005 data, relative SSE objective and a
//!   Nelder-Mead fit of `(beta0, eta, gamma0, q)`.
//! * [`table`]: delimited/JSON-lines numeric tables used for every export.

pub mod dde;
pub mod equilibria;
pub mod estimation;
pub mod model;
pub mod scalar;
pub mod stability;
pub mod table;

pub use dde::{integrate, ConstantHistory, DdeError, History, SolverConfig, Trajectory};
pub use equilibria::{Equilibrium, EquilibriumKind, RootCase, RootReport};
pub use model::{DerivedQuantities, ModelParams, State};
