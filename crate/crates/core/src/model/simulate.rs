use super::{FullModel, ModelParams, SiModel, State};
use crate::dde::{integrate, ConstantHistory, DdeError, SolverConfig, Trajectory};

/// Full six-compartment run from `x0`, with the state frozen at `x0` for `t <= t0`.
pub fn simulate(
    p: &ModelParams,
    x0: &State,
    t_span: (f64, f64),
    cfg: &SolverConfig,
) -> Result<Trajectory<6>, DdeError> {
    integrate(&FullModel(p), &ConstantHistory(x0.to_full()), t_span, p.u, cfg)
}

/// SI run `(S0, I)` with constant history `(s0, i0)`.
pub fn simulate_si(
    p: &ModelParams,
    s0: f64,
    i0: f64,
    t_span: (f64, f64),
    cfg: &SolverConfig,
) -> Result<Trajectory<2>, DdeError> {
    integrate(&SiModel(p), &ConstantHistory([s0, i0]), t_span, p.u, cfg)
}
