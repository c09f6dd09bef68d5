//! Constant-delay integrator using the explicit method of steps.
//!
//! Steps come from the classical fourth-order Runge-Kutta scheme with an
//! embedded third-order solution built from the first-same-as-last stage,
//! so the error estimate is `h/6 (k4 - k5)`. For `u > 0` every step is capped
//! at `u` and lands exactly on the grid `t0 + k u`; stage evaluations then
//! only ever read the lagged component from the history or from intervals
//! that are already accepted. With `u = 0` the lagged value is the current
//! one and the scheme is an ordinary adaptive ODE solver.

mod trajectory;

use thiserror::Error;

pub use trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DdeError {
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudgetExceeded { t: f64, max_steps: usize },
    #[error("non-finite state produced at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("t = {t} lies outside the trajectory span [{t0}, {t1}]")]
    OutOfSpan { t: f64, t0: f64, t1: f64 },
    #[error("invalid solver input: {0}")]
    InvalidInput(&'static str),
}

/// A system `y'(t) = f(t, y(t), y_k(t - u))` where only one component `k`
/// enters with a lag.
pub trait DelaySystem<const N: usize> {
    /// Index `k` of the lagged component.
    fn lagged_component(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64; N], lagged: f64) -> [f64; N];
}

/// Adapter turning a closure into a [`DelaySystem`].
pub struct DelayFn<F> {
    component: usize,
    f: F,
}

impl<F> DelayFn<F> {
    pub fn new<const N: usize>(component: usize, f: F) -> Self
    where
        F: Fn(f64, &[f64; N], f64) -> [f64; N],
    {
        Self { component, f }
    }
}

impl<const N: usize, F> DelaySystem<N> for DelayFn<F>
where
    F: Fn(f64, &[f64; N], f64) -> [f64; N],
{
    fn lagged_component(&self) -> usize {
        self.component
    }

    fn rhs(&self, t: f64, y: &[f64; N], lagged: f64) -> [f64; N] {
        (self.f)(t, y, lagged)
    }
}

/// Solution values for `t <= t0`.
pub trait History<const N: usize> {
    fn state(&self, t: f64) -> [f64; N];
}

/// History frozen at the initial condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantHistory<const N: usize>(pub [f64; N]);

impl<const N: usize> History<N> for ConstantHistory<N> {
    fn state(&self, _t: f64) -> [f64; N] {
        self.0
    }
}

impl<const N: usize, F> History<N> for F
where
    F: Fn(f64) -> [f64; N],
{
    fn state(&self, t: f64) -> [f64; N] {
        self(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// First trial step; chosen from the initial slope when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Budget of attempted (accepted plus rejected) steps.
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    /// Steps of exactly `h` (or shorter where the span or a delay multiple
    /// forces it): the error test can never reject.
    pub fn fixed_step(h: f64) -> Self {
        Self {
            rel_tol: 1e30,
            abs_tol: 1e30,
            h_init: Some(h),
            h_max: h,
            max_steps: usize::MAX,
        }
    }

    pub fn validate(&self) -> Result<(), DdeError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(DdeError::InvalidInput("tolerances must be > 0"));
        }
        if !(self.h_max > 0.0) {
            return Err(DdeError::InvalidInput("h_max must be > 0"));
        }
        if let Some(h) = self.h_init {
            if !(h > 0.0 && h.is_finite()) {
                return Err(DdeError::InvalidInput("h_init must be finite and > 0"));
            }
        }
        Ok(())
    }
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Integrates `sys` over `t_span` with delay `u`, starting from `hist(t0)`.
pub fn integrate<const N: usize, S, H>(
    sys: &S,
    hist: &H,
    t_span: (f64, f64),
    u: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory<N>, DdeError>
where
    S: DelaySystem<N> + ?Sized,
    H: History<N> + ?Sized,
{
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(DdeError::InvalidInput("t_span must satisfy t1 > t0"));
    }
    if !(u.is_finite() && u >= 0.0) {
        return Err(DdeError::InvalidInput("delay must be finite and >= 0"));
    }
    cfg.validate()?;
    let comp = sys.lagged_component();
    if comp >= N {
        return Err(DdeError::InvalidInput("lagged component out of range"));
    }

    let y0 = hist.state(t0);
    let lag0 = if u > 0.0 { hist.state(t0 - u)[comp] } else { y0[comp] };
    let f0 = sys.rhs(t0, &y0, lag0);
    if !all_finite(&y0) || !all_finite(&f0) {
        return Err(DdeError::NonFiniteState { t: t0 });
    }
    let mut traj = Trajectory::with_first(t0, y0, f0);

    // Value of the lagged component at `t - u`, or the stage value when u = 0.
    let lagged = |traj: &Trajectory<N>, t: f64, y: &[f64; N]| -> f64 {
        if u == 0.0 {
            return y[comp];
        }
        let td = t - u;
        if td <= t0 {
            hist.state(td)[comp]
        } else {
            traj.lagged_value(td.min(traj.t_end()), comp)
        }
    };

    let mut t = t0;
    let mut y = y0;
    let mut f = f0;
    let mut h = match cfg.h_init {
        Some(h) => h,
        None => initial_step(&y0, &f0, cfg),
    };
    let mut next_break = if u > 0.0 { t0 + u } else { f64::INFINITY };
    let mut attempts = 0usize;
    let mut last_rejected = false;

    while t < t1 {
        if attempts >= cfg.max_steps {
            return Err(DdeError::StepBudgetExceeded {
                t,
                max_steps: cfg.max_steps,
            });
        }
        attempts += 1;

        let scale = t.abs().max(1.0);
        while next_break - t <= 1e-12 * scale {
            next_break += u;
        }
        h = h.min(cfg.h_max).min(t1 - t);
        if u > 0.0 {
            h = h.min(u);
        }
        let mut t_new = t + h;
        if t_new >= next_break - 1e-12 * scale {
            h = next_break - t;
            t_new = next_break;
        }
        if t1 - t_new <= 1e-12 * scale {
            h = t1 - t;
            t_new = t1;
        }
        if h <= 16.0 * f64::EPSILON * scale {
            return Err(DdeError::StepSizeUnderflow { t });
        }

        let half = t + 0.5 * h;
        let k1 = f;
        let y2 = axpy(&y, 0.5 * h, &k1);
        let k2 = sys.rhs(half, &y2, lagged(&traj, half, &y2));
        let y3 = axpy(&y, 0.5 * h, &k2);
        let k3 = sys.rhs(half, &y3, lagged(&traj, half, &y3));
        let y4 = axpy(&y, h, &k3);
        let k4 = sys.rhs(t_new, &y4, lagged(&traj, t_new, &y4));
        let mut y_new = y;
        for i in 0..N {
            y_new[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let k5 = sys.rhs(t_new, &y_new, lagged(&traj, t_new, &y_new));

        if !all_finite(&y_new) || !all_finite(&k5) {
            if h <= 1e-10 * scale {
                return Err(DdeError::NonFiniteState { t: t_new });
            }
            h *= MIN_FACTOR;
            last_rejected = true;
            continue;
        }

        let mut err = 0.0f64;
        for i in 0..N {
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max((h / 6.0 * (k4[i] - k5[i])).abs() / sc);
        }

        if err <= 1.0 {
            t = t_new;
            y = y_new;
            f = k5;
            traj.push(t, y, f);
            let mut factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.25)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = false;
            h *= factor;
        } else {
            h *= (SAFETY * err.powf(-0.25)).max(MIN_FACTOR);
            last_rejected = true;
        }
    }
    Ok(traj)
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for (o, ki) in out.iter_mut().zip(k) {
        *o += a * ki;
    }
    out
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], cfg: &SolverConfig) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs();
        d0 = d0.max(y[i].abs() / sc);
        d1 = d1.max(f[i].abs() / sc);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(cfg.h_max)
}

#[cfg(test)]
mod tests;
