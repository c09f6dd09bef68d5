//! Derivative-free simplex minimisation.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmConfig {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Bound on `max_i |f_i - f_best|`.
    pub f_tol: f64,
    /// Bound on `max_i ||x_i - x_best||_inf`.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for NmConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            f_tol: 1e-8,
            x_tol: 1e-8,
            max_iter: 2000,
        }
    }
}

/// Best vertex after one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmTraceEntry {
    pub iteration: usize,
    pub x: Vec<f64>,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Vec<NmTraceEntry>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NmError {
    #[error("objective is not finite at the starting point")]
    NonFiniteStart,
    #[error("empty starting point")]
    EmptyStart,
    #[error("no convergence after {} iterations (best f = {})", .0.iterations, .0.f)]
    MaxIterations(Box<NmResult>),
}

/// Starting simplex: `x0` and one vertex per coordinate moved by 5 %, or by
/// 0.00025 when the coordinate is below 0.005 in magnitude.
pub fn initial_simplex(x0: &[f64]) -> Vec<Vec<f64>> {
    let mut simplex = vec![x0.to_vec()];
    for k in 0..x0.len() {
        let mut v = x0.to_vec();
        v[k] = if x0[k].abs() < 0.005 { x0[k] + 0.00025 } else { 1.05 * x0[k] };
        simplex.push(v);
    }
    simplex
}

pub fn nelder_mead<F>(mut f: F, x0: &[f64], cfg: &NmConfig) -> Result<NmResult, NmError>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(NmError::EmptyStart);
    }
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };
    let mut simplex = initial_simplex(x0);
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    if !values[0].is_finite() {
        return Err(NmError::NonFiniteStart);
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        order(&mut simplex, &mut values);
        let best = &simplex[0];
        let f_spread = values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= cfg.f_tol && x_spread <= cfg.x_tol {
            converged = true;
            break;
        }
        if iterations == cfg.max_iter {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(cfg.reflection);
        let fr = eval(&xr);
        let mut accepted: Option<(Vec<f64>, f64)> = None;
        if fr < values[0] {
            let xe = along(cfg.reflection * cfg.expansion);
            let fe = eval(&xe);
            accepted = Some(if fe < fr { (xe, fe) } else { (xr, fr) });
        } else if fr < values[n - 1] {
            accepted = Some((xr, fr));
        } else if fr < values[n] {
            let xc = along(cfg.reflection * cfg.contraction);
            let fc = eval(&xc);
            if fc <= fr {
                accepted = Some((xc, fc));
            }
        } else {
            let xcc = along(-cfg.contraction);
            let fcc = eval(&xcc);
            if fcc < values[n] {
                accepted = Some((xcc, fcc));
            }
        }
        match accepted {
            Some((x, fx)) => {
                simplex[n] = x;
                values[n] = fx;
            }
            None => {
                let best = simplex[0].clone();
                for k in 1..=n {
                    let v: Vec<f64> = best
                        .iter()
                        .zip(&simplex[k])
                        .map(|(b, x)| b + cfg.shrink * (x - b))
                        .collect();
                    values[k] = eval(&v);
                    simplex[k] = v;
                }
            }
        }
        let k = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("nonempty simplex");
        trace.push(NmTraceEntry {
            iteration: iterations,
            x: simplex[k].clone(),
            f: values[k],
        });
    }

    let result = NmResult {
        x: simplex[0].clone(),
        f: values[0],
        iterations,
        evaluations,
        converged,
        trace,
    };
    if converged {
        Ok(result)
    } else {
        Err(NmError::MaxIterations(Box::new(result)))
    }
}

// Stable sort by value; NaN ranks last.
fn order(simplex: &mut Vec<Vec<f64>>, values: &mut Vec<f64>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let key = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
        key(values[a]).total_cmp(&key(values[b]))
    });
    *simplex = idx.iter().map(|&k| simplex[k].clone()).collect();
    *values = idx.iter().map(|&k| values[k]).collect();
}
