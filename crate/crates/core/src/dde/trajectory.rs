use super::DdeError;
use crate::table::Table;

/// Accepted mesh with cubic Hermite dense output between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    derivs: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub(super) fn with_first(t: f64, y: [f64; N], f: [f64; N]) -> Self {
        Self {
            times: vec![t],
            states: vec![y],
            derivs: vec![f],
        }
    }

    pub(super) fn push(&mut self, t: f64, y: [f64; N], f: [f64; N]) {
        debug_assert!(t > self.t_end());
        self.times.push(t);
        self.states.push(y);
        self.derivs.push(f);
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Number of mesh nodes, including the initial one.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }

    pub fn derivatives(&self) -> &[[f64; N]] {
        &self.derivs
    }

    pub fn last_state(&self) -> [f64; N] {
        *self.states.last().expect("trajectory is never empty")
    }

    /// Interpolated state at `t`; bitwise equal to the stored node at mesh times.
    pub fn sample(&self, t: f64) -> Result<[f64; N], DdeError> {
        if !(t >= self.t0() && t <= self.t_end()) {
            return Err(DdeError::OutOfSpan {
                t,
                t0: self.t0(),
                t1: self.t_end(),
            });
        }
        let k = self.interval(t);
        if t == self.times[k] {
            return Ok(self.states[k]);
        }
        if t == self.times[k + 1] {
            return Ok(self.states[k + 1]);
        }
        let mut out = [0.0; N];
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.hermite(k, t, c);
        }
        Ok(out)
    }

    /// Samples every time in `ts` into rows `t, y...` under `names`.
    pub fn to_table(&self, ts: &[f64], names: &[&str; N]) -> Result<Table, DdeError> {
        let mut table = Table::new(std::iter::once("t").chain(names.iter().copied()));
        for &t in ts {
            let y = self.sample(t)?;
            let mut row = Vec::with_capacity(N + 1);
            row.push(t);
            row.extend_from_slice(&y);
            table.push(row).expect("row width matches header");
        }
        Ok(table)
    }

    /// Component `c` at `t`, which the caller guarantees lies inside the span.
    pub(super) fn lagged_value(&self, t: f64, c: usize) -> f64 {
        let k = self.interval(t);
        if t == self.times[k] {
            return self.states[k][c];
        }
        if k + 1 == self.times.len() {
            return self.states[k][c];
        }
        self.hermite(k, t, c)
    }

    // Index k with times[k] <= t < times[k+1], clamped to the last interval.
    fn interval(&self, t: f64) -> usize {
        let n = self.times.len();
        if n == 1 {
            return 0;
        }
        let k = self.times.partition_point(|&s| s <= t);
        k.saturating_sub(1).min(n - 2)
    }

    fn hermite(&self, k: usize, t: f64, c: usize) -> f64 {
        let (ta, tb) = (self.times[k], self.times[k + 1]);
        let h = tb - ta;
        let s = (t - ta) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.states[k][c]
            + h10 * h * self.derivs[k][c]
            + h01 * self.states[k + 1][c]
            + h11 * h * self.derivs[k + 1][c]
    }
}
