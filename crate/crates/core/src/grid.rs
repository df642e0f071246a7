//! Uniformly sampled real functions on the line with declared limits and
//! tail decay at ±∞.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples `values[i] = f(t0 + i·dt)` plus the limits of `f` at `−∞` and `+∞`.
///
/// Outside the stored window the function continues exponentially towards
/// its limit, `L + (f(t0) − L)·e^{ν_L (t − t0)}` on the left and the mirror
/// form on the right. A decay rate of zero means the function jumps to its
/// limit at the window edge. Inside the window it is reconstructed by
/// 4-point cubic interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub left_limit: f64,
    pub right_limit: f64,
    #[serde(default)]
    pub left_decay: f64,
    #[serde(default)]
    pub right_decay: f64,
}

impl GridFunction {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>, left_limit: f64, right_limit: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(Error::Domain(format!("grid needs finite t0 and dt > 0 (got t0 = {t0}, dt = {dt})")));
        }
        if values.is_empty() {
            return Err(Error::Domain("grid function has no samples".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at index {i}")));
        }
        if !(left_limit.is_finite() && right_limit.is_finite()) {
            return Err(Error::Domain("non-finite limit".into()));
        }
        Ok(Self {
            t0,
            dt,
            values,
            left_limit,
            right_limit,
            left_decay: 0.0,
            right_decay: 0.0,
        })
    }

    /// Declares exponential tails with the given rates (both `≥ 0`).
    pub fn with_decay(mut self, left: f64, right: f64) -> Result<Self> {
        if !(left >= 0.0 && right >= 0.0 && left.is_finite() && right.is_finite()) {
            return Err(Error::Domain(format!("tail decay rates must be finite and >= 0 (got {left}, {right})")));
        }
        self.left_decay = left;
        self.right_decay = right;
        Ok(self)
    }

    /// Tail rates estimated from the log-slope of `|f − limit|` over the
    /// outermost `width` of the window; zero where the slope is not a decay.
    pub fn with_fitted_decay(self, width: f64) -> Self {
        let n = self.len();
        let k = ((width / self.dt).round() as usize).clamp(1, n.saturating_sub(1).max(1));
        if n < 2 {
            return self;
        }
        let rate = |near: f64, far: f64| {
            if near != 0.0 && far != 0.0 && near.signum() == far.signum() {
                let nu = (far / near).ln() / (k as f64 * self.dt);
                if nu.is_finite() && nu > 0.0 {
                    return nu;
                }
            }
            0.0
        };
        let left = rate(self.values[0] - self.left_limit, self.values[k] - self.left_limit);
        let right = rate(self.values[n - 1] - self.right_limit, self.values[n - 1 - k] - self.right_limit);
        Self {
            left_decay: left,
            right_decay: right,
            ..self
        }
    }

    /// Value outside the window, `u` measured in grid steps from `t0`.
    fn tail(&self, u: f64) -> f64 {
        let n = self.len();
        if u < 0.0 {
            let a = self.values[0] - self.left_limit;
            if self.left_decay > 0.0 {
                self.left_limit + a * (self.left_decay * u * self.dt).exp()
            } else {
                self.left_limit
            }
        } else {
            let a = self.values[n - 1] - self.right_limit;
            let past = u - (n - 1) as f64;
            if self.right_decay > 0.0 {
                self.right_limit + a * (-self.right_decay * past * self.dt).exp()
            } else {
                self.right_limit
            }
        }
    }

    /// Sample at integer node `idx`, which may lie outside the window.
    pub fn node(&self, idx: i64) -> f64 {
        if idx < 0 || idx >= self.len() as i64 {
            self.tail(idx as f64)
        } else {
            self.values[idx as usize]
        }
    }

    /// Samples `f` on `n` points; limits are taken from the end samples.
    pub fn from_fn(t0: f64, dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..n).map(|i| f(t0 + i as f64 * dt)).collect();
        let (l, r) = (values.first().copied().unwrap_or(0.0), values.last().copied().unwrap_or(0.0));
        Self::new(t0, dt, values, l, r)
    }

    /// Samples `f` on `n` points with explicitly given limits.
    pub fn from_fn_with_limits(t0: f64, dt: f64, n: usize, left: f64, right: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(t0, dt, (0..n).map(|i| f(t0 + i as f64 * dt)).collect(), left, right)
    }

    pub fn constant(t0: f64, dt: f64, n: usize, value: f64) -> Result<Self> {
        Self::new(t0, dt, vec![value; n], value, value)
    }

    /// Window `[t_min, t_max]` sampled at spacing `dt` (endpoint included when it lands on the grid).
    pub fn window_len(t_min: f64, t_max: f64, dt: f64) -> usize {
        ((t_max - t_min) / dt + 1e-9).floor() as usize + 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.len() - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.t(i))
    }

    /// Largest distance between an end sample and the declared limit on that side.
    pub fn tail_mismatch(&self) -> f64 {
        let first = self.values[0];
        let last = self.values[self.len() - 1];
        (first - self.left_limit).abs().max((last - self.right_limit).abs())
    }

    /// Value at an arbitrary `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.len();
        let u = (t - self.t0) / self.dt;
        let last = (n - 1) as f64;
        if u < -1e-9 || u > last + 1e-9 {
            return self.tail(u);
        }
        let u = u.clamp(0.0, last);
        if n < 4 {
            if n == 1 {
                return self.values[0];
            }
            let i = (u.floor() as usize).min(n - 2);
            let x = u - i as f64;
            return self.values[i] * (1.0 - x) + self.values[i + 1] * x;
        }
        let i = (u.floor() as usize).clamp(1, n - 3);
        let x = u - i as f64;
        let v = &self.values;
        let w_m = -x * (x - 1.0) * (x - 2.0) / 6.0;
        let w_0 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
        let w_1 = -(x + 1.0) * x * (x - 2.0) / 2.0;
        let w_2 = (x + 1.0) * x * (x - 1.0) / 6.0;
        w_m * v[i - 1] + w_0 * v[i] + w_1 * v[i + 1] + w_2 * v[i + 2]
    }

    /// `t ↦ self(t + h)` sampled on the same grid.
    pub fn shifted(&self, h: f64) -> Self {
        let values = self.times().map(|t| self.eval(t + h)).collect();
        Self {
            values,
            ..self.clone()
        }
    }

    /// Resamples onto another grid, keeping the limits and tail rates.
    pub fn resample(&self, t0: f64, dt: f64, n: usize) -> Result<Self> {
        Self::from_fn_with_limits(t0, dt, n, self.left_limit, self.right_limit, |t| self.eval(t))?
            .with_decay(self.left_decay, self.right_decay)
    }

    /// Centered first differences (second-order one-sided at the ends); limits
    /// 0, tail rates kept.
    pub fn derivative(&self) -> Self {
        let n = self.len();
        let v = &self.values;
        let h = self.dt;
        let values = (0..n)
            .map(|i| {
                if n < 3 {
                    if n < 2 {
                        0.0
                    } else {
                        (v[1] - v[0]) / h
                    }
                } else if i == 0 {
                    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                }
            })
            .collect();
        Self {
            t0: self.t0,
            dt: self.dt,
            values,
            left_limit: 0.0,
            right_limit: 0.0,
            left_decay: self.left_decay,
            right_decay: self.right_decay,
        }
    }

    /// Centered second difference at interior index `i`.
    pub fn second_difference(&self, i: usize) -> f64 {
        let v = &self.values;
        (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (self.dt * self.dt)
    }

    /// Smallest forward difference `values[i+1] − values[i]`.
    pub fn min_forward_difference(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len()
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t0 - other.t0).abs() <= 1e-9 * self.dt
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "({}, {}, {}) vs ({}, {}, {})",
                self.t0,
                self.dt,
                self.len(),
                other.t0,
                other.dt,
                other.len()
            )))
        }
    }

    /// `α·self`, limits included.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt,
            values: self.values.iter().map(|v| alpha * v).collect(),
            left_limit: alpha * self.left_limit,
            right_limit: alpha * self.right_limit,
            left_decay: self.left_decay,
            right_decay: self.right_decay,
        }
    }

    /// Pointwise `α·self + β·other` on a shared grid.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            t0: self.t0,
            dt: self.dt,
            values: self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect(),
            left_limit: alpha * self.left_limit + beta * other.left_limit,
            right_limit: alpha * self.right_limit + beta * other.right_limit,
            left_decay: slower(self.left_decay, other.left_decay),
            right_decay: slower(self.right_decay, other.right_decay),
        })
    }

    /// CSV with a header naming the columns.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, column: &str) -> std::io::Result<()> {
        writeln!(w, "t (time),{column}")?;
        for (t, v) in self.times().zip(&self.values) {
            writeln!(w, "{t:e},{v:e}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(s)?;
        Self::new(g.t0, g.dt, g.values, g.left_limit, g.right_limit)?.with_decay(g.left_decay, g.right_decay)
    }
}

/// Rate of a sum of two exponential tails; a jump (rate 0) dominates.
fn slower(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else {
        0.0
    }
}
