//! The bounded-solution operator `f ↦ G ∗ f` and its residual check.
//!
//! Grid data are treated as the piecewise-linear function through the
//! samples, extended by the declared limits outside the window. Convolving
//! that function with `G` is exact up to the evaluation of the weights
//!
//! ```text
//! W_m = ∫ G(m·dt − v) hat(v) dv,
//! ```
//!
//! where `hat` is the unit hat of half-width `dt`. For `m ≥ 1` the residue
//! form of `G` gives `W_m = A q^m` in closed form; the remaining weights come
//! from the contour transform of `G` smoothed by the hat. Weights beyond 45
//! decay lengths are dropped; the constant and exponential tails outside the
//! window are summed from the same weights, so constants are reproduced to
//! the accuracy of `Σ W_m = −1/b`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::green::{GreenFunction, OperatorParams, RootPair};
use crate::grid::GridFunction;

const DECAY_LENGTHS: f64 = 45.0;

/// Product-integration weights of `G` for one grid spacing.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    green: Arc<GreenFunction>,
    dt: f64,
    /// `W_0, W_{−1}, …`
    neg: Vec<f64>,
    /// `suffix_neg[k] = Σ_{j > k} neg[j]`, summed from the small end.
    suffix_neg: Vec<f64>,
    /// `W_m = amp·ratio^m` for `m ≥ 1`.
    amp: f64,
    ratio: f64,
    pos_len: usize,
    /// `W_{pos_len}, …, W_1, W_0, W_{−1}, …`: the kernel in dot-product order.
    reversed: Vec<f64>,
}

impl GreenKernel {
    /// Builds the weights and checks that every one is negative.
    pub fn new(params: &OperatorParams, dt: f64) -> Result<Self> {
        let green = Arc::new(GreenFunction::new(params)?);
        Self::from_green(green, dt)
    }

    pub fn from_green(green: Arc<GreenFunction>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("kernel spacing must be positive (got {dt})")));
        }
        let roots = green.roots();
        let neg_len = (DECAY_LENGTHS / (roots.eta1 * dt)).ceil() as usize + 1;
        let pos_len = (DECAY_LENGTHS / (-roots.eta2 * dt)).ceil() as usize + 1;
        let neg = green.hat_weights_nonpositive(dt, neg_len)?;
        let (amp, ratio) = green.hat_weights_positive(dt);
        if let Some(m) = neg.iter().position(|w| !(*w < 0.0)) {
            return Err(Error::MissingCertificate(format!(
                "Green weight at t = {} is {:e}, not negative",
                -(m as f64) * dt,
                neg[m]
            )));
        }
        if !(amp < 0.0 && ratio > 0.0 && ratio < 1.0) {
            return Err(Error::MissingCertificate(format!(
                "positive-lag weights A = {amp:e}, q = {ratio} do not decay negatively"
            )));
        }
        let mut suffix_neg = vec![0.0; neg.len()];
        for k in (0..neg.len().saturating_sub(1)).rev() {
            suffix_neg[k] = suffix_neg[k + 1] + neg[k + 1];
        }
        let reversed = (1..=pos_len)
            .rev()
            .map(|m| amp * ratio.powi(m as i32))
            .chain(neg.iter().copied())
            .collect();
        Ok(Self {
            green,
            dt,
            neg,
            suffix_neg,
            amp,
            ratio,
            pos_len,
            reversed,
        })
    }

    pub fn params(&self) -> &OperatorParams {
        self.green.params()
    }

    pub fn green(&self) -> &GreenFunction {
        &self.green
    }

    pub fn roots(&self) -> RootPair {
        self.green.roots()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Distance beyond which `G` has decayed by `e^{−40}`.
    pub fn tail_width(&self) -> f64 {
        let r = self.roots();
        40.0 / r.eta1.min(-r.eta2)
    }

    /// `W_m` (zero beyond the truncation range).
    pub fn weight(&self, m: i64) -> f64 {
        if m >= 1 {
            if (m as usize) <= self.pos_len {
                self.amp * self.ratio.powi(m as i32)
            } else {
                0.0
            }
        } else {
            self.neg.get((-m) as usize).copied().unwrap_or(0.0)
        }
    }

    /// `Σ_m W_m`; equals `−1/b` up to the truncation.
    pub fn weight_sum(&self) -> f64 {
        self.neg.iter().rev().sum::<f64>() + self.amp * self.ratio / (1.0 - self.ratio)
    }

    /// `Σ_m W_m e^{−ν m dt}`: the factor by which the discrete operator maps
    /// `e^{νt}`. Tends to `1/P(ν)` as `dt → 0`; needs `η2 < ν < η1`.
    pub fn transform(&self, nu: f64) -> Result<f64> {
        let r = self.roots();
        if !(nu > r.eta2 && nu < r.eta1) {
            return Err(Error::Domain(format!(
                "transform needs {} < nu < {} (got {nu})",
                r.eta2, r.eta1
            )));
        }
        let z = (-nu * self.dt).exp();
        let neg: f64 = self.neg.iter().enumerate().rev().map(|(k, w)| w * z.powi(-(k as i32))).sum();
        let qz = self.ratio * z;
        Ok(neg + self.amp * qz / (1.0 - qz))
    }

    /// `x = G ∗ f` on the grid of `f`, tails of `f` included.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if (f.dt - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::GridMismatch(format!("kernel dt {} vs data dt {}", self.dt, f.dt)));
        }
        let n = f.len();
        let mut x = self.convolve(&f.values);
        let (l, r) = (f.left_limit, f.right_limit);
        let q = self.ratio;
        // Left of the window f_j = L + A ρ^j (j < 0), only weights W_m = amp·q^m reach it.
        let geometric = self.amp / (1.0 - q);
        let a_left = f.values[0] - l;
        let left_exp = if f.left_decay > 0.0 && a_left != 0.0 {
            let rho = (f.left_decay * self.dt).exp();
            a_left * self.amp / (rho - q)
        } else {
            0.0
        };
        // Right of it f_j = R + B σ^{j−n+1} (j ≥ n) meets W_0, W_{−1}, …
        let a_right = f.values[n - 1] - r;
        let right_exp = if f.right_decay > 0.0 && a_right != 0.0 {
            let sigma = (-f.right_decay * self.dt).exp();
            let mut t = vec![0.0; self.neg.len() + 1];
            for k in (0..self.neg.len()).rev() {
                t[k] = self.neg[k] + sigma * t[k + 1];
            }
            Some((a_right * sigma, t))
        } else {
            None
        };
        let mut q_pow = q;
        for (i, xi) in x.iter_mut().enumerate() {
            if let Some(tail) = self.suffix_neg.get(n - 1 - i) {
                if r != 0.0 {
                    *xi += r * tail;
                }
                if let Some((scale, t)) = &right_exp {
                    *xi += scale * t[n - i];
                }
            }
            if l != 0.0 {
                *xi += l * geometric * q_pow;
            }
            if left_exp != 0.0 {
                *xi += left_exp * q_pow;
            }
            q_pow *= q;
        }
        let b = self.params().b;
        let roots = self.roots();
        let tail_rate = |nu: f64, cap: f64| if nu > 0.0 { nu.min(cap) } else { 0.0 };
        GridFunction::new(f.t0, f.dt, x, -l / b, -r / b)?
            .with_decay(tail_rate(f.left_decay, roots.eta1), tail_rate(f.right_decay, -roots.eta2))
    }

    /// `Σ_{j<n} W_{i−j} f_j` for `i < n`.
    ///
    /// Summed directly rather than by FFT: with `W < 0` and `f ≥ 0` every term
    /// has one sign, so the sum keeps its relative precision deep in the tails
    /// where values are many orders below the peak.
    fn convolve(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len() as i64;
        let pos = self.pos_len as i64;
        let reversed = &self.reversed;
        let len = reversed.len() as i64;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let j_lo = (i - pos).max(0);
                let j_hi = (i - pos + len).min(n);
                if j_lo >= j_hi {
                    return 0.0;
                }
                let p_lo = (j_lo - i + pos) as usize;
                let span = (j_hi - j_lo) as usize;
                f[j_lo as usize..j_hi as usize]
                    .iter()
                    .zip(&reversed[p_lo..p_lo + span])
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Bounded solution of `D x″ − a x′(t+r) − b x(t+r) = f`.
pub fn apply_green(params: &OperatorParams, f: &GridFunction) -> Result<GridFunction> {
    GreenKernel::new(params, f.dt)?.apply(f)
}

/// Shifted arguments need the delay to be resolved: either on the grid or at
/// least two samples per delay.
pub(crate) fn check_shift_resolution(dt: f64, r: f64) -> Result<()> {
    if r > 0.0 && dt > 0.5 * r {
        let ratio = r / dt;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::GridTooCoarse { dt, half_r: 0.5 * r });
        }
    }
    Ok(())
}

/// `sup |D x″(t) − a x′(t+r) − b x(t+r) − f(t)|` over interior nodes whose
/// shifted stencil stays inside the window.
pub fn residual(params: &OperatorParams, x: &GridFunction, f: &GridFunction) -> Result<f64> {
    residual_between(params, x, f, f64::NEG_INFINITY, f64::INFINITY)
}

/// [`residual`] restricted to nodes with `t_lo ≤ t ≤ t_hi`.
pub fn residual_between(params: &OperatorParams, x: &GridFunction, f: &GridFunction, t_lo: f64, t_hi: f64) -> Result<f64> {
    x.check_same_grid(f)?;
    check_shift_resolution(x.dt, params.r)?;
    let dx = x.derivative();
    let n = x.len();
    let t_limit = x.t(n.saturating_sub(3));
    let mut worst: f64 = 0.0;
    for i in 1..n.saturating_sub(1) {
        let t = x.t(i);
        let ts = t + params.r;
        if ts > t_limit + 1e-12 || t > t_hi {
            break;
        }
        if t < t_lo {
            continue;
        }
        let lhs = params.d * x.second_difference(i) - params.a * dx.eval(ts) - params.b * x.eval(ts);
        worst = worst.max((lhs - f.values[i]).abs());
    }
    Ok(worst)
}
