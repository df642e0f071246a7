//! Method-of-lines integration of the delayed reaction–diffusion system
//!
//! ```text
//! u_t = D u_xx(x, t − τ1) + f(u(·, t − lags))
//! ```
//!
//! whose traveling waves `u(x, t) = φ(x + ct)` the wave equation describes.
//! A reaction tap at wave offset `θ ≤ 0` reads `u(x, t + θ/c)`, and the
//! diffusion delay is `τ1 = r1/c`. Space uses centered differences with
//! zero-flux ghost points; time uses classical RK4 with delayed values
//! interpolated cubically from a buffer of past steps.
//!
//! Fronts of this form move towards `−x`; reported speeds are positive for
//! that direction.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waves::{Model, Profile};

/// Fraction of `dx²/max D` allowed as a time step.
pub const CFL_FACTOR: f64 = 0.4;

/// Lags below this are treated as instantaneous.
const LAG_EPS: f64 = 1e-14;

/// Solution on a uniform `x` grid plus the recent past needed by the delays.
#[derive(Debug, Clone)]
pub struct PdeState {
    pub x0: f64,
    pub dx: f64,
    pub t: f64,
    pub dtime: f64,
    /// Current values, one array per component.
    pub u: Vec<Vec<f64>>,
    /// `history[k]` is the state at `t − k·dtime`; `history[0] == u`.
    history: VecDeque<Vec<Vec<f64>>>,
}

/// Delays of a model in PDE time.
#[derive(Debug, Clone, PartialEq)]
struct Lags {
    diffusion: f64,
    taps: Vec<f64>,
}

impl Lags {
    fn of(model: &Model) -> Result<Self> {
        let taps = model
            .reaction
            .taps()
            .iter()
            .map(|tap| {
                if tap.offset > LAG_EPS {
                    Err(Error::Domain(format!(
                        "reaction reads the future (offset {}); cannot integrate in time",
                        tap.offset
                    )))
                } else {
                    Ok((-tap.offset / model.c).max(0.0))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            diffusion: model.r1 / model.c,
            taps,
        })
    }

    fn max(&self) -> f64 {
        self.taps.iter().copied().fold(self.diffusion, f64::max)
    }

    fn min_positive(&self) -> Option<f64> {
        std::iter::once(self.diffusion)
            .chain(self.taps.iter().copied())
            .filter(|l| *l > LAG_EPS)
            .min_by(f64::total_cmp)
    }
}

/// Largest stable step for `dx` that also fits a whole number of times into
/// the shortest positive delay.
pub fn suggest_dtime(model: &Model, dx: f64) -> Result<f64> {
    let max_d = model.components.iter().map(|c| c.d).fold(0.0, f64::max);
    let limit = CFL_FACTOR * dx * dx / max_d;
    let lags = Lags::of(model)?;
    Ok(match lags.min_positive() {
        Some(lag) => lag / (lag / limit).ceil(),
        None => limit,
    })
}

/// Smallest `dx` for which no grid mode is amplified by the delayed
/// Laplacian: mode `k` obeys `u′ = −μ_k u(t − τ1)` with `μ_k ≤ 4D/dx²`,
/// which decays only while `μ_k τ1 < π/2`. The continuous problem has no
/// such bound; the grid is what keeps short waves out.
pub fn min_stable_dx(model: &Model) -> f64 {
    let max_d = model.components.iter().map(|c| c.d).fold(0.0, f64::max);
    (8.0 * max_d * (model.r1 / model.c) / std::f64::consts::PI).sqrt()
}

/// Spacing for validation runs: `0.05`, or `1.25·`[`min_stable_dx`] if larger.
pub fn validation_dx(model: &Model) -> f64 {
    (1.25 * min_stable_dx(model)).max(0.05)
}

fn history_depth(model: &Model, dtime: f64) -> Result<usize> {
    Ok((Lags::of(model)?.max() / dtime).ceil() as usize + 4)
}

impl PdeState {
    /// State on `n` points from `x0` with spacing `dx`; `init(i, x, s)` gives
    /// component `i` at past or present time `s ≤ 0`.
    pub fn new(
        model: &Model,
        x0: f64,
        dx: f64,
        n: usize,
        dtime: f64,
        init: impl Fn(usize, f64, f64) -> f64,
    ) -> Result<Self> {
        if !(dx > 0.0 && dtime > 0.0 && n >= 3) {
            return Err(Error::Domain(format!("needs dx, dtime > 0 and n >= 3 (got {dx}, {dtime}, {n})")));
        }
        let depth = history_depth(model, dtime)?;
        let history: VecDeque<Vec<Vec<f64>>> = (0..depth)
            .map(|k| {
                let s = -(k as f64) * dtime;
                (0..model.m())
                    .map(|i| (0..n).map(|j| init(i, x0 + j as f64 * dx, s)).collect())
                    .collect()
            })
            .collect();
        if history.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite initial data".into()));
        }
        Ok(Self {
            x0,
            dx,
            t: 0.0,
            dtime,
            u: history[0].clone(),
            history,
        })
    }

    /// Traveling-wave data `u(x, s) = φ(x + c s)` on `[x_min, x_max]`.
    pub fn from_profile(model: &Model, phi: &Profile, x_min: f64, x_max: f64, dx: f64, dtime: f64) -> Result<Self> {
        if phi.m() != model.m() {
            return Err(Error::GridMismatch("profile and model differ in component count".into()));
        }
        let n = ((x_max - x_min) / dx + 1e-9).floor() as usize + 1;
        let c = model.c;
        Self::new(model, x_min, dx, n, dtime, |i, x, s| phi.components[i].eval(x + c * s))
    }

    /// Constant-in-time initial data `u(x, s) = init(i, x)`.
    pub fn from_fn(
        model: &Model,
        x_min: f64,
        x_max: f64,
        dx: f64,
        dtime: f64,
        init: impl Fn(usize, f64) -> f64,
    ) -> Result<Self> {
        let n = ((x_max - x_min) / dx + 1e-9).floor() as usize + 1;
        Self::new(model, x_min, dx, n, dtime, |i, x, _| init(i, x))
    }

    pub fn len(&self) -> usize {
        self.u[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.u[0].is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    /// Time span covered by the stored past.
    pub fn history_span(&self) -> f64 {
        (self.history.len() - 1) as f64 * self.dtime
    }

    /// Component `i` at `t − lag + offset·dtime`, `0 ≤ offset ≤ 1` measured
    /// from the current time level.
    fn delayed(&self, i: usize, lag: f64, offset: f64) -> Result<Vec<f64>> {
        let s = lag / self.dtime - offset;
        if s < -1e-9 {
            return Err(Error::HistoryUnderflow(format!(
                "lag {lag} is shorter than the stage offset {} of step {}",
                offset * self.dtime,
                self.dtime
            )));
        }
        let s = s.max(0.0);
        let len = self.history.len();
        let k = s.round();
        if (s - k).abs() <= 1e-9 {
            let k = k as usize;
            return self.history.get(k).map(|h| h[i].clone()).ok_or_else(|| {
                Error::HistoryUnderflow(format!("need {k} past steps, have {}", len - 1))
            });
        }
        let base = (s.floor() as usize).saturating_sub(1);
        if base + 3 >= len {
            return Err(Error::HistoryUnderflow(format!(
                "lag {lag} needs {} past steps, have {}",
                base + 3,
                len - 1
            )));
        }
        // Cubic Lagrange through history indices base..base+3.
        let x = s - base as f64;
        let w = [
            -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0,
            x * (x - 2.0) * (x - 3.0) / 2.0,
            -x * (x - 1.0) * (x - 3.0) / 2.0,
            x * (x - 1.0) * (x - 2.0) / 6.0,
        ];
        let rows: Vec<&Vec<f64>> = (0..4).map(|q| &self.history[base + q][i]).collect();
        Ok((0..self.len())
            .map(|j| w[0] * rows[0][j] + w[1] * rows[1][j] + w[2] * rows[2][j] + w[3] * rows[3][j])
            .collect())
    }

    /// `K/2` level crossing of component 0, interpolated linearly; the
    /// leftmost upward crossing.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        let u = &self.u[0];
        u.windows(2).position(|w| w[0] < level && w[1] >= level).map(|j| {
            let frac = (level - u[j]) / (u[j + 1] - u[j]);
            self.x(j) + frac * self.dx
        })
    }

    /// `sup |u_i(x, t) − φ_i(x + c t)|` over the grid.
    pub fn distance_to_wave(&self, phi: &Profile, c: f64) -> f64 {
        self.u
            .iter()
            .zip(&phi.components)
            .flat_map(|(ui, pi)| ui.iter().enumerate().map(move |(j, v)| (v - pi.eval(self.x(j) + c * self.t)).abs()))
            .fold(0.0, f64::max)
    }

    /// CSV rows `t, x, u_1[, u_2]`, every `stride`-th grid point.
    pub fn write_snapshot<W: std::io::Write>(&self, mut w: W, header: bool, stride: usize) -> std::io::Result<()> {
        if header {
            write!(w, "t (time),x (space)")?;
            for i in 0..self.u.len() {
                write!(w, ",u_{} (concentration)", i + 1)?;
            }
            writeln!(w)?;
        }
        for j in (0..self.len()).step_by(stride.max(1)) {
            write!(w, "{:e},{:e}", self.t, self.x(j))?;
            for ui in &self.u {
                write!(w, ",{:e}", ui[j])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn laplacian(v: &[f64], d: f64, dx: f64) -> Vec<f64> {
    let n = v.len();
    let s = d / (dx * dx);
    (0..n)
        .map(|j| {
            // Zero-flux ghost points mirror the first interior value.
            let left = if j == 0 { v[1] } else { v[j - 1] };
            let right = if j + 1 == n { v[n - 2] } else { v[j + 1] };
            s * (left - 2.0 * v[j] + right)
        })
        .collect()
}

/// Right-hand side at stage values `stage`, `offset` steps past the current time.
fn rhs(model: &Model, lags: &Lags, state: &PdeState, stage: &[Vec<f64>], offset: f64) -> Result<Vec<Vec<f64>>> {
    let at = |i: usize, lag: f64| -> Result<Vec<f64>> {
        if lag <= LAG_EPS {
            Ok(stage[i].clone())
        } else {
            state.delayed(i, lag, offset)
        }
    };
    let taps = model.reaction.taps();
    let columns = taps
        .iter()
        .zip(&lags.taps)
        .map(|(tap, lag)| at(tap.component, *lag))
        .collect::<Result<Vec<_>>>()?;
    let n = state.len();
    let mut vals = vec![0.0; taps.len()];
    (0..model.m())
        .map(|i| {
            let mut out = laplacian(&at(i, lags.diffusion)?, model.components[i].d, state.dx);
            for (j, o) in out.iter_mut().enumerate() {
                for (v, col) in vals.iter_mut().zip(&columns) {
                    *v = col[j];
                }
                *o += model.reaction.eval(i, &vals);
            }
            debug_assert_eq!(out.len(), n);
            Ok(out)
        })
        .collect()
}

fn axpy(u: &[Vec<f64>], h: f64, k: &[Vec<f64>]) -> Vec<Vec<f64>> {
    u.iter()
        .zip(k)
        .map(|(ui, ki)| ui.iter().zip(ki).map(|(a, b)| a + h * b).collect())
        .collect()
}

/// One RK4 step of size `dtime`.
pub fn step(model: &Model, state: &PdeState, dtime: f64) -> Result<PdeState> {
    let max_d = model.components.iter().map(|c| c.d).fold(0.0, f64::max);
    let limit = CFL_FACTOR * state.dx * state.dx / max_d;
    if dtime > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dtime, limit });
    }
    if (dtime - state.dtime).abs() > 1e-12 * state.dtime {
        return Err(Error::HistoryUnderflow(format!(
            "history stored at spacing {}, step requested {dtime}",
            state.dtime
        )));
    }
    if state.u.len() != model.m() {
        return Err(Error::GridMismatch("state and model differ in component count".into()));
    }
    let lags = Lags::of(model)?;
    let h = dtime;
    let u = &state.u;
    let k1 = rhs(model, &lags, state, u, 0.0)?;
    let k2 = rhs(model, &lags, state, &axpy(u, 0.5 * h, &k1), 0.5)?;
    let k3 = rhs(model, &lags, state, &axpy(u, 0.5 * h, &k2), 0.5)?;
    let k4 = rhs(model, &lags, state, &axpy(u, h, &k3), 1.0)?;
    let next: Vec<Vec<f64>> = (0..u.len())
        .map(|i| {
            (0..u[i].len())
                .map(|j| u[i][j] + h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]))
                .collect()
        })
        .collect();
    let t = state.t + h;
    if next.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { t });
    }
    let mut history = state.history.clone();
    history.push_front(next.clone());
    history.pop_back();
    Ok(PdeState {
        x0: state.x0,
        dx: state.dx,
        t,
        dtime: h,
        u: next,
        history,
    })
}

/// Crossing record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `K/2` crossing of component 0 at each recorded time.
    pub crossings: Vec<Option<f64>>,
    pub steps: usize,
    pub dtime: f64,
}

/// Integrates to `t_end`, recording the front every `output_interval`.
pub fn run(model: &Model, init: PdeState, t_end: f64, output_interval: f64) -> Result<(PdeState, Trajectory)> {
    run_with_observer(model, init, t_end, output_interval, |_| Ok(()))
}

/// [`run`] calling `observe` at every recorded time, the initial one included.
pub fn run_with_observer(
    model: &Model,
    init: PdeState,
    t_end: f64,
    output_interval: f64,
    mut observe: impl FnMut(&PdeState) -> Result<()>,
) -> Result<(PdeState, Trajectory)> {
    if !(t_end >= 0.0 && output_interval > 0.0) {
        return Err(Error::Domain(format!(
            "needs T >= 0 and a positive output interval (got {t_end}, {output_interval})"
        )));
    }
    let k0 = model.components[0].k;
    let range_ok = |s: &PdeState| {
        s.u.iter()
            .zip(&model.components)
            .all(|(ui, c)| ui.iter().all(|v| *v >= -1e-6 && *v <= c.k + 1e-6))
    };
    let dx_min = min_stable_dx(model);
    if init.dx <= dx_min {
        return Err(Error::GuardViolation(format!(
            "dx = {} resolves modes the delayed Laplacian amplifies; needs dx > {dx_min}",
            init.dx
        )));
    }
    if !range_ok(&init) {
        return Err(Error::Domain("initial data leave [0, K]".into()));
    }
    let level = 0.5 * k0;
    let dtime = init.dtime;
    let total = (t_end / dtime - 1e-9).ceil().max(0.0) as usize;
    let stride = ((output_interval / dtime).round() as usize).max(1);
    let mut traj = Trajectory {
        times: vec![init.t],
        crossings: vec![init.crossing(level)],
        steps: 0,
        dtime,
    };
    observe(&init)?;
    let mut state = init;
    for n in 1..=total {
        state = step(model, &state, dtime)?;
        if n % stride == 0 || n == total {
            traj.times.push(state.t);
            traj.crossings.push(state.crossing(level));
            observe(&state)?;
        }
    }
    traj.steps = total;
    Ok((state, traj))
}

/// Front speed from a least-squares fit of crossing location against time,
/// positive for fronts moving towards `−x`.
pub fn wave_speed_estimate(traj: &Trajectory) -> Result<f64> {
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.crossings)
        .filter_map(|(t, x)| x.map(|x| (*t, x)))
        .collect();
    if pts.len() < 2 {
        return Err(Error::NoFront);
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NoFront);
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mx)).sum();
    Ok(-sxy / sxx)
}
