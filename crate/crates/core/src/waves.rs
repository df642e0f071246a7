//! Wave operators, upper/lower-solution checks and the monotone iteration.
//!
//! A profile `φ = (φ_1, …, φ_m)` is a traveling wave when, for each component,
//!
//! ```text
//! D_i φ_i″(t) − c φ_i′(t + r1) + f_i(φ_{t+r1}) = 0,
//! ```
//!
//! where `f_i` reads the profile at finitely many offsets (its taps). With
//! `H_i(φ)(t) = f_i(φ_{t+r1}) + β_i φ_i(t+r1)` this is the fixed-point problem
//! `φ_i = −L_i⁻¹ H_i(φ)` for `L_i x = D_i x″ − c x′(·+r1) − β_i x(·+r1)`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::OperatorParams;
use crate::grid::GridFunction;
use crate::perron::{check_shift_resolution, GreenKernel};

/// Slack for ordering checks between iterates.
pub const ORDER_SLACK: f64 = 1e-9;
/// Slack for the `[0, K]` range check.
pub const RANGE_SLACK: f64 = 1e-9;
/// Grid spacings excluded around each kink during verification.
pub const KINK_EXCLUSION: f64 = 3.0;
/// Width of the edge strip used to fit tail decay rates of `H`.
const TAIL_FIT_WIDTH: f64 = 1.0;

/// Profile sample `φ_component(t + offset)` read by a reaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub component: usize,
    pub offset: f64,
}

/// Reaction functional `f_c` in wave coordinates.
pub trait Reaction: Send + Sync + fmt::Debug {
    /// Identifier used in model documents.
    fn id(&self) -> &str;
    /// Offsets read by [`Reaction::eval`], in order.
    fn taps(&self) -> &[Tap];
    /// `f_component` given `values[k] = φ_{taps[k].component}(t + taps[k].offset)`.
    fn eval(&self, component: usize, values: &[f64]) -> f64;
}

/// Per-component constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// Diffusion coefficient.
    pub d: f64,
    /// Positive equilibrium.
    pub k: f64,
    /// Quasi-monotonicity constant.
    pub beta: f64,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub components: Vec<Component>,
    /// Wave speed.
    pub c: f64,
    /// Diffusion delay in wave coordinates (`c·τ1`).
    pub r1: f64,
    /// Reaction delay in wave coordinates (`c·τ2`).
    pub r2: f64,
    pub reaction: Arc<dyn Reaction>,
}

impl Model {
    /// Validates the constants and that `0` and `K` are equilibria.
    pub fn new(components: Vec<Component>, c: f64, r1: f64, r2: f64, reaction: Arc<dyn Reaction>) -> Result<Self> {
        if components.is_empty() || components.len() > 2 {
            return Err(Error::Domain(format!("supports 1 or 2 components (got {})", components.len())));
        }
        for (i, comp) in components.iter().enumerate() {
            if !(comp.d > 0.0 && comp.k > 0.0 && comp.beta > 0.0) {
                return Err(Error::Domain(format!("component {i} needs D, K, beta > 0 (got {comp:?})")));
            }
        }
        if !(c > 0.0 && r1 >= 0.0 && r2 >= 0.0) {
            return Err(Error::Domain(format!("requires c > 0, r1 >= 0, r2 >= 0 (got {c}, {r1}, {r2})")));
        }
        if let Some(t) = reaction.taps().iter().find(|t| t.component >= components.len()) {
            return Err(Error::Domain(format!("reaction tap reads missing component {}", t.component)));
        }
        let model = Self {
            components,
            c,
            r1,
            r2,
            reaction,
        };
        let zero = vec![0.0; model.m()];
        let full: Vec<f64> = model.components.iter().map(|c| c.k).collect();
        for (name, state) in [("0", &zero), ("K", &full)] {
            for (i, v) in model.reaction_const(state).into_iter().enumerate() {
                if v.abs() > 1e-12 {
                    return Err(Error::GuardViolation(format!("f_{}({name}) = {v:e}, not an equilibrium", i + 1)));
                }
            }
        }
        Ok(model)
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    /// Operator parameters `(D_i, c, β_i, r1)` of component `i`.
    pub fn operator_params(&self, i: usize) -> Result<OperatorParams> {
        let comp = self.components[i];
        OperatorParams::new(comp.d, self.c, comp.beta, self.r1)
    }

    /// Reaction on the constant profile with the given component values.
    pub fn reaction_const(&self, state: &[f64]) -> Vec<f64> {
        let taps: Vec<f64> = self.reaction.taps().iter().map(|t| state[t.component]).collect();
        (0..self.m()).map(|i| self.reaction.eval(i, &taps)).collect()
    }

    /// A sampled constant state strictly between `0` and `K` where every
    /// reaction component vanishes, if any; sampling step `step·K_i`.
    pub fn interior_equilibrium(&self, step: f64) -> Option<Vec<f64>> {
        let n = (1.0 / step).round() as usize;
        let levels = |k: f64| (1..n).map(move |j| k * j as f64 / n as f64);
        let is_eq = |s: &[f64]| self.reaction_const(s).iter().all(|v| v.abs() <= 1e-12);
        match self.m() {
            1 => levels(self.components[0].k).map(|v| vec![v]).find(|s| is_eq(s)),
            _ => levels(self.components[0].k)
                .flat_map(|u| levels(self.components[1].k).map(move |v| vec![u, v]))
                .find(|s| is_eq(s)),
        }
    }

    pub fn equilibrium(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.k).collect()
    }
}

/// One grid function per component, all on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub components: Vec<GridFunction>,
}

impl Profile {
    pub fn new(components: Vec<GridFunction>) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::Domain("profile has no components".into()))?;
        for c in &components[1..] {
            first.check_same_grid(c)?;
        }
        Ok(Self { components })
    }

    /// Samples `f(i, t)` for each component on `[t_min, t_max]`.
    pub fn from_fn(
        m: usize,
        t_min: f64,
        t_max: f64,
        dt: f64,
        limits: &[(f64, f64)],
        f: impl Fn(usize, f64) -> f64,
    ) -> Result<Self> {
        let n = GridFunction::window_len(t_min, t_max, dt);
        let comps = (0..m)
            .map(|i| GridFunction::from_fn_with_limits(t_min, dt, n, limits[i].0, limits[i].1, |t| f(i, t)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    /// Declares exponential tail rates `(left, right)` per component.
    pub fn with_decay(self, rates: &[(f64, f64)]) -> Result<Self> {
        if rates.len() != self.m() {
            return Err(Error::GridMismatch(format!("{} tail rates for {} components", rates.len(), self.m())));
        }
        let components = self
            .components
            .into_iter()
            .zip(rates)
            .map(|(g, (l, r))| g.with_decay(*l, *r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }

    /// Constant profile `state`.
    pub fn constant(state: &[f64], t_min: f64, t_max: f64, dt: f64) -> Result<Self> {
        let limits: Vec<(f64, f64)> = state.iter().map(|v| (*v, *v)).collect();
        Self::from_fn(state.len(), t_min, t_max, dt, &limits, |i, _| state[i])
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn grid(&self) -> &GridFunction {
        &self.components[0]
    }

    pub fn dt(&self) -> f64 {
        self.grid().dt
    }

    pub fn len(&self) -> usize {
        self.grid().len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid().is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.grid().t(i)
    }

    /// Smallest forward difference over all components.
    pub fn min_forward_difference(&self) -> f64 {
        self.components.iter().map(|c| c.min_forward_difference()).fold(f64::INFINITY, f64::min)
    }

    /// Sup-norm distance plus the change in declared limits.
    pub fn distance(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                a.max_abs_diff(b) + (a.left_limit - b.left_limit).abs() + (a.right_limit - b.right_limit).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `t ↦ self(t + h)` on the same grid.
    pub fn shifted(&self, h: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.shifted(h)).collect(),
        }
    }

    /// First place where `self ≤ upper + slack` fails: `(component, t, excess)`.
    pub fn first_excess_over(&self, upper: &Self, slack: f64) -> Option<(usize, f64, f64)> {
        for (i, (a, b)) in self.components.iter().zip(&upper.components).enumerate() {
            for (j, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
                if x - y > slack {
                    return Some((i, a.t(j), x - y));
                }
            }
        }
        None
    }

    /// CSV with columns `t, phi_1[, phi_2]`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t (wave coordinate)")?;
        for i in 0..self.m() {
            write!(w, ",phi_{} (concentration)", i + 1)?;
        }
        writeln!(w)?;
        for j in 0..self.len() {
            write!(w, "{:e}", self.t(j))?;
            for c in &self.components {
                write!(w, ",{:e}", c.values[j])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Samples of `g(t_j + shift)` at every node; exact lookups when `shift` is a
/// multiple of the spacing.
fn shifted_samples(g: &GridFunction, shift: f64) -> Vec<f64> {
    let steps = shift / g.dt;
    let k = steps.round();
    if (steps - k).abs() <= 1e-9 {
        let k = k as i64;
        (0..g.len() as i64).map(|j| g.node(j + k)).collect()
    } else {
        g.times().map(|t| g.eval(t + shift)).collect()
    }
}

/// `f_i(φ_{t+extra})` at every node, for every component.
fn reaction_on_grid(model: &Model, phi: &Profile, extra: f64) -> Vec<Vec<f64>> {
    let taps = model.reaction.taps();
    let columns: Vec<Vec<f64>> = taps
        .iter()
        .map(|tap| shifted_samples(&phi.components[tap.component], extra + tap.offset))
        .collect();
    let n = phi.len();
    (0..model.m())
        .map(|i| {
            let mut vals = vec![0.0; taps.len()];
            (0..n)
                .map(|j| {
                    for (v, col) in vals.iter_mut().zip(&columns) {
                        *v = col[j];
                    }
                    model.reaction.eval(i, &vals)
                })
                .collect()
        })
        .collect()
}

fn check_range(model: &Model, phi: &Profile) -> Result<()> {
    if phi.m() != model.m() {
        return Err(Error::GridMismatch(format!(
            "profile has {} components, model {}",
            phi.m(),
            model.m()
        )));
    }
    for (i, (g, comp)) in phi.components.iter().zip(&model.components).enumerate() {
        let bad = |v: f64| v < -RANGE_SLACK || v > comp.k + RANGE_SLACK;
        if let Some(j) = g.values.iter().position(|v| bad(*v)) {
            return Err(Error::RangeViolation {
                component: i,
                t: g.t(j),
                value: g.values[j],
            });
        }
        for (t, v) in [(f64::NEG_INFINITY, g.left_limit), (f64::INFINITY, g.right_limit)] {
            if bad(v) {
                return Err(Error::RangeViolation { component: i, t, value: v });
            }
        }
    }
    Ok(())
}

/// `H_i(φ)(t) = f_i(φ_{t+r1}) + β_i φ_i(t+r1)` per component, with tail
/// rates fitted at the window edges.
pub fn h_op(model: &Model, phi: &Profile) -> Result<Vec<GridFunction>> {
    check_range(model, phi)?;
    let reaction = reaction_on_grid(model, phi, model.r1);
    let lefts: Vec<f64> = phi.components.iter().map(|c| c.left_limit).collect();
    let rights: Vec<f64> = phi.components.iter().map(|c| c.right_limit).collect();
    let (f_left, f_right) = (model.reaction_const(&lefts), model.reaction_const(&rights));
    reaction
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            let beta = model.components[i].beta;
            let g = &phi.components[i];
            let values = f
                .iter()
                .zip(shifted_samples(g, model.r1))
                .map(|(fv, pv)| fv + beta * pv)
                .collect();
            Ok(GridFunction::new(
                g.t0,
                g.dt,
                values,
                f_left[i] + beta * g.left_limit,
                f_right[i] + beta * g.right_limit,
            )?
            .with_fitted_decay(TAIL_FIT_WIDTH))
        })
        .collect()
}

/// The map `φ ↦ −L⁻¹H(φ)` with Green kernels built once for a grid spacing.
#[derive(Debug, Clone)]
pub struct WaveOperator {
    model: Model,
    kernels: Vec<Arc<GreenKernel>>,
}

impl WaveOperator {
    pub fn new(model: &Model, dt: f64) -> Result<Self> {
        check_shift_resolution(dt, model.r1)?;
        let mut kernels: Vec<Arc<GreenKernel>> = Vec::with_capacity(model.m());
        for i in 0..model.m() {
            let params = model.operator_params(i)?;
            let reuse = kernels.iter().find(|k| *k.params() == params).cloned();
            kernels.push(match reuse {
                Some(k) => k,
                None => Arc::new(GreenKernel::new(&params, dt)?),
            });
        }
        Ok(Self {
            model: model.clone(),
            kernels,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn kernel(&self, i: usize) -> &GreenKernel {
        &self.kernels[i]
    }

    pub fn apply(&self, phi: &Profile) -> Result<Profile> {
        if (phi.dt() - self.kernels[0].dt()).abs() > 1e-12 * phi.dt() {
            return Err(Error::GridMismatch(format!(
                "operator built for dt = {}, profile has dt = {}",
                self.kernels[0].dt(),
                phi.dt()
            )));
        }
        let h = h_op(&self.model, phi)?;
        let comps = h
            .par_iter()
            .zip(self.kernels.par_iter())
            .map(|(hi, k)| Ok(k.apply(hi)?.scaled(-1.0)))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(comps)
    }
}

/// `F(φ) = −L⁻¹H(φ)`.
pub fn f_op(model: &Model, phi: &Profile) -> Result<Profile> {
    WaveOperator::new(model, phi.dt())?.apply(phi)
}

/// `D_i φ_i″(t) − c φ_i′(t+r1) + f_i(φ_{t+r1})` at interior nodes, with
/// `None` where the stencil leaves the window.
pub fn wave_expression(model: &Model, phi: &Profile) -> Result<Vec<Vec<Option<f64>>>> {
    if phi.m() != model.m() {
        return Err(Error::GridMismatch("component count differs from model".into()));
    }
    let dt = phi.dt();
    check_shift_resolution(dt, model.r1)?;
    let reaction = reaction_on_grid(model, phi, model.r1);
    let n = phi.len();
    let t_end = phi.grid().t_end();
    Ok(phi
        .components
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let d1 = shifted_samples(&g.derivative(), model.r1);
            let d = model.components[i].d;
            (0..n)
                .map(|j| {
                    let t = g.t(j);
                    if j == 0 || j + 1 >= n || t + model.r1 > t_end - 2.0 * dt + 1e-12 {
                        return None;
                    }
                    Some(d * g.second_difference(j) - model.c * d1[j] + reaction[i][j])
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateKind {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub component: usize,
    pub t: f64,
    pub value: f64,
}

/// Outcome of an upper/lower-solution check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: CandidateKind,
    pub passed: bool,
    pub tol: f64,
    /// Largest value of the wave expression (upper) or of its negative (lower).
    pub worst_value: f64,
    pub worst_t: f64,
    pub worst_component: usize,
    pub checked_points: usize,
    pub violation_count: usize,
    /// First violations, at most [`VerificationReport::MAX_LISTED`].
    pub violations: Vec<Violation>,
    pub kinks: Vec<f64>,
}

impl VerificationReport {
    pub const MAX_LISTED: usize = 50;
}

fn verify(model: &Model, phi: &Profile, kinks: &[f64], tol: f64, kind: CandidateKind) -> Result<VerificationReport> {
    let expr = wave_expression(model, phi)?;
    let radius = KINK_EXCLUSION * phi.dt() * (1.0 + 1e-9);
    let near_kink = |t: f64| kinks.iter().any(|k| (t - k).abs() <= radius || (t - (k - model.r1)).abs() <= radius);
    let sign = match kind {
        CandidateKind::Upper => 1.0,
        CandidateKind::Lower => -1.0,
    };
    let mut report = VerificationReport {
        kind,
        passed: true,
        tol,
        worst_value: f64::NEG_INFINITY,
        worst_t: f64::NAN,
        worst_component: 0,
        checked_points: 0,
        violation_count: 0,
        violations: Vec::new(),
        kinks: kinks.to_vec(),
    };
    for (i, col) in expr.iter().enumerate() {
        for (j, e) in col.iter().enumerate() {
            let Some(e) = e else { continue };
            let t = phi.t(j);
            if near_kink(t) {
                continue;
            }
            report.checked_points += 1;
            let v = sign * e;
            if v > report.worst_value {
                report.worst_value = v;
                report.worst_t = t;
                report.worst_component = i;
            }
            if v > tol {
                report.passed = false;
                report.violation_count += 1;
                if report.violations.len() < VerificationReport::MAX_LISTED {
                    report.violations.push(Violation {
                        component: i,
                        t,
                        value: *e,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Checks `D φ″ − c φ′(t+r1) + f(φ_{t+r1}) ≤ tol` away from `kinks`.
pub fn verify_upper(model: &Model, phi: &Profile, kinks: &[f64], tol: f64) -> Result<VerificationReport> {
    verify(model, phi, kinks, tol, CandidateKind::Upper)
}

/// Checks `D φ″ − c φ′(t+r1) + f(φ_{t+r1}) ≥ −tol` away from `kinks`.
pub fn verify_lower(model: &Model, phi: &Profile, kinks: &[f64], tol: f64) -> Result<VerificationReport> {
    verify(model, phi, kinks, tol, CandidateKind::Lower)
}

/// Convergence evidence of the monotone iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub converged: bool,
    /// Distance between consecutive iterates.
    pub deltas: Vec<f64>,
    pub ordering_ok: bool,
    /// Smallest forward difference of the final profile.
    pub min_forward_difference: f64,
    pub final_residual: f64,
    /// `(left, right)` limits of the final profile per component.
    pub limit_values: Vec<(f64, f64)>,
}

/// `φ_{n+1} = F(φ_n)` from `upper` until consecutive iterates differ by at most `tol`.
pub fn iterate(
    model: &Model,
    upper: &Profile,
    lower: &Profile,
    tol: f64,
    max_iter: usize,
) -> Result<(Profile, IterationReport)> {
    iterate_with_progress(model, upper, lower, tol, max_iter, |_, _| {})
}

/// [`iterate`] calling `progress(step, delta)` after every step.
pub fn iterate_with_progress(
    model: &Model,
    upper: &Profile,
    lower: &Profile,
    tol: f64,
    max_iter: usize,
    mut progress: impl FnMut(usize, f64),
) -> Result<(Profile, IterationReport)> {
    upper.grid().check_same_grid(lower.grid())?;
    if !lower
        .components
        .iter()
        .zip(&model.components)
        .any(|(g, c)| g.right_limit > 0.0 && g.right_limit <= c.k)
    {
        return Err(Error::GuardViolation(
            "lower solution needs a positive right limit in some component".into(),
        ));
    }
    if let Some((component, t, excess)) = lower.first_excess_over(upper, ORDER_SLACK) {
        return Err(Error::OrderingViolation {
            step: 0,
            component,
            t,
            detail: format!("lower exceeds upper by {excess:e}"),
        });
    }
    let op = WaveOperator::new(model, upper.dt())?;
    let mut phi = upper.clone();
    let mut deltas = Vec::new();
    for step in 1..=max_iter {
        let next = op.apply(&phi)?;
        if let Some((component, t, excess)) = next.first_excess_over(&phi, ORDER_SLACK) {
            return Err(Error::OrderingViolation {
                step,
                component,
                t,
                detail: format!("iterate increased by {excess:e}"),
            });
        }
        if let Some((component, t, excess)) = lower.first_excess_over(&next, ORDER_SLACK) {
            return Err(Error::OrderingViolation {
                step,
                component,
                t,
                detail: format!("iterate fell below lower solution by {excess:e}"),
            });
        }
        for (component, g) in next.components.iter().enumerate() {
            if let Some(j) = g.values.windows(2).position(|w| w[1] - w[0] < -ORDER_SLACK) {
                return Err(Error::OrderingViolation {
                    step,
                    component,
                    t: g.t(j),
                    detail: format!("iterate decreases in t by {:e}", g.values[j] - g.values[j + 1]),
                });
            }
        }
        let delta = next.distance(&phi);
        deltas.push(delta);
        progress(step, delta);
        phi = next;
        if delta <= tol {
            let validation = validate_wave(model, &phi)?;
            let report = IterationReport {
                iterations: step,
                converged: true,
                deltas,
                ordering_ok: true,
                min_forward_difference: phi.min_forward_difference(),
                final_residual: validation.residual,
                limit_values: phi.components.iter().map(|g| (g.left_limit, g.right_limit)).collect(),
            };
            return Ok((phi, report));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_delta: deltas.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// Diagnostics for a computed wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveValidation {
    /// Sup of `|D φ″ − c φ′(t+r1) + f(φ_{t+r1})|` over the interior.
    pub residual: f64,
    pub residual_t: f64,
    /// `(φ′ at left end, φ′ at right end)` per component.
    pub end_derivatives: Vec<(f64, f64)>,
    /// `(f at left limits, f at right limits)` per component.
    pub limit_reaction: Vec<(f64, f64)>,
}

impl WaveValidation {
    pub fn max_end_derivative(&self) -> f64 {
        self.end_derivatives.iter().map(|(a, b)| a.abs().max(b.abs())).fold(0.0, f64::max)
    }

    pub fn max_limit_reaction(&self) -> f64 {
        self.limit_reaction.iter().map(|(a, b)| a.abs().max(b.abs())).fold(0.0, f64::max)
    }
}

pub fn validate_wave(model: &Model, phi: &Profile) -> Result<WaveValidation> {
    let expr = wave_expression(model, phi)?;
    let mut residual: f64 = 0.0;
    let mut residual_t = f64::NAN;
    for col in &expr {
        for (j, e) in col.iter().enumerate() {
            if let Some(e) = e {
                if e.abs() > residual {
                    residual = e.abs();
                    residual_t = phi.t(j);
                }
            }
        }
    }
    let end_derivatives = phi
        .components
        .iter()
        .map(|g| {
            let d = g.derivative();
            (d.values[0], d.values[d.len() - 1])
        })
        .collect();
    let lefts: Vec<f64> = phi.components.iter().map(|g| g.left_limit).collect();
    let rights: Vec<f64> = phi.components.iter().map(|g| g.right_limit).collect();
    let limit_reaction = model
        .reaction_const(&lefts)
        .into_iter()
        .zip(model.reaction_const(&rights))
        .collect();
    Ok(WaveValidation {
        residual,
        residual_t,
        end_derivatives,
        limit_reaction,
    })
}
