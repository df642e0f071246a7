//! Built-in models with explicit upper and lower solutions.
//!
//! * Fisher-KPP with delays: `u_t = u_xx(x, t−τ1) + u(x, t−τ2)(1 − u(x, t))`.
//! * Belousov–Zhabotinskii with delays, in the variables where the
//!   equilibria are `(0, 0)` and `(1, 1)`:
//!   `f_1 = u[s − u + r v(t−τ2)]`, `f_2 = b u (1 − v)`, `s = 1 − r`.
//!
//! Constructors sample the candidate solutions on a grid and refuse to return
//! candidates that fail their verification.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::charpoly::{continue_root, ExpPolyTerm, ExponentialPolynomial};
use crate::error::{Error, Result};
use crate::green::{OperatorParams, ROOT_STEPS};
use crate::perron::GreenKernel;
use crate::waves::{verify_lower, verify_upper, Component, Model, Profile, Reaction, Tap, VerificationReport};

/// Sampling window and verification tolerance for constructed candidates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
    pub verify_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t_min: -60.0,
            t_max: 60.0,
            dt: 0.01,
            verify_tol: 1e-8,
        }
    }
}

/// A model with its verified upper and lower solutions.
#[derive(Debug, Clone)]
pub struct Candidates {
    pub model: Model,
    pub upper: Profile,
    pub lower: Profile,
    pub upper_kinks: Vec<f64>,
    pub lower_kinks: Vec<f64>,
    pub upper_report: VerificationReport,
    pub lower_report: VerificationReport,
}

/// Decay rate used by the Fisher upper solution `1/(1 + θe^{−νt})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FisherUpper {
    /// `ν = μ1`, the smaller root of `μ² − cμ + 1`.
    ///
    /// With positive delays every front decays more slowly than `e^{μ1 t}`,
    /// so none lies below this upper solution and the monotone iteration
    /// from it drifts instead of converging.
    #[default]
    Undelayed,
    /// `ν` = the rate the discretized wave operator maps to itself, the grid
    /// counterpart of the root of `ν² − cνe^{r1ν} + e^{(r1−r2)ν}` near `μ1`.
    /// The front's tail amplitude is then preserved by the iteration.
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FisherParams {
    pub c: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub theta: f64,
    pub k: f64,
    #[serde(default)]
    pub upper: FisherUpper,
}

/// Shape of the BZ upper solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BzUpper {
    /// `(½e^{λ1 t} | 1 − ½e^{−λ1 t}, same with μ1)`, a quasi-upper solution
    /// with a kink at 0.
    ///
    /// Fronts with `c > 2√(1−r)` decay like `e^{νt}` with `ν` well below
    /// `λ1`, so none lies below this candidate and the iteration from it
    /// drifts instead of converging.
    #[default]
    Piecewise,
    /// `(min(1, B e^{νt}), min(1, e^{νt}))` with `ν` the grid-neutral slow
    /// rate of the first component and `B = (r + s/b)/2`; needs `r(1+b) < 1`.
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BzParams {
    pub c: f64,
    pub b: f64,
    pub r: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub k: f64,
    #[serde(default)]
    pub upper: BzUpper,
}

/// Model document: identifier plus parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Fisher(FisherParams),
    Bz(BzParams),
}

impl ModelSpec {
    pub fn build(&self, grid: &GridSpec) -> Result<Candidates> {
        match self {
            ModelSpec::Fisher(p) => fisher(p, grid),
            ModelSpec::Bz(p) => bz(p, grid),
        }
    }

    /// `(τ1, τ2)` in PDE time.
    pub fn delays(&self) -> (f64, f64) {
        match self {
            ModelSpec::Fisher(p) => (p.tau1, p.tau2),
            ModelSpec::Bz(p) => (p.tau1, p.tau2),
        }
    }

    pub fn speed(&self) -> f64 {
        match self {
            ModelSpec::Fisher(p) => p.c,
            ModelSpec::Bz(p) => p.c,
        }
    }
}

/// `φ(−r2)(1 − φ(0))`.
#[derive(Debug, Clone)]
pub struct FisherReaction {
    taps: [Tap; 2],
}

impl FisherReaction {
    pub fn new(r2: f64) -> Self {
        Self {
            taps: [Tap { component: 0, offset: -r2 }, Tap { component: 0, offset: 0.0 }],
        }
    }
}

impl Reaction for FisherReaction {
    fn id(&self) -> &str {
        "fisher"
    }

    fn taps(&self) -> &[Tap] {
        &self.taps
    }

    fn eval(&self, _component: usize, v: &[f64]) -> f64 {
        v[0] * (1.0 - v[1])
    }
}

/// `f_1 = φ_1(0)[s − φ_1(0) + r φ_2(−r2)]`, `f_2 = b φ_1(0)[1 − φ_2(0)]`.
#[derive(Debug, Clone)]
pub struct BzReaction {
    r: f64,
    b: f64,
    taps: [Tap; 3],
}

impl BzReaction {
    pub fn new(r: f64, b: f64, r2: f64) -> Self {
        Self {
            r,
            b,
            taps: [
                Tap { component: 0, offset: 0.0 },
                Tap { component: 1, offset: -r2 },
                Tap { component: 1, offset: 0.0 },
            ],
        }
    }
}

impl Reaction for BzReaction {
    fn id(&self) -> &str {
        "bz"
    }

    fn taps(&self) -> &[Tap] {
        &self.taps
    }

    fn eval(&self, component: usize, v: &[f64]) -> f64 {
        let s = 1.0 - self.r;
        match component {
            0 => v[0] * (s - v[0] + self.r * v[1]),
            _ => self.b * v[0] * (1.0 - v[2]),
        }
    }
}

/// Roots `μ1 < μ2` of `μ² − cμ + 1`.
pub fn fisher_mu(c: f64) -> Result<(f64, f64)> {
    if !(c > 2.0) {
        return Err(Error::GuardViolation(format!("requires c > 2 (got c = {c})")));
    }
    let disc = (c * c - 4.0).sqrt();
    Ok(((c - disc) / 2.0, (c + disc) / 2.0))
}

/// `λ² − cλ e^{r1 λ} + w e^{r_w λ}`.
fn front_polynomial(c: f64, r1: f64, w: f64, rw: f64) -> ExponentialPolynomial {
    ExponentialPolynomial::new(vec![
        ExpPolyTerm::new(1.0, 2, 0.0),
        ExpPolyTerm::new(-c, 1, r1),
        ExpPolyTerm::new(w, 0, rw),
    ])
    .expect("three terms")
}

/// Continues the larger root of `λ² − cλ + w` to `λ² − cλe^{r1λ} + we^{r_wλ}`
/// by scaling both delays together.
fn continued_front_root(c: f64, w: f64, r1: f64, rw: f64) -> Result<f64> {
    continued_root(c, w, r1, rw, true)
}

fn continued_root(c: f64, w: f64, r1: f64, rw: f64, larger: bool) -> Result<f64> {
    let disc = c * c - 4.0 * w;
    if disc <= 0.0 {
        return Err(Error::GuardViolation(format!("requires c^2 > 4*{w} (got c = {c})")));
    }
    let start = if larger { (c + disc.sqrt()) / 2.0 } else { (c - disc.sqrt()) / 2.0 };
    if r1 == 0.0 && rw == 0.0 {
        return Ok(start);
    }
    let strip = if larger { (0.0, 2.0 * start) } else { (0.0, 0.5 * c) };
    let family = |s: f64| front_polynomial(c, s * r1, w, s * rw);
    continue_root(family, start, 1.0, ROOT_STEPS, Some(strip))
}

/// Slow decay rate of Fisher fronts at `0`: the root of
/// `ν² − cνe^{r1ν} + e^{(r1−r2)ν}` continued from `μ1`.
pub fn fisher_tail_rate(c: f64, r1: f64, r2: f64) -> Result<f64> {
    fisher_mu(c)?;
    continued_root(c, 1.0, r1, r1 - r2, false)
}

/// [`fisher_tail_rate`] for the operator discretized at spacing `dt`: the
/// `ν` with `−K(ν)·(e^{(r1−r2)ν} + e^{r1ν}) = 1`, `K` the kernel transform.
pub fn fisher_grid_tail_rate(c: f64, r1: f64, r2: f64, dt: f64) -> Result<f64> {
    let start = fisher_tail_rate(c, r1, r2)?;
    let kernel = GreenKernel::new(&OperatorParams::unit(c, 1.0, r1)?, dt)?;
    grid_neutral_rate(&kernel, start, |nu| ((r1 - r2) * nu).exp() + (r1 * nu).exp())
}

/// Solves `−K(ν)·h(ν) = 1` by secant steps from `start`, where `h` is the
/// symbol of the linearized `H` at `0`: the rate whose tail amplitude the
/// discrete iteration keeps.
fn grid_neutral_rate(kernel: &GreenKernel, start: f64, h: impl Fn(f64) -> f64) -> Result<f64> {
    let gain = |nu: f64| -> Result<f64> { Ok(-kernel.transform(nu)? * h(nu) - 1.0) };
    let (mut x0, mut x1) = (start, start * (1.0 + 1e-6));
    let (mut g0, mut g1) = (gain(x0)?, gain(x1)?);
    for _ in 0..50 {
        if g1 == 0.0 || g1 == g0 || (x1 - x0).abs() <= 1e-14 * x1 {
            return Ok(x1);
        }
        let x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
        (x0, g0) = (x1, g1);
        x1 = x2;
        g1 = gain(x1)?;
    }
    Err(Error::NewtonDivergence { r: kernel.params().r })
}

/// Slow decay rate of BZ fronts in the first component: the root of
/// `ν² − cνe^{r1ν} + s e^{r1ν}` continued from the smaller root of
/// `ν² − cν + s`, `s = 1 − r`.
pub fn bz_tail_rate(c: f64, r: f64, r1: f64) -> Result<f64> {
    continued_root(c, 1.0 - r, r1, r1, false)
}

/// [`bz_tail_rate`] for the first-component operator discretized at `dt`.
pub fn bz_grid_tail_rate(c: f64, r: f64, r1: f64, dt: f64) -> Result<f64> {
    let start = bz_tail_rate(c, r, r1)?;
    let kernel = GreenKernel::new(&OperatorParams::unit(c, 1.0 + r, r1)?, dt)?;
    grid_neutral_rate(&kernel, start, |nu| 2.0 * (r1 * nu).exp())
}

fn check_candidates(c: Candidates) -> Result<Candidates> {
    for (name, rep) in [("upper", &c.upper_report), ("lower", &c.lower_report)] {
        if !rep.passed {
            return Err(Error::GuardViolation(format!(
                "{name} solution fails its inequality (component {}, t = {}, value {:e} > tol {:e})",
                rep.worst_component + 1,
                rep.worst_t,
                rep.worst_value,
                rep.tol
            )));
        }
    }
    Ok(c)
}

fn check_grid(grid: &GridSpec) -> Result<()> {
    if !(grid.dt > 0.0 && grid.t_max > grid.t_min && grid.verify_tol >= 0.0) {
        return Err(Error::Domain(format!("bad grid {grid:?}")));
    }
    Ok(())
}

/// Fisher-KPP model, `φ̄ = 1/(1 + θe^{−νt})` with `ν` per [`FisherUpper`]
/// and `φ = min(e^{λt}, 1)/k`.
pub fn fisher(p: &FisherParams, grid: &GridSpec) -> Result<Candidates> {
    check_grid(grid)?;
    let (mu1, _) = fisher_mu(p.c)?;
    if !(p.theta > 0.0 && p.theta < 1.0) {
        return Err(Error::GuardViolation(format!("requires 0 < theta < 1 (got {})", p.theta)));
    }
    if !(p.k >= 2.0) {
        return Err(Error::GuardViolation(format!("requires k >= 2 (got {})", p.k)));
    }
    if !(p.tau1 >= 0.0 && p.tau2 >= 0.0) {
        return Err(Error::GuardViolation("requires tau1, tau2 >= 0".into()));
    }
    let (r1, r2) = (p.c * p.tau1, p.c * p.tau2);
    let model = Model::new(
        vec![Component { d: 1.0, k: 1.0, beta: 1.0 }],
        p.c,
        r1,
        r2,
        Arc::new(FisherReaction::new(r2)),
    )?;
    let lambda = continued_front_root(p.c, 0.5, r1, r1 - r2)?;
    let nu = match p.upper {
        FisherUpper::Undelayed => mu1,
        FisherUpper::Neutral => fisher_grid_tail_rate(p.c, r1, r2, grid.dt)?,
    };
    let theta = p.theta;
    let upper = Profile::from_fn(1, grid.t_min, grid.t_max, grid.dt, &[(0.0, 1.0)], |_, t| {
        1.0 / (1.0 + theta * (-nu * t).exp())
    })?
    .with_decay(&[(nu, nu)])?;
    let k = p.k;
    let lower = Profile::from_fn(1, grid.t_min, grid.t_max, grid.dt, &[(0.0, 1.0 / k)], |_, t| {
        if t <= 0.0 {
            (lambda * t).exp() / k
        } else {
            1.0 / k
        }
    })?
    .with_decay(&[(lambda, 0.0)])?;
    let upper_report = verify_upper(&model, &upper, &[], grid.verify_tol)?;
    let lower_report = verify_lower(&model, &lower, &[0.0], grid.verify_tol)?;
    check_candidates(Candidates {
        model,
        upper,
        lower,
        upper_kinks: vec![],
        lower_kinks: vec![0.0],
        upper_report,
        lower_report,
    })
}

/// Exponents of the BZ candidates: `λ1`, `μ1` for the upper and `λ2` for the lower.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BzRates {
    pub lambda1: f64,
    pub mu1: f64,
    pub lambda2: f64,
}

pub fn bz_rates(p: &BzParams) -> Result<BzRates> {
    if !(p.b > 1.0) {
        return Err(Error::GuardViolation(format!("requires b > 1 (got b = {})", p.b)));
    }
    if !(p.c > 2.0 * p.b.sqrt()) {
        return Err(Error::GuardViolation(format!(
            "requires c > 2√b (got c = {}, 2√b = {})",
            p.c,
            2.0 * p.b.sqrt()
        )));
    }
    let r1 = p.c * p.tau1;
    let lambda1 = continued_front_root(p.c, 1.0, r1, r1)?;
    let mu1 = continued_front_root(p.c, p.b, r1, r1)?;
    let lambda2 = continued_front_root(p.c, 0.5, r1, r1)?;
    if !(mu1 < lambda1 && lambda1 < lambda2) {
        return Err(Error::RootOrderViolation(format!(
            "need mu1 < lambda1 < lambda2, got {mu1} , {lambda1} , {lambda2}"
        )));
    }
    Ok(BzRates { lambda1, mu1, lambda2 })
}

/// BZ model; upper per [`BzUpper`], lower `(min(e^{λ2 t}, 1)/(2k), 0)`.
pub fn bz(p: &BzParams, grid: &GridSpec) -> Result<Candidates> {
    check_grid(grid)?;
    if !(p.r > 0.0 && p.r <= 0.25) {
        return Err(Error::GuardViolation(format!("requires 0 < r <= 1/4 (got r = {})", p.r)));
    }
    if !(p.k >= 2.0) {
        return Err(Error::GuardViolation(format!("requires k >= 2 (got {})", p.k)));
    }
    if !(p.tau1 >= 0.0 && p.tau2 >= 0.0) {
        return Err(Error::GuardViolation("requires tau1, tau2 >= 0".into()));
    }
    let rates = bz_rates(p)?;
    let (r1, r2) = (p.c * p.tau1, p.c * p.tau2);
    let model = Model::new(
        vec![
            Component { d: 1.0, k: 1.0, beta: 1.0 + p.r },
            Component { d: 1.0, k: 1.0, beta: p.b },
        ],
        p.c,
        r1,
        r2,
        Arc::new(BzReaction::new(p.r, p.b, r2)),
    )?;
    let (upper, upper_kinks) = match p.upper {
        BzUpper::Piecewise => {
            let front = |rate: f64, t: f64| {
                if t <= 0.0 {
                    0.5 * (rate * t).exp()
                } else {
                    1.0 - 0.5 * (-rate * t).exp()
                }
            };
            let upper = Profile::from_fn(2, grid.t_min, grid.t_max, grid.dt, &[(0.0, 1.0), (0.0, 1.0)], |i, t| {
                front(if i == 0 { rates.lambda1 } else { rates.mu1 }, t)
            })?
            .with_decay(&[(rates.lambda1, rates.lambda1), (rates.mu1, rates.mu1)])?;
            (upper, vec![0.0])
        }
        BzUpper::Neutral => {
            let s = 1.0 - p.r;
            if !(p.r * (1.0 + p.b) < 1.0) {
                return Err(Error::GuardViolation(format!(
                    "neutral upper requires r(1 + b) < 1 (got {})",
                    p.r * (1.0 + p.b)
                )));
            }
            let nu = bz_grid_tail_rate(p.c, p.r, r1, grid.dt)?;
            let amp = 0.5 * (p.r + s / p.b);
            let upper = Profile::from_fn(2, grid.t_min, grid.t_max, grid.dt, &[(0.0, 1.0), (0.0, 1.0)], |i, t| {
                let a = if i == 0 { amp } else { 1.0 };
                (a * (nu * t).exp()).min(1.0)
            })?
            .with_decay(&[(nu, 0.0), (nu, 0.0)])?;
            (upper, vec![-amp.ln() / nu, 0.0])
        }
    };
    let cap = 1.0 / (2.0 * p.k);
    let lower = Profile::from_fn(2, grid.t_min, grid.t_max, grid.dt, &[(0.0, cap), (0.0, 0.0)], |i, t| {
        if i == 1 {
            0.0
        } else if t <= 0.0 {
            cap * (rates.lambda2 * t).exp()
        } else {
            cap
        }
    })?
    .with_decay(&[(rates.lambda2, 0.0), (0.0, 0.0)])?;
    let upper_report = verify_upper(&model, &upper, &upper_kinks, grid.verify_tol)?;
    let lower_report = verify_lower(&model, &lower, &[0.0], grid.verify_tol)?;
    check_candidates(Candidates {
        model,
        upper,
        lower,
        upper_kinks,
        lower_kinks: vec![0.0],
        upper_report,
        lower_report,
    })
}
