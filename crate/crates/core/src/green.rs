//! Green function of `D x″(t) − a x′(t+r) − b x(t+r) = f(t)`.
//!
//! Time is rescaled by `√D` so all internal work is done on the unit-diffusion
//! operator `x″ − a x′(t+r) − b x(t+r)` with characteristic function
//! `P(λ) = λ² − aλe^{rλ} − be^{rλ}`, and
//!
//! ```text
//! G(t) = (1/2πi) ∫_{Re λ = s} e^{λt} / P(λ) dλ
//! ```
//!
//! for any `s` in the root-free strip `η₂ < s < η₁`. Three evaluation paths
//! are provided:
//!
//! * closed form for `r = 0` ([`green_nodelay`]),
//! * the single residue at `η₂` for `t > 0` ([`green_residue`]), exact because
//!   `η₂` is the only characteristic root with negative real part when `r ≥ 0`,
//! * contour quadrature along a shifted line ([`green_quadrature`]) for any `t`.
//!
//! The quadrature subtracts the large-|λ| expansion
//! `1/P = Σ_k (aλ + b)^k e^{krλ} / λ^{2k+2}` up to `λ^{-SERIES_ORDER}`; each
//! subtracted term has an elementary inverse transform (a truncated power of
//! `t + kr`), and the remainder decays fast enough for a short frequency
//! window.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charpoly::{continue_root, imaginary_axis_margin, roots_nodelay, ExponentialPolynomial};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gk15, gauss_legendre};

/// Highest inverse power of λ removed from `1/P` before quadrature.
const SERIES_ORDER: u32 = 8;
/// Absolute tolerance for the discarded frequency tail of the integral.
const TAIL_TOL: f64 = 1e-13;
const MAX_CUTOFF: f64 = 1e5;
const POLE_TOL: f64 = 1e-10;
const GL_POINTS: usize = 16;
/// Frequency resolution of the hyperbolicity scan.
pub const MARGIN_XI_MAX: f64 = 200.0;
/// Continuation steps used for the principal roots.
pub const ROOT_STEPS: usize = 16;

/// Parameters of `D x″(t) − a x′(t+r) − b x(t+r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub d: f64,
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

impl OperatorParams {
    pub fn new(d: f64, a: f64, b: f64, r: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Domain(format!("requires D > 0 (got {d})")));
        }
        if !(a != 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::Domain(format!("requires a != 0 and b > 0 (got a = {a}, b = {b})")));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("requires r >= 0 (got {r})")));
        }
        Ok(Self { d, a, b, r })
    }

    /// Unit diffusion.
    pub fn unit(a: f64, b: f64, r: f64) -> Result<Self> {
        Self::new(1.0, a, b, r)
    }

    fn normal(&self) -> Normal {
        let scale = self.d.sqrt();
        Normal {
            a: self.a / scale,
            b: self.b,
            r: self.r / scale,
            scale,
        }
    }

    /// `|α/β|` bound on the imaginary axis for the rescaled operator.
    pub fn hyperbolicity_margin(&self) -> Result<f64> {
        let n = self.normal();
        imaginary_axis_margin(n.a, n.b, n.r, MARGIN_XI_MAX)
    }
}

/// Unit-diffusion form of an operator and the time scale `√D` relating them.
#[derive(Debug, Clone, Copy)]
struct Normal {
    a: f64,
    b: f64,
    r: f64,
    scale: f64,
}

impl Normal {
    fn characteristic(&self) -> ExponentialPolynomial {
        ExponentialPolynomial::characteristic(self.a, self.b, self.r)
    }

    /// `P(λ)` and `E = e^{rλ}` evaluated together.
    #[inline]
    fn char_and_exp(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let e = (self.r * lambda).exp();
        (lambda * lambda - (self.a * lambda + self.b) * e, e)
    }
}

/// Real characteristic roots closest to the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootPair {
    /// Root in the right strip `0 < Re λ ≤ 2λ₁`.
    pub eta1: f64,
    /// Root in the left strip `2λ₂ ≤ Re λ < 0`.
    pub eta2: f64,
}

/// `G` for `r = 0`: `e^{λ₁ξ}/(λ₂−λ₁)` for `ξ < 0`, `e^{λ₂ξ}/(λ₂−λ₁)` otherwise.
pub fn green_nodelay(a: f64, b: f64, xi: f64) -> Result<f64> {
    let (l1, l2) = roots_nodelay(a, b)?;
    let rate = if xi < 0.0 { l1 } else { l2 };
    Ok((rate * xi).exp() / (l2 - l1))
}

/// Follows `η₁` from `λ₁` and `η₂` from `λ₂` as the delay grows from zero.
pub fn principal_roots(params: &OperatorParams) -> Result<RootPair> {
    Ok(GreenFunction::new(params)?.roots())
}

/// `e^{η₂t}/P′(η₂)` for `t > 0`.
pub fn green_residue(params: &OperatorParams, t: f64) -> Result<f64> {
    GreenFunction::new(params)?.residue(t)
}

/// Contour quadrature along `Im ξ = ∓σ` (σ in the units of `t`).
pub fn green_quadrature(params: &OperatorParams, t: f64, sigma: f64) -> Result<f64> {
    Ok(GreenFunction::new(params)?.quadrature(t, sigma)?.value)
}

/// Tabulates `G` on `[t_min, t_max]` with spacing `dt`.
pub fn green_table(params: &OperatorParams, t_min: f64, t_max: f64, dt: f64) -> Result<GreenTable> {
    GreenFunction::new(params)?.table(t_min, t_max, dt)
}

/// Outcome of one contour quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureValue {
    pub value: f64,
    /// Imaginary part of the computed integral; zero in exact arithmetic.
    pub imag_residue: f64,
    /// Accumulated Gauss–Kronrod error estimate.
    pub error_estimate: f64,
    /// Frequency cutoff used (rescaled units).
    pub cutoff: f64,
}

/// A certified Green function: hyperbolicity checked and principal roots found.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    params: OperatorParams,
    normal: Normal,
    /// Roots of the rescaled characteristic function.
    eta: RootPair,
    /// `P′(η₁)`, `P′(η₂)` of the rescaled characteristic function.
    dp: (f64, f64),
    margin: f64,
}

impl GreenFunction {
    /// Certifies hyperbolicity (`margin < 1`) and continues the principal roots.
    pub fn new(params: &OperatorParams) -> Result<Self> {
        let params = OperatorParams::new(params.d, params.a, params.b, params.r)?;
        let margin = params.hyperbolicity_margin()?;
        if margin >= 1.0 {
            return Err(Error::MissingCertificate(format!(
                "hyperbolicity margin {margin} >= 1 for {params:?}"
            )));
        }
        let normal = params.normal();
        let (l1, l2) = roots_nodelay(normal.a, normal.b)?;
        let (a, b) = (normal.a, normal.b);
        let family = |r: f64| ExponentialPolynomial::characteristic(a, b, r);
        let eta1 = continue_root(family, l1, normal.r, ROOT_STEPS, Some((0.0, 2.0 * l1)))?;
        let eta2 = continue_root(family, l2, normal.r, ROOT_STEPS, Some((2.0 * l2, 0.0)))?;
        let p = normal.characteristic();
        let dp1 = p.eval_d(Complex64::new(eta1, 0.0)).re;
        let dp2 = p.eval_d(Complex64::new(eta2, 0.0)).re;
        if dp2.abs() <= 1e-8 {
            return Err(Error::DegenerateRoot { derivative: dp2 });
        }
        if dp1.abs() <= 1e-8 {
            return Err(Error::DegenerateRoot { derivative: dp1 });
        }
        Ok(Self {
            params,
            normal,
            eta: RootPair { eta1, eta2 },
            dp: (dp1, dp2),
            margin,
        })
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Principal roots in the time units of the original operator.
    pub fn roots(&self) -> RootPair {
        RootPair {
            eta1: self.eta.eta1 / self.normal.scale,
            eta2: self.eta.eta2 / self.normal.scale,
        }
    }

    /// Residue formula, valid for `t > 0`.
    pub fn residue(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("residue path needs t > 0 (got {t})")));
        }
        let tn = t / self.normal.scale;
        Ok((self.eta.eta2 * tn).exp() / self.dp.1 / self.normal.scale)
    }

    /// Default contour offset (original units): `0.9η₁` for `t ≤ 0`, `0.5|η₂|` for `t > 0`.
    pub fn default_sigma(&self, t: f64) -> f64 {
        let roots = self.roots();
        if t <= 0.0 {
            0.9 * roots.eta1
        } else {
            0.5 * roots.eta2.abs()
        }
    }

    /// Adaptive contour quadrature at a single `t`.
    pub fn quadrature(&self, t: f64, sigma: f64) -> Result<QuadratureValue> {
        let scale = self.normal.scale;
        let s = self.line_offset(t, sigma * scale)?;
        let tn = t / scale;
        let transform = Transform::new(&self.normal, &self.eta, Multiplier::Identity, s)?;
        let mut q = transform.at(tn);
        q.value /= scale;
        q.imag_residue /= scale;
        q.error_estimate /= scale;
        Ok(q)
    }

    fn line_offset(&self, t: f64, sigma_n: f64) -> Result<f64> {
        if t <= 0.0 {
            if !(sigma_n > 0.0 && sigma_n < self.eta.eta1) {
                return Err(Error::Domain(format!(
                    "t <= 0 needs 0 < sigma < eta1 = {}",
                    self.roots().eta1
                )));
            }
            Ok(sigma_n)
        } else {
            if !(sigma_n > 0.0 && sigma_n < -self.eta.eta2) {
                return Err(Error::Domain(format!(
                    "t > 0 needs 0 < sigma < |eta2| = {}",
                    -self.roots().eta2
                )));
            }
            Ok(-sigma_n)
        }
    }

    /// Values on `t_min, t_min + dt, …` (up to `t_max`): residue path for
    /// `t > 0`, contour quadrature with the default offset for `t ≤ 0`.
    pub fn table(&self, t_min: f64, t_max: f64, dt: f64) -> Result<GreenTable> {
        if !(dt > 0.0 && t_max >= t_min) {
            return Err(Error::Domain(format!("bad table range [{t_min}, {t_max}] step {dt}")));
        }
        let count = ((t_max - t_min) / dt + 1e-9).floor() as usize + 1;
        let times: Vec<f64> = (0..count).map(|k| t_min + k as f64 * dt).collect();
        let n_nonpos = times.iter().take_while(|&&t| t <= 0.0).count();
        let scale = self.normal.scale;

        let mut values = Vec::with_capacity(count);
        if n_nonpos > 0 {
            let transform = Transform::new(&self.normal, &self.eta, Multiplier::Identity, 0.9 * self.eta.eta1)?;
            let nodes = transform.fixed_nodes(t_min.abs() / scale)?;
            let neg = transform.on_grid(&nodes, t_min / scale, dt / scale, n_nonpos);
            values.extend(neg.into_iter().map(|g| g / scale));
        }
        for &t in &times[n_nonpos..] {
            values.push(self.residue(t)?);
        }

        let first_violation = times.iter().zip(&values).find(|(_, g)| !(**g < 0.0)).map(|(t, _)| *t);
        let envelope = Envelope::fit(&times, &values, &self.roots());
        Ok(GreenTable {
            params: self.params,
            t0: t_min,
            dt,
            values,
            eta: self.roots(),
            margin: self.margin,
            negativity_certified: first_violation.is_none(),
            first_violation,
            envelope,
        })
    }

    /// Product-integration weights `W_m = ∫ G(m·h − v)·hat_h(v) dv` for
    /// `m = 0, −1, …, −(count−1)`, with `hat_h` the piecewise-linear hat of
    /// half-width `h`.
    pub(crate) fn hat_weights_nonpositive(&self, h: f64, count: usize) -> Result<Vec<f64>> {
        let scale = self.normal.scale;
        let hn = h / scale;
        let transform = Transform::new(&self.normal, &self.eta, Multiplier::Hat(hn), 0.9 * self.eta.eta1)?;
        let reach = (count.saturating_sub(1)) as f64 * hn + hn;
        let nodes = transform.fixed_nodes(reach)?;
        Ok(transform.on_grid(&nodes, 0.0, -hn, count))
    }

    /// `(A, q)` with `W_m = A·q^m` for `m ≥ 1`: the hat-smoothed residue
    /// `e^{η₂ m h} Ĥ(η₂) / P′(η₂)`.
    pub(crate) fn hat_weights_positive(&self, h: f64) -> (f64, f64) {
        let hn = h / self.normal.scale;
        let hat = Multiplier::Hat(hn).eval(Complex64::new(self.eta.eta2, 0.0)).re;
        (hat / self.dp.1, (self.eta.eta2 * hn).exp())
    }
}

/// Exponential envelope `|G(t)| ≤ K₀ e^{−α|t|}` fitted to a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub k0: f64,
    pub alpha: f64,
    pub alpha_left: f64,
    pub alpha_right: f64,
}

impl Envelope {
    fn fit(times: &[f64], values: &[f64], roots: &RootPair) -> Self {
        let slope = |pick: &dyn Fn(f64) -> bool| -> Option<f64> {
            let pts: Vec<(f64, f64)> = times
                .iter()
                .zip(values)
                .filter(|(t, g)| pick(**t) && g.abs() > 1e-290)
                .map(|(t, g)| (t.abs(), g.abs().ln()))
                .collect();
            if pts.len() < 3 {
                return None;
            }
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            (sxx > 0.0).then(|| -sxy / sxx)
        };
        let alpha_left = slope(&|t| t <= -1.0).unwrap_or(roots.eta1);
        let alpha_right = slope(&|t| t >= 1.0).unwrap_or(-roots.eta2);
        let alpha = alpha_left.min(alpha_right);
        let k0 = times
            .iter()
            .zip(values)
            .map(|(t, g)| g.abs() * (alpha * t.abs()).exp())
            .fold(0.0, f64::max);
        Self {
            k0,
            alpha,
            alpha_left,
            alpha_right,
        }
    }
}

/// Tabulated Green function with its negativity verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenTable {
    pub params: OperatorParams,
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub eta: RootPair,
    pub margin: f64,
    pub negativity_certified: bool,
    /// First sample that is not strictly negative.
    pub first_violation: Option<f64>,
    pub envelope: Envelope,
}

impl GreenTable {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|k| self.t0 + k as f64 * self.dt)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with columns `t, G`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t (time),G (per unit forcing)")?;
        for (t, g) in self.times().zip(&self.values) {
            writeln!(w, "{t:e},{g:e}")?;
        }
        Ok(())
    }
}

/// Multiplier `M(λ)` applied to `1/P(λ)` before inversion.
#[derive(Debug, Clone, Copy)]
enum Multiplier {
    Identity,
    /// Laplace transform of the hat of half-width `h`: `(e^{λh} − 2 + e^{−λh})/(hλ²)`.
    Hat(f64),
}

impl Multiplier {
    fn eval(&self, lambda: Complex64) -> Complex64 {
        match *self {
            Multiplier::Identity => Complex64::new(1.0, 0.0),
            Multiplier::Hat(h) => {
                let x = lambda * h;
                if x.norm() < 1e-2 {
                    let x2 = x * x;
                    h * (1.0 + x2 / 12.0 + x2 * x2 / 360.0)
                } else {
                    let half = (x * 0.5).sinh() / (x * 0.5);
                    h * half * half
                }
            }
        }
    }

    /// `(coefficient, shift)` pairs and inverse power `q` with
    /// `M(λ) = Σ c·e^{λ·shift} / λ^q`.
    fn terms(&self) -> (Vec<(f64, f64)>, u32) {
        match *self {
            Multiplier::Identity => (vec![(1.0, 0.0)], 0),
            Multiplier::Hat(h) => (vec![(1.0 / h, h), (-2.0 / h, 0.0), (1.0 / h, -h)], 2),
        }
    }
}

/// `coeff · e^{λ·shift} / λ^power`, inverted in closed form.
#[derive(Debug, Clone, Copy)]
struct ClosedTerm {
    coeff: f64,
    shift: f64,
    power: u32,
}

/// One term `coeff · E^k / λ^power` of the expansion of `1/P`.
#[derive(Debug, Clone, Copy)]
struct SeriesTerm {
    coeff: f64,
    k: u32,
    power: u32,
}

/// Inverse transform of `M(λ)/P(λ)` along `Re λ = s` (rescaled units).
struct Transform<'a> {
    normal: &'a Normal,
    multiplier: Multiplier,
    s: f64,
    series: Vec<SeriesTerm>,
    closed: Vec<ClosedTerm>,
    cutoff: f64,
    /// Distance from the line to the nearest singularity of the remainder.
    dist: f64,
}

/// Gauss nodes on `[0, Ξ]` with the remainder already multiplied in.
struct FixedNodes {
    zeta: Vec<f64>,
    weighted: Vec<Complex64>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * f64::from(i))
}

impl<'a> Transform<'a> {
    fn new(normal: &'a Normal, eta: &RootPair, multiplier: Multiplier, s: f64) -> Result<Self> {
        let (a, b) = (normal.a, normal.b);
        let mut series = Vec::new();
        for k in 0..=SERIES_ORDER.saturating_sub(2) {
            for j in 0..=k {
                let power = 2 * k + 2 - j;
                if power <= SERIES_ORDER {
                    let coeff = binomial(k, j) * a.powi(j as i32) * b.powi((k - j) as i32);
                    series.push(SeriesTerm { coeff, k, power });
                }
            }
        }
        let (mterms, q) = multiplier.terms();
        let mut closed = Vec::new();
        for st in &series {
            for &(mc, shift) in &mterms {
                closed.push(ClosedTerm {
                    coeff: st.coeff * mc,
                    shift: f64::from(st.k) * normal.r + shift,
                    power: st.power + q,
                });
            }
        }
        let dist = s.abs().min((eta.eta1 - s).abs()).min((eta.eta2 - s).abs());
        let mut tr = Self {
            normal,
            multiplier,
            s,
            series,
            closed,
            cutoff: 0.0,
            dist,
        };
        tr.cutoff = tr.choose_cutoff()?;
        tr.check_contour()?;
        Ok(tr)
    }

    /// `M(λ)·(1/P(λ) − Σ series)` at `λ = s + iζ`.
    #[inline]
    fn remainder(&self, zeta: f64) -> Complex64 {
        let lambda = Complex64::new(self.s, zeta);
        let (p, e) = self.normal.char_and_exp(lambda);
        let inv = lambda.inv();
        let mut inv_pows = [Complex64::new(1.0, 0.0); SERIES_ORDER as usize + 1];
        for i in 1..inv_pows.len() {
            inv_pows[i] = inv_pows[i - 1] * inv;
        }
        let mut e_pows = [Complex64::new(1.0, 0.0); SERIES_ORDER as usize];
        for i in 1..e_pows.len() {
            e_pows[i] = e_pows[i - 1] * e;
        }
        let mut approx = Complex64::new(0.0, 0.0);
        for st in &self.series {
            approx += st.coeff * e_pows[st.k as usize] * inv_pows[st.power as usize];
        }
        self.multiplier.eval(lambda) * (p.inv() - approx)
    }

    fn remainder_decay_power(&self) -> u32 {
        SERIES_ORDER + 1 + self.multiplier.terms().1
    }

    fn choose_cutoff(&self) -> Result<f64> {
        let n = self.normal;
        let base = (8.0 * (n.a.abs() + n.b.sqrt() + 1.0) * (n.r * self.s.abs()).exp()).max(20.0);
        let p = self.remainder_decay_power();
        let c = (0..=64)
            .map(|k| {
                let zeta = base * (1.0 + k as f64 / 64.0);
                let lambda = Complex64::new(self.s, zeta);
                self.remainder(zeta).norm() * lambda.norm().powi(p as i32)
            })
            .fold(0.0, f64::max)
            * 2.0;
        let pm1 = f64::from(p - 1);
        let needed = (c / (PI * pm1 * TAIL_TOL)).powf(1.0 / pm1);
        let cutoff = base.max(needed);
        if !cutoff.is_finite() || cutoff > MAX_CUTOFF {
            return Err(Error::TruncationFailure { cutoff });
        }
        Ok(cutoff)
    }

    fn check_contour(&self) -> Result<()> {
        let reach = self.cutoff.min(60.0);
        let n = (reach / 2e-3).ceil() as usize;
        let min_abs = (0..=n)
            .into_par_iter()
            .map(|k| {
                let zeta = reach * k as f64 / n as f64;
                self.normal.char_and_exp(Complex64::new(self.s, zeta)).0.norm()
            })
            .reduce(|| f64::INFINITY, f64::min);
        if min_abs < POLE_TOL {
            return Err(Error::PoleOnContour { min_abs });
        }
        Ok(())
    }

    /// Panel boundaries on `[0, Ξ]`, narrow near singularities and fine
    /// enough to resolve `e^{iζt}` for `|t| ≤ t_abs`.
    fn panels(&self, t_abs: f64) -> Vec<(f64, f64)> {
        let w_freq = 3.0 / (t_abs + 1.0);
        let mut out = Vec::new();
        let mut z = 0.0;
        while z < self.cutoff {
            let w = w_freq.min(0.5 * (z * z + self.dist * self.dist).sqrt());
            let end = (z + w).min(self.cutoff);
            out.push((z, end));
            z = end;
        }
        out
    }

    fn closed_form(&self, t: f64) -> f64 {
        let right = self.s > 0.0;
        self.closed
            .iter()
            .map(|ct| {
                let tau = t + ct.shift;
                let active = if right { tau > 0.0 } else { tau < 0.0 };
                if !active {
                    return 0.0;
                }
                let v = ct.coeff * tau.powi(ct.power as i32 - 1) / factorial(ct.power - 1);
                if right {
                    v
                } else {
                    -v
                }
            })
            .sum()
    }

    /// Adaptive evaluation at one `t` over the full line `[−Ξ, Ξ]`.
    fn at(&self, t: f64) -> QuadratureValue {
        let f = |zeta: f64| Complex64::new(0.0, zeta * t).exp() * self.remainder(zeta);
        let g = |zeta: f64| f(-zeta);
        let panels = self.panels(t.abs());
        let (integral, err) = panels
            .par_iter()
            .map(|&(lo, hi)| {
                let tol = 1e-15 * (hi - lo).max(1e-3);
                let (v1, e1) = adaptive_gk15(&f, lo, hi, tol, 12);
                let (v2, e2) = adaptive_gk15(&g, lo, hi, tol, 12);
                (v1 + v2, e1 + e2)
            })
            .reduce(|| (Complex64::new(0.0, 0.0), 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
        let factor = (self.s * t).exp() / (2.0 * PI);
        QuadratureValue {
            value: self.closed_form(t) + factor * integral.re,
            imag_residue: factor * integral.im,
            error_estimate: factor * err,
            cutoff: self.cutoff,
        }
    }

    fn fixed_nodes(&self, t_abs: f64) -> Result<FixedNodes> {
        let (x, w) = gauss_legendre(GL_POINTS);
        let panels = self.panels(t_abs);
        let pairs: Vec<(f64, Complex64)> = panels
            .par_iter()
            .flat_map_iter(|&(lo, hi)| {
                let c = 0.5 * (lo + hi);
                let h = 0.5 * (hi - lo);
                x.iter()
                    .zip(&w)
                    .map(move |(xi, wi)| {
                        let z = c + h * xi;
                        (z, h * wi * self.remainder(z))
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        if let Some(bad) = pairs.iter().find(|p| !(p.1.re.is_finite() && p.1.im.is_finite())) {
            return Err(Error::PoleOnContour { min_abs: bad.0 });
        }
        let (zeta, weighted) = pairs.into_iter().unzip();
        Ok(FixedNodes { zeta, weighted })
    }

    /// Values at `t0 + k·dt`, `k < count`, sharing one node set.
    fn on_grid(&self, nodes: &FixedNodes, t0: f64, dt: f64, count: usize) -> Vec<f64> {
        const CHUNK: usize = 128;
        let chunks: Vec<usize> = (0..count).step_by(CHUNK).collect();
        chunks
            .par_iter()
            .flat_map_iter(|&start| {
                let end = (start + CHUNK).min(count);
                let t_start = t0 + start as f64 * dt;
                let mut phase: Vec<Complex64> = nodes
                    .zeta
                    .iter()
                    .map(|z| Complex64::new(0.0, z * t_start).exp())
                    .collect();
                let step: Vec<Complex64> = nodes.zeta.iter().map(|z| Complex64::new(0.0, z * dt).exp()).collect();
                let mut out = Vec::with_capacity(end - start);
                for k in start..end {
                    let t = t0 + k as f64 * dt;
                    let mut acc = 0.0;
                    for ((ph, wr), st) in phase.iter_mut().zip(&nodes.weighted).zip(&step) {
                        acc += (*ph * wr).re;
                        *ph *= st;
                    }
                    out.push(self.closed_form(t) + (self.s * t).exp() / PI * acc);
                }
                out
            })
            .collect()
    }
}
