//! Exponential polynomials `Σ c·λ^p·e^{s·λ}` and their roots.
//!
//! Every characteristic function that shows up in the wave problems has this
//! shape: the quadratic `λ² − aλ − b` of the undelayed operator, the advanced
//! function `λ² − aλe^{rλ} − be^{rλ}`, and the decay-rate equations used to
//! build upper and lower solutions. Root counting uses the argument principle
//! on rectangles; individual real roots are followed in the delay parameter by
//! Newton continuation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One term `coeff · λ^power · e^{shift·λ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyTerm {
    pub coeff: f64,
    pub power: u32,
    pub shift: f64,
}

impl ExpPolyTerm {
    pub fn new(coeff: f64, power: u32, shift: f64) -> Self {
        Self {
            coeff,
            power,
            shift,
        }
    }
}

/// A finite sum of [`ExpPolyTerm`]s with real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialPolynomial {
    terms: Vec<ExpPolyTerm>,
}

impl ExponentialPolynomial {
    pub fn new(terms: Vec<ExpPolyTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("exponential polynomial needs at least one term".into()));
        }
        if let Some(t) = terms.iter().find(|t| !t.coeff.is_finite() || !t.shift.is_finite()) {
            return Err(Error::Domain(format!("non-finite term {t:?}")));
        }
        Ok(Self { terms })
    }

    /// `z² − a·z·e^{rz} − b·e^{rz}`, the characteristic function of
    /// `x″(t) − a x′(t+r) − b x(t+r)`.
    pub fn characteristic(a: f64, b: f64, r: f64) -> Self {
        Self {
            terms: vec![
                ExpPolyTerm::new(1.0, 2, 0.0),
                ExpPolyTerm::new(-a, 1, r),
                ExpPolyTerm::new(-b, 0, r),
            ],
        }
    }

    pub fn terms(&self) -> &[ExpPolyTerm] {
        &self.terms
    }

    /// Value at `z`. Overflow propagates as infinities; see [`Self::try_eval`].
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * z.powu(t.power) * (t.shift * z).exp())
            .sum()
    }

    /// Term-wise derivative `Σ c·(p·λ^{p−1} + s·λ^p)·e^{sλ}` at `z`.
    pub fn eval_d(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let e = (t.shift * z).exp();
                let mut d = t.shift * z.powu(t.power);
                if t.power > 0 {
                    d += f64::from(t.power) * z.powu(t.power - 1);
                }
                t.coeff * d * e
            })
            .sum()
    }

    /// [`Self::eval`], reporting overflow instead of returning infinities.
    pub fn try_eval(&self, z: Complex64) -> Result<Complex64> {
        let v = self.eval(z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { re: z.re, im: z.im })
        }
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * x.powi(t.power as i32) * (t.shift * x).exp())
            .sum()
    }

    /// Sum of term magnitudes at `z`; the natural yardstick for residuals.
    pub fn scale(&self, z: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.abs() * z.norm().powi(t.power as i32) * (t.shift * z.re).exp())
            .sum()
    }
}

/// Roots `(λ₁, λ₂)` of `λ² − aλ − b`, with `λ₁ > 0 > λ₂`.
pub fn roots_nodelay(a: f64, b: f64) -> Result<(f64, f64)> {
    check_ab(a, b)?;
    let disc = (a * a + 4.0 * b).sqrt();
    Ok(((a + disc) / 2.0, (a - disc) / 2.0))
}

/// `λ₁(aλ₁ + b)/√(a² + 4b)`: the slope `dη₁/dr` of the right root at `r = 0`.
pub fn root_slope_limit(a: f64, b: f64) -> Result<f64> {
    let (l1, _) = roots_nodelay(a, b)?;
    Ok(l1 * (a * l1 + b) / (a * a + 4.0 * b).sqrt())
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a == 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!("requires a != 0 and b > 0 (got a = {a}, b = {b})")));
    }
    Ok(())
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) {
            return Err(Error::Domain(format!(
                "degenerate rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Corners in counter-clockwise order starting at the lower-left.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

const WINDING_CHANGE_TOL: f64 = 1e-3;
const BOUNDARY_REL_TOL: f64 = 1e-9;
const MAX_EDGE_PANELS: usize = 1 << 22;

/// Number of roots of `p` inside `rect`, counted with multiplicity, via
/// `(1/2πi)∮ P′/P dz`.
///
/// The boundary is first sampled at 64 points per unit length; the count is
/// rejected with [`Error::BoundaryRoot`] when `min |P|` there falls below
/// `max(tol, 1e-9·max |P|)`. Each edge is then integrated by trapezoid rules
/// that double until the edge contribution to the count moves by less than
/// `1e-3`.
pub fn winding_count(p: &ExponentialPolynomial, rect: &Rectangle, tol: f64) -> Result<i64> {
    let corners = rect.corners();
    let edges: Vec<(Complex64, Complex64)> = (0..4).map(|k| (corners[k], corners[(k + 1) % 4])).collect();

    // Boundary screening.
    let samples: Vec<(f64, Complex64)> = edges
        .par_iter()
        .flat_map_iter(|&(za, zb)| {
            let len = (zb - za).norm();
            let n = ((64.0 * len).ceil() as usize).max(64);
            (0..n).map(move |k| {
                let z = za + (zb - za) * (k as f64 / n as f64);
                (p.eval(z).norm(), z)
            })
        })
        .collect();
    let max_abs = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let (min_abs, zmin) = samples
        .iter()
        .copied()
        .fold((f64::INFINITY, Complex64::new(0.0, 0.0)), |acc, s| if s.0 < acc.0 { s } else { acc });
    if !max_abs.is_finite() {
        return Err(Error::Overflow { re: zmin.re, im: zmin.im });
    }
    if min_abs < tol.max(BOUNDARY_REL_TOL * max_abs) {
        return Err(Error::BoundaryRoot {
            min_abs,
            re: zmin.re,
            im: zmin.im,
        });
    }

    let parts: Vec<Result<Complex64>> = edges.par_iter().map(|&(za, zb)| edge_log_derivative(p, za, zb)).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for part in parts {
        total += part?;
    }
    let value = (total / Complex64::new(0.0, 2.0 * PI)).re;
    let rounded = value.round();
    if (value - rounded).abs() > 0.25 {
        return Err(Error::NonIntegerWinding { value });
    }
    Ok(rounded as i64)
}

/// `∫ P′/P dz` along the segment `za → zb` by successively doubled trapezoid rules.
fn edge_log_derivative(p: &ExponentialPolynomial, za: Complex64, zb: Complex64) -> Result<Complex64> {
    let dz = zb - za;
    let f = |s: f64| {
        let z = za + dz * s;
        p.eval_d(z) / p.eval(z)
    };
    let mut n = ((64.0 * dz.norm()).ceil() as usize).max(64);
    let mut sum = (f(0.0) + f(1.0)) * 0.5;
    for k in 1..n {
        sum += f(k as f64 / n as f64);
    }
    let mut integral = sum * dz / n as f64;
    loop {
        if n >= MAX_EDGE_PANELS {
            return Err(Error::NonIntegerWinding {
                value: (integral / Complex64::new(0.0, 2.0 * PI)).re,
            });
        }
        let mids: Complex64 = (0..n).into_par_iter().map(|k| f((k as f64 + 0.5) / n as f64)).sum();
        sum += mids;
        n *= 2;
        let refined = sum * dz / n as f64;
        let change = (refined - integral).norm() / (2.0 * PI);
        integral = refined;
        if change < WINDING_CHANGE_TOL {
            return Ok(integral);
        }
    }
}

/// Largest value of `|α(iξ)| / |β(iξ)|` for `α(z) = (b + az)(1 − e^{rz})` and
/// `β(z) = z² − az − b`, over a dense grid on `[−ξ_max, ξ_max]` joined with an
/// analytic bound for `|ξ| > ξ_max`.
///
/// A value below one rules out characteristic roots on the imaginary axis.
pub fn imaginary_axis_margin(a: f64, b: f64, r: f64, xi_max: f64) -> Result<f64> {
    if b <= 0.0 || !b.is_finite() {
        return Err(Error::Domain(format!("requires b > 0 (got {b})")));
    }
    if !(xi_max > 0.0) {
        return Err(Error::Domain(format!("requires xi_max > 0 (got {xi_max})")));
    }
    let ratio = |xi: f64| {
        let z = Complex64::new(0.0, xi);
        let alpha = (b + a * z) * (1.0 - (r * z).exp());
        let beta = z * z - a * z - b;
        alpha.norm() / beta.norm()
    };
    // The ratio is even in ξ (real coefficients), so only ξ ≥ 0 is scanned.
    // The step resolves both the rational factor and the oscillation of sin(rξ/2).
    let h = (1e-3f64).min(0.05 / (r.abs() + 1e-12)).min(xi_max / 1000.0);
    let n = (xi_max / h).ceil() as usize;
    let grid_max = (0..=n)
        .into_par_iter()
        .map(|k| ratio((k as f64 * h).min(xi_max)))
        .reduce(|| 0.0, f64::max);
    // For |ξ| ≥ ξ_max: |1 − e^{irξ}| ≤ min(2, |r|ξ) and |β| ≥ ξ² + b.
    let tail_rational = 2.0 * (b + a.abs() * xi_max) / (xi_max * xi_max);
    let tail_linear = r.abs() * (b * b / (xi_max * xi_max) + a * a).sqrt();
    Ok(grid_max.max(tail_rational.min(tail_linear)))
}

const NEWTON_MAX_ITER: usize = 50;
const RESIDUAL_REL_TOL: f64 = 1e-12;
const REALNESS_TOL: f64 = 1e-12;
const MAX_HALVINGS: u32 = 24;

/// Follows a real root of the family `r ↦ P_r` from `r = 0` to `r_target`.
///
/// The parameter interval is split into `steps` equal increments; each step
/// runs Newton's method (complex arithmetic, real seed) from the previous
/// root, halving the increment when Newton fails to converge within 50
/// iterations. With `strip = Some((lo, hi))` every accepted iterate must keep
/// its real part inside `[lo, hi]`.
pub fn continue_root<F>(
    family: F,
    lambda_start: f64,
    r_target: f64,
    steps: usize,
    strip: Option<(f64, f64)>,
) -> Result<f64>
where
    F: Fn(f64) -> ExponentialPolynomial,
{
    if steps == 0 {
        return Err(Error::Domain("continuation needs at least one step".into()));
    }
    let p0 = family(0.0);
    let z0 = Complex64::new(lambda_start, 0.0);
    if p0.eval(z0).norm() > 1e-8 * p0.scale(z0).max(1.0) {
        return Err(Error::Domain(format!("{lambda_start} is not a root of the r = 0 member")));
    }
    if r_target == 0.0 {
        return Ok(lambda_start);
    }

    let full_step = r_target / steps as f64;
    let mut r = 0.0;
    let mut z = lambda_start;
    let mut step = full_step;
    let mut halvings = 0;
    while (r_target - r).abs() > 0.0 {
        let next_r = if (r_target - r).abs() <= step.abs() * (1.0 + 1e-12) {
            r_target
        } else {
            r + step
        };
        match newton(&family(next_r), z, strip, next_r) {
            Ok(root) => {
                z = root;
                r = next_r;
                if halvings > 0 {
                    halvings -= 1;
                    step *= 2.0;
                    if step.abs() > full_step.abs() {
                        step = full_step;
                    }
                }
            }
            Err(e) => {
                if halvings >= MAX_HALVINGS {
                    return Err(e);
                }
                halvings += 1;
                step /= 2.0;
            }
        }
    }

    let p = family(r_target);
    let zc = Complex64::new(z, 0.0);
    if p.eval(zc).norm() > RESIDUAL_REL_TOL * p.scale(zc) {
        return Err(Error::NewtonDivergence { r: r_target });
    }
    Ok(z)
}

/// Newton iteration for a real root of `p` from `seed`.
pub fn newton(p: &ExponentialPolynomial, seed: f64, strip: Option<(f64, f64)>, r: f64) -> Result<f64> {
    let mut z = Complex64::new(seed, 0.0);
    for _ in 0..NEWTON_MAX_ITER {
        let value = p.eval(z);
        let deriv = p.eval_d(z);
        if deriv.norm() == 0.0 || !deriv.norm().is_finite() {
            return Err(Error::NewtonDivergence { r });
        }
        let dz = value / deriv;
        z -= dz;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NewtonDivergence { r });
        }
        if let Some((lo, hi)) = strip {
            if z.re < lo || z.re > hi {
                return Err(Error::StripEscape {
                    r,
                    value: z.re,
                    lo,
                    hi,
                });
            }
        }
        let converged = dz.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0)
            || p.eval(z).norm() <= 0.25 * RESIDUAL_REL_TOL * p.scale(z);
        if converged {
            // Real coefficients and a real seed keep the iterate on the real axis.
            debug_assert!(z.im.abs() <= REALNESS_TOL * z.norm().max(1.0));
            if z.im.abs() > REALNESS_TOL * z.norm().max(1.0) {
                return Err(Error::NewtonDivergence { r });
            }
            return Ok(z.re);
        }
    }
    Err(Error::NewtonDivergence { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_quadratic_roots() {
        let p = ExponentialPolynomial::characteristic(1.0, 2.0, 0.0);
        assert!(p.eval(c(2.0, 0.0)).norm() < 1e-15);
        assert!(p.eval(c(-1.0, 0.0)).norm() < 1e-15);
        let q = ExponentialPolynomial::characteristic(1.0, 2.0, 0.1);
        assert_eq!(q.eval(c(0.0, 0.0)), c(-2.0, 0.0));
    }

    #[test]
    fn eval_d_matches_difference_quotient() {
        let p = ExponentialPolynomial::characteristic(2.5, 1.0, 0.3);
        let z = c(0.7, -1.3);
        let h = 1e-6;
        let fd = (p.eval(z + h) - p.eval(z - h)) / (2.0 * h);
        assert!((fd - p.eval_d(z)).norm() < 1e-7);
    }

    #[test]
    fn try_eval_reports_overflow() {
        let p = ExponentialPolynomial::characteristic(1.0, 2.0, 1.0);
        assert!(matches!(p.try_eval(c(1e4, 0.0)), Err(Error::Overflow { .. })));
    }

    #[test]
    fn empty_polynomial_rejected() {
        assert!(ExponentialPolynomial::new(vec![]).is_err());
    }

    #[test]
    fn nodelay_roots() {
        assert_eq!(roots_nodelay(1.0, 2.0).unwrap(), (2.0, -1.0));
        assert_eq!(roots_nodelay(3.0, 4.0).unwrap(), (4.0, -1.0));
        assert_eq!(roots_nodelay(-1.0, 2.0).unwrap(), (1.0, -2.0));
        assert!(roots_nodelay(0.0, 2.0).is_err());
        assert!(roots_nodelay(1.0, 0.0).is_err());
        assert!(roots_nodelay(1.0, -3.0).is_err());
    }

    #[test]
    fn slope_limits() {
        assert!((root_slope_limit(1.0, 2.0).unwrap() - 8.0 / 3.0).abs() < 1e-14);
        assert!((root_slope_limit(3.0, 4.0).unwrap() - 12.8).abs() < 1e-13);
        assert!((root_slope_limit(-1.0, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn winding_simple_quadratic() {
        let p = ExponentialPolynomial::characteristic(1.0, 2.0, 0.0);
        let right = Rectangle::new(0.1, 4.0, -5.0, 5.0).unwrap();
        let left = Rectangle::new(-5.0, -0.1, -5.0, 5.0).unwrap();
        assert_eq!(winding_count(&p, &right, 1e-12).unwrap(), 1);
        assert_eq!(winding_count(&p, &left, 1e-12).unwrap(), 1);
    }

    #[test]
    fn winding_rejects_boundary_root() {
        let p = ExponentialPolynomial::characteristic(1.0, 2.0, 0.0);
        let rect = Rectangle::new(2.0, 4.0, -1.0, 1.0).unwrap();
        assert!(matches!(winding_count(&p, &rect, 1e-12), Err(Error::BoundaryRoot { .. })));
    }

    #[test]
    fn margin_vanishes_without_delay() {
        assert_eq!(imaginary_axis_margin(1.0, 2.0, 0.0, 100.0).unwrap(), 0.0);
        assert!(imaginary_axis_margin(1.0, -1.0, 0.1, 100.0).is_err());
    }

    #[test]
    fn continuation_identity() {
        let fam = |r: f64| ExponentialPolynomial::characteristic(1.0, 2.0, r);
        assert_eq!(continue_root(fam, 2.0, 0.0, 16, None).unwrap(), 2.0);
    }

    #[test]
    fn continuation_rejects_non_root_start() {
        let fam = |r: f64| ExponentialPolynomial::characteristic(1.0, 2.0, r);
        assert!(continue_root(fam, 2.5, 0.01, 16, None).is_err());
    }

    #[test]
    fn continuation_strip_escape() {
        let fam = |r: f64| ExponentialPolynomial::characteristic(1.0, 2.0, r);
        let err = continue_root(fam, 2.0, 0.05, 4, Some((1.9, 2.05))).unwrap_err();
        assert!(matches!(err, Error::StripEscape { .. }), "{err:?}");
    }
}
