//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Root of `f` in `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `λ² − aλe^{rλ} − be^{rλ}` on the real line.
pub fn char_real(a: f64, b: f64, r: f64, x: f64) -> f64 {
    x * x - (a * x + b) * (r * x).exp()
}

/// Bounded solution of `x″ − a x′(t+r) − b x(t+r) = cos t`: `A cos t + B sin t`.
pub fn cosine_response(a: f64, b: f64, r: f64) -> (f64, f64) {
    // Substituting gives, per Fourier mode e^{it}, x̂ = 1/P(i) with
    // P(i) = −1 − (a i + b) e^{i r}.
    let (c, s) = (r.cos(), r.sin());
    let re = -1.0 - (b * c - a * s);
    let im = -(a * c + b * s);
    let den = re * re + im * im;
    (re / den, im / den)
}

/// Elapsed wall time of `f` in seconds with its value.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = std::time::Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}
