mod common;

use common::{bisect, char_real};
use delay_waves::green::*;
use proptest::prelude::*;

#[test]
fn nodelay_values() {
    let e = std::f64::consts::E;
    assert!((green_nodelay(1.0, 2.0, 0.0).unwrap() + 1.0 / 3.0).abs() < 1e-15);
    assert!((green_nodelay(1.0, 2.0, 1.0).unwrap() + 1.0 / (3.0 * e)).abs() < 1e-15);
    assert!((green_nodelay(1.0, 2.0, -1.0).unwrap() + 1.0 / (3.0 * e * e)).abs() < 1e-15);
}

#[test]
fn quadrature_reproduces_closed_form() {
    let p = OperatorParams::unit(1.0, 2.0, 0.0).unwrap();
    let g = GreenFunction::new(&p).unwrap();
    for k in 0..200 {
        let t = -10.0 + 20.0 * k as f64 / 199.0;
        let q = g.quadrature(t, g.default_sigma(t)).unwrap();
        let exact = green_nodelay(1.0, 2.0, t).unwrap();
        assert!((q.value - exact).abs() <= 1e-8, "t={t}: {} vs {exact}", q.value);
        assert!(q.imag_residue.abs() < 1e-8);
    }
}

#[test]
fn principal_roots_match_bisection() {
    for (a, b, r) in [(1.0, 2.0, 0.05), (2.5, 1.0, 0.02), (3.0, 2.0, 0.01)] {
        let roots = principal_roots(&OperatorParams::unit(a, b, r).unwrap()).unwrap();
        let (l1, l2) = delay_waves::charpoly::roots_nodelay(a, b).unwrap();
        let e1 = bisect(|x| char_real(a, b, r, x), 1e-6, 2.0 * l1);
        let e2 = bisect(|x| char_real(a, b, r, x), 2.0 * l2, -1e-6);
        assert!((roots.eta1 - e1).abs() < 1e-11, "{} vs {e1}", roots.eta1);
        assert!((roots.eta2 - e2).abs() < 1e-11, "{} vs {e2}", roots.eta2);
    }
}

#[test]
fn residue_matches_independent_derivative() {
    let (a, b, r) = (2.5, 1.0, 0.02);
    let p = OperatorParams::unit(a, b, r).unwrap();
    let eta2 = bisect(|x| char_real(a, b, r, x), -2.0, -1e-6);
    // P′(λ) = 2λ − a e^{rλ} − r(aλ + b) e^{rλ}
    let dp = 2.0 * eta2 - a * (r * eta2).exp() - r * (a * eta2 + b) * (r * eta2).exp();
    for t in [0.1, 1.0, 5.0] {
        let g = green_residue(&p, t).unwrap();
        let expect = (eta2 * t).exp() / dp;
        assert!((g - expect).abs() <= 1e-10 * expect.abs());
    }
    assert!(green_residue(&p, 0.0).is_err());
}

#[test]
fn dual_path_agreement() {
    for (a, b, r) in [(1.0, 2.0, 0.05), (2.5, 1.0, 0.01), (3.0, 2.0, 0.02)] {
        let g = GreenFunction::new(&OperatorParams::unit(a, b, r).unwrap()).unwrap();
        for k in 1..=25 {
            let t = 0.4 * k as f64;
            let res = g.residue(t).unwrap();
            let q = g.quadrature(t, g.default_sigma(t)).unwrap().value;
            assert!(((q - res) / res).abs() <= 1e-6, "({a},{b},{r}) t={t}: {q} vs {res}");
        }
    }
}

#[test]
fn zero_delay_consistency() {
    // The delayed family collapses to the closed form as r → 0.
    let g0 = GreenFunction::new(&OperatorParams::unit(3.0, 2.0, 0.0).unwrap()).unwrap();
    let g1 = GreenFunction::new(&OperatorParams::unit(3.0, 2.0, 1e-7).unwrap()).unwrap();
    for t in [-3.0, -0.5, 0.5, 3.0] {
        let a = g0.quadrature(t, g0.default_sigma(t)).unwrap().value;
        let b = g1.quadrature(t, g1.default_sigma(t)).unwrap().value;
        assert!((a - b).abs() < 1e-6);
    }
}

/// The table satisfies `x″ − a x′(t+r) − b x(t+r) = 0` away from the
/// kinks at 0, −r and −2r that the stencils straddle, and the jump of
/// `G′` across 0 is one.
#[test]
fn table_solves_the_homogeneous_equation() {
    let (a, b, r, dt) = (2.5, 1.0, 0.02, 0.001);
    let table = green_table(&OperatorParams::unit(a, b, r).unwrap(), -5.0, 5.0, dt).unwrap();
    let v = &table.values;
    let idx = |t: f64| ((t + 5.0) / dt).round() as usize;
    let shift = (r / dt).round() as usize;
    let mut worst: f64 = 0.0;
    for i in 2..v.len() - shift - 2 {
        let t = -5.0 + i as f64 * dt;
        if (0..3).any(|k| (t + k as f64 * r).abs() < 3.0 * dt) {
            continue;
        }
        let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dt * dt);
        let d1s = (v[i + shift + 1] - v[i + shift - 1]) / (2.0 * dt);
        worst = worst.max((d2 - a * d1s - b * v[i + shift]).abs());
    }
    assert!(worst < 1e-4, "{worst}");
    let i0 = idx(0.0);
    let right = (-3.0 * v[i0] + 4.0 * v[i0 + 1] - v[i0 + 2]) / (2.0 * dt);
    let left = (3.0 * v[i0] - 4.0 * v[i0 - 1] + v[i0 - 2]) / (2.0 * dt);
    assert!((right - left - 1.0).abs() < 1e-4, "{}", right - left);
    // ∫G = −1/b; the unit kink at 0 costs the trapezoid rule h²/12.
    let h = 0.01;
    let wide = green_table(&OperatorParams::unit(a, b, r).unwrap(), -80.0, 80.0, h).unwrap();
    let integral: f64 = wide.values.iter().sum::<f64>() * h;
    assert!((integral + h * h / 12.0 + 1.0 / b).abs() < 1e-8, "{integral}");
}

#[test]
fn negativity_tables() {
    for (a, b) in [(2.5, 1.0), (3.0, 2.0)] {
        for r in [0.0, 0.005, 0.01, 0.02] {
            let t = green_table(&OperatorParams::unit(a, b, r).unwrap(), -30.0, 30.0, 0.01).unwrap();
            assert_eq!(t.values.len(), 6001);
            assert!(t.negativity_certified);
            assert!(t.values.iter().all(|g| *g < 0.0));
            assert!(t.max_value() < 0.0);
        }
    }
}

#[test]
fn envelope_rate_tracks_roots() {
    for (a, b, r) in [(2.5, 1.0, 0.01), (3.0, 2.0, 0.02)] {
        let t = green_table(&OperatorParams::unit(a, b, r).unwrap(), -30.0, 30.0, 0.01).unwrap();
        let slowest = t.eta.eta1.min(-t.eta.eta2);
        assert!(t.envelope.alpha >= 0.9 * slowest, "{} vs {slowest}", t.envelope.alpha);
        for (tt, g) in t.times().zip(&t.values) {
            assert!(g.abs() <= t.envelope.k0 * (-t.envelope.alpha * tt.abs()).exp() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn diffusion_rescaling() {
    // G_D(t) = G_1(t/√D)/√D for D x″ − a x′(t+r) − b x(t+r) with a, r scaled.
    let d: f64 = 4.0;
    let s = d.sqrt();
    let g1 = GreenFunction::new(&OperatorParams::unit(1.0, 2.0, 0.05).unwrap()).unwrap();
    let gd = GreenFunction::new(&OperatorParams::new(d, s, 2.0, 0.05 * s).unwrap()).unwrap();
    for t in [-2.0, -0.3, 0.4, 2.0] {
        let a = gd.quadrature(t, gd.default_sigma(t)).unwrap().value;
        let b = g1.quadrature(t / s, g1.default_sigma(t / s)).unwrap().value / s;
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn parameter_guards() {
    assert!(OperatorParams::unit(0.0, 1.0, 0.0).is_err());
    assert!(OperatorParams::unit(1.0, 0.0, 0.0).is_err());
    assert!(OperatorParams::unit(1.0, 1.0, -0.1).is_err());
    assert!(OperatorParams::new(0.0, 1.0, 1.0, 0.0).is_err());
    let g = GreenFunction::new(&OperatorParams::unit(1.0, 2.0, 0.0).unwrap()).unwrap();
    assert!(g.quadrature(-1.0, 5.0).is_err());
    assert!(g.quadrature(1.0, 5.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadrature_is_real_and_negative(a in 1.0f64..3.0, b in 0.5f64..2.0, r in 0.0f64..0.02, t in -5.0f64..5.0) {
        let g = GreenFunction::new(&OperatorParams::unit(a, b, r).unwrap()).unwrap();
        let q = g.quadrature(t, g.default_sigma(t)).unwrap();
        prop_assert!(q.imag_residue.abs() < 1e-8);
        prop_assert!(q.value < 0.0);
    }
}
