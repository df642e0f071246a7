mod common;

use common::cosine_response;
use delay_waves::green::OperatorParams;
use delay_waves::grid::GridFunction;
use delay_waves::perron::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> OperatorParams {
    OperatorParams::unit(1.0, 2.0, 0.01).unwrap()
}

/// Sup error against the exact periodic response on `[−20, 20]`.
fn cosine_error(dt: f64) -> f64 {
    let p = params();
    let n = GridFunction::window_len(-60.0, 60.0, dt);
    let f = GridFunction::from_fn(-60.0, dt, n, f64::cos).unwrap();
    let x = apply_green(&p, &f).unwrap();
    let (ca, cb) = cosine_response(p.a, p.b, p.r);
    x.times()
        .zip(&x.values)
        .filter(|(t, _)| t.abs() <= 20.0)
        .map(|(t, v)| (v - (ca * t.cos() + cb * t.sin())).abs())
        .fold(0.0, f64::max)
}

#[test]
fn constant_forcing_gives_constant_solution() {
    let f = GridFunction::constant(-30.0, 0.01, 6001, 1.0).unwrap();
    let x = apply_green(&params(), &f).unwrap();
    assert!(x.values.iter().all(|v| (v + 0.5).abs() <= 1e-8));
    assert!((x.left_limit + 0.5).abs() <= 1e-8 && (x.right_limit + 0.5).abs() <= 1e-8);
}

#[test]
fn cosine_forcing_second_order() {
    let e1 = cosine_error(0.01);
    let e2 = cosine_error(0.005);
    let slope = (e1 / e2).log2();
    assert!(e1 <= 1e-4, "{e1}");
    assert!(e2 <= 2.5e-5, "{e2}");
    assert!(slope >= 1.8, "{slope}");
}

#[test]
fn solution_has_small_residual() {
    let p = params();
    let f = GridFunction::from_fn(-40.0, 0.01, 8001, |t| (0.7 * t).sin() + 0.3).unwrap();
    let x = apply_green(&p, &f).unwrap();
    let res = residual_between(&p, &x, &f, -20.0, 20.0).unwrap();
    assert!(res < 1e-3, "{res}");
}

#[test]
fn corrupted_solution_is_detected() {
    let p = params();
    let f = GridFunction::from_fn(-40.0, 0.01, 8001, |t| (0.7 * t).sin()).unwrap();
    let mut x = apply_green(&p, &f).unwrap();
    for (i, v) in x.values.iter_mut().enumerate() {
        *v += 0.1 * (i as f64 * 0.05).sin();
    }
    assert!(residual(&p, &x, &f).unwrap() > 0.1);
}

#[test]
fn coarse_grid_rejected_for_off_grid_delay() {
    let p = OperatorParams::unit(1.0, 2.0, 0.015).unwrap();
    let f = GridFunction::constant(0.0, 0.01, 100, 1.0).unwrap();
    let x = f.clone();
    assert!(matches!(residual(&p, &x, &f), Err(delay_waves::Error::GridTooCoarse { .. })));
}

fn random_forcing(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Clamped random walk.
    let mut v = Vec::with_capacity(n);
    let mut s: f64 = 0.0;
    for _ in 0..n {
        s = (s + rng.gen_range(-0.05..0.05)).clamp(-1.0, 1.0);
        v.push(s);
    }
    v
}

#[test]
fn order_reversal_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let kernel = GreenKernel::new(&params(), 0.01).unwrap();
    for _ in 0..20 {
        let n = 2001;
        let fv = random_forcing(&mut rng, n);
        let gv: Vec<f64> = fv.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
        let f = GridFunction::new(-10.0, 0.01, fv.clone(), fv[0], fv[n - 1]).unwrap();
        let g = GridFunction::new(-10.0, 0.01, gv.clone(), gv[0].max(fv[0]), gv[n - 1].max(fv[n - 1])).unwrap();
        let xf = kernel.apply(&f).unwrap();
        let xg = kernel.apply(&g).unwrap();
        for (a, b) in xf.values.iter().zip(&xg.values) {
            assert!(*a >= *b - 1e-10);
        }
    }
}

#[test]
fn grid_translation_commutes() {
    let p = params();
    let f = GridFunction::from_fn(-30.0, 0.01, 6001, |t| (t / 3.0).tanh()).unwrap();
    let x = apply_green(&p, &f).unwrap();
    let k = 37;
    let shifted = GridFunction::new(-30.0 - k as f64 * 0.01, 0.01, f.values.clone(), f.left_limit, f.right_limit).unwrap();
    let xs = apply_green(&p, &shifted).unwrap();
    for (a, b) in x.values.iter().zip(&xs.values) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn kernel_transform_is_the_inverse_symbol() {
    // Σ W_m e^{−ν m dt} → 1/P(ν) as the hat shrinks.
    let k = GreenKernel::new(&params(), 0.005).unwrap();
    for nu in [-0.5, 0.0, 0.8] {
        let p = nu * nu - (params().a * nu + params().b) * (params().r * nu).exp();
        let got = k.transform(nu).unwrap();
        assert!((got * p - 1.0).abs() < 1e-4, "{nu}: {}", got * p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linearity(alpha in -2.0f64..2.0, beta in -2.0f64..2.0, w in 0.1f64..2.0) {
        let kernel = GreenKernel::new(&params(), 0.02).unwrap();
        let f = GridFunction::from_fn(-20.0, 0.02, 2001, |t| (w * t).sin()).unwrap();
        let g = GridFunction::from_fn(-20.0, 0.02, 2001, |t| (t / 2.0).tanh()).unwrap();
        let lhs = kernel.apply(&f.combine(alpha, &g, beta).unwrap()).unwrap();
        let rhs = kernel.apply(&f).unwrap().combine(alpha, &kernel.apply(&g).unwrap(), beta).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn nonnegative_forcing_gives_nonpositive_solution(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kernel = GreenKernel::new(&params(), 0.02).unwrap();
        let v: Vec<f64> = (0..1001).map(|_| rng.gen_range(0.0..1.0)).collect();
        let f = GridFunction::new(-10.0, 0.02, v.clone(), v[0], v[1000]).unwrap();
        let x = kernel.apply(&f).unwrap();
        prop_assert!(x.values.iter().all(|x| *x <= 1e-15));
    }
}
