use delay_waves::grid::GridFunction;
use delay_waves::models::*;
use delay_waves::waves::*;
use proptest::prelude::*;

const C: f64 = 2.5;
const TAU: f64 = 0.004;
const R: f64 = C * TAU;

fn grid() -> GridSpec {
    GridSpec {
        t_min: -30.0,
        t_max: 30.0,
        dt: 0.01,
        verify_tol: 1e-8,
    }
}

fn fisher_params(upper: FisherUpper) -> FisherParams {
    FisherParams {
        c: C,
        tau1: TAU,
        tau2: TAU,
        theta: 0.5,
        k: 2.0,
        upper,
    }
}

fn fisher_candidates(upper: FisherUpper) -> Candidates {
    fisher(&fisher_params(upper), &grid()).unwrap()
}

fn logistic_profile(scale: f64, amp: f64) -> Profile {
    let g = grid();
    Profile::from_fn(1, g.t_min, g.t_max, g.dt, &[(0.0, amp)], |_, t| amp / (1.0 + (-scale * t).exp())).unwrap()
}

#[test]
fn h_op_matches_closed_form() {
    let cand = fisher_candidates(FisherUpper::Undelayed);
    let (mu1, _) = fisher_mu(C).unwrap();
    let phi = |t: f64| 1.0 / (1.0 + 0.5 * (-mu1 * t).exp());
    // The upper solution at the origin.
    assert!((phi(0.0) - 2.0 / 3.0).abs() < 1e-15);
    let up = &cand.upper.components[0];
    assert!((up.eval(0.0) - 2.0 / 3.0).abs() < 1e-14);
    let h = h_op(&cand.model, &cand.upper).unwrap();
    // H(φ)(t) = φ(t + r1 − r2)(1 − φ(t + r1)) + φ(t + r1)
    for (j, t) in h[0].times().enumerate().step_by(97) {
        if t + R > 29.9 {
            break;
        }
        let expect = phi(t) * (1.0 - phi(t + R)) + phi(t + R);
        assert!((h[0].values[j] - expect).abs() < 1e-13, "t={t}");
    }
    let j = ((-R + 30.0) / 0.01_f64).round() as usize;
    assert!((h[0].values[j] - (phi(-R) / 3.0 + 2.0 / 3.0)).abs() < 1e-12);
    // Without the reaction delay H(φ̄)(−r1) = ⅔·⅓ + ⅔.
    let p = FisherParams { tau2: 0.0, ..fisher_params(FisherUpper::Undelayed) };
    let cand = fisher(&p, &grid()).unwrap();
    let h = h_op(&cand.model, &cand.upper).unwrap();
    assert!((h[0].values[j] - 8.0 / 9.0).abs() < 1e-12);
}

#[test]
fn equilibria_are_fixed_points() {
    let cand = fisher_candidates(FisherUpper::Neutral);
    let g = grid();
    for k in [0.0, 1.0] {
        let c = Profile::constant(&[k], g.t_min, g.t_max, g.dt).unwrap();
        let f = f_op(&cand.model, &c).unwrap();
        assert!(f.components[0].values.iter().all(|v| (v - k).abs() < 1e-12), "{k}");
    }
}

#[test]
fn fisher_upper_is_mapped_below_itself() {
    for upper in [FisherUpper::Undelayed, FisherUpper::Neutral] {
        let cand = fisher_candidates(upper);
        let f = f_op(&cand.model, &cand.upper).unwrap();
        assert!(f.first_excess_over(&cand.upper, 1e-10).is_none(), "{upper:?}");
        assert!(cand.lower.first_excess_over(&f, 1e-10).is_none(), "{upper:?}");
    }
}

#[test]
fn constant_half_is_not_an_upper_solution() {
    let cand = fisher_candidates(FisherUpper::Neutral);
    let g = grid();
    let half = Profile::constant(&[0.5], g.t_min, g.t_max, g.dt).unwrap();
    let rep = verify_upper(&cand.model, &half, &[], 1e-8).unwrap();
    assert!(!rep.passed);
    // f(½) = ¼ everywhere.
    assert!((rep.worst_value - 0.25).abs() < 1e-12);
    assert!(verify_lower(&cand.model, &half, &[], 1e-8).unwrap().passed);
}

#[test]
fn wave_expression_matches_difference_oracle() {
    let cand = fisher_candidates(FisherUpper::Neutral);
    let phi = logistic_profile(0.8, 1.0);
    let expr = wave_expression(&cand.model, &phi).unwrap();
    let g = &phi.components[0];
    let dt = g.dt;
    let shift = (R / dt).round() as usize;
    let mut checked = 0;
    for (j, e) in expr[0].iter().enumerate() {
        let Some(e) = e else { continue };
        if j < 2 || j + shift + 2 >= g.len() {
            continue;
        }
        let v = &g.values;
        let d2 = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (dt * dt);
        let d1 = (v[j + shift + 1] - v[j + shift - 1]) / (2.0 * dt);
        let f = v[j] * (1.0 - v[j + shift]);
        assert!((e - (d2 - C * d1 + f)).abs() < 1e-9);
        checked += 1;
    }
    assert!(checked > 5000);
    // A logistic ramp with the wrong steepness is not a wave.
    assert!(validate_wave(&cand.model, &phi).unwrap().residual > 1e-2);
}

#[test]
fn grid_shift_commutes_exactly() {
    let cand = fisher_candidates(FisherUpper::Neutral);
    let phi = logistic_profile(0.5, 1.0);
    let f = f_op(&cand.model, &phi).unwrap();
    for k in [1i32, 17, -40] {
        let moved = Profile::new(
            phi.components
                .iter()
                .map(|g| {
                    GridFunction::new(g.t0 - k as f64 * g.dt, g.dt, g.values.clone(), g.left_limit, g.right_limit)
                        .unwrap()
                })
                .collect(),
        )
        .unwrap();
        let fm = f_op(&cand.model, &moved).unwrap();
        assert_eq!(fm.components[0].values, f.components[0].values);
    }
}

#[test]
fn half_step_shift_commutes() {
    let cand = fisher_candidates(FisherUpper::Neutral);
    let phi = logistic_profile(0.5, 1.0);
    let h = 0.005;
    let a = f_op(&cand.model, &phi.shifted(h)).unwrap();
    let b = f_op(&cand.model, &phi).unwrap().shifted(h);
    let worst = a.components[0]
        .times()
        .zip(a.components[0].values.iter().zip(&b.components[0].values))
        .filter(|(t, _)| t.abs() <= 20.0)
        .map(|(_, (x, y))| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn bz_h_spot_check() {
    let p = BzParams {
        c: 3.0,
        b: 2.0,
        r: 0.25,
        tau1: 0.01 / 3.0,
        tau2: 0.01 / 3.0,
        k: 2.0,
        upper: BzUpper::Neutral,
    };
    let cand = bz(&p, &grid()).unwrap();
    let (r1, r2) = (cand.model.r1, cand.model.r2);
    let u = |t: f64| 0.9 / (1.0 + (-t).exp());
    let v = |t: f64| 0.8 / (1.0 + (-0.7 * t).exp());
    let g = grid();
    let phi = Profile::from_fn(2, g.t_min, g.t_max, g.dt, &[(0.0, 0.9), (0.0, 0.8)], |i, t| if i == 0 { u(t) } else { v(t) })
        .unwrap();
    let h = h_op(&cand.model, &phi).unwrap();
    let s = 1.0 - p.r;
    for t in [-3.0, -0.5, 0.0, 1.25, 4.0] {
        let j = ((t - g.t_min) / g.dt).round() as usize;
        let x = t + r1;
        let h1 = u(x) * (s - u(x) + p.r * v(x - r2)) + (1.0 + p.r) * u(x);
        let h2 = p.b * u(x) * (1.0 - v(x)) + p.b * v(x);
        assert!((h[0].values[j] - h1).abs() < 1e-12, "t={t}");
        assert!((h[1].values[j] - h2).abs() < 1e-12, "t={t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Quasi-monotonicity: ordered profiles give ordered `H` and ordered `F`.
    #[test]
    fn order_preserving(s1 in 0.3f64..2.0, gap in 0.0f64..0.3, shift in 0.0f64..2.0) {
        let cand = fisher_candidates(FisherUpper::Neutral);
        let g = grid();
        let lo = Profile::from_fn(1, g.t_min, g.t_max, g.dt, &[(0.0, 1.0 - gap)], |_, t| (1.0 - gap) / (1.0 + (-s1 * (t - shift)).exp())).unwrap();
        let hi = Profile::from_fn(1, g.t_min, g.t_max, g.dt, &[(0.0, 1.0)], |_, t| 1.0 / (1.0 + (-s1 * t).exp())).unwrap();
        prop_assume!(lo.first_excess_over(&hi, 0.0).is_none());
        let (hl, hh) = (h_op(&cand.model, &lo).unwrap(), h_op(&cand.model, &hi).unwrap());
        prop_assert!(hl[0].values.iter().zip(&hh[0].values).all(|(a, b)| *a <= *b + 1e-14));
        let (fl, fh) = (f_op(&cand.model, &lo).unwrap(), f_op(&cand.model, &hi).unwrap());
        prop_assert!(fl.first_excess_over(&fh, 1e-12).is_none());
    }

    /// Nondecreasing profiles between the equilibria map to nondecreasing profiles.
    #[test]
    fn preserves_monotone_profiles(s1 in 0.2f64..3.0, amp in 0.2f64..1.0) {
        let cand = fisher_candidates(FisherUpper::Neutral);
        let f = f_op(&cand.model, &logistic_profile(s1, amp)).unwrap();
        prop_assert!(f.min_forward_difference() >= -1e-12);
        let g = &f.components[0];
        prop_assert!(g.values.iter().all(|v| *v >= -1e-12 && *v <= 1.0 + 1e-12));
    }
}
