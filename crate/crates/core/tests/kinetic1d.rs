use approx::assert_abs_diff_eq;
use kinfront::kinetic1d::*;
use proptest::prelude::*;

/// Classical RK4 for ρ' = ρ(1-ρ).
fn logistic_rk4(rho0: f64, t: f64, steps: usize) -> f64 {
    let f = |r: f64| r * (1.0 - r);
    let h = t / steps as f64;
    let mut r = rho0;
    for _ in 0..steps {
        let k1 = f(r);
        let k2 = f(r + 0.5 * h * k1);
        let k3 = f(r + 0.5 * h * k2);
        let k4 = f(r + h * k3);
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    r
}

#[test]
fn uniform_state_follows_logistic_ode() {
    let tau = 0.7;
    let g = Grid1D::for_tau(0.0, 1.0, 16, 0.9, tau).unwrap();
    for rho0 in [0.05, 0.3, 0.8] {
        let mut s = KineticState1D::from_density(&vec![rho0; g.nx], tau, 1.0).unwrap();
        let n = 400;
        for _ in 0..n {
            step(&mut s, &g, Nonlinearity::Logistic).unwrap();
        }
        let want = logistic_rk4(rho0, s.t, 20_000);
        for (a, b) in s.p_plus.iter().zip(&s.p_minus) {
            assert_abs_diff_eq!(*a, want, epsilon = 1e-12);
            assert_abs_diff_eq!(*b, want, epsilon = 1e-12);
        }
    }
}

#[test]
fn scaled_run_matches_unscaled_run() {
    let tau = 0.5;
    let eps = 0.1;
    let g1 = Grid1D::for_tau(-5.0, 15.0, 800, 0.8, tau).unwrap();
    let ge = Grid1D::for_tau(-5.0 * eps, 15.0 * eps, 800, 0.8, tau).unwrap();
    let rho0: Vec<f64> = g1.centers().iter().map(|&x| (-x * x).exp()).collect();
    let mut a = KineticState1D::from_density(&rho0, tau, 1.0).unwrap();
    let mut b = KineticState1D::from_density(&rho0, tau, eps).unwrap();
    for _ in 0..500 {
        step(&mut a, &g1, Nonlinearity::Logistic).unwrap();
        step(&mut b, &ge, Nonlinearity::Logistic).unwrap();
    }
    assert_abs_diff_eq!(b.t, eps * a.t, epsilon = 1e-12);
    for i in 0..g1.nx {
        assert_abs_diff_eq!(a.p_plus[i], b.p_plus[i], epsilon = 1e-12);
        assert_abs_diff_eq!(a.p_minus[i], b.p_minus[i], epsilon = 1e-12);
    }
}

#[test]
fn hyperbolic_front_has_no_tail() {
    let tau = 4.0;
    let g = Grid1D::for_tau(-5.0, 25.0, 1500, 1.0, tau).unwrap();
    let mut s = KineticState1D::indicator(&g, 0.0, tau, 1.0).unwrap();
    let trace = run_and_track(&mut s, &g, &TrackOptions::new(20.0)).unwrap();
    assert!((trace.fitted_speed - 0.5).abs() < 0.01, "{}", trace.fitted_speed);
    assert!(trace.gaps().iter().all(|&gap| gap.abs() < 0.1));
    assert!(trace.max_value <= upper_bound(tau) * (1.0 + 1e-6));
}

#[test]
fn small_domain_is_reported() {
    let g = Grid1D::for_tau(-5.0, 10.0, 600, 1.0, 1.0).unwrap();
    let mut s = KineticState1D::indicator(&g, 0.0, 1.0, 1.0).unwrap();
    let err = run_and_track(&mut s, &g, &TrackOptions::new(20.0)).unwrap_err();
    assert!(matches!(err, kinfront::Error::DomainTooSmall(_)));
}

fn nonlinearity() -> impl Strategy<Value = Nonlinearity> {
    prop_oneof![Just(Nonlinearity::Logistic), Just(Nonlinearity::LogisticPlus)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn densities_stay_within_a_priori_bounds(
        data in prop::collection::vec(0.0f64..=1.0, 64),
        tau in prop::sample::select(vec![0.5, 1.0, 4.0]),
        cfl in 0.3f64..=1.0,
        nl in nonlinearity(),
        steps in 1usize..400,
    ) {
        let g = Grid1D::for_tau(0.0, 6.4, data.len(), cfl, tau).unwrap();
        let mut s = KineticState1D::from_density(&data, tau, 1.0).unwrap();
        let bound = upper_bound(tau) * (1.0 + 1e-6);
        for _ in 0..steps {
            step(&mut s, &g, nl).unwrap();
            prop_assert!(s.min_value() >= -1e-12);
            prop_assert!(s.max_value() <= bound);
        }
    }

    #[test]
    fn kinetic_telegraph_stays_in_zero_two(
        data in prop::collection::vec(0.0f64..=1.0, 48),
        tau in prop::sample::select(vec![0.5, 1.0, 2.0, 4.0]),
    ) {
        let g = Grid1D::for_tau(0.0, 4.8, data.len(), 0.9, tau).unwrap();
        let run = telegraph_via_kinetic(&data, &g, tau, 3.0).unwrap();
        prop_assert!(run.min_rho >= -1e-8 && run.max_rho <= 2.0 + 1e-8);
    }
}
