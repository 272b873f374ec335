use approx::assert_abs_diff_eq;
use kinfront::telegraph::*;

/// RK4 for τρ'' + (1 - τ + 2τρ)ρ' = ρ(1-ρ).
fn damped_logistic(rho0: f64, tau: f64, t: f64, steps: usize) -> f64 {
    let f = |y: [f64; 2]| [y[1], (y[0] * (1.0 - y[0]) - (1.0 - tau + 2.0 * tau * y[0]) * y[1]) / tau];
    let h = t / steps as f64;
    let mut y = [rho0, 0.0];
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(add(y, k1, 0.5 * h));
        let k3 = f(add(y, k2, 0.5 * h));
        let k4 = f(add(y, k3, h));
        y = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    y[0]
}

#[test]
fn uniform_state_follows_damped_ode() {
    for tau in [0.5, 2.0] {
        for rho0 in [0.1, 0.6] {
            let g = TelegraphGrid::new(1, 11, 0.1).unwrap();
            let mut errs = Vec::new();
            for m in [200usize, 400] {
                let mut s = TelegraphState::at_rest(vec![rho0; g.len()], tau).unwrap();
                let dt = 2.0 / m as f64;
                for _ in 0..m {
                    step(&mut s, &g, dt).unwrap();
                }
                errs.push((s.rho[5] - damped_logistic(rho0, tau, 2.0, 20_000)).abs());
            }
            assert!(errs[1] < 1e-4, "{errs:?}");
            // second order in time
            assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
        }
    }
}

#[test]
fn wave_reference_matches_exact_center() {
    let bump = GaussianBump::new(0.1, 0.2).unwrap();
    let res = BumpResolution::default();
    let g = res.grid(2, &bump, 1.0, 1.0).unwrap();
    let dt = g.time_step(1.0, 0.5);
    let mut s = TelegraphState::at_rest(bump.sample(&g), 1.0).unwrap();
    let mut worst: f64 = 0.0;
    run(&mut s, &g, dt, 1.0, &Physics::wave(), |s| {
        let exact = wave_center_2d(&bump, 1.0, s.t).unwrap();
        worst = worst.max((s.rho[g.origin()] - exact).abs());
    })
    .unwrap();
    assert!(worst < 1e-3 * bump.epsilon, "{worst}");
    // The exact centre value changes sign.
    assert!(wave_center_2d(&bump, 1.0, 1.0).unwrap() < 0.0);
}

#[test]
fn damped_energy_does_not_increase() {
    let g = TelegraphGrid::new(2, 101, 0.05).unwrap();
    let bump = GaussianBump::new(0.3, 0.2).unwrap();
    for d in [0.0, 0.7] {
        let tau = 1.5;
        let dt = g.time_step(tau, 0.5);
        let physics = Physics { reaction: false, damping: Damping::Frozen(d) };
        let mut s = TelegraphState::at_rest(bump.sample(&g), tau).unwrap();
        let mut e = energy(&s, &g, dt);
        let e0 = e;
        for _ in 0..200 {
            step_with(&mut s, &g, dt, &physics).unwrap();
            let next = energy(&s, &g, dt);
            assert!(next <= e * (1.0 + 1e-12) + 1e-15, "{next} > {e}");
            e = next;
        }
        if d == 0.0 {
            assert_abs_diff_eq!(e, e0, epsilon = 1e-10 * e0);
        } else {
            assert!(e < 0.9 * e0);
        }
    }
}

#[test]
fn bump_stays_radially_symmetric() {
    let bump = GaussianBump::new(0.2, 0.2).unwrap();
    let res = BumpResolution::default();
    let tau = 1.0;
    let g = res.grid(2, &bump, tau, 0.6).unwrap();
    let dt = g.time_step(tau, 0.5);
    let mut s = TelegraphState::at_rest(bump.sample(&g), tau).unwrap();
    run(&mut s, &g, dt, 0.6, &Physics::default(), |_| {}).unwrap();
    let c = g.center();
    let at = |i: usize, j: usize| s.rho[(c + j) * g.n + c + i];
    // pairs of cells at the same distance from the origin
    for (a, b) in [((5, 0), (3, 4)), ((10, 0), (6, 8)), ((25, 0), (7, 24)), ((25, 0), (15, 20))] {
        let (u, v) = (at(a.0, a.1), at(b.0, b.1));
        assert!((u - v).abs() < 2e-3 * bump.epsilon, "{a:?} {u} vs {b:?} {v}");
    }
}

#[test]
fn zero_amplitude_stays_zero() {
    let bump = GaussianBump::new(0.0, 0.1).unwrap();
    let r = bump_run_2d(&bump, 1.0, 0.5, &BumpResolution::default()).unwrap();
    assert_eq!(r.min_rho, 0.0);
    assert!(!r.is_negative());
}

#[test]
fn one_dimensional_bounds() {
    let g = TelegraphGrid::covering(1, 30.0, 0.025).unwrap();
    for tau in [0.5, 1.0, 2.0, 4.0] {
        for (name, rho0) in canned_profiles_1d(&g) {
            let b = bound_check_1d(&rho0, &g, tau, 10.0, 0.5).unwrap();
            assert!(b.matched_min >= -1e-6 && b.matched_max <= 2.0 + 1e-6, "{name} tau {tau}: {b:?}");
            if tau <= 1.0 {
                assert!(b.min_rho >= -1e-6 && b.max_rho <= 2.0 + 1e-6, "{name} tau {tau}: {b:?}");
            }
            if tau == 0.5 {
                assert!(b.max_rho <= 1.0 + 1e-4, "{name}: {}", b.max_rho);
            }
        }
    }
}

#[test]
fn data_at_rest_goes_negative_above_tau_one() {
    // A narrow small bump at rest: the anti-damping 1 - τ < 0 drives the
    // centre below zero once the two pulses separate.
    let g = TelegraphGrid::covering(1, 30.0, 0.025).unwrap();
    let profiles = canned_profiles_1d(&g);
    let (_, rho0) = profiles.iter().find(|(n, _)| n == "bump_delta_0.05").unwrap();
    let b = bound_check_1d(rho0, &g, 2.0, 10.0, 0.5).unwrap();
    assert!(b.min_rho < -1e-4, "{b:?}");
    assert!(b.matched_min >= 0.0);
}

#[test]
fn one_dimensional_sweep_bumps_stay_nonnegative() {
    let tau = 1.0;
    for (eps, delta) in proof_scaled_pairs(&[0.05, 0.1, 0.2]) {
        let bump = GaussianBump::new(eps, delta).unwrap();
        let g = BumpResolution::default().grid(1, &bump, tau, 1.5).unwrap();
        let dt = g.time_step(tau, 0.5);
        let mut s = TelegraphState::at_rest(bump.sample(&g), tau).unwrap();
        let ext = run(&mut s, &g, dt, 1.5, &Physics::default(), |_| {}).unwrap();
        assert!(ext.overall_min().0 >= -1e-8, "{delta}: {:?}", ext.overall_min());
    }
}

#[test]
fn two_dimensional_bump_goes_negative() {
    let bump = GaussianBump::proof_scaled(0.2).unwrap();
    let r = bump_run_2d(&bump, 1.0, 1.0, &BumpResolution::default()).unwrap();
    assert!(r.is_negative(), "{} vs {}", r.min_rho, r.threshold);
}
