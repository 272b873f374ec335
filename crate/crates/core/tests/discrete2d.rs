use kinfront::discrete2d::*;
use proptest::prelude::*;

#[test]
fn cone_collision_drives_probe_negative() {
    let r = negativity_probe(&ProbeConfig::new(8.0, 0.2, 0.6)).unwrap();
    assert!(r.min_value < -0.1, "{}", r.min_value);
    assert!(r.negative_steps >= 10);
    assert_eq!(r.pre_collision_min, 0.0);
    assert!(r.max_overlap_rho >= ProbeConfig::new(8.0, 0.2, 0.6).overlap_target());
}

#[test]
fn probe_is_untouched_before_collision() {
    let cfg = ProbeConfig::new(8.0, 0.2, 0.19);
    assert!(cfg.t_end < cfg.collision_time());
    let r = negativity_probe(&cfg).unwrap();
    assert_eq!(r.min_value, 0.0);
    assert!(r.trace.iter().all(|s| s.p_e2 == 0.0 && s.rho == 0.0));
}

#[test]
fn truncated_reaction_keeps_cone_data_nonnegative() {
    let mut cfg = ProbeConfig::new(8.0, 0.2, 0.6);
    cfg.reaction = Reaction::LogisticPlus;
    let r = negativity_probe(&cfg).unwrap();
    assert!(r.global_min >= -1e-12, "{}", r.global_min);
}

#[test]
fn per_velocity_reaction_keeps_cone_data_nonnegative() {
    let tau = 8.0;
    let g = Grid2D::new(161, 0.005, 1.0, transport_speed(tau)).unwrap();
    let mut s = init_cones(&g, tau).unwrap();
    for _ in 0..120 {
        step(&mut s, &g, Reaction::PerVelocity).unwrap();
        assert!(s.min_value().0 >= -1e-12);
    }
}

#[test]
fn overlap_too_weak_below_tau_five() {
    let r = negativity_probe(&ProbeConfig::new(4.5, 0.2, 0.6)).unwrap();
    assert!(r.min_value >= 0.0);
    assert!(r.max_overlap_rho < 1.0 + 1.0 / 4.5);
}

#[test]
fn cfl_violation_detected() {
    let g = Grid2D::new(21, 0.1, 1.0, transport_speed(8.0)).unwrap();
    let mut s = DiscreteKineticState2D::uniform(&g, 0.5, 2.0).unwrap();
    assert!(matches!(step_local(&mut s, &g), Err(kinfront::Error::Cfl { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn truncated_reaction_preserves_sign(
        data in prop::collection::vec(0.0f64..=2.0, 4 * 15 * 15),
        tau in prop::sample::select(vec![0.5, 2.0, 8.0]),
        cfl in 0.4f64..=1.0,
    ) {
        let g = Grid2D::new(15, 0.1, cfl, transport_speed(tau)).unwrap();
        let mut s = DiscreteKineticState2D::uniform(&g, 0.0, tau).unwrap();
        let m = g.n * g.n;
        s.p_e1.copy_from_slice(&data[..m]);
        s.p_e2.copy_from_slice(&data[m..2 * m]);
        s.p_me1.copy_from_slice(&data[2 * m..3 * m]);
        s.p_me2.copy_from_slice(&data[3 * m..]);
        for _ in 0..40 {
            step_nonlocal_plus(&mut s, &g).unwrap();
            prop_assert!(s.min_value().0 >= -1e-12);
        }
    }
}
