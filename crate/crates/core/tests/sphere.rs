use kinfront::sphere::*;
use kinfront::{Extended, SphereDim};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn dim(n: u32) -> SphereDim {
    SphereDim::new(n).unwrap()
}

/// Composite Simpson on the polar angle: the sphere average of g(v_1) is
/// ∫ g(cos θ) sin^{n-2} θ dθ / ∫ sin^{n-2} θ dθ.
fn polar_average(n: u32, g: impl Fn(f64) -> f64) -> f64 {
    let m = 40_000;
    let h = std::f64::consts::PI / m as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..=m {
        let th = k as f64 * h;
        let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        let jac = th.sin().powi(n as i32 - 2);
        num += w * g(th.cos()) * jac;
        den += w * jac;
    }
    num / den
}

#[test]
fn closed_forms_match_polar_oracle() {
    for n in [2, 3] {
        for s in [1.1, 2.0, 5.0, 50.0] {
            let v = phi(dim(n), s).unwrap().value.finite().unwrap();
            let want = polar_average(n, |c| 1.0 / (s + c));
            assert!((v - want).abs() <= 1e-9 * want.max(1.0), "n {n} s {s}: {v} vs {want}");
        }
    }
}

#[test]
fn quadrature_matches_polar_oracle_in_higher_dimensions() {
    for n in [4, 5, 7] {
        for s in [1.0, 1.3, 4.0] {
            for mu in [0.5, 1.0] {
                let v = phi_quadrature(dim(n), s, mu).unwrap();
                let want = polar_average(n, |c| (s + c).powf(-mu));
                assert!((v - want).abs() <= 1e-8 * want, "n {n} s {s} mu {mu}: {v} vs {want}");
            }
        }
    }
}

#[test]
fn closed_forms_agree_with_quadrature() {
    for n in [2, 3] {
        for s in [1.01, 1.5, 3.0, 20.0] {
            let closed = phi(dim(n), s).unwrap().value.finite().unwrap();
            let quad = phi_quadrature(dim(n), s, 1.0).unwrap();
            assert!((closed - quad).abs() <= 1e-9 * closed.max(1.0), "n {n} s {s}");
        }
    }
}

#[test]
fn divergence_flag_follows_the_exponent() {
    for n in 1..=7u32 {
        for k in 1..=8 {
            let mu = 0.5 * k as f64;
            let infinite = phi_power(dim(n), 1.0, mu).unwrap() == Extended::PosInfinity;
            assert_eq!(infinite, mu >= 0.5 * (n as f64 - 1.0), "n {n} mu {mu}");
        }
    }
}

#[test]
fn decays_like_one_over_s() {
    for n in 1..=6 {
        let v = phi(dim(n), 1e6).unwrap().value.finite().unwrap();
        assert!(v < 1e-5 && v > 0.0, "n {n}: {v}");
    }
}

#[test]
fn second_moment_matches_monte_carlo() {
    let n = 7usize;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let w = {
        let raw: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        raw.into_iter().map(|x| x / norm).collect::<Vec<_>>()
    };
    let samples = 1_000_000;
    let (mut sum, mut sum2) = (0.0, 0.0);
    let mut v = vec![0.0; n];
    for _ in 0..samples {
        for x in v.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / r;
        let f = n as f64 * dot * dot;
        sum += f;
        sum2 += f * f;
    }
    let mean = sum / samples as f64;
    let sigma = ((sum2 / samples as f64 - mean * mean) / samples as f64).sqrt();
    let exact = second_moment(dim(n as u32), &w).unwrap();
    assert!((exact - 1.0).abs() <= 1e-10);
    assert!((mean - exact).abs() <= 3.0 * sigma, "{mean} vs {exact} (sigma {sigma})");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strictly_decreasing(n in 1u32..=6, s in 1.0001f64..200.0, ds in 1e-3f64..10.0) {
        let a = phi(dim(n), s).unwrap().value.finite().unwrap();
        let b = phi(dim(n), s + ds).unwrap().value.finite().unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn second_moment_is_rotation_invariant(n in 1u32..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-6);
        let w: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let m = second_moment(dim(n), &w).unwrap();
        prop_assert!((m - 1.0).abs() <= 1e-10);
    }
}
