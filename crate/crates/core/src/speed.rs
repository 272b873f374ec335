//! Propagation speed `c = -sup_p H(p)/|p|`, the concave dual
//! `L(q) = inf_p (q·p - H(p))`, and ball-shaped fronts.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::extended::Extended;
use crate::hamiltonian::{hamiltonian_radial, ModelParams};
use crate::optimize::{bisect, golden_max, golden_min};
use crate::sphere::SphereDim;

/// `|c - a|` below which a speed counts as hyperbolic.
pub const HYPERBOLIC_TOL: f64 = 1e-8;
const BRACKET_START: (f64, f64) = (1e-3, 10.0);
const BRACKET_CAP: f64 = 1e7;
const ASYMPTOTE_TOL: f64 = 1e-7;
const GOLDEN_TOL: f64 = 1e-12;
const GOLDEN_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedResult {
    pub c: f64,
    /// Maximizing `|p|`, or `PosInfinity` when the supremum is only
    /// approached as `|p| -> ∞`.
    pub p_star: Extended,
    pub a: f64,
    pub is_hyperbolic: bool,
}

/// The known closed forms: `n = 1` and `n = 2`.
pub fn closed_form_speed(n: u32, tau: f64) -> Option<f64> {
    match n {
        1 if tau <= 1.0 => Some(2.0 / (1.0 + tau)),
        1 => Some(1.0 / tau.sqrt()),
        2 => Some((2.0 * (2.0 + tau)).sqrt() / (1.0 + tau)),
        _ => None,
    }
}

/// Maximizes `H(p)/|p|` along a ray.
pub fn speed(params: &ModelParams) -> Result<SpeedResult> {
    let a = params.transport_speed();
    let objective = |p: f64| -> Result<f64> { Ok(hamiltonian_radial(params, p)?.value / p) };

    // Grow the bracket until an interior point beats the right end.
    let (mut lo, mut hi) = BRACKET_START;
    let mut bracketed = false;
    while hi <= BRACKET_CAP {
        let mid = lo + 0.381_966_011_250_105_1 * (hi - lo);
        if objective(mid)? > objective(hi)? {
            bracketed = true;
            break;
        }
        lo = mid;
        hi *= 4.0;
    }

    if !bracketed {
        // Still climbing at the cap: accept the supremum at infinity only if
        // the objective has settled onto its recession value -a.
        let near = objective(BRACKET_CAP / 10.0)?;
        let far = objective(BRACKET_CAP)?;
        if far < near - ASYMPTOTE_TOL || (far + a).abs() > ASYMPTOTE_TOL * (1.0 + a) {
            return Err(Error::NonConvergence { method: "speed bracket expansion", iterations: 0 });
        }
        return Ok(SpeedResult { c: a, p_star: Extended::PosInfinity, a, is_hyperbolic: true });
    }

    let best = golden_max(objective, lo, hi, GOLDEN_TOL, GOLDEN_MAX_ITER)?;
    let c = -best.value;
    Ok(SpeedResult {
        c,
        p_star: Extended::Finite(best.x),
        a,
        is_hyperbolic: (c - a).abs() <= HYPERBOLIC_TOL,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreEval {
    pub q: Vec<f64>,
    pub value: Extended,
}

/// Concave dual at a velocity vector `q` of length `n`.
pub fn legendre(params: &ModelParams, q: &[f64]) -> Result<LegendreEval> {
    if q.len() != params.n() as usize {
        return domain(format!("velocity has {} components, expected {}", q.len(), params.n()));
    }
    if q.iter().any(|x| !x.is_finite()) {
        return domain("velocity must be finite");
    }
    let q_norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(LegendreEval { q: q.to_vec(), value: legendre_radial(params, q_norm)? })
}

/// `L` as a function of `|q|`.
///
/// By isotropy the infimum is taken along `p = -r q/|q|`, leaving the convex
/// one-dimensional problem `inf_{r >= 0} (-|q| r - H(r))`. Since `-H(r)/r`
/// decreases to `a`, the infimum is `-∞` exactly when `|q| > a`.
pub fn legendre_radial(params: &ModelParams, q_norm: f64) -> Result<Extended> {
    if !(q_norm >= 0.0) || !q_norm.is_finite() {
        return domain(format!("|q| must be finite and nonnegative, got {q_norm}"));
    }
    let a = params.transport_speed();
    if q_norm > a {
        return Ok(Extended::NegInfinity);
    }
    let g = |r: f64| -> Result<f64> { Ok(-q_norm * r - hamiltonian_radial(params, r)?.value) };
    let g0 = g(0.0)?;
    // H is concave, so g is convex; widen until g turns upward.
    let mut hi = 1.0;
    let mut g_hi = g(hi)?;
    if g_hi >= g0 {
        let m = golden_min(g, 0.0, hi, GOLDEN_TOL, GOLDEN_MAX_ITER)?;
        return Ok(Extended::Finite(m.value.min(g0)));
    }
    loop {
        let next = hi * 4.0;
        let g_next = g(next)?;
        if g_next >= g_hi {
            let m = golden_min(g, 0.25 * hi, next, GOLDEN_TOL, GOLDEN_MAX_ITER)?;
            return Ok(Extended::Finite(m.value.min(g_hi)));
        }
        hi = next;
        g_hi = g_next;
        if hi > 1e15 {
            // |q| = a with a bounded gap -H(r) - a r: the infimum is a limit.
            return Ok(Extended::Finite(g_hi));
        }
    }
}

/// `n = 1` closed form of the dual.
pub fn legendre_1d_closed(tau: f64, q: f64) -> Extended {
    let disc = 1.0 - tau * q * q;
    if disc < 0.0 {
        return Extended::NegInfinity;
    }
    Extended::Finite(-(1.0 - tau) / (2.0 * tau) + (1.0 + tau) / (2.0 * tau) * disc.sqrt())
}

/// Boundary of `{q : L(q) < 0}` along a ray, located by bisection on the
/// sign of `L`.
pub fn negative_set_boundary(params: &ModelParams) -> Result<f64> {
    let sign = |q: f64| -> Result<f64> {
        Ok(match legendre_radial(params, q)? {
            Extended::Finite(v) if v >= 0.0 => 1.0,
            _ => -1.0,
        })
    };
    let hi = 2.0 * params.transport_speed() + 1.0;
    let root = bisect(sign, 0.0, hi, 0.0, |_| 1e-12, 200)?;
    Ok(root.x)
}

/// Radius at time `t` of the front issued from a ball of radius `r0`.
pub fn front_radius(params: &ModelParams, t: f64, r0: f64) -> Result<f64> {
    if !(t >= 0.0) || !(r0 >= 0.0) {
        return domain(format!("front_radius needs t >= 0 and r0 >= 0, got t = {t}, r0 = {r0}"));
    }
    Ok(r0 + speed(params)?.c * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub tau: f64,
    pub c: f64,
    pub a: f64,
    pub is_hyperbolic: bool,
}

/// Speed against transport speed across relaxation times.
pub fn phase_diagram(n: SphereDim, taus: &[f64]) -> Result<Vec<PhasePoint>> {
    taus.par_iter()
        .map(|&tau| {
            let params = ModelParams::new(n.get(), tau)?;
            let s = speed(&params)?;
            Ok(PhasePoint { tau, c: s.c, a: s.a, is_hyperbolic: s.is_hyperbolic })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(n: u32, tau: f64) -> ModelParams {
        ModelParams::new(n, tau).unwrap()
    }

    #[test]
    fn one_dimensional_speeds() {
        let s = speed(&params(1, 0.25)).unwrap();
        assert_abs_diff_eq!(s.c, 1.6, epsilon = 1e-10);
        assert!(!s.is_hyperbolic);
        let s = speed(&params(1, 4.0)).unwrap();
        assert_abs_diff_eq!(s.c, 0.5, epsilon = 1e-12);
        assert_eq!(s.p_star, Extended::PosInfinity);
        assert!(s.is_hyperbolic);
        let s = speed(&params(1, 1.0)).unwrap();
        assert_abs_diff_eq!(s.c, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn two_dimensional_speed() {
        let s = speed(&params(2, 2.0)).unwrap();
        assert_abs_diff_eq!(s.c, 8f64.sqrt() / 3.0, epsilon = 1e-10);
        // maximizer |p| = (1+τ)√(2+τ)/√2
        assert_abs_diff_eq!(s.p_star.to_f64(), 3.0 * 2f64.sqrt(), epsilon = 1e-5);
    }

    #[test]
    fn three_dimensional_speed_is_subsonic() {
        let s = speed(&params(3, 1.0)).unwrap();
        assert!(s.c < 3f64.sqrt() - 1e-3);
        assert!(s.p_star.is_finite());
    }

    #[test]
    fn dual_examples() {
        let p = params(1, 0.25);
        assert_abs_diff_eq!(legendre(&p, &[1.6]).unwrap().value.to_f64(), 0.0, epsilon = 1e-9);
        assert_eq!(legendre(&params(1, 4.0), &[1.0]).unwrap().value, Extended::NegInfinity);
        assert_abs_diff_eq!(legendre(&params(2, 1.0), &[0.0, 0.0]).unwrap().value.to_f64(), 1.0, epsilon = 1e-12);
        let c = speed(&params(2, 1.0)).unwrap().c;
        assert_abs_diff_eq!(legendre(&params(2, 1.0), &[c, 0.0]).unwrap().value.to_f64(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn dual_closed_form_n1() {
        for tau in [0.3, 1.0, 4.0] {
            let p = params(1, tau);
            let a = p.transport_speed();
            for k in 0..=20 {
                let q = a * f64::from(k) / 20.0 * 0.999;
                let num = legendre_radial(&p, q).unwrap().to_f64();
                let exact = legendre_1d_closed(tau, q).to_f64();
                assert_abs_diff_eq!(num, exact, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn negative_set_boundary_hyperbolic() {
        let b = negative_set_boundary(&params(1, 4.0)).unwrap();
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-6);
        let b = negative_set_boundary(&params(1, 0.25)).unwrap();
        assert_abs_diff_eq!(b, 1.6, epsilon = 1e-6);
    }

    #[test]
    fn front_radius_examples() {
        let p = params(2, 2.0);
        assert_abs_diff_eq!(front_radius(&p, 0.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(front_radius(&p, 3.0, 1.0).unwrap(), 1.0 + 8f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(front_radius(&params(1, 0.25), 10.0, 0.0).unwrap(), 16.0, epsilon = 1e-8);
        assert!(front_radius(&p, -1.0, 0.0).is_err());
    }

    #[test]
    fn phase_flags() {
        let d1 = phase_diagram(SphereDim::new(1).unwrap(), &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(d1.iter().map(|p| p.is_hyperbolic).collect::<Vec<_>>(), vec![false, true, true]);
        let d2 = phase_diagram(SphereDim::new(2).unwrap(), &[0.5, 4.0, 100.0]).unwrap();
        assert!(d2.iter().all(|p| !p.is_hyperbolic));
    }
}
