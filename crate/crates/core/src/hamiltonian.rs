//! Effective Hamiltonian of the long-range, long-time limit.
//!
//! `H(p)` is the eigenvalue of the velocity cell problem. For `p != 0` it is
//! defined through `Φ` (see [`crate::sphere::phi`]): with
//! `target = τ a |p| / (1 + τ)`,
//!
//! * if `Φ(1) <= target` (only possible for `n >= 4`), `H = 1/τ - a|p|`;
//! * otherwise `H = 1/τ - s a|p|` where `s > 1` solves `Φ(s) = target`.
//!
//! Closed forms exist for `n = 1, 2, 3`; everything else goes through the
//! root solve.

use crate::error::{domain, Error, Result};
use crate::extended::Extended;
use crate::optimize::bisect;
use crate::sphere::{phi, phi_offset, SphereDim};

pub const MAX_BISECTION_ITERATIONS: usize = 200;
const PHI_TOL: f64 = 1e-12;

/// Dimension, relaxation time and the derived transport speed `a = √(n/τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n: SphereDim,
    tau: f64,
    a: f64,
}

impl ModelParams {
    pub fn new(n: u32, tau: f64) -> Result<Self> {
        let n = SphereDim::new(n)?;
        if !(tau > 0.0) || !tau.is_finite() {
            return domain(format!("relaxation time must be positive and finite, got {tau}"));
        }
        Ok(ModelParams { n, tau, a: (n.as_f64() / tau).sqrt() })
    }

    pub fn dim(&self) -> SphereDim {
        self.n
    }

    pub fn n(&self) -> u32 {
        self.n.get()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Speed of pure transport `a_{n,τ}`.
    pub fn transport_speed(&self) -> f64 {
        self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Transport,
    Implicit,
    ClosedForm,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Transport => "transport_branch",
            Branch::Implicit => "implicit_branch",
            Branch::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianEval {
    pub p_norm: f64,
    pub value: f64,
    pub branch: Branch,
    /// `|Φ(s) - target|` at the root; zero for closed forms.
    pub residual: f64,
}

fn norm(p: &[f64]) -> Result<f64> {
    if p.iter().any(|x| !x.is_finite()) {
        return domain("momentum must be finite");
    }
    Ok(p.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// `H(p)` for a momentum vector of length `n`.
pub fn hamiltonian(params: &ModelParams, p: &[f64]) -> Result<HamiltonianEval> {
    if p.len() != params.n() as usize {
        return domain(format!("momentum has {} components, expected {}", p.len(), params.n()));
    }
    hamiltonian_radial(params, norm(p)?)
}

/// `H` as a function of `|p|`; closed forms for `n <= 3`.
pub fn hamiltonian_radial(params: &ModelParams, p_norm: f64) -> Result<HamiltonianEval> {
    if !(p_norm >= 0.0) || !p_norm.is_finite() {
        return domain(format!("|p| must be finite and nonnegative, got {p_norm}"));
    }
    let tau = params.tau;
    if p_norm == 0.0 {
        return Ok(HamiltonianEval { p_norm, value: -1.0, branch: Branch::ClosedForm, residual: 0.0 });
    }
    let value = match params.n() {
        1 => hamiltonian_1d(tau, p_norm),
        2 => hamiltonian_2d(tau, p_norm),
        3 => hamiltonian_3d(tau, p_norm),
        _ => return hamiltonian_implicit(params, p_norm),
    };
    Ok(HamiltonianEval { p_norm, value, branch: Branch::ClosedForm, residual: 0.0 })
}

/// Largest `|p|` on the implicit branch, `(1+τ)Φ(1)/(aτ)`; `None` when
/// `Φ(1) = ∞` (`n <= 3`).
pub fn transport_threshold(params: &ModelParams) -> Result<Option<f64>> {
    Ok(phi(params.n, 1.0)?
        .value
        .finite()
        .map(|phi1| (1.0 + params.tau) * phi1 / (params.a * params.tau)))
}

/// Branch selection plus root solve for `Φ(s) = τ a|p|/(1+τ)`, valid for
/// every `n`. At the threshold itself the transport branch is taken.
pub fn hamiltonian_implicit(params: &ModelParams, p_norm: f64) -> Result<HamiltonianEval> {
    if !(p_norm >= 0.0) || !p_norm.is_finite() {
        return domain(format!("|p| must be finite and nonnegative, got {p_norm}"));
    }
    let tau = params.tau;
    if p_norm == 0.0 {
        return Ok(HamiltonianEval { p_norm, value: -1.0, branch: Branch::Implicit, residual: 0.0 });
    }
    let ap = params.a * p_norm;
    let target = tau * ap / (1.0 + tau);

    if let Extended::Finite(phi1) = phi(params.n, 1.0)?.value {
        if phi1 <= target {
            return Ok(HamiltonianEval {
                p_norm,
                value: 1.0 / tau - ap,
                branch: Branch::Transport,
                residual: 0.0,
            });
        }
    }

    // Solve in sigma = s - 1 so that roots crowding s = 1 keep their
    // relative precision. Φ(1 + sigma) - target falls from a positive value
    // (or +∞) at sigma = 0 to -target as sigma -> ∞.
    let residual = |sigma: f64| -> Result<f64> {
        Ok(match phi_offset(params.n, sigma)?.0 {
            Extended::Finite(v) => v - target,
            _ => 1.0,
        })
    };
    let mut hi = 1.0;
    let mut grow = 0;
    while residual(hi)? >= 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 1100 {
            return Err(Error::NonConvergence { method: "root bracketing", iterations: grow });
        }
    }
    // Bisect down to the floating-point resolution of sigma; the α-width
    // a|p|·Δsigma then sits far below 1e-14·(1 + |α|).
    let root = bisect(residual, 0.0, hi, PHI_TOL, |sigma| 4.0 * f64::EPSILON * sigma, MAX_BISECTION_ITERATIONS)?;
    let s = 1.0 + root.x;
    Ok(HamiltonianEval {
        p_norm,
        value: 1.0 / tau - s * ap,
        branch: Branch::Implicit,
        residual: root.residual,
    })
}

/// `H(p) = (1-τ)/(2τ) - √(((1+τ)/(2τ))^2 + p^2/τ)` on the line.
pub fn hamiltonian_1d(tau: f64, p: f64) -> f64 {
    let half = (1.0 + tau) / (2.0 * tau);
    (1.0 - tau) / (2.0 * tau) - (half * half + p * p / tau).sqrt()
}

/// `H(p) = 1/τ - √(((1+τ)/τ)^2 + 2|p|^2/τ)` in the plane.
pub fn hamiltonian_2d(tau: f64, p_norm: f64) -> f64 {
    let k = (1.0 + tau) / tau;
    1.0 / tau - (k * k + 2.0 * p_norm * p_norm / tau).sqrt()
}

/// `H(p) = 1/τ - (√3 |p|/√τ) coth(√(3τ)|p|/(1+τ))` in space.
pub fn hamiltonian_3d(tau: f64, p_norm: f64) -> f64 {
    let c = (3.0 * tau).sqrt() / (1.0 + tau);
    let x = c * p_norm;
    // |p| coth(c|p|), with the series (1 + x²/3 - x⁴/45)/c near zero.
    let p_coth = if x < 1e-4 {
        let x2 = x * x;
        (1.0 + x2 / 3.0 - x2 * x2 / 45.0) / c
    } else {
        p_norm / x.tanh()
    };
    1.0 / tau - (3.0 / tau).sqrt() * p_coth
}

/// `|H^τ(p) + |p|² + 1|` for each relaxation time in `taus`.
pub fn hydro_limit_residual(n: SphereDim, p: &[f64], taus: &[f64]) -> Result<Vec<f64>> {
    let p_norm = norm(p)?;
    taus.iter()
        .map(|&tau| {
            let params = ModelParams::new(n.get(), tau)?;
            let h = hamiltonian_radial(&params, p_norm)?.value;
            Ok((h + p_norm * p_norm + 1.0).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn params_validate() {
        assert!(ModelParams::new(0, 1.0).is_err());
        assert!(ModelParams::new(2, 0.0).is_err());
        assert!(ModelParams::new(2, f64::INFINITY).is_err());
        let p = ModelParams::new(3, 0.7).unwrap();
        let a = p.transport_speed();
        assert!((a * a * p.tau() - 3.0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn value_at_origin() {
        for n in 1..=5 {
            for tau in [0.1, 1.0, 7.0] {
                let params = ModelParams::new(n, tau).unwrap();
                let h = hamiltonian(&params, &vec![0.0; n as usize]).unwrap();
                assert_abs_diff_eq!(h.value, -1.0, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(hamiltonian_1d(4.0, 0.0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hamiltonian_2d(0.3, 0.0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hamiltonian_3d(1.0, 0.0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hamiltonian_3d(1.0, 1e-9), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(hamiltonian_1d(1.0, 1.0), -(2f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(hamiltonian_2d(1.0, 1.0), 1.0 - 6f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(hamiltonian_2d(2.0, 1.0), 0.5 - 3.25f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(hamiltonian_2d(1.0, 10.0), 1.0 - 204f64.sqrt(), epsilon = 1e-13);
        let e = 3f64.sqrt().exp();
        assert_abs_diff_eq!(hamiltonian_3d(1.0, 1.0), 1.0 - 3f64.sqrt() * (e + 1.0) / (e - 1.0), epsilon = 1e-14);
        let far = hamiltonian_3d(1.0, 20.0);
        let asym = 1.0 - 20.0 * 3f64.sqrt();
        assert!(((far - asym) / asym).abs() < 1e-6);
    }

    #[test]
    fn series_branch_is_continuous() {
        let c = 3f64.sqrt() / 2.0;
        let p0 = 1e-4 / c;
        let below = hamiltonian_3d(1.0, p0 * (1.0 - 1e-9));
        let above = hamiltonian_3d(1.0, p0 * (1.0 + 1e-9));
        assert_abs_diff_eq!(below, above, epsilon = 1e-12);
    }

    #[test]
    fn implicit_matches_closed_forms() {
        for n in 1..=3 {
            for tau in [0.25, 1.0, 4.0] {
                let params = ModelParams::new(n, tau).unwrap();
                for p in [0.1, 1.0, 5.0, 20.0] {
                    let closed = hamiltonian_radial(&params, p).unwrap().value;
                    let imp = hamiltonian_implicit(&params, p).unwrap();
                    assert_eq!(imp.branch, Branch::Implicit);
                    assert!(imp.residual <= 1e-12, "residual {} at n={n} tau={tau} p={p}", imp.residual);
                    assert_abs_diff_eq!(closed, imp.value, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn transport_branch_for_large_momentum() {
        let params = ModelParams::new(5, 1.0).unwrap();
        let thr = transport_threshold(&params).unwrap().unwrap();
        let p = 2.0 * thr;
        let h = hamiltonian_radial(&params, p).unwrap();
        assert_eq!(h.branch, Branch::Transport);
        assert_abs_diff_eq!(h.value, 1.0 - params.transport_speed() * p, epsilon = 1e-14);
        let inner = hamiltonian_radial(&params, 0.5 * thr).unwrap();
        assert_eq!(inner.branch, Branch::Implicit);
        assert!(inner.residual <= 1e-12);
    }

    #[test]
    fn no_threshold_in_low_dimensions() {
        for n in 1..=3 {
            assert!(transport_threshold(&ModelParams::new(n, 1.0).unwrap()).unwrap().is_none());
        }
    }

    #[test]
    fn rejects_bad_momentum() {
        let params = ModelParams::new(2, 1.0).unwrap();
        assert!(hamiltonian(&params, &[f64::NAN, 0.0]).is_err());
        assert!(hamiltonian(&params, &[1.0]).is_err());
    }

    #[test]
    fn hydro_residual_vanishes_at_origin() {
        let r = hydro_limit_residual(SphereDim::new(2).unwrap(), &[0.0, 0.0], &[1.0, 0.1, 1e-3]).unwrap();
        for v in r {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-13);
        }
    }
}
