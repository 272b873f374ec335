//! Normalized sphere averages of `1/(s + v_1)^mu` and the second moment of
//! the uniform measure on `S^{n-1}`.
//!
//! For `n >= 2` the average over the sphere reduces to a single polar
//! integral `(1/I_{n-2}) ∫_0^π sin^{n-2}θ / (s + cos θ)^mu dθ`, where
//! `I_k = ∫_0^π sin^k θ dθ` is the Wallis integral. Substituting
//! `r = tan(θ/2)` turns this into an integral over `[0, ∞)` which is split
//! at `r = 1`; the piece on `[1, ∞)` is mapped back to `[0, 1]` by `r = 1/u`.

use crate::error::{domain, Result};
use crate::extended::Extended;
use crate::quadrature;

pub const QUAD_ABS_TOL: f64 = 1e-12;
pub const QUAD_REL_TOL: f64 = 1e-10;

/// Dimension of the ambient space; averages are taken over `S^{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SphereDim(u32);

impl SphereDim {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return domain("sphere dimension n must be at least 1");
        }
        Ok(SphereDim(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiMethod {
    ClosedForm1d,
    ClosedForm2d,
    ClosedForm3d,
    Quadrature,
}

impl PhiMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PhiMethod::ClosedForm1d => "closed_form_1d",
            PhiMethod::ClosedForm2d => "closed_form_2d",
            PhiMethod::ClosedForm3d => "closed_form_3d",
            PhiMethod::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEval {
    pub s: f64,
    pub value: Extended,
    pub method: PhiMethod,
}

/// Wallis integral `I_k = ∫_0^π sin^k θ dθ` from `I_0 = π`, `I_1 = 2` and
/// `I_k = (k-1)/k · I_{k-2}`.
pub fn wallis(k: u32) -> f64 {
    let mut value = if k % 2 == 0 { std::f64::consts::PI } else { 2.0 };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        value *= f64::from(j - 1) / f64::from(j);
        j += 2;
    }
    value
}

/// Normalization of the polar form of the sphere average, `ω_n = I_{n-2}`.
pub fn sphere_normalization(n: SphereDim) -> f64 {
    debug_assert!(n.get() >= 2);
    wallis(n.get() - 2)
}

/// `Φ(s) = ⨍_{S^{n-1}} dv / (s + v_1)`.
pub fn phi(n: SphereDim, s: f64) -> Result<PhiEval> {
    if !(s >= 1.0) || s.is_nan() {
        return domain(format!("phi requires s >= 1, got {s}"));
    }
    let (value, method) = phi_offset(n, s - 1.0)?;
    Ok(PhiEval { s, value, method })
}

/// `Φ(1 + sigma)` for `sigma >= 0`.
///
/// Passing the offset directly keeps full relative precision in `s - 1`,
/// which matters when `Φ` is large and `s` is within a few ulps of one.
pub fn phi_offset(n: SphereDim, sigma: f64) -> Result<(Extended, PhiMethod)> {
    if !(sigma >= 0.0) || sigma.is_nan() {
        return domain(format!("phi requires s - 1 >= 0, got {sigma}"));
    }
    let s = 1.0 + sigma;
    Ok(match n.get() {
        1 => {
            let v = if sigma == 0.0 {
                Extended::PosInfinity
            } else {
                Extended::Finite(s / (sigma * (2.0 + sigma)))
            };
            (v, PhiMethod::ClosedForm1d)
        }
        2 => {
            let v = if sigma == 0.0 {
                Extended::PosInfinity
            } else {
                Extended::Finite(1.0 / (sigma * (2.0 + sigma)).sqrt())
            };
            (v, PhiMethod::ClosedForm2d)
        }
        3 => {
            let v = if sigma == 0.0 {
                Extended::PosInfinity
            } else {
                // log((s+1)/(s-1)) = log1p(2/(s-1))
                Extended::Finite(0.5 * (2.0 / sigma).ln_1p())
            };
            (v, PhiMethod::ClosedForm3d)
        }
        _ => (Extended::Finite(phi_quadrature_offset(n, sigma, 1.0)?), PhiMethod::Quadrature),
    })
}

/// `⨍_{S^{n-1}} dv / (s + v_1)^mu`, infinite exactly when `s = 1` and
/// `mu >= (n-1)/2`.
pub fn phi_power(n: SphereDim, s: f64, mu: f64) -> Result<Extended> {
    if !(s >= 1.0) || s.is_nan() {
        return domain(format!("phi_power requires s >= 1, got {s}"));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return domain(format!("phi_power requires a finite mu > 0, got {mu}"));
    }
    if s == 1.0 && mu >= 0.5 * (n.as_f64() - 1.0) {
        return Ok(Extended::PosInfinity);
    }
    if n.get() == 1 {
        return Ok(Extended::Finite(0.5 * ((s + 1.0).powf(-mu) + (s - 1.0).powf(-mu))));
    }
    Ok(Extended::Finite(phi_quadrature(n, s, mu)?))
}

/// Quadrature of the `r = tan(θ/2)` form; requires `n >= 2` and a finite
/// value (`s > 1` or `mu < (n-1)/2`).
pub fn phi_quadrature(n: SphereDim, s: f64, mu: f64) -> Result<f64> {
    phi_quadrature_offset(n, s - 1.0, mu)
}

fn phi_quadrature_offset(n: SphereDim, sigma: f64, mu: f64) -> Result<f64> {
    let nn = n.get();
    if nn < 2 {
        return domain("the polar reduction needs n >= 2");
    }
    if !(sigma >= 0.0) {
        return domain(format!("s - 1 must be nonnegative, got {sigma}"));
    }
    if sigma == 0.0 && mu >= 0.5 * (n.as_f64() - 1.0) {
        return domain(format!("integral diverges at s = 1 for n = {nn}, mu = {mu}"));
    }
    let nf = n.as_f64();
    let sp = sigma + 2.0;
    let sm = sigma;
    let pref = 2f64.powf(nf - 1.0) / sphere_normalization(n);
    let expo = mu - nf + 1.0;
    let rpow = (nn - 2) as i32;

    // θ in [0, π/2]: r in [0, 1].
    let near = |r: f64| {
        let r2 = r * r;
        r.powi(rpow) * (1.0 + r2).powf(expo) / (sp + sm * r2).powf(mu)
    };
    // θ in [π/2, π]: r = 1/u, u in [0, 1].
    let far = |u: f64| {
        let u2 = u * u;
        u.powi(rpow) * (1.0 + u2).powf(expo) / (sp * u2 + sm).powf(mu)
    };
    let a = quadrature::integrate(near, 0.0, 1.0, QUAD_ABS_TOL, QUAD_REL_TOL)?;

    let b = if sm == 0.0 {
        // The far integrand behaves like u^beta at u = 0 with
        // beta = n - 2 - 2 mu > -1; the map u = w^m makes it bounded.
        let beta = nf - 2.0 - 2.0 * mu;
        let m = if beta < 0.0 { (1.0 / (beta + 1.0)).ceil() } else { 1.0 };
        let mapped = |w: f64| {
            if w == 0.0 {
                return if m * (beta + 1.0) - 1.0 > 0.0 { 0.0 } else { m * sp.powf(-mu) };
            }
            let u = w.powf(m);
            let u2 = u * u;
            // u^(n-2) / (sp u^2)^mu = u^beta / sp^mu
            m * w.powf(m * (beta + 1.0) - 1.0) * (1.0 + u2).powf(expo) / sp.powf(mu)
        };
        quadrature::integrate(mapped, 0.0, 1.0, QUAD_ABS_TOL, QUAD_REL_TOL)?
    } else {
        quadrature::integrate(far, 0.0, 1.0, QUAD_ABS_TOL, QUAD_REL_TOL)?
    };
    Ok(pref * (a.value + b.value))
}

/// `⨍_{S^{n-1}} n (v·w)^2 dv`, which equals `|w|^2`; `w` must be a unit
/// vector of length `n`.
pub fn second_moment(n: SphereDim, w: &[f64]) -> Result<f64> {
    let nn = n.get() as usize;
    if w.len() != nn {
        return domain(format!("direction has {} components, expected {nn}", w.len()));
    }
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    if !norm2.is_finite() || (norm2.sqrt() - 1.0).abs() > 1e-12 {
        return domain(format!("direction must be a unit vector, |w| = {}", norm2.sqrt()));
    }
    // ⨍ v_1^2 dv = 1 - I_n / I_{n-2} for n >= 2; on S^0, v_1^2 = 1.
    let axis_moment = if nn == 1 { 1.0 } else { 1.0 - wallis(n.get()) / wallis(n.get() - 2) };
    // By symmetry ⨍ (v·w)^2 = Σ w_i^2 ⨍ v_i^2.
    Ok(n.as_f64() * norm2 * axis_moment)
}
