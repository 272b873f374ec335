//! Bracketing root finder and golden-section search.

use crate::error::{Error, Result};

/// Result of a bracketing root search.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    /// `|f(x)|` at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops once `|f| <= f_tol` or the bracket is narrower than
/// `x_tol(midpoint)`.
pub fn bisect<F, T>(f: F, mut lo: f64, mut hi: f64, f_tol: f64, x_tol: T, max_iter: usize) -> Result<Root>
where
    F: Fn(f64) -> Result<f64>,
    T: Fn(f64) -> f64,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Root { x: lo, residual: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, residual: 0.0, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Domain(format!(
            "root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    for it in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid.abs() <= f_tol || (hi - lo).abs() <= x_tol(mid) || mid == lo || mid == hi {
            return Ok(Root { x: mid, residual: f_mid.abs(), iterations: it });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence { method: "bisection", iterations: max_iter })
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximum located by golden-section search.
#[derive(Debug, Clone, Copy)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, rel_tol: f64, max_iter: usize) -> Result<Extremum>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for it in 1..=max_iter {
        if (b - a).abs() <= rel_tol * (1.0 + 0.5 * (a + b).abs()) {
            let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            return Ok(Extremum { x, value, iterations: it });
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Err(Error::NonConvergence { method: "golden-section search", iterations: max_iter })
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
pub fn golden_min<F>(f: F, a: f64, b: f64, rel_tol: f64, max_iter: usize) -> Result<Extremum>
where
    F: Fn(f64) -> Result<f64>,
{
    let e = golden_max(|x| f(x).map(|v| -v), a, b, rel_tol, max_iter)?;
    Ok(Extremum { value: -e.value, ..e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 0.0, |_| 1e-15, 200).unwrap();
        assert_abs_diff_eq!(r.x, std::f64::consts::SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn bisection_requires_bracket() {
        assert!(bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 0.0, |_| 1e-12, 100).is_err());
    }

    #[test]
    fn bisection_reports_non_convergence() {
        let err = bisect(|x| Ok(x - 0.3), 0.0, 1.0, 0.0, |_| 0.0, 5).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn golden_section_on_parabola() {
        let e = golden_max(|x| Ok(-(x - 1.3).powi(2) + 4.0), 0.0, 10.0, 1e-12, 500).unwrap();
        assert_abs_diff_eq!(e.x, 1.3, epsilon = 1e-7);
        assert_abs_diff_eq!(e.value, 4.0, epsilon = 1e-14);
        let m = golden_min(|x| Ok((x + 2.0).powi(2)), -5.0, 5.0, 1e-12, 500).unwrap();
        assert_abs_diff_eq!(m.x, -2.0, epsilon = 1e-7);
    }
}
