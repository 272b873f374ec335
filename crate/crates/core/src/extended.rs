//! Extended real numbers with explicit infinite markers.

use std::cmp::Ordering;
use std::fmt;

/// A real number or one of the two infinities.
///
/// Infinities are kept as markers rather than as `f64::INFINITY` so that
/// callers branching on divergence never confuse a genuine overflow with
/// a mathematically infinite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy conversion for output; infinities map to the IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::NegInfinity => f64::NEG_INFINITY,
            Extended::Finite(v) => v,
            Extended::PosInfinity => f64::INFINITY,
        }
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        Extended::Finite(v)
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use Extended::*;
        match (self, other) {
            (NegInfinity, NegInfinity) | (PosInfinity, PosInfinity) => Some(Ordering::Equal),
            (NegInfinity, _) | (_, PosInfinity) => Some(Ordering::Less),
            (_, NegInfinity) | (PosInfinity, _) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInfinity => write!(f, "-inf"),
            Extended::Finite(v) => write!(f, "{v:.17e}"),
            Extended::PosInfinity => write!(f, "inf"),
        }
    }
}
