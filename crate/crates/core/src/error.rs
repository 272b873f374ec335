use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{method} did not converge after {iterations} iterations")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
    },

    #[error("CFL violated: dt = {dt:e} exceeds the limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("non-finite value in field `{field}` at cell {index} (t = {t})")]
    NotFinite {
        field: &'static str,
        index: usize,
        t: f64,
    },

    #[error("bound violated: {0}")]
    Bound(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    /// An experiment ended without reaching the regime it was set up to probe.
    #[error("unresolved experiment: {0}")]
    Unresolved(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
