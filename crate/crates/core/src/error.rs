use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite kernel entry at node pair ({i}, {j})")]
    NonFiniteEntry { i: usize, j: usize },
    #[error("singular resolvent")]
    SingularResolvent,
    #[error("sigma pole on real line (mu = {0})")]
    SigmaPole(f64),
    #[error("principal value pole at {pole} lies on or outside the window [{lo}, {hi}]")]
    PoleOnBoundary { pole: f64, lo: f64, hi: f64 },
    #[error("cosecant kernel: sine argument within 1e-8 of a pole")]
    CscPole,
    #[error("contour under-resolved: imaginary residual {residual:.3e} exceeds {threshold:.1e}")]
    ContourUnderResolved { residual: f64, threshold: f64 },
    #[error("{module}: no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence {
        module: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("r = {r} outside the solved grid [{lo}, {hi}]")]
    OutsideGrid { r: f64, lo: f64, hi: f64 },
    #[error("window too small: event touched site {site} at the edge of [-{w}, {w}]")]
    WindowTooSmall { site: i64, w: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
