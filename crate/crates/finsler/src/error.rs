use thiserror::Error;

use crate::jets::JetError;
use crate::metric::dsl::{EvalExprError, ParseError};

/// Toolkit-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("fiber vector must be nonzero")]
    ZeroFiber,
    #[error("tangent point has non-finite coordinates")]
    NonFinitePoint,
    #[error("point x = {x:?} is outside the metric domain")]
    OutsideDomain { x: [f64; 2] },
    #[error("non-positive F² value {value} (invalid Finsler function on this region)")]
    NonPositiveF2 { value: f64 },
    #[error("degenerate metric at point x = {x:?}, y = {y:?} (det g = {det})")]
    DegenerateMetric {
        det: f64,
        x: [f64; 2],
        y: [f64; 2],
    },
    #[error("degenerate frame at point (condition number {cond:.3e})")]
    DegenerateFrame { cond: f64 },
    #[error("frame decomposition residual {residual:.3e} too large (upstream bug: the identity is exact)")]
    FrameDecomposition { residual: f64 },
    #[error("main-scalar cross-check failed: bracket {bracket}, Cartan {cartan}")]
    InvariantCrossCheck { bracket: f64, cartan: f64 },
    #[error("non-finite value during metric evaluation")]
    NonFiniteEvaluation,
    #[error("unknown metric `{0}` (see `catalog`)")]
    UnknownMetric(String),
    #[error("unknown parameter `{0}` for this metric")]
    UnknownParameter(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown identifier `{0}` in metric expression")]
    UnknownIdentifier(String),
    #[error("metric definition error at line {line}: {message}")]
    MetricFile { line: usize, message: String },
    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),
    #[error("jet order {0} too small for this computation")]
    OrderTooSmall(usize),
    #[error("integration step size underflow")]
    StepUnderflow,
}

impl From<EvalExprError> for Error {
    fn from(e: EvalExprError) -> Self {
        match e {
            EvalExprError::UnknownIdentifier(name) => Error::UnknownIdentifier(name),
            EvalExprError::Jet(j) => Error::Jet(j),
        }
    }
}
