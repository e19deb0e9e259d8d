use thiserror::Error;

use crate::exprjet::ParseError;
use crate::lorentz::GeodesicPath;
use crate::reduction::OdeState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("domain error in `{what}` at point {point:?}")]
    Domain { what: String, point: Vec<f64> },

    #[error("degenerate metric at {point:?} (det = {det:e})")]
    DegenerateMetric { point: Vec<f64>, det: f64 },

    #[error("metric at base point {point:?} has signature (-{negative}, +{positive}), expected (-1, +{expected_positive})")]
    WrongSignature {
        point: Vec<f64>,
        negative: usize,
        positive: usize,
        expected_positive: usize,
    },

    #[error("zero vector has no causal character")]
    ZeroVector,

    #[error("normal form is singular at y = {y}: C = {c:e}")]
    SingularC { y: f64, c: f64 },

    #[error("axis identity `{which}` violated at y = {y}: residual {residual:e}")]
    IdentityViolation {
        which: String,
        y: f64,
        residual: f64,
    },

    #[error("direction is not light-like: g(v, v) = {norm:e}")]
    NotLightLike { norm: f64 },

    #[error("could not re-express the surface as a graph near {point:?}")]
    ReGraphFailure { point: Vec<f64> },

    #[error("geodesic integration broke down at t = {t}: {source}")]
    GeodesicBreakdown {
        t: f64,
        partial: Box<GeodesicPath>,
        source: Box<Error>,
    },

    #[error("reduced ODE integration broke down at y = {y}: {source}")]
    OdeBreakdown {
        y: f64,
        partial: Box<Vec<OdeState>>,
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn domain(what: impl Into<String>, point: &[f64]) -> Self {
        Error::Domain {
            what: what.into(),
            point: point.to_vec(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
