use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite component in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not trace-free (|tr| = {0:e})")]
    NotTraceFree(f64),

    #[error("matrix does not have unit determinant (|det - 1| = {0:e})")]
    NotUnimodular(f64),

    #[error("matrix is singular")]
    Singular,

    #[error("tangent vectors are based at different group elements")]
    BaseMismatch,

    #[error("chart point lies outside the chart domain")]
    OutsideDomain,

    #[error("metric is singular at the chart point (|det| = {0:e})")]
    SingularMetric(f64),

    #[error("degenerate plane (Gram determinant {0})")]
    DegeneratePlane(num_complex::Complex64),

    #[error("operation requires a holomorphic (complex) chart")]
    RealChart,

    #[error("sampling exhausted its redraw budget")]
    SampleExhausted,

    #[error("tangent frame construction failed: every remaining pivot is isotropic")]
    FrameConstruction,

    #[error("quadric point violates the constraint (residual {0:e})")]
    OffQuadric(f64),

    #[error("vector is isotropic; cannot be rescaled onto the quadric")]
    Isotropic,

    #[error("degenerate geodesic line: endpoints coincide")]
    DegenerateLine,

    #[error("point at infinity cannot be expressed in the {0} chart")]
    WrongChart(&'static str),

    #[error("point is not in the upper half-space (t = {0})")]
    NotInHalfSpace(f64),

    #[error("vector is not in the m-part of the Cartan decomposition (residual {0:e})")]
    NotInComplement(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
