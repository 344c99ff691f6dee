use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point set is empty")]
    EmptySet,
    #[error("sample has {count} distinct point(s), at least 2 required")]
    DegenerateSample { count: usize },
    #[error("cutoff {cutoff} exceeds the admissible limit {limit}")]
    CutoffTooLarge { cutoff: f64, limit: f64 },
    #[error("shift of norm {shift} with guard {guard} does not fit in sample radius {radius}")]
    ShiftTooLarge { shift: f64, guard: f64, radius: f64 },
    #[error("point {index} has norm {norm}, outside sample radius {radius}")]
    PointOutsideSample { index: usize, norm: f64, radius: f64 },
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("lattice basis is singular (|det| = {det})")]
    SingularBasis { det: f64 },
    #[error("physical projection is not injective: integer vector {index:?} projects to 0")]
    ProjectionNotInjective { index: Vec<i64> },
    #[error("enumeration needs about {count} candidates, budget is {budget}")]
    EnumerationTooLarge { count: f64, budget: f64 },
    #[error("window shape {shape} is not supported in internal dimension {dim}")]
    UnsupportedShapeDim { shape: &'static str, dim: usize },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("substitution matrix is not primitive")]
    NotPrimitive,
    #[error("word length {len} exceeds budget {budget}")]
    WordTooLong { len: usize, budget: usize },
    #[error("invalid substitution rule: {0}")]
    InvalidRule(String),
    #[error("samples are incompatible: {0}")]
    IncompatibleSamples(String),
    #[error("inconsistent dimension: measure has {measure}, wave vector has {k}")]
    InconsistentDimension { measure: usize, k: usize },
    #[error("no interior maximum near the start point (boundary value {intensity} at {k:?})")]
    NoAscent { k: Vec<f64>, intensity: f64 },
    #[error("power iteration did not converge")]
    NotConverged,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Variant name, used by the command line front end in diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptySet => "EmptySet",
            Error::DegenerateSample { .. } => "DegenerateSample",
            Error::CutoffTooLarge { .. } => "CutoffTooLarge",
            Error::ShiftTooLarge { .. } => "ShiftTooLarge",
            Error::PointOutsideSample { .. } => "PointOutsideSample",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::SingularBasis { .. } => "SingularBasis",
            Error::ProjectionNotInjective { .. } => "ProjectionNotInjective",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::UnsupportedShapeDim { .. } => "UnsupportedShapeDim",
            Error::InvalidWindow(_) => "InvalidWindow",
            Error::NotPrimitive => "NotPrimitive",
            Error::WordTooLong { .. } => "WordTooLong",
            Error::InvalidRule(_) => "InvalidRule",
            Error::IncompatibleSamples(_) => "IncompatibleSamples",
            Error::InconsistentDimension { .. } => "InconsistentDimension",
            Error::NoAscent { .. } => "NoAscent",
            Error::NotConverged => "NotConverged",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
