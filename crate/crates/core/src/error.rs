use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("division by an interval containing zero")]
    DivisionByZero,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid interval {0}")]
    InvalidInterval(String),

    #[error("linear enclosure failed: contraction bound {kappa} is not below 1")]
    NotDiagonallyDominated { kappa: f64 },

    #[error("leading coefficient of the differential equation vanishes at {point}")]
    SingularExpansionPoint { point: String },

    #[error("tail of the local series could not be dominated")]
    TailNotDominated,

    #[error("no admissible continuation path to {target}")]
    PathBlocked { target: String },

    #[error("box does not fit inside the convergence disk around its center")]
    BoxTooLarge,

    #[error("radius {r} is not below the convergence radius bound {bound}")]
    RadiusExceeded { r: String, bound: String },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_row(self, row: usize) -> Self {
        match self {
            Error::Row { .. } => self,
            other => Error::Row {
                row,
                source: Box::new(other),
            },
        }
    }

    /// The innermost error, skipping row tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Row { source, .. } => source.root(),
            other => other,
        }
    }

    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DivisionByZero => "DivisionByZero",
            Error::Domain(_) => "Domain",
            Error::InvalidInterval(_) => "InvalidInterval",
            Error::NotDiagonallyDominated { .. } => "NotDiagonallyDominated",
            Error::SingularExpansionPoint { .. } => "SingularExpansionPoint",
            Error::TailNotDominated => "TailNotDominated",
            Error::PathBlocked { .. } => "PathBlocked",
            Error::BoxTooLarge => "BoxTooLarge",
            Error::RadiusExceeded { .. } => "RadiusExceeded",
            Error::Parse { .. } => "Parse",
            Error::InvalidSystem(_) => "InvalidSystem",
            Error::Row { .. } => "Row",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
