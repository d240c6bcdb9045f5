use thiserror::Error;

/// Errors raised while building scenarios or evaluating bounds.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate constellation: point {index} has zero magnitude")]
    DegenerateConstellation { index: usize },

    #[error("insufficient sensing resources: {what} = {value} (need at least 2)")]
    InsufficientResources { what: &'static str, value: usize },

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("target outside the array field of view (local angle {angle_rad:.6} rad)")]
    OutOfField { angle_rad: f64 },

    #[error("invalid bistatic range: r̄ = {bistatic_range} m must exceed baseline {baseline} m")]
    InvalidBistaticRange { bistatic_range: f64, baseline: f64 },

    #[error("velocity heading undefined for zero speed")]
    UndefinedHeading,

    #[error("nuisance block is singular; Schur complement undefined")]
    NuisanceBlockSingular,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("no contributing sensing link")]
    NoInformation,

    #[error("no feasible subset: every candidate yields a singular bound")]
    NoFeasibleSubset,

    #[error("oracle domain error: {0}")]
    OracleDomain(String),

    #[error("scenario: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
