use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field specification: {0}")]
    InvalidSpec(String),
    #[error("defining polynomial does not have distinct real roots only")]
    NotTotallyReal,
    #[error("integral basis is not closed under multiplication")]
    BasisNotClosed,
    #[error("discriminant mismatch: catalog says {expected}, computed {computed}")]
    DiscriminantMismatch { expected: String, computed: String },
    #[error("element does not belong to this field")]
    FieldMismatch,
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("element is not integral: {0}")]
    NotIntegral(String),
    #[error("enumeration budget of {limit} nodes exceeded")]
    BudgetExceeded { limit: u64 },
    #[error("element is not totally positive: {0}")]
    NotTotallyPositive(String),
    #[error("exhaustive scan modulo units is only available for quadratic fields")]
    UnitsUnavailable,
    #[error("operation requires a quadratic field")]
    NotQuadratic,
    #[error("element must be nonzero")]
    ZeroElement,
    #[error("operation requires |U+/U^2| = 2, but k = {k}")]
    RequiresKOne { k: usize },
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
    #[error("unit catalog inconsistent: {0}")]
    CatalogIncomplete(String),
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("form is not classical: {0}")]
    NotClassical(String),
    #[error("form is not totally positive definite")]
    NotPositiveDefinite,
    #[error("element is not represented by the form")]
    NotRepresented,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("halves (x+y)/2, (x-y)/2 are not integral")]
    NotIntegralHalves,
    #[error("no unimodular completion found for representing vector")]
    NoUnimodularCompletion,
    #[error("unknown field id `{0}`")]
    UnknownField(String),
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("catalog flags field as admitting a universal ternary, but rule {0} fired")]
    CatalogConflict(String),
}

impl Error {
    /// Stable machine-readable code used in JSON error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::NotTotallyReal => "NotTotallyReal",
            Error::BasisNotClosed => "BasisNotClosed",
            Error::DiscriminantMismatch { .. } => "DiscriminantMismatch",
            Error::FieldMismatch => "FieldMismatch",
            Error::Syntax(_) => "SyntaxError",
            Error::NotIntegral(_) => "NotIntegral",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::NotTotallyPositive(_) => "NotTotallyPositive",
            Error::UnitsUnavailable => "UnitsUnavailable",
            Error::NotQuadratic => "NotQuadratic",
            Error::ZeroElement => "ZeroElement",
            Error::RequiresKOne { .. } => "RequiresKOne",
            Error::HypothesisFailed(_) => "HypothesisFailed",
            Error::IterationLimit(_) => "IterationLimit",
            Error::CatalogIncomplete(_) => "CatalogIncomplete",
            Error::NotSymmetric => "NotSymmetric",
            Error::NotClassical(_) => "NotClassical",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::NotRepresented => "NotRepresented",
            Error::NotAUnit => "NotAUnit",
            Error::PreconditionFailed(_) => "PreconditionFailed",
            Error::NotIntegralHalves => "NotIntegralHalves",
            Error::NoUnimodularCompletion => "NoUnimodularCompletion",
            Error::UnknownField(_) => "UnknownField",
            Error::Catalog(_) => "CatalogError",
            Error::CatalogConflict(_) => "CatalogConflict",
        }
    }
}
