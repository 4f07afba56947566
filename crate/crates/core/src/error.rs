use thiserror::Error;

/// Crate-wide error type. Variants are shared between the ring, form-ideal,
/// matrix and subgroup layers so results compose without wrapper noise.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed ring spec: {0}")]
    MalformedSpec(String),
    #[error("involution does not satisfy bar(bar(x)) = lambda * x * bar(lambda)")]
    InvalidSymmetry,
    #[error("mu does not satisfy mu = bar(mu) * lambda")]
    InvalidMu,
    #[error("lambda is not a unit")]
    NonUnitLambda,
    #[error("unsupported lambda exponent {0}")]
    UnsupportedExponent(i64),
    #[error("cannot parse ring element {0:?}")]
    ParseElement(String),
    #[error("element does not belong to this ring context")]
    ContextMismatch,
    #[error("generator lies outside delta_max")]
    GeneratorOutsideDeltaMax,
    #[error("generator lies outside omega_max")]
    GeneratorOutsideOmegaMax,
    #[error("closure escaped omega_max: the form parameter and ideal are inconsistent")]
    ClosureEscapesOmegaMax,
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("bad transvection indices ({0}, {1})")]
    BadIndices(i32, i32),
    #[error("element is not in the required twisted form parameter")]
    NotInParameter,
    #[error("precondition violated: {0}")]
    PreconditionViolated(&'static str),
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("closure budget exceeded (partial size {partial})")]
    BudgetExceeded { partial: usize },
    #[error("operation requires the packed two-element ring mode")]
    UnsupportedRing,
    #[error("group set is not closed under the required operations")]
    NotClosed,
    #[error("bad arguments: {0}")]
    BadArguments(&'static str),
    #[error("invalid lemma indices")]
    InvalidIndices,
    #[error("computed level is not an odd form ideal: {0}")]
    LevelNotFormIdeal(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
