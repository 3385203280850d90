use alloc::string::String;
use core::fmt;

/// Errors shared by all construction modules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A radicand must be nonnegative.
    NegativeRadicand,
    /// Square-free extraction gave up: the unfactored cofactor exceeds the
    /// factorization cap and is not a perfect square.
    RadicandTooLarge,
    /// Adaptive precision ran out before a sign was decided.  For canonical
    /// nonzero values this cannot happen; it indicates corrupted input.
    PrecisionExhausted,
    /// Index outside the laid-out / defined range of a sequence.
    IndexOutOfRange,
    /// Block layout would exceed the configured index budget.
    BlockBudgetExceeded { level: u32 },
    /// The requested certificate needs pair metadata that was not supplied.
    Unverifiable(String),
    /// Enumerating coordinates up to the stabilization point is infeasible.
    EnumerationTooLarge,
    /// Zero vector where a nonzero one is required.
    ZeroVector,
    /// Input rows are linearly dependent; the coefficients witness a
    /// vanishing combination.
    DependentRows { combination: alloc::vec::Vec<crate::exact::BigRat> },
    /// A tree has not been built deep enough for the request.
    DepthExhausted { needed: usize, built: usize },
    /// Parameter outside its admissible range.
    InvalidParam(String),
    /// Weak orthogonality violated: the named pair is non-orthogonal but
    /// carries a promise.
    WeakOrthogonalityViolated { alpha: u64, beta: u64 },
    /// No registered sequence is eligible as a norm-growth donor.
    NoEligibleDonor,
    /// The correction window could not be made consistent within the retry
    /// bound.
    WindowRetriesExhausted,
    /// Operation requires a sequence outside `l_2`.
    RequiresNotL2(String),
    /// Unknown registered-sequence id.
    UnknownSequence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NegativeRadicand => write!(f, "radicand must be nonnegative"),
            Error::RadicandTooLarge => write!(f, "radicand factorization cap exceeded"),
            Error::PrecisionExhausted => write!(f, "adaptive precision exhausted"),
            Error::IndexOutOfRange => write!(f, "index outside defined range"),
            Error::BlockBudgetExceeded { level } => {
                write!(f, "block budget exceeded at level {level}")
            }
            Error::Unverifiable(what) => write!(f, "unverifiable: {what}"),
            Error::EnumerationTooLarge => write!(f, "stabilization index too large to enumerate"),
            Error::ZeroVector => write!(f, "vector must be nonzero"),
            Error::DependentRows { .. } => write!(f, "rows are linearly dependent"),
            Error::DepthExhausted { needed, built } => {
                write!(f, "tree built to depth {built}, need {needed}")
            }
            Error::InvalidParam(what) => write!(f, "invalid parameter: {what}"),
            Error::WeakOrthogonalityViolated { alpha, beta } => {
                write!(f, "weak orthogonality violated by pair ({alpha}, {beta})")
            }
            Error::NoEligibleDonor => write!(f, "no eligible norm-growth donor registered"),
            Error::WindowRetriesExhausted => write!(f, "correction window retries exhausted"),
            Error::RequiresNotL2(id) => write!(f, "sequence {id} must lie outside l2"),
            Error::UnknownSequence(id) => write!(f, "unknown sequence id {id}"),
        }
    }
}
