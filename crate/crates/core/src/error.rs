//! Shared error type for the slope calculus library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Two slope vectors of different lengths were compared or concatenated
    /// where equal length is required.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// max/min of the empty type.
    #[error("empty type has no extremal slope")]
    EmptyType,

    /// Evaluation outside the polygon domain.
    #[error("argument {arg} outside the domain [0, {width}]")]
    OutOfDomain { arg: String, width: String },

    /// Exterior/symmetric power arity out of range, or a rescale length not
    /// divisible by the scale.
    #[error("bad arity: {0}")]
    BadArity(String),

    /// Polygons with different domains fed to an envelope.
    #[error("domain mismatch: widths {0} vs {1}")]
    DomainMismatch(String, String),

    /// Polygons with different endpoint values fed to an envelope.
    #[error("endpoint mismatch: {0} vs {1}")]
    EndpointMismatch(String, String),

    /// A chain that is not a chain of the poset, does not run from bottom to
    /// top, or carries non-decreasing jumps.
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    /// A poset failed its structural validation.
    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    /// The concave envelope has a breakpoint with zero or several
    /// incomparable realizers; the canonical filtration does not exist.
    #[error("no admissible filtration: breakpoint at rank {rank} has {realizers} realizer(s)")]
    NotAdmissible { rank: u32, realizers: usize },

    /// Division by an exact zero.
    #[error("division by zero")]
    DivisionByZero,

    /// A value is indistinguishable from zero at the working precision, or a
    /// pivot cannot be trusted at the declared truncation.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// Residue of an element of negative valuation.
    #[error("negative valuation {0}: no residue")]
    NegativeValuation(String),

    /// A reducible modulus or an unsupported field degree.
    #[error("bad field modulus: {0}")]
    BadModulus(String),

    /// Mixed coefficient fields, primes or Frobenius powers.
    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    /// Matrix shape violation.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A matrix that must be invertible over the fraction field is not.
    #[error("singular matrix")]
    Singular,

    /// Cokernel has a free part; no torsion invariant.
    #[error("presentation has a free quotient; not a torsion module")]
    NotTorsion,

    /// `t^n Φ` is not integral for the requested `n`.
    #[error("matrix not effective at n = {0}")]
    NotEffectiveAtN(i64),

    /// Guarded enumeration refused for size reasons.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// A trivialization failed verification (dependent columns or residual
    /// below tolerance).
    #[error("trivialization rejected: {0}")]
    TrivializationRejected(String),

    /// One lattice is not contained in the other where containment is
    /// required.
    #[error("lattice not contained: {0}")]
    NotContained(String),

    /// Text input rejected by the tokenizer or grammar.
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    /// Structurally valid text with inconsistent content (shapes, headers).
    #[error("schema error: {0}")]
    Schema(String),
}

impl Error {
    pub fn parse_at(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
