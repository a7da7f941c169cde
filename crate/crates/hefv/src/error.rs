use thiserror::Error;

/// Errors reported by the core library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A modulus smaller than 2 was supplied to a reduction.
    #[error("invalid modulus: must be at least 2")]
    InvalidModulus,

    /// Two operands were built over different rings or parameter sets.
    #[error("parameter mismatch between operands")]
    ParamMismatch,

    /// A parameter set violates one of its invariants.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter {
        field: &'static str,
        reason: String,
    },

    /// No parameter set inside the search bounds satisfies the request.
    #[error("no parameter set within search bounds satisfies the request (lambda={lambda}, depth={depth})")]
    InfeasibleRequest { lambda: u32, depth: u32 },

    /// The entropy source failed.
    #[error("randomness source failure")]
    Randomness,

    /// A 3-part ciphertext was passed where a 2-part one is required.
    #[error("operand has 3 parts and must be relinearised first")]
    UnrelinearisedOperand,

    /// Relinearisation was requested on a ciphertext that is already 2 parts.
    #[error("nothing to relinearise: ciphertext has {0} parts")]
    NothingToRelinearise(usize),

    /// A ciphertext with an invalid number of parts was constructed.
    #[error("ciphertext must have 2 or 3 parts, got {0}")]
    BadCiphertextLength(usize),

    /// The integer does not fit the encoding range of the ring.
    #[error("message magnitude {value} is not below 2^{max_bits}")]
    MessageTooLarge { value: String, max_bits: usize },

    /// The integer lies outside the symmetric range of the residue basis.
    #[error("value outside the (-M/2, M/2] range of the residue basis")]
    CrtOutOfRange,

    /// Residue basis moduli are not pairwise coprime.
    #[error("residue basis moduli are not pairwise coprime")]
    NonCoprimeModuli,

    /// The number of residues does not match the basis size.
    #[error("expected {expected} residues, got {got}")]
    ResidueCountMismatch { expected: usize, got: usize },

    /// Collection lengths differ where they must agree.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Matrix shapes are incompatible.
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    /// An index fell outside a collection.
    #[error("index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: usize, len: usize },

    /// An operation that needs at least one element received none.
    #[error("operation requires a non-empty input")]
    EmptyInput,
}

pub type Result<T> = std::result::Result<T, Error>;
