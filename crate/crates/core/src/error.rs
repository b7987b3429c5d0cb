use thiserror::Error;

/// Errors raised by grid construction, operator evaluation and time stepping.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DvmError {
    #[error("invalid dimension {0}: only d = 2 and d = 3 are supported")]
    InvalidDimension(usize),

    #[error("truncation order violated: need 1 <= direction order ({direction_order}) <= kernel radius ({kernel_radius}) <= half nodes ({half_nodes})")]
    TruncationOrder {
        half_nodes: usize,
        kernel_radius: usize,
        direction_order: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gcd of an all-zero (or empty) list is undefined")]
    GcdAllZero,

    #[error("collision kernel is undefined at x = y = 0")]
    UndefinedAtOrigin,

    #[error("inverse transform left an imaginary residue {residue:e} above tolerance {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("direction order {direction_order} exceeds kernel radius {kernel_radius}")]
    DirectionOrderExceedsRadius {
        direction_order: usize,
        kernel_radius: usize,
    },

    #[error("precomputed tables were built for a different grid or model")]
    TablesGridMismatch,

    #[error("field lives on a different grid than the operator")]
    FieldGridMismatch,

    #[error("field contains a non-finite value at storage index {0}")]
    NonFiniteField(usize),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("zero denominator in relative error")]
    ZeroDenominator,

    #[error("malformed alpha-table dump: {0}")]
    MalformedDump(String),

    #[error("wall-clock budget of {budget_s} s exceeded")]
    BudgetExceeded { budget_s: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DvmError {
    fn from(e: std::io::Error) -> Self {
        DvmError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DvmError>;
