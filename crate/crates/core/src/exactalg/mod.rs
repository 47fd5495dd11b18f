//! Exact arithmetic: scalars over ℚ and 𝔽_p, dense matrices, and matrices
//! whose entries are affine forms in the coefficient variables `a₀..aₙ`.

mod field;
mod matrix;
mod mpoly;

pub use field::{
    is_negative, is_prime, parse_rational, Field, FieldElement, DEFAULT_TEST_PRIME, PRIME_LIMIT,
    SPECIALIZATION_PRIME,
};
pub use matrix::ExactMatrix;
pub use mpoly::{
    bareiss_echelon, det_fraction_free, fast_rank, kernel_over_function_field, rank_exact,
    rank_over_function_field, Exponents, FractionFreeEchelon, FunctionFieldKernel,
    LinearPolyMatrix, MPoly, RankMode,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("modulus {0} is not a prime below 2^31")]
    InvalidModulus(u64),
    #[error("denominator of `{0}` vanishes in characteristic {1}")]
    DenominatorVanishes(String, u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entries from different fields")]
    FieldMismatch,
    #[error("matrix is {0}x{1}, not square")]
    NotSquare(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("polynomial division is not exact")]
    InexactDivision,
}
