use thiserror::Error;

use crate::algebra::Theta;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("theta mismatch: {0:?} vs {1:?}")]
    ThetaMismatch(Theta, Theta),
    #[error("axis index {0} out of range 1..=3")]
    InvalidAxis(usize),
    #[error("pairs are not in the kernel of the one-form map; residual one-form {0}")]
    NotInKernel(String),
    #[error("pairs are not in the kernel of multiplication; sum of p_i q_i = {0}")]
    NotInMultiplicationKernel(String),
    #[error("element is not homogeneous (degrees {0:?})")]
    NotHomogeneous(Vec<i32>),
    #[error("fluctuation component A_{0} is not selfadjoint")]
    NotSelfadjoint(usize),
    #[error("fluctuation component A_{0} is not U(1)-invariant")]
    NotInvariant(usize),
    #[error("A_3 must vanish for this operation")]
    NonzeroA3,
    #[error("operator is not fibre-diagonal (off-fibre entry {0:e})")]
    NotFibreDiagonal(f64),
    #[error("operator is not hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("operands live on different windows")]
    WindowMismatch,
    #[error("window reflection does not preserve the spin lattice")]
    ReflectionMismatch,
    #[error("fibre {0} lies outside the window")]
    FibreOutOfRange(i32),
    #[error("power {power} does not match operator dimension {expected}")]
    PowerMismatch { power: u32, expected: u32 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
