use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("denominator is not strictly stable on the closed bidisk ({0})")]
    UnstableDenominator(String),
    #[error("p and its reflection share a common factor")]
    CommonFactor,
    #[error("grid size mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("numerator not divisible by z{var}: constant slice has size {residual:e}")]
    NonDivisible { var: usize, residual: f64 },
    #[error("Agler identity is inconsistent (residual {0:e})")]
    InfeasibleIdentity(f64),
    #[error("extremal kernel failed the quotient-order check (min eigenvalue {0:e})")]
    NotLoewnerMaximal(f64),
    #[error("model-space frame is empty")]
    DegenerateFrame,
    #[error("function is not in the model space (distance {0:e})")]
    NotInModelSpace(f64),
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("witnesses contradict the predicted verdict: {0}")]
    InconsistentVerdict(String),
    #[error("barrier iteration failed: {0}")]
    Solver(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
