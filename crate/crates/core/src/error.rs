use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (deviation norm {0:e})")]
    NotHermitian(f64),

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("spectral correlation tensor at omega = {omega} is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositive { omega: f64, eigenvalue: f64 },

    #[error("spectral correlation tensor at omega = {omega} is not Hermitian (deviation {deviation:e})")]
    TensorNotHermitian { omega: f64, deviation: f64 },

    #[error("tensor has {tensor} channels but {couplings} coupling operators were given")]
    ChannelMismatch { tensor: usize, couplings: usize },

    #[error("no Lamb-shift coefficients present at omega = {0}")]
    MissingLambShift(f64),

    #[error("tensor contains a non-positive frequency entry (omega = {0}); apply the zero-temperature filter first")]
    UnfilteredTensor(f64),

    #[error("detailed balance violated (max deviation {0:e})")]
    DetailedBalance(f64),

    #[error("initial state spans {0} excitation sectors; split it and solve each sector separately")]
    MultipleSectors(usize),

    #[error("excitation sector label {0} is not a non-negative integer")]
    NonIntegerSector(f64),

    #[error("time grid must be non-empty, start at a finite time and strictly increase")]
    InvalidGrid,

    #[error("integration failed at t = {time}: {reason}")]
    StepUnderflow { time: f64, reason: String },

    #[error("jump probability per step {probability} exceeds 0.1 at t = {time}; reduce dt")]
    StepTooLarge { time: f64, probability: f64 },

    #[error("conditional state has vanishing norm ({0:e})")]
    VanishingNorm(f64),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
