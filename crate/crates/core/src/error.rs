use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TentError {
    #[error("slope H must satisfy H >= 2, got {0}")]
    InvalidSlope(String),
    #[error("period {period} outside supported range {min}..={max}")]
    PeriodOutOfRange { period: u32, min: u32, max: u32 },
    #[error("offset c must satisfy |c| < 1, got {0}")]
    InvalidOffset(String),
    #[error("tau = {tau} does not divide T = {period}")]
    NotADivisor { tau: u32, period: u32 },
    #[error("malformed number `{0}`")]
    Parse(String),
    #[error("point {index} = {value} lies outside [0, 1]")]
    PointOutOfRange { index: usize, value: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, TentError>;
