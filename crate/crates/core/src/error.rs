use std::path::PathBuf;

use crate::pvalue::Class;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("calibration set has no scores for class {0}")]
    EmptyCalibration(Class),

    #[error("level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),

    #[error("insufficient calibration scores: {required} required, {available} available")]
    InsufficientCalibration { required: usize, available: usize },

    #[error("score is not finite: {0}")]
    NonFiniteScore(f64),

    #[error("sample has zero variance")]
    DegenerateSample,

    #[error("sample too small: {needed} values needed, {given} given")]
    InsufficientSampleSize { needed: usize, given: usize },

    #[error("training set must contain both classes")]
    DegenerateLabels,

    #[error("training loss increased at epoch {epoch}: {previous} -> {current}")]
    TrainingDiverged {
        epoch: usize,
        previous: f64,
        current: f64,
    },

    #[error("infeasible moments: kurtosis {kurtosis} must exceed squared skewness {beta1} + 1 and variance must be positive")]
    InfeasibleMoments { beta1: f64, kurtosis: f64 },

    #[error("rejection sampler exceeded its budget of {0} proposals")]
    RejectionBudgetExceeded(usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("rate undefined: no objects of class {0}")]
    UndefinedRate(Class),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no null distribution for {test} at n = {n}")]
    MissingNullTable { test: &'static str, n: usize },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
