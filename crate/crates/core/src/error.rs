use thiserror::Error;

/// Errors raised while loading or validating an hourly power series.
#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: negative power {value} MW")]
    NegativePower { line: usize, value: f64 },
    #[error("line {line}: timestamp {found} is not one hour after {previous}")]
    Spacing {
        line: usize,
        previous: String,
        found: String,
    },
    #[error("series is empty")]
    Empty,
    #[error("hour {0} is outside 0..=23")]
    InvalidHour(u8),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from model evaluation, fitting, forecasting and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArmaError {
    #[error("series of length {len} is too short for ARMA({p},{q})")]
    TooShort { len: usize, p: usize, q: usize },
    #[error("series has zero variance")]
    ConstantSeries,
    #[error("AR polynomial is not stationary")]
    NonStationary,
    #[error("MA polynomial is not invertible")]
    NonInvertible,
    #[error("innovation variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("coefficient vector has wrong length: expected {expected}, got {found}")]
    CoefficientLength { expected: usize, found: usize },
    #[error("need {needed} lagged values, got {found}")]
    InsufficientHistory { needed: usize, found: usize },
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("optimizer failed for ARMA({p},{q}) after {restarts} starts")]
    OptimizerFailed { p: usize, q: usize, restarts: usize },
    #[error("state covariance could not be initialised")]
    Initialisation,
}

/// Errors from the statistical tests.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("need at least {needed} observations, got {found}")]
    TooShort { needed: usize, found: usize },
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("regression matrix is singular")]
    Singular,
    #[error("lag {lag} must exceed the number of fitted parameters {fitted}")]
    NonPositiveDof { lag: usize, fitted: usize },
    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),
}

/// Errors from per-hour model selection.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("hour {hour}: no observations")]
    EmptySlice { hour: u8 },
    #[error("hour {hour}: every candidate fit failed")]
    AllFitsFailed { hour: u8 },
    #[error("order grid is empty")]
    EmptyGrid,
}

/// Errors from scenario generation and quantile summaries.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("no fitted model for modeled hour {0}")]
    MissingModel(u8),
    #[error("scenario count must be at least {min}, got {found}")]
    TooFewScenarios { min: usize, found: usize },
    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),
    #[error(transparent)]
    Arma(#[from] ArmaError),
}

/// Errors from accuracy metrics and model comparison.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {actual} actual vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("empty input")]
    Empty,
    #[error("need {needed} prior observations, got {found}")]
    InsufficientHistory { needed: usize, found: usize },
    #[error("evaluation window is empty")]
    EmptyTestWindow,
    #[error("no model for hour {0}")]
    MissingModel(u8),
    #[error(transparent)]
    Arma(#[from] ArmaError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}
