use thiserror::Error;

/// Errors produced by model construction, simulation and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duration must be nonnegative and finite, got {0}")]
    InvalidDuration(f64),

    #[error("cannot rewind clock from t = {current} to t = {requested}")]
    ClockRewind { current: f64, requested: f64 },

    #[error("patch index {index} out of range (n_patches = {n})")]
    PatchIndex { index: usize, n: usize },

    #[error("source and destination patch must differ (both are {0})")]
    SamePatch(usize),

    #[error("cannot move a zebra out of empty patch {0}")]
    EmptyPatch(usize),

    #[error("age must be nonnegative and finite, got {0}")]
    InvalidAge(f64),

    #[error("invalid rates: {0}")]
    InvalidRates(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("invalid world map: {0}")]
    InvalidMap(String),

    #[error("invalid movement parameters: {0}")]
    InvalidMovement(String),

    #[error("invalid calibration setup: {0}")]
    InvalidCalibration(String),

    #[error("point ({x}, {y}) lies outside the map bounds")]
    OutOfBounds { x: f64, y: f64 },

    #[error("mean-field derivative became non-finite at t = {t}; check rate magnitudes")]
    NonFiniteDerivative { t: f64 },

    #[error("trajectory grids or column layouts do not match: {0}")]
    GridMismatch(String),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("delivery rate needs t > 0, got {0}")]
    InvalidEvaluationTime(f64),

    #[error("population mismatch: state holds {actual}, caller declared {declared}")]
    PopulationMismatch { declared: u64, actual: u64 },

    #[error("row entry {value} at column {column} is not a valid population count")]
    NonIntegerPopulation { column: usize, value: f64 },

    #[error("malformed trajectory file, line {line}: {msg}")]
    TrajectoryFormat { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
