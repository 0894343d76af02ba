//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Joint index outside `[0, N)`.
    #[error("joint index {index} out of range for {joints} joints")]
    JointIndex { index: usize, joints: usize },

    /// Cable geometry produced a negative radicand; the dimensional
    /// constants or inputs are outside the physically valid region.
    #[error("cable geometry invalid: negative radicand {radicand} at alpha={alpha} l={l}")]
    Geometry { radicand: f64, alpha: f64, l: f64 },

    /// A robot parameter set violates its invariants.
    #[error("invalid robot configuration: {0}")]
    Configuration(String),

    /// Terrain queried outside the span it covers.
    #[error("x = {x} m outside terrain extent [{min} m, {max} m]")]
    Extent { x: f64, min: f64, max: f64 },

    /// Rugose terrain generation could not satisfy the requested statistics.
    #[error("terrain generation failed: {0}")]
    Generation(String),

    /// A body exceeded the divergence velocity cap during integration.
    #[error("simulation diverged at step {step}: body {body} speed {speed:.3} m/s exceeds cap {cap} m/s")]
    Divergence {
        step: u64,
        body: usize,
        speed: f64,
        cap: f64,
    },

    /// A metric was asked of a trajectory that cannot support it.
    #[error("measurement error: {0}")]
    Measurement(String),

    /// Peristalsis ratio with a zero compression amplitude.
    #[error("peristalsis ratio undefined for delta_l = 0")]
    UndefinedRatio,

    /// Metric does not apply to the given terrain (e.g. climb on flat ground).
    #[error("metric not applicable: {0}")]
    InapplicableMetric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for this error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::JointIndex { .. } => "joint_index",
            Error::Geometry { .. } => "geometry",
            Error::Configuration(_) => "configuration",
            Error::Extent { .. } => "extent",
            Error::Generation(_) => "generation",
            Error::Divergence { .. } => "divergence",
            Error::Measurement(_) => "measurement",
            Error::UndefinedRatio => "undefined_ratio",
            Error::InapplicableMetric(_) => "inapplicable_metric",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
            Error::Csv { .. } => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
