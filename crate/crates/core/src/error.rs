use thiserror::Error;

/// Errors from dispersion models, solvers, and analysis pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_um} um outside validity window [{min_um}, {max_um}] um")]
    WavelengthOutOfWindow {
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },

    #[error("temperature {temperature_c} C outside supported range [{min_c}, {max_c}] C")]
    TemperatureOutOfRange {
        temperature_c: f64,
        min_c: f64,
        max_c: f64,
    },

    #[error("Sellmeier radicand is non-positive at {wavelength_um} um")]
    NonPositiveRadicand { wavelength_um: f64 },

    #[error("signal wavelength {signal_nm} nm does not exceed pump wavelength {pump_nm} nm")]
    NonPhysicalPair { pump_nm: f64, signal_nm: f64 },

    #[error("QPM order {order} must be an odd positive integer")]
    InvalidQpmOrder { order: u32 },

    #[error("invalid bracket [{low}, {high}]")]
    InvalidBracket { low: f64, high: f64 },

    #[error("step {step} must be positive")]
    NonPositiveStep { step: f64 },

    #[error("observation violates energy conservation by {mismatch_nm} nm (tolerance {tolerance_nm} nm)")]
    EnergyMismatch { mismatch_nm: f64, tolerance_nm: f64 },

    #[error("grating constant is degenerate (zero or negative)")]
    DegenerateGrating,

    #[error("no odd order pair within score threshold; best candidate ({}, {}) scored {score}", best.0, best.1)]
    NoOrderPair { best: (u32, u32), score: f64 },

    #[error("degenerate fit input: {0}")]
    DegenerateFit(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("histogram has no side region outside the coincidence window")]
    EmptyHistogramSide,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
