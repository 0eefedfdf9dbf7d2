use thiserror::Error;

/// Errors raised by the waveform, spectral, detection and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample rate {sample_rate} Hz is below the {required} Hz needed to represent the chirp sweep without aliasing")]
    Aliasing { sample_rate: f64, required: f64 },

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(f64, f64),

    #[error("time {t} s lies outside the waveform support [-{half} s, {half} s]")]
    OutsideSupport { t: f64, half: f64 },

    #[error("chirp rate is zero: a frequency error cannot be converted into a time shift")]
    ZeroChirpRate,

    #[error("search window is empty or outside the lag range")]
    EmptyWindow,

    #[error("contour reaches the grid boundary at {0}; enlarge the grid")]
    ContourExitsGrid(String),

    #[error("constraints are infeasible: {0}")]
    Infeasible(String),

    #[error("no paired peaks above threshold {threshold} (best joint metric {best})")]
    NotDetected { threshold: f64, best: f64 },

    #[error("mode/parameter mismatch: {0}")]
    ModeMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
