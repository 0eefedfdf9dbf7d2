//! Chirp waveform design and paired-peak frequency/timing synchronization.
//!
//! Units are SI throughout (s, Hz, Hz/s); [`units`] converts to the kHz/μs
//! display units used by the CLI and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chirp;
pub mod cli;
pub mod correlate;
pub mod dsp;
pub mod error;
pub mod montecarlo;
pub mod optimize;
pub mod profile;
pub mod signal;
pub mod spectral;
pub mod sync;
pub mod units;

pub use chirp::{synthesize_composite, synthesize_prototype, ChirpParams};
pub use error::{Error, Result};
pub use signal::ComplexSignal;
