//! Quadratic-phase (chirp) prototype waveforms.
//!
//! A prototype is `x(t) = exp(jπ(αt² + βt))` restricted to `[-T/2, T/2)`.
//! Samples sit at the midpoints of `N = ⌊T·fs⌋` equal cells,
//! `tₙ = (n − (N−1)/2)/fs`, so the grid is symmetric under `t → −t`
//! and back-to-back waveforms concatenate without a gap or a repeated
//! endpoint.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ComplexSignal;

/// Shortest waveform accepted, in samples.
pub const MIN_SAMPLES: usize = 8;

/// The waveform triple ⟨α, β, T⟩ in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpParams {
    /// Chirp rate, Hz/s.
    pub alpha: f64,
    /// Linear-phase coefficient, Hz. The tone offset is β/2.
    pub beta: f64,
    /// Duration, s.
    pub duration: f64,
}

impl ChirpParams {
    pub fn new(alpha: f64, beta: f64, duration: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            duration,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha and beta must be finite (alpha={}, beta={})",
                self.alpha, self.beta
            )));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        Ok(())
    }

    /// ⟨−α, β, T⟩. With β = 0 the pair members are complex conjugates.
    pub fn conjugate_pair(&self) -> Self {
        Self {
            alpha: -self.alpha,
            ..*self
        }
    }

    pub fn with_duration(&self, duration: f64) -> Self {
        Self { duration, ..*self }
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..*self }
    }

    /// π(αt² + βt), evaluated from the closed form.
    pub fn phase_at(&self, t: f64) -> f64 {
        PI * (self.alpha * t * t + self.beta * t)
    }

    /// The unbounded waveform e^{jπ(αt²+βt)} at time `t`.
    pub fn value_at(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.phase_at(t))
    }

    /// αt + β/2 for `|t| ≤ T/2`.
    pub fn instantaneous_frequency(&self, t: f64) -> Result<f64> {
        let half = self.duration / 2.0;
        if !(t.abs() <= half) {
            return Err(Error::OutsideSupport { t, half });
        }
        Ok(self.alpha * t + self.beta / 2.0)
    }

    /// Minimum sample rate accepted for this waveform, 2·(|α|T + |β|).
    pub fn min_sample_rate(&self) -> f64 {
        2.0 * (self.alpha.abs() * self.duration + self.beta.abs())
    }

    /// ⌊T·fs⌋, tolerant of the rounding in products like 780e-6 × 1.6e6.
    pub fn sample_count(&self, sample_rate: f64) -> usize {
        let x = self.duration * sample_rate;
        (x + 1e-9 * x.max(1.0)).floor() as usize
    }

    fn check_sampling(&self, sample_rate: f64) -> Result<usize> {
        self.validate()?;
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        let required = self.min_sample_rate();
        if sample_rate < required {
            return Err(Error::Aliasing {
                sample_rate,
                required,
            });
        }
        let n = self.sample_count(sample_rate);
        if n < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "T·fs = {n} samples, need at least {MIN_SAMPLES}"
            )));
        }
        Ok(n)
    }
}

/// Time of sample `n` out of `len` on the centred grid.
pub fn grid_time(n: usize, len: usize, sample_rate: f64) -> f64 {
    (n as f64 - (len as f64 - 1.0) / 2.0) / sample_rate
}

/// Samples the time-bounded prototype on the centred grid.
pub fn synthesize_prototype(params: &ChirpParams, sample_rate: f64) -> Result<ComplexSignal> {
    let n = params.check_sampling(sample_rate)?;
    let samples = (0..n)
        .map(|k| params.value_at(grid_time(k, n, sample_rate)))
        .collect();
    ComplexSignal::new(samples, sample_rate, grid_time(0, n, sample_rate))
}

/// Up-chirp of length `sub_params.duration` immediately followed by its
/// conjugate pair; total length is twice the sub-waveform. The first half is
/// centred on t = 0, so the returned `t0` is that of the first sub-waveform.
pub fn synthesize_composite(sub_params: &ChirpParams, sample_rate: f64) -> Result<ComplexSignal> {
    let first = synthesize_prototype(sub_params, sample_rate)?;
    let second = synthesize_prototype(&sub_params.conjugate_pair(), sample_rate)?;
    let t0 = first.t0();
    let mut samples = first.into_samples();
    samples.extend_from_slice(second.samples());
    ComplexSignal::new(samples, sample_rate, t0)
}
