//! Matched-filter correlation, sub-sample peak location and the analytic
//! offset-to-shift and detection-loss model.
//!
//! The correlation at lag τ is `γ(τ) = Σₙ r(tₙ)·t*(tₙ − τ) / Σ|t|²`, i.e. the
//! template delayed by τ is matched against the received signal. A chirp
//! received with a frequency error Δf peaks at τ = −Δf/α.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use crate::units;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    /// Lag of each output, seconds, ascending and uniformly spaced.
    pub lags: Vec<f64>,
    /// |γ| at each lag.
    pub magnitudes: Vec<f64>,
    /// Template energy Σ|t|²/fs used for normalization.
    pub normalization_energy: f64,
    pub sample_rate: f64,
}

impl CorrelationResult {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn lag_step(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Fractional index of lag `t`.
    pub fn index_of(&self, t: f64) -> f64 {
        (t - self.lags[0]) * self.sample_rate
    }

    /// CSV `lag_us,magnitude`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "lag_us,magnitude")?;
        for (l, m) in self.lags.iter().zip(&self.magnitudes) {
            writeln!(w, "{:.6},{:.12}", units::us(*l), m)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_pair(received: &ComplexSignal, template: &ComplexSignal) -> Result<()> {
    if received.sample_rate() != template.sample_rate() {
        return Err(Error::SampleRateMismatch(
            received.sample_rate(),
            template.sample_rate(),
        ));
    }
    if template.len() > received.len() {
        return Err(Error::InvalidParameter(format!(
            "template ({} samples) is longer than the received signal ({} samples)",
            template.len(),
            received.len()
        )));
    }
    Ok(())
}

fn template_energy_sum(template: &ComplexSignal) -> Result<f64> {
    let e: f64 = template.samples().iter().map(|s| s.norm_sqr()).sum();
    if !(e > 0.0) {
        return Err(Error::InvalidParameter("template has zero energy".into()));
    }
    Ok(e)
}

fn padded_spectrum(x: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..x.len()].copy_from_slice(x);
    dsp::fft(&mut buf);
    buf
}

/// Lags −(Nt−1) … (Nr−1) read back from a circular correlation of length m.
fn unwrap_lags(
    circ: &[Complex64],
    received: &ComplexSignal,
    template: &ComplexSignal,
    energy_sum: f64,
) -> CorrelationResult {
    let (nr, nt) = (received.len(), template.len());
    let m = circ.len();
    let fs = received.sample_rate();
    let offset = received.t0() - template.t0();
    let count = nr + nt - 1;
    let mut lags = Vec::with_capacity(count);
    let mut magnitudes = Vec::with_capacity(count);
    for j in 0..count {
        let k = j as i64 - (nt as i64 - 1);
        let idx = k.rem_euclid(m as i64) as usize;
        lags.push(offset + k as f64 / fs);
        magnitudes.push(circ[idx].norm() / energy_sum);
    }
    CorrelationResult {
        lags,
        magnitudes,
        normalization_energy: energy_sum / fs,
        sample_rate: fs,
    }
}

fn fft_len(received: &ComplexSignal, template: &ComplexSignal) -> usize {
    (received.len() + template.len() - 1).next_power_of_two()
}

/// Normalized cross-correlation over every lag with any overlap, computed in
/// the transform domain.
pub fn cross_correlate(
    received: &ComplexSignal,
    template: &ComplexSignal,
) -> Result<CorrelationResult> {
    check_pair(received, template)?;
    let energy = template_energy_sum(template)?;
    let m = fft_len(received, template);
    let mut r = padded_spectrum(received.samples(), m);
    let t = padded_spectrum(template.samples(), m);
    for (a, b) in r.iter_mut().zip(&t) {
        *a *= b.conj();
    }
    dsp::ifft(&mut r);
    Ok(unwrap_lags(&r, received, template, energy))
}

/// Correlates against `template` and its conjugate, sharing the received
/// spectrum and deriving the conjugate template's spectrum by index reversal:
/// DFT(t*)[k] = DFT(t)[−k]*.
pub fn cross_correlate_conjugate_pair(
    received: &ComplexSignal,
    template: &ComplexSignal,
) -> Result<(CorrelationResult, CorrelationResult)> {
    check_pair(received, template)?;
    let energy = template_energy_sum(template)?;
    let m = fft_len(received, template);
    let r = padded_spectrum(received.samples(), m);
    let t = padded_spectrum(template.samples(), m);
    let mut up = Vec::with_capacity(m);
    let mut down = Vec::with_capacity(m);
    for k in 0..m {
        up.push(r[k] * t[k].conj());
        // conj(DFT(t*)[k]) = DFT(t)[−k]
        down.push(r[k] * t[(m - k) % m]);
    }
    dsp::ifft(&mut up);
    dsp::ifft(&mut down);
    let conj_template = template.conj();
    Ok((
        unwrap_lags(&up, received, template, energy),
        unwrap_lags(&down, received, &conj_template, energy),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    /// Sub-sample interpolated lag, s.
    pub time: f64,
    /// Largest sampled magnitude in the window.
    pub magnitude: f64,
    /// Parabola vertex value.
    pub interpolated_magnitude: f64,
    pub sample_index: usize,
}

/// Vertex offset (in bins) and value of the parabola through (−1, l), (0, m), (1, r).
pub fn parabolic_vertex(l: f64, m: f64, r: f64) -> (f64, f64) {
    let denom = l - 2.0 * m + r;
    if denom >= 0.0 {
        return (0.0, m);
    }
    let delta = 0.5 * (l - r) / denom;
    (delta, m - 0.25 * (l - r) * delta)
}

/// Window maximum with 3-point parabolic refinement. Neighbours outside the
/// window are used when they exist in the result.
pub fn find_peak(corr: &CorrelationResult, window: (f64, f64)) -> Result<PeakEstimate> {
    if corr.is_empty() || !(window.0 <= window.1) {
        return Err(Error::EmptyWindow);
    }
    let n = corr.len();
    let lo = corr.index_of(window.0).ceil().max(0.0);
    let hi = corr.index_of(window.1).floor().min((n - 1) as f64);
    if lo > hi {
        return Err(Error::EmptyWindow);
    }
    let (lo, hi) = (lo as usize, hi as usize);
    Ok(peak_in_range(corr, lo, hi))
}

pub(crate) fn peak_in_range(corr: &CorrelationResult, lo: usize, hi: usize) -> PeakEstimate {
    let mags = &corr.magnitudes;
    let mut best = lo;
    for i in lo..=hi {
        if mags[i] > mags[best] {
            best = i;
        }
    }
    refine_at(corr, best)
}

pub(crate) fn refine_at(corr: &CorrelationResult, i: usize) -> PeakEstimate {
    let mags = &corr.magnitudes;
    let (delta, value) = if i > 0 && i + 1 < mags.len() {
        parabolic_vertex(mags[i - 1], mags[i], mags[i + 1])
    } else {
        (0.0, mags[i])
    };
    PeakEstimate {
        time: corr.lags[i] + delta / corr.sample_rate,
        magnitude: mags[i],
        interpolated_magnitude: value,
        sample_index: i,
    }
}

/// τ̂ = −Δf/α.
pub fn predicted_shift(alpha: f64, delta_f: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::ZeroChirpRate);
    }
    Ok(-delta_f / alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionLoss {
    /// ℓ = (1 − μ/|α|)², 0 when the peak leaves the overlap.
    pub linear: f64,
    pub db: f64,
    /// Set when |α| ≤ μ, where no overlap remains.
    pub vanished: bool,
}

/// Detection-energy loss of a time-bounded chirp under frequency error Δf,
/// with μ = |Δf|/T.
pub fn detection_loss(alpha: f64, delta_f: f64, duration: f64) -> DetectionLoss {
    if delta_f == 0.0 {
        return DetectionLoss {
            linear: 1.0,
            db: 0.0,
            vanished: false,
        };
    }
    let mu = delta_f.abs() / duration;
    if alpha.abs() <= mu {
        return DetectionLoss {
            linear: 0.0,
            db: f64::NEG_INFINITY,
            vanished: true,
        };
    }
    let l = (1.0 - mu / alpha.abs()).powi(2);
    DetectionLoss {
        linear: l,
        db: units::db(l),
        vanished: false,
    }
}

/// The model quantities for one frequency-error scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyOffsetScenario {
    pub delta_f: f64,
    pub alpha: f64,
    pub duration: f64,
    pub tau_hat: f64,
    pub mu: f64,
    pub loss_linear: f64,
}

impl FrequencyOffsetScenario {
    pub fn new(delta_f: f64, alpha: f64, duration: f64) -> Result<Self> {
        let tau_hat = predicted_shift(alpha, delta_f)?;
        Ok(Self {
            delta_f,
            alpha,
            duration,
            tau_hat,
            mu: delta_f.abs() / duration,
            loss_linear: detection_loss(alpha, delta_f, duration).linear,
        })
    }

    /// Overlap fraction 1 − |τ̂|/T, the expected correlation magnitude.
    pub fn expected_magnitude(&self) -> f64 {
        (1.0 - self.tau_hat.abs() / self.duration).max(0.0)
    }
}
