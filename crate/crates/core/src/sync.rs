//! Paired-peak synchronization.
//!
//! An up-chirp of rate α̇ followed (after a nominal separation) by its
//! conjugate is correlated against both templates. A frequency error Δf moves
//! the two peaks in opposite directions by Δf/α̇, so their distance d
//! measures Δf = (α̇/2)(d − separation) and their midpoint is the
//! offset-free arrival time.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::chirp::{synthesize_prototype, ChirpParams};
use crate::correlate::{cross_correlate, cross_correlate_conjugate_pair, refine_at, CorrelationResult};
use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use crate::units;

pub const DEFAULT_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// |Δf_max|, Hz. Sets the search window around the nominal separation.
    pub delta_f_max: f64,
    /// Minimum joint metric (|γ↑| + |γ↓|)/2.
    pub threshold: f64,
    /// Start-to-start distance of the two chirps, s. `None` means back-to-back
    /// halves of a composite.
    pub separation: Option<f64>,
}

impl SearchConfig {
    pub fn new(delta_f_max: f64) -> Self {
        Self {
            delta_f_max,
            threshold: DEFAULT_THRESHOLD,
            separation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedPeaks {
    /// Up-template peak, s.
    pub t1: f64,
    /// Down-template peak, s.
    pub t2: f64,
    pub d_hat: f64,
    pub up_magnitude: f64,
    pub down_magnitude: f64,
    pub joint_metric: f64,
    /// Separation the search was centred on, s.
    pub nominal_separation: f64,
    pub alpha_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EstimationMode {
    /// Back-to-back halves of a composite of total length 2·half_duration.
    Composite { half_duration: f64 },
    /// Separate chirps repeated with `period` between starts.
    Alternate { period: f64 },
}

impl EstimationMode {
    pub fn nominal(&self) -> f64 {
        match *self {
            EstimationMode::Composite { half_duration } => half_duration,
            EstimationMode::Alternate { period } => period,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncEstimate {
    pub delta_f_hat: f64,
    /// Shift of the up-chirp peak implied by the estimate, −Δf̂/α̇.
    pub tau_hat: f64,
    pub corrected_timing: f64,
    pub mode: EstimationMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingRefinement {
    /// (t1 + t2 − separation)/2; the returned timing.
    pub midpoint: f64,
    /// t1 − τ̂.
    pub shift_corrected: f64,
    pub discrepancy: f64,
}

/// Index of the maximum of `v` over each window `[i + off − w, i + off + w]`,
/// clipped to the vector, for every i in `0..n`.
fn sliding_argmax(v: &[f64], n: usize, off: i64, w: i64) -> Vec<Option<usize>> {
    let len = v.len() as i64;
    let mut q: VecDeque<usize> = VecDeque::new();
    let mut next = 0i64;
    let mut out = Vec::with_capacity(n);
    for i in 0..n as i64 {
        let lo = i + off - w;
        let hi = (i + off + w).min(len - 1);
        while next <= hi {
            if next >= 0 {
                let k = next as usize;
                while q.back().is_some_and(|&b| v[b] <= v[k]) {
                    q.pop_back();
                }
                q.push_back(k);
            }
            next += 1;
        }
        while q.front().is_some_and(|&f| (f as i64) < lo) {
            q.pop_front();
        }
        out.push(q.front().copied());
    }
    out
}

/// Correlates against the up and down templates and picks the pair with the
/// best joint metric whose spacing lies within 2·|Δf_max|/|α̇| of nominal.
pub fn paired_detect(
    received: &ComplexSignal,
    sub_params: &ChirpParams,
    cfg: &SearchConfig,
) -> Result<PairedPeaks> {
    let (up, down) = correlate_both(received, sub_params)?;
    pick_pair(&up, &down, sub_params, cfg)
}

/// Up and down correlations of `received`, sharing transforms when the pair
/// members are conjugates.
pub fn correlate_both(
    received: &ComplexSignal,
    sub_params: &ChirpParams,
) -> Result<(CorrelationResult, CorrelationResult)> {
    if sub_params.alpha == 0.0 {
        return Err(Error::ZeroChirpRate);
    }
    let fs = received.sample_rate();
    let template = synthesize_prototype(sub_params, fs)?;
    if sub_params.beta == 0.0 {
        cross_correlate_conjugate_pair(received, &template)
    } else {
        let down = synthesize_prototype(&sub_params.conjugate_pair(), fs)?;
        Ok((cross_correlate(received, &template)?, cross_correlate(received, &down)?))
    }
}

fn pick_pair(
    up: &CorrelationResult,
    down: &CorrelationResult,
    sub_params: &ChirpParams,
    cfg: &SearchConfig,
) -> Result<PairedPeaks> {
    if !(cfg.delta_f_max.is_finite() && cfg.delta_f_max >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta_f_max = {}", cfg.delta_f_max)));
    }
    let fs = up.sample_rate;
    let n_sub = sub_params.sample_count(fs);
    let nominal = cfg.separation.unwrap_or(n_sub as f64 / fs);
    if !(nominal > 0.0) {
        return Err(Error::InvalidParameter(format!("separation must be positive, got {nominal}")));
    }
    let off = (nominal * fs).round() as i64;
    let w = (2.0 * cfg.delta_f_max / sub_params.alpha.abs() * fs).ceil() as i64;
    // Both results share one lag grid.
    debug_assert_eq!(up.lags.first(), down.lags.first());

    let partner = sliding_argmax(&down.magnitudes, up.len(), off, w);
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, j) in partner.iter().enumerate() {
        let Some(j) = *j else { continue };
        let joint = 0.5 * (up.magnitudes[i] + down.magnitudes[j]);
        if best.is_none_or(|(_, _, b)| joint > b) {
            best = Some((i, j, joint));
        }
    }
    let Some((i, j, joint)) = best else {
        return Err(Error::NotDetected {
            threshold: cfg.threshold,
            best: 0.0,
        });
    };
    if joint < cfg.threshold {
        return Err(Error::NotDetected {
            threshold: cfg.threshold,
            best: joint,
        });
    }
    let p1 = refine_at(up, i);
    let p2 = refine_at(down, j);
    Ok(PairedPeaks {
        t1: p1.time,
        t2: p2.time,
        d_hat: p2.time - p1.time,
        up_magnitude: p1.magnitude,
        down_magnitude: p2.magnitude,
        joint_metric: joint,
        nominal_separation: nominal,
        alpha_dot: sub_params.alpha,
    })
}

/// Δf̂ = (α̇/2)(d̂ − nominal separation).
pub fn estimate_frequency_error(
    peaks: &PairedPeaks,
    mode: EstimationMode,
    alpha_dot: f64,
) -> Result<SyncEstimate> {
    if alpha_dot == 0.0 {
        return Err(Error::ZeroChirpRate);
    }
    let nominal = mode.nominal();
    if !(nominal.is_finite() && nominal > 0.0) {
        return Err(Error::ModeMismatch(format!("{mode:?} needs a positive length")));
    }
    // Peaks searched around a different spacing belong to another mode.
    let tol = (1e-3 * nominal).max(1e-6);
    if peaks.nominal_separation > 0.0 && (peaks.nominal_separation - nominal).abs() > tol {
        return Err(Error::ModeMismatch(format!(
            "peaks were searched around {:.3} μs but {mode:?} expects {:.3} μs",
            units::us(peaks.nominal_separation),
            units::us(nominal)
        )));
    }
    let delta_f_hat = 0.5 * alpha_dot * (peaks.d_hat - nominal);
    let tau_hat = -delta_f_hat / alpha_dot;
    Ok(SyncEstimate {
        delta_f_hat,
        tau_hat,
        corrected_timing: 0.5 * (peaks.t1 + peaks.t2 - nominal),
        mode,
    })
}

pub fn refine_timing(peaks: &PairedPeaks, estimate: &SyncEstimate) -> TimingRefinement {
    let midpoint = 0.5 * (peaks.t1 + peaks.t2 - estimate.mode.nominal());
    let shift_corrected = peaks.t1 - estimate.tau_hat;
    TimingRefinement {
        midpoint,
        shift_corrected,
        discrepancy: shift_corrected - midpoint,
    }
}

/// Detection, estimation and timing refinement for a composite capture.
pub fn synchronize(
    received: &ComplexSignal,
    sub_params: &ChirpParams,
    cfg: &SearchConfig,
) -> Result<(PairedPeaks, SyncEstimate, TimingRefinement)> {
    let peaks = paired_detect(received, sub_params, cfg)?;
    let mode = match cfg.separation {
        None => EstimationMode::Composite {
            half_duration: peaks.nominal_separation,
        },
        Some(period) => EstimationMode::Alternate { period },
    };
    let est = estimate_frequency_error(&peaks, mode, sub_params.alpha)?;
    let timing = refine_timing(&peaks, &est);
    Ok((peaks, est, timing))
}

/// JSON detection report, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub detected: bool,
    pub t1_s: Option<f64>,
    pub t2_s: Option<f64>,
    pub d_hat_s: Option<f64>,
    pub delta_f_hat_hz: Option<f64>,
    pub corrected_timing_s: Option<f64>,
    pub joint_metric: f64,
    pub threshold: f64,
    /// Shift-corrected minus midpoint timing, s.
    pub timing_discrepancy_s: Option<f64>,
}

impl DetectionReport {
    pub fn from_result(
        threshold: f64,
        r: &Result<(PairedPeaks, SyncEstimate, TimingRefinement)>,
    ) -> Self {
        match r {
            Ok((p, e, t)) => Self {
                detected: true,
                t1_s: Some(p.t1),
                t2_s: Some(p.t2),
                d_hat_s: Some(p.d_hat),
                delta_f_hat_hz: Some(e.delta_f_hat),
                corrected_timing_s: Some(t.midpoint),
                joint_metric: p.joint_metric,
                threshold,
                timing_discrepancy_s: Some(t.discrepancy),
            },
            Err(err) => Self {
                detected: false,
                t1_s: None,
                t2_s: None,
                d_hat_s: None,
                delta_f_hat_hz: None,
                corrected_timing_s: None,
                joint_metric: match err {
                    Error::NotDetected { best, .. } => *best,
                    _ => 0.0,
                },
                threshold,
                timing_discrepancy_s: None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{from_khz_per_us, from_us};

    fn peaks(d_us: f64) -> PairedPeaks {
        PairedPeaks {
            t1: 0.0,
            t2: from_us(d_us),
            d_hat: from_us(d_us),
            up_magnitude: 1.0,
            down_magnitude: 1.0,
            joint_metric: 1.0,
            nominal_separation: from_us(390.0),
            alpha_dot: from_khz_per_us(0.481),
        }
    }

    #[test]
    fn estimates_from_peak_distance() {
        let mode = EstimationMode::Composite {
            half_duration: from_us(390.0),
        };
        let a = from_khz_per_us(0.481);
        let e = estimate_frequency_error(&peaks(473.16), mode, a).unwrap();
        assert!((e.delta_f_hat - 20e3).abs() < 1.0, "{}", e.delta_f_hat);
        let e = estimate_frequency_error(&peaks(348.42), mode, a).unwrap();
        assert!((e.delta_f_hat + 10e3).abs() < 1.0, "{}", e.delta_f_hat);
        let e = estimate_frequency_error(&peaks(390.0), mode, a).unwrap();
        assert!(e.delta_f_hat.abs() < 1e-6);
    }

    #[test]
    fn rejects_zero_rate_and_mode_mismatch() {
        let p = peaks(400.0);
        let mode = EstimationMode::Composite {
            half_duration: from_us(390.0),
        };
        assert!(matches!(
            estimate_frequency_error(&p, mode, 0.0),
            Err(Error::ZeroChirpRate)
        ));
        let alt = EstimationMode::Alternate { period: from_us(10_000.0) };
        assert!(matches!(
            estimate_frequency_error(&p, alt, 1e8),
            Err(Error::ModeMismatch(_))
        ));
        let bad = EstimationMode::Composite { half_duration: -1.0 };
        assert!(matches!(
            estimate_frequency_error(&p, bad, 1e8),
            Err(Error::ModeMismatch(_))
        ));
    }

    #[test]
    fn midpoint_and_shift_corrected_timing_agree_on_exact_peaks() {
        let a = from_khz_per_us(0.481);
        let df = 7e3;
        let tau = -df / a;
        let d0 = from_us(12.5);
        let p = PairedPeaks {
            t1: d0 + tau,
            t2: d0 + from_us(390.0) - tau,
            d_hat: from_us(390.0) - 2.0 * tau,
            ..peaks(0.0)
        };
        let mode = EstimationMode::Composite {
            half_duration: from_us(390.0),
        };
        let e = estimate_frequency_error(&p, mode, a).unwrap();
        assert!((e.delta_f_hat - df).abs() < 1e-6);
        let t = refine_timing(&p, &e);
        assert!((t.midpoint - d0).abs() < 1e-15);
        assert!(t.discrepancy.abs() < 1e-15);
    }

    #[test]
    fn sliding_argmax_matches_brute_force() {
        let v: Vec<f64> = (0..50).map(|i| ((i * 37) % 23) as f64).collect();
        let got = sliding_argmax(&v, 50, 5, 3);
        for (i, g) in got.iter().enumerate() {
            let lo = (i as i64 + 2).max(0) as usize;
            let hi = (i + 8).min(49);
            if lo > hi {
                assert!(g.is_none());
                continue;
            }
            let best = (lo..=hi).map(|k| v[k]).fold(f64::MIN, f64::max);
            assert_eq!(v[g.unwrap()], best);
        }
    }
}
