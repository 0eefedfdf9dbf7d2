//! FFT helpers and the FIR channel filter.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT in place.
pub fn fft(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Inverse DFT in place, scaled by 1/N.
pub fn ifft(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Zero-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser β for a target stopband attenuation in dB.
pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Linear-phase windowed-sinc low-pass with unity DC gain.
///
/// `cutoff` is the one-sided −6 dB edge in Hz. `taps` is forced odd so the
/// group delay is an integer number of samples.
pub fn lowpass_taps(cutoff: f64, sample_rate: f64, taps: usize, atten_db: f64) -> Vec<f64> {
    let taps = taps | 1;
    let fc = cutoff / sample_rate;
    let mid = (taps - 1) as f64 / 2.0;
    let beta = kaiser_beta(atten_db);
    let i0b = bessel_i0(beta);
    let mut h: Vec<f64> = (0..taps)
        .map(|i| {
            let m = i as f64 - mid;
            let sinc = if m == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * m).sin() / (PI * m)
            };
            let r = m / mid;
            let w = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0b;
            sinc * w
        })
        .collect();
    let dc: f64 = h.iter().sum();
    for v in &mut h {
        *v /= dc;
    }
    h
}

/// Convolution trimmed to the input length and aligned for zero group delay
/// (odd-length symmetric `taps`).
pub fn filter_same(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let half = taps.len() / 2;
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            // y[i] = Σ_k h[k] x[i + half − k]
            let k_lo = (i + half + 1).saturating_sub(n);
            let k_hi = (i + half).min(taps.len() - 1);
            for k in k_lo..=k_hi {
                acc += x[i + half - k] * taps[k];
            }
            acc
        })
        .collect()
}

/// Magnitude response of real taps at frequency `f`.
pub fn response_at(taps: &[f64], f: f64, sample_rate: f64) -> f64 {
    let w = 2.0 * PI * f / sample_rate;
    taps.iter()
        .enumerate()
        .map(|(k, &h)| Complex64::from_polar(h, -w * k as f64))
        .sum::<Complex64>()
        .norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_round_trip() {
        let x: Vec<Complex64> = (0..37)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut y = x.clone();
        fft(&mut y);
        ifft(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn bessel_i0_reference_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        // I0(1) and I0(5) from tables.
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-12);
        assert!((bessel_i0(5.0) - 27.239_871_823_604_45).abs() < 1e-9);
    }

    #[test]
    fn lowpass_passband_and_stopband() {
        let fs = 1.6e6;
        let h = lowpass_taps(100e3, fs, 129, 60.0);
        assert_eq!(h.len(), 129);
        for k in 0..64 {
            assert!((h[k] - h[128 - k]).abs() < 1e-15);
        }
        assert!((response_at(&h, 0.0, fs) - 1.0).abs() < 1e-12);
        assert!((response_at(&h, 60e3, fs) - 1.0).abs() < 1e-2);
        for f in [160e3, 250e3, 400e3, 799e3] {
            assert!(response_at(&h, f, fs) < 1e-3, "{f}");
        }
    }

    #[test]
    fn filter_same_has_no_delay() {
        let h = lowpass_taps(100e3, 1.6e6, 129, 60.0);
        let mut x = vec![Complex64::new(0.0, 0.0); 400];
        x[200] = Complex64::new(1.0, 0.0);
        let y = filter_same(&x, &h);
        let peak = y
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap()
            .0;
        assert_eq!(peak, 200);
        assert!((y[200].re - h[64]).abs() < 1e-15);
    }
}
