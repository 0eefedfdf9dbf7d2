mod support;

use chirpsync::chirp::{synthesize_composite, synthesize_prototype, ChirpParams};
use chirpsync::correlate::{cross_correlate, find_peak, predicted_shift};
use chirpsync::montecarlo::{awgn_channel, degradation_sweep, Background, ChannelModel};
use chirpsync::sync::{paired_detect, synchronize, SearchConfig};
use chirpsync::units::{from_khz_per_us, from_us};
use chirpsync::{dsp, ComplexSignal};
use num_complex::Complex64;
use support::{direct_correlation, FS};

const SAMPLE: f64 = 1.0 / FS;

fn sub() -> ChirpParams {
    ChirpParams::new(from_khz_per_us(0.481), 0.0, from_us(390.0)).unwrap()
}

fn silent() -> ChannelModel {
    ChannelModel {
        background: Background::Silence,
        ..Default::default()
    }
}

#[test]
fn offset_moves_the_peak_by_the_shift_law() {
    for alpha in [0.251, 0.481, -0.3, 0.8] {
        let p = ChirpParams::new(from_khz_per_us(alpha), 0.0, from_us(390.0)).unwrap();
        let x = synthesize_prototype(&p, FS).unwrap();
        for df in [-20e3, -5e3, 0.0, 3e3, 20e3] {
            let mut rx = x.clone();
            rx.rotate(df);
            let corr = cross_correlate(&rx, &x).unwrap();
            let peak = find_peak(&corr, (corr.lags[0], *corr.lags.last().unwrap())).unwrap();
            let tau = predicted_shift(p.alpha, df).unwrap();
            assert!((peak.time - tau).abs() < 0.5 * SAMPLE, "α={alpha} Δf={df}: {} vs {tau}", peak.time);
        }
    }
}

#[test]
fn shifted_peak_magnitude_agrees_with_oracle_and_overlap() {
    let x = synthesize_prototype(&sub(), FS).unwrap();
    let mut rx = x.clone();
    rx.rotate(20e3);
    let corr = cross_correlate(&rx, &x).unwrap();
    let (lags, mags) = direct_correlation(&rx, &x);
    let peak = find_peak(&corr, (lags[0], *lags.last().unwrap())).unwrap();
    assert!((peak.time - from_us(-41.58)).abs() < SAMPLE);
    assert!((mags[peak.sample_index] - peak.magnitude).abs() < 1e-9);
    assert!((peak.interpolated_magnitude - (1.0 - 41.58 / 390.0)).abs() < 2e-3);
}

#[test]
fn measured_loss_tracks_the_analytic_curve() {
    let p = ChirpParams::new(from_khz_per_us(0.251), 0.0, from_us(780.0)).unwrap();
    let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 500.0).collect();
    let pts = degradation_sweep(&p, &grid, FS).unwrap();
    for (a, b) in pts.iter().zip(pts.iter().rev()) {
        assert!((a.analytic_db - b.analytic_db).abs() < 1e-12);
    }
    for pt in &pts {
        assert!((pt.measured_db - pt.analytic_db).abs() < 0.1, "{pt:?}");
    }
    let zero = pts.iter().find(|p| p.delta_f == 0.0).unwrap();
    assert_eq!(zero.analytic_db, 0.0);
    assert!(zero.measured_db.abs() < 1e-9);
    let too_slow = ChirpParams::new(from_khz_per_us(0.02), 0.0, from_us(780.0)).unwrap();
    assert!(degradation_sweep(&too_slow, &grid, FS).is_err());
}

#[test]
fn noiseless_composite_round_trip() {
    let x = synthesize_composite(&sub(), FS).unwrap();
    let cfg = SearchConfig::new(20e3);
    for (df, d_expected) in [(0.0, 390.0), (20e3, 473.16), (-20e3, 306.84), (7.3e3, 390.0 + 2.0 * 7.3 / 0.481)] {
        for delay in [0.0, 37.3e-6] {
            let rx = awgn_channel(&x, &silent(), f64::INFINITY, df, delay, 1).unwrap();
            let (peaks, est, timing) = synchronize(&rx, &sub(), &cfg).unwrap();
            assert!((peaks.d_hat - from_us(d_expected)).abs() < SAMPLE, "Δf={df}: {}", peaks.d_hat);
            assert!((est.delta_f_hat - df).abs() <= 300.0, "Δf={df}: {}", est.delta_f_hat);
            assert!((timing.midpoint - delay).abs() < SAMPLE, "{} vs {delay}", timing.midpoint);
            assert!(timing.discrepancy.abs() < SAMPLE);
        }
    }
}

#[test]
fn raw_up_peak_is_offset_and_midpoint_corrects_it() {
    let x = synthesize_composite(&sub(), FS).unwrap();
    let rx = awgn_channel(&x, &silent(), f64::INFINITY, 20e3, 0.0, 1).unwrap();
    let peaks = paired_detect(&rx, &sub(), &SearchConfig::new(20e3)).unwrap();
    assert!((peaks.t1 - from_us(-41.58)).abs() < SAMPLE);
    let (_, _, timing) = synchronize(&rx, &sub(), &SearchConfig::new(20e3)).unwrap();
    assert!(timing.midpoint.abs() < SAMPLE);
}

#[test]
fn random_data_background_does_not_break_pairing() {
    let x = synthesize_composite(&sub(), FS).unwrap();
    for seed in 0..5 {
        let rx = awgn_channel(&x, &ChannelModel::default(), f64::INFINITY, -12e3, 150e-6, seed).unwrap();
        let (_, est, timing) = synchronize(&rx, &sub(), &SearchConfig::new(20e3)).unwrap();
        assert!((est.delta_f_hat + 12e3).abs() <= 300.0);
        assert!((timing.midpoint - 150e-6).abs() < 2.0 * SAMPLE);
    }
}

#[test]
fn alternate_mode_with_separate_chirps() {
    let up = synthesize_prototype(&sub(), FS).unwrap();
    let down = synthesize_prototype(&sub().conjugate_pair(), FS).unwrap();
    let period = from_us(1000.0);
    let gap = (period * FS).round() as usize;
    let mut s = vec![Complex64::new(0.0, 0.0); gap + down.len() + 200];
    s[100..100 + up.len()].copy_from_slice(up.samples());
    s[100 + gap..100 + gap + down.len()].copy_from_slice(down.samples());
    let mut rx = ComplexSignal::new(s, FS, up.t0() - 100.0 / FS).unwrap();
    rx.rotate(-15e3);
    let cfg = SearchConfig {
        separation: Some(period),
        ..SearchConfig::new(20e3)
    };
    let (_, est, timing) = synchronize(&rx, &sub(), &cfg).unwrap();
    assert!((est.delta_f_hat + 15e3).abs() <= 300.0, "{}", est.delta_f_hat);
    assert!(timing.midpoint.abs() < SAMPLE);
}

#[test]
fn noise_only_capture_is_not_detected_at_a_high_threshold() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let noise = support::random_signal(&mut rng, 4000, 0.0);
    let cfg = SearchConfig {
        threshold: 0.9,
        ..SearchConfig::new(20e3)
    };
    assert!(matches!(
        paired_detect(&noise, &sub(), &cfg),
        Err(chirpsync::Error::NotDetected { .. })
    ));
}

#[test]
fn noise_power_in_band_matches_configured_snr() {
    // Unit-power tone; the noise is isolated by subtracting the noiseless run.
    let n = 1 << 17;
    let tone = ComplexSignal::new(vec![Complex64::new(1.0, 0.0); n], FS, 0.0).unwrap();
    let model = ChannelModel {
        background: Background::Silence,
        lead: 0.0,
        tail: 0.0,
        max_delay: 0.0,
        ..Default::default()
    };
    for snr_db in [-5.0, 0.0, 5.0] {
        let noisy = awgn_channel(&tone, &model, snr_db, 0.0, 0.0, 11).unwrap();
        let clean = awgn_channel(&tone, &model, f64::INFINITY, 0.0, 0.0, 11).unwrap();
        let mut noise: Vec<Complex64> = noisy.samples().iter().zip(clean.samples()).map(|(a, b)| a - b).collect();
        dsp::fft(&mut noise);
        // Power within ±90 kHz, where the filter is flat, scaled to 200 kHz.
        let df = FS / n as f64;
        let inband: f64 = noise
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = if *k <= n / 2 { *k as f64 } else { *k as f64 - n as f64 } * df;
                f.abs() <= 90e3
            })
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            / (n as f64 * n as f64);
        let band_power = inband * 200.0 / 180.0;
        let measured_snr = -10.0 * band_power.log10();
        assert!((measured_snr - snr_db).abs() < 0.1, "{snr_db} dB configured, {measured_snr} measured");
    }
}
