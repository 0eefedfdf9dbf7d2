//! Link budget, channel model and Monte-Carlo evaluation of the paired
//! estimator.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chirp::{synthesize_composite, synthesize_prototype, ChirpParams};
use crate::correlate::{cross_correlate, detection_loss, find_peak, predicted_shift};
use crate::dsp;
use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use crate::sync::{synchronize, SearchConfig};
use crate::units;

/// Thermal noise density, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub path_loss_db: f64,
    pub noise_figure_db: f64,
    /// 10·log10 of the noise bandwidth in Hz.
    pub bandwidth_dbhz: f64,
    pub received_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub snr_db: f64,
}

/// ρ = p − Δ, N = W + N0 + ξ, η = ρ − N.
pub fn link_budget(tx_power_dbm: f64, path_loss_db: f64, noise_figure_db: f64, bandwidth_dbhz: f64) -> Result<LinkBudget> {
    for (name, v) in [
        ("tx power", tx_power_dbm),
        ("path loss", path_loss_db),
        ("noise figure", noise_figure_db),
        ("bandwidth", bandwidth_dbhz),
    ] {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
        }
    }
    let rho = tx_power_dbm - path_loss_db;
    let noise = bandwidth_dbhz + THERMAL_NOISE_DBM_HZ + noise_figure_db;
    Ok(LinkBudget {
        tx_power_dbm,
        path_loss_db,
        noise_figure_db,
        bandwidth_dbhz,
        received_power_dbm: rho,
        noise_power_dbm: noise,
        snr_db: rho - noise,
    })
}

/// What surrounds the burst in the capture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Background {
    Silence,
    /// Unit-power QPSK at the channel symbol rate.
    RandomData,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Bandwidth in which the SNR is defined and of the receive filter, Hz.
    pub bandwidth: f64,
    pub filter_taps: usize,
    pub stopband_db: f64,
    pub background: Background,
    /// Capture time before the earliest burst position, s.
    pub lead: f64,
    /// Capture time after the latest burst position, s.
    pub tail: f64,
    /// Longest delay `awgn_channel` accepts, s; fixes the capture length.
    pub max_delay: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            bandwidth: 200e3,
            filter_taps: 129,
            stopband_db: 60.0,
            background: Background::RandomData,
            lead: 400e-6,
            tail: 400e-6,
            max_delay: 200e-6,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth <= sample_rate) {
            return Err(Error::InvalidParameter(format!(
                "channel bandwidth {} Hz must lie in (0, fs]",
                self.bandwidth
            )));
        }
        if self.lead < 0.0 || self.tail < 0.0 || self.max_delay < 0.0 {
            return Err(Error::InvalidParameter("capture margins must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-sample noise variance giving `snr_db` for `signal_power` in the model
/// bandwidth.
pub fn noise_variance(signal_power: f64, snr_db: f64, sample_rate: f64, bandwidth: f64) -> f64 {
    signal_power * (sample_rate / bandwidth) / units::from_db(snr_db)
}

/// Delays `x` by `frac` of a sample (0 ≤ frac < 1) with a DFT phase ramp,
/// leaving `guard` zeros on each side for the interpolation tails.
fn fractional_delay(x: &[Complex64], frac: f64, guard: usize) -> Vec<Complex64> {
    let m = (x.len() + 2 * guard).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[guard..guard + x.len()].copy_from_slice(x);
    if frac == 0.0 {
        return buf;
    }
    dsp::fft(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        *v *= Complex64::from_polar(1.0, -2.0 * PI * kk * frac / m as f64);
    }
    dsp::ifft(&mut buf);
    buf
}

fn qpsk_fill(rng: &mut ChaCha8Rng, out: &mut [Complex64], samples_per_symbol: usize) {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    for chunk in out.chunks_mut(samples_per_symbol.max(1)) {
        let bits = rng.next_u32();
        let s = Complex64::new(
            if bits & 1 == 0 { a } else { -a },
            if bits & 2 == 0 { a } else { -a },
        );
        chunk.fill(s);
    }
}

/// Places `signal` `delay` seconds late in a capture, applies the frequency
/// error over the whole capture, adds complex white noise at `snr_db` (in the
/// model bandwidth, relative to the signal's mean power; `+∞` disables noise)
/// and low-pass filters.
///
/// The capture starts `model.lead` before the undelayed signal and is long
/// enough for any delay up to `model.max_delay`, so every trial has the same
/// length. Times stay on the signal's clock: the burst begins at
/// `signal.t0() + delay`.
pub fn awgn_channel(
    signal: &ComplexSignal,
    model: &ChannelModel,
    snr_db: f64,
    delta_f: f64,
    delay: f64,
    seed: u64,
) -> Result<ComplexSignal> {
    let fs = signal.sample_rate();
    model.validate(fs)?;
    if !(delay >= 0.0 && delay <= model.max_delay) {
        return Err(Error::InvalidParameter(format!(
            "delay {delay} s outside [0, {}] s",
            model.max_delay
        )));
    }
    // +∞ disables noise; anything else non-finite is an error.
    if !(snr_db.is_finite() || snr_db == f64::INFINITY) || !delta_f.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "snr {snr_db} dB and frequency error {delta_f} Hz must be finite"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lead = (model.lead * fs).round() as usize;
    let tail = (model.tail * fs).round() as usize;
    let max_shift = (model.max_delay * fs).ceil() as usize;
    let total = lead + max_shift + signal.len() + tail;
    let mut cap = vec![Complex64::new(0.0, 0.0); total];

    let shift = delay * fs;
    let whole = shift.floor() as usize;
    let frac = shift - whole as f64;
    let start = lead + whole;
    let end = start + signal.len() + usize::from(frac > 0.0);
    if model.background == Background::RandomData {
        let sps = (fs / model.bandwidth).round() as usize;
        qpsk_fill(&mut rng, &mut cap[..start], sps);
        qpsk_fill(&mut rng, &mut cap[end.min(total)..], sps);
    }
    let guard = lead.min(64);
    let delayed = fractional_delay(signal.samples(), frac, guard);
    for (i, v) in delayed.iter().enumerate() {
        let pos = start as i64 + i as i64 - guard as i64;
        if (0..total as i64).contains(&pos) {
            cap[pos as usize] += v;
        }
    }

    let t0 = signal.t0() - lead as f64 / fs;
    let mut out = ComplexSignal::new(cap, fs, t0)?;
    out.rotate(delta_f);
    if snr_db.is_finite() {
        let var = noise_variance(signal.mean_power(), snr_db, fs, model.bandwidth);
        let normal = Normal::new(0.0, (var / 2.0).sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for v in out.samples_mut() {
            *v += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    let taps = dsp::lowpass_taps(model.bandwidth / 2.0, fs, model.filter_taps, model.stopband_db);
    let filtered = dsp::filter_same(out.samples(), &taps);
    ComplexSignal::new(filtered, fs, t0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Sub-waveform ⟨α̇, 0, T/2⟩ of the composite.
    pub sub_params: ChirpParams,
    pub sample_rate: f64,
    pub snr_db: Vec<f64>,
    pub n_trials: usize,
    /// Frequency errors are drawn uniformly from [df_min, df_max], Hz.
    pub df_min: f64,
    pub df_max: f64,
    pub master_seed: u64,
    pub threshold: f64,
    pub channel: ChannelModel,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.sub_params.validate()?;
        if self.n_trials == 0 || self.snr_db.is_empty() {
            return Err(Error::InvalidParameter("need at least one trial and one SNR".into()));
        }
        if !(self.df_min <= self.df_max) || !self.df_min.is_finite() || !self.df_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "frequency-error range [{}, {}] is invalid",
                self.df_min, self.df_max
            )));
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidParameter("SNR list contains NaN".into()));
        }
        self.channel.validate(self.sample_rate)
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            delta_f_max: self.df_min.abs().max(self.df_max.abs()),
            threshold: self.threshold,
            separation: None,
        }
    }
}

/// Keys of a simulation config file (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfigFile {
    pub alpha_khz_per_us: f64,
    /// Length of each half of the composite, μs.
    pub t_us: f64,
    pub sample_rate_hz: f64,
    pub snr_db_list: Vec<f64>,
    pub n_trials: usize,
    pub df_min_hz: f64,
    pub df_max_hz: f64,
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    crate::sync::DEFAULT_THRESHOLD
}

impl SimConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn into_config(self) -> Result<SimConfig> {
        let cfg = SimConfig {
            sub_params: ChirpParams::new(
                units::from_khz_per_us(self.alpha_khz_per_us),
                0.0,
                units::from_us(self.t_us),
            )?,
            sample_rate: self.sample_rate_hz,
            snr_db: self.snr_db_list,
            n_trials: self.n_trials,
            df_min: self.df_min_hz,
            df_max: self.df_max_hz,
            master_seed: self.seed,
            threshold: self.threshold,
            channel: ChannelModel::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub snr_db: f64,
    pub delta_f: f64,
    pub delay: f64,
    pub detected: bool,
    pub delta_f_hat: Option<f64>,
    pub timing_hat: Option<f64>,
}

impl TrialRecord {
    pub fn frequency_error(&self) -> Option<f64> {
        self.delta_f_hat.map(|d| (d - self.delta_f).abs())
    }

    pub fn timing_error(&self) -> Option<f64> {
        self.timing_hat.map(|t| (t - self.delay).abs())
    }
}

/// Independent generator for trial `trial` of SNR point `snr_index`.
pub fn trial_rng(master_seed: u64, snr_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((snr_index as u64) << 32) | trial as u64);
    rng
}

pub fn run_trial(cfg: &SimConfig, composite: &ComplexSignal, snr_index: usize, trial: usize) -> Result<TrialRecord> {
    let snr_db = cfg.snr_db[snr_index];
    let mut rng = trial_rng(cfg.master_seed, snr_index, trial);
    let delta_f = if cfg.df_max > cfg.df_min {
        rng.random_range(cfg.df_min..=cfg.df_max)
    } else {
        cfg.df_min
    };
    let delay = rng.random::<f64>() * cfg.channel.max_delay;
    let seed = rng.next_u64();
    let rx = awgn_channel(composite, &cfg.channel, snr_db, delta_f, delay, seed)?;
    let (detected, delta_f_hat, timing_hat) = match synchronize(&rx, &cfg.sub_params, &cfg.search()) {
        Ok((_, est, timing)) => (true, Some(est.delta_f_hat), Some(timing.midpoint)),
        Err(Error::NotDetected { .. }) => (false, None, None),
        Err(e) => return Err(e),
    };
    Ok(TrialRecord {
        trial,
        snr_db,
        delta_f,
        delay,
        detected,
        delta_f_hat,
        timing_hat,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrSummary {
    pub snr_db: f64,
    pub n_trials: usize,
    pub detected_fraction: f64,
    /// Sorted |Δf̂ − Δf| of detected trials, Hz.
    pub frequency_errors: Vec<f64>,
    /// Sorted timing errors of detected trials, s.
    pub timing_errors: Vec<f64>,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Nearest-rank percentile of `sorted` when `total − sorted.len()` further
/// samples are +∞; `None` if the rank falls among those.
fn percentile(sorted: &[f64], total: usize, q: f64) -> Option<f64> {
    let rank = ((q / 100.0) * total as f64).ceil().max(1.0) as usize;
    sorted.get(rank - 1).copied()
}

impl SnrSummary {
    fn new(snr_db: f64, records: &[TrialRecord]) -> Self {
        let detected = records.iter().filter(|r| r.detected).count();
        Self {
            snr_db,
            n_trials: records.len(),
            detected_fraction: detected as f64 / records.len() as f64,
            frequency_errors: sorted(records.iter().filter_map(TrialRecord::frequency_error).collect()),
            timing_errors: sorted(records.iter().filter_map(TrialRecord::timing_error).collect()),
        }
    }

    fn denominator(&self, conditional: bool) -> usize {
        if conditional {
            self.frequency_errors.len()
        } else {
            self.n_trials
        }
    }

    /// Fraction of trials with |Δf̂ − Δf| ≤ x. Conditional on detection, or over
    /// all trials with misses counted as failures.
    pub fn fraction_within(&self, x: f64, conditional: bool) -> f64 {
        let n = self.denominator(conditional);
        if n == 0 {
            return 0.0;
        }
        self.frequency_errors.partition_point(|&e| e <= x) as f64 / n as f64
    }

    /// Empirical CDF points (error, fraction).
    pub fn cdf(&self, conditional: bool) -> Vec<(f64, f64)> {
        let n = self.denominator(conditional).max(1) as f64;
        self.frequency_errors
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, (i + 1) as f64 / n))
            .collect()
    }

    pub fn frequency_percentile(&self, q: f64, conditional: bool) -> Option<f64> {
        percentile(&self.frequency_errors, self.denominator(conditional), q)
    }

    pub fn timing_percentile(&self, q: f64, conditional: bool) -> Option<f64> {
        percentile(&self.timing_errors, self.denominator(conditional), q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: SimConfig,
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SnrSummary>,
}

pub const PERCENTILES: [f64; 4] = [50.0, 90.0, 95.0, 99.0];

impl TrialReport {
    /// CSV `snr_db,trial,df_true_hz,df_hat_hz,df_err_hz,timing_err_us,detected`;
    /// estimate columns are empty for missed trials.
    pub fn write_trials_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "snr_db,trial,df_true_hz,df_hat_hz,df_err_hz,timing_err_us,detected")?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.records {
            writeln!(
                w,
                "{},{},{:.6},{},{},{},{}",
                r.snr_db,
                r.trial,
                r.delta_f,
                opt(r.delta_f_hat),
                opt(r.frequency_error()),
                opt(r.timing_error().map(units::us)),
                u8::from(r.detected),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `snr_db,err_hz,fraction,fraction_all`: the CDF conditional on
    /// detection and over all trials.
    pub fn write_cdf_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "snr_db,err_hz,fraction,fraction_all")?;
        for s in &self.summaries {
            for ((e, c), (_, u)) in s.cdf(true).iter().zip(s.cdf(false)) {
                writeln!(w, "{},{:.6},{:.6},{:.6}", s.snr_db, e, c, u)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// CSV of percentiles over all trials, misses counted as +∞ (empty cell).
    pub fn write_percentiles_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "snr_db,percentile,frequency_error_hz,timing_error_us,detected_fraction")?;
        for s in &self.summaries {
            for q in PERCENTILES {
                let f = s.frequency_percentile(q, false).map(|v| format!("{v:.6}")).unwrap_or_default();
                let t = s
                    .timing_percentile(q, false)
                    .map(|v| format!("{:.6}", units::us(v)))
                    .unwrap_or_default();
                writeln!(w, "{},{},{},{},{:.6}", s.snr_db, q, f, t, s.detected_fraction)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `n_trials` per SNR point in parallel. Results depend only on the
/// configuration, not on scheduling.
pub fn run_trials(cfg: &SimConfig) -> Result<TrialReport> {
    cfg.validate()?;
    let composite = synthesize_composite(&cfg.sub_params, cfg.sample_rate)?;
    let jobs: Vec<(usize, usize)> = (0..cfg.snr_db.len())
        .flat_map(|s| (0..cfg.n_trials).map(move |t| (s, t)))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(s, t)| run_trial(cfg, &composite, s, t))
        .collect::<Result<_>>()?;
    let summaries = cfg
        .snr_db
        .iter()
        .enumerate()
        .map(|(s, &snr)| SnrSummary::new(snr, &records[s * cfg.n_trials..(s + 1) * cfg.n_trials]))
        .collect();
    Ok(TrialReport {
        config: cfg.clone(),
        records,
        summaries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationPoint {
    pub delta_f: f64,
    pub analytic_db: f64,
    pub measured_db: f64,
    pub predicted_shift: f64,
    pub measured_shift: f64,
}

/// Matched-filter peak loss versus frequency error, analytic and measured on a
/// noiseless rotated copy of the prototype.
pub fn degradation_sweep(params: &ChirpParams, delta_fs: &[f64], sample_rate: f64) -> Result<Vec<DegradationPoint>> {
    let template = synthesize_prototype(params, sample_rate)?;
    let mu = delta_fs.iter().fold(0.0f64, |m, d| m.max(d.abs())) / params.duration;
    if params.alpha.abs() <= mu {
        return Err(Error::InvalidParameter(format!(
            "|α| = {} kHz/μs does not exceed |Δf|/T = {} kHz/μs across the sweep",
            units::khz_per_us(params.alpha.abs()),
            units::khz_per_us(mu)
        )));
    }
    delta_fs
        .par_iter()
        .map(|&df| {
            let mut rx = template.clone();
            rx.rotate(df);
            let corr = cross_correlate(&rx, &template)?;
            let window = (corr.lags[0], *corr.lags.last().expect("non-empty"));
            let peak = find_peak(&corr, window)?;
            Ok(DegradationPoint {
                delta_f: df,
                analytic_db: detection_loss(params.alpha, df, params.duration).db,
                measured_db: 2.0 * units::db(peak.interpolated_magnitude),
                predicted_shift: predicted_shift(params.alpha, df)?,
                measured_shift: peak.time,
            })
        })
        .collect()
}

/// CSV `delta_f_khz,analytic_db,measured_db,predicted_shift_us,measured_shift_us`.
pub fn write_degradation_csv(points: &[DegradationPoint], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "delta_f_khz,analytic_db,measured_db,predicted_shift_us,measured_shift_us")?;
    for p in points {
        writeln!(
            w,
            "{:.6},{:.6},{:.6},{:.6},{:.6}",
            units::khz(p.delta_f),
            p.analytic_db,
            p.measured_db,
            units::us(p.predicted_shift),
            units::us(p.measured_shift)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{from_khz_per_us, from_us};

    #[test]
    fn link_budget_example() {
        let b = link_budget(43.0, 164.0, 5.0, 53.0).unwrap();
        assert_eq!(b.received_power_dbm, -121.0);
        assert_eq!(b.noise_power_dbm, -116.0);
        assert_eq!(b.snr_db, -5.0);
        assert!(link_budget(f64::NAN, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn noiseless_channel_without_offset_is_a_filtered_copy() {
        let sub = ChirpParams::new(from_khz_per_us(0.481), 0.0, from_us(390.0)).unwrap();
        let x = synthesize_composite(&sub, 1.6e6).unwrap();
        let model = ChannelModel {
            background: Background::Silence,
            ..Default::default()
        };
        let rx = awgn_channel(&x, &model, f64::INFINITY, 0.0, 0.0, 1).unwrap();
        let lead = (model.lead * 1.6e6).round() as usize;
        assert!((rx.time_of(lead) - x.t0()).abs() < 1e-12);
        // Mid-burst samples pass the 100 kHz filter almost unchanged.
        for k in 300..320 {
            assert!((rx.samples()[lead + k] - x.samples()[k]).norm() < 0.05);
        }
    }

    #[test]
    fn fractional_delay_moves_the_correlation_peak() {
        let p = ChirpParams::new(from_khz_per_us(0.481), 0.0, from_us(390.0)).unwrap();
        let x = synthesize_prototype(&p, 1.6e6).unwrap();
        let model = ChannelModel {
            background: Background::Silence,
            ..Default::default()
        };
        let delay = 10.3 / 1.6e6;
        let rx = awgn_channel(&x, &model, f64::INFINITY, 0.0, delay, 1).unwrap();
        let corr = cross_correlate(&rx, &x).unwrap();
        let peak = find_peak(&corr, (corr.lags[0], *corr.lags.last().unwrap())).unwrap();
        assert!((peak.time - delay).abs() < 0.1 / 1.6e6, "{} vs {}", peak.time, delay);
    }

    #[test]
    fn same_seed_same_capture() {
        let p = ChirpParams::new(from_khz_per_us(0.481), 0.0, from_us(390.0)).unwrap();
        let x = synthesize_composite(&p, 1.6e6).unwrap();
        let m = ChannelModel::default();
        let a = awgn_channel(&x, &m, 0.0, 1e3, 3e-6, 9).unwrap();
        let b = awgn_channel(&x, &m, 0.0, 1e3, 3e-6, 9).unwrap();
        let c = awgn_channel(&x, &m, 0.0, 1e3, 3e-6, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(awgn_channel(&x, &m, 0.0, 0.0, 1.0, 9).is_err());
    }

    #[test]
    fn percentiles_count_misses_as_infinite() {
        let s = SnrSummary {
            snr_db: 0.0,
            n_trials: 10,
            detected_fraction: 0.8,
            frequency_errors: (1..=8).map(f64::from).collect(),
            timing_errors: (1..=8).map(f64::from).collect(),
        };
        assert_eq!(s.frequency_percentile(50.0, false), Some(5.0));
        assert_eq!(s.frequency_percentile(90.0, false), None);
        assert_eq!(s.frequency_percentile(100.0, true), Some(8.0));
        assert_eq!(s.fraction_within(4.0, false), 0.4);
        assert_eq!(s.fraction_within(4.0, true), 0.5);
        assert_eq!(s.cdf(false).last().unwrap().1, 0.8);
        assert_eq!(s.cdf(true).last().unwrap().1, 1.0);
    }

    #[test]
    fn config_file_round_trip() {
        let text = r#"
alpha_khz_per_us = 0.481
t_us = 390.0
sample_rate_hz = 1.6e6
snr_db_list = [5.0, -5.0]
n_trials = 10
df_min_hz = -20000.0
df_max_hz = 20000.0
seed = 7
"#;
        let cfg = SimConfigFile::parse(text).unwrap().into_config().unwrap();
        assert_eq!(cfg.n_trials, 10);
        assert_eq!(cfg.threshold, 0.15);
        assert!(SimConfigFile::parse("alpha_khz_per_us = 1\nbogus = 2").is_err());
    }
}
