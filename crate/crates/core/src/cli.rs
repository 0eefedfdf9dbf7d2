//! Command-line front end. Every subcommand prints a one-line JSON summary on
//! stdout; exit status is 0 on success, 1 on a domain error and 2 on a usage
//! error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::chirp::{synthesize_composite, synthesize_prototype, ChirpParams};
use crate::error::{Error, Result};
use crate::montecarlo::{self, SimConfig, SimConfigFile};
use crate::optimize::{optimize_alpha, ConstraintSet};
use crate::profile::Profile;
use crate::signal::ComplexSignal;
use crate::spectral::{self, ParamGrid, FINE_ZERO_PAD, MASK_RBW_HZ};
use crate::sync::{self, DetectionReport, EstimationMode, PairedPeaks, SearchConfig};
use crate::units::{self, from_khz, from_khz_per_us, from_us};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "chirpsync", version, about = "Chirp waveform design and paired-peak synchronization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ChirpArgs {
    /// Chirp rate, kHz/μs.
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Linear-phase coefficient, kHz.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    /// Duration, μs (of each half with --composite).
    #[arg(long)]
    t_us: f64,
    #[arg(long, default_value_t = 1.6e6)]
    fs: f64,
}

impl ChirpArgs {
    fn params(&self) -> Result<ChirpParams> {
        ChirpParams::new(from_khz_per_us(self.alpha), from_khz(self.beta), from_us(self.t_us))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a prototype or composite and write it as IQ.
    Waveform {
        #[command(flatten)]
        w: ChirpArgs,
        /// Up-chirp followed by its conjugate.
        #[arg(long)]
        composite: bool,
        #[arg(long, default_value = "waveform.iq")]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Power spectrum, occupied bandwidth and mask check.
    Spectrum {
        #[command(flatten)]
        w: ChirpArgs,
        #[arg(long, default_value_t = 0.01)]
        sigma: f64,
        #[arg(long, default_value = "nbiot")]
        profile: String,
        /// Spectrum CSV (RBW-integrated, dBc).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        mask_csv: Option<PathBuf>,
    },
    /// Occupied-bandwidth contour over an (α, β) grid.
    Contour {
        #[arg(long, default_value_t = 200.0)]
        w_khz: f64,
        #[arg(long, default_value_t = 0.01)]
        sigma: f64,
        #[arg(long)]
        t_us: f64,
        #[arg(long, default_value_t = 1.6e6)]
        fs: f64,
        /// Grid extent, kHz/μs. Defaults to 3W/T.
        #[arg(long)]
        alpha_max: Option<f64>,
        #[arg(long, default_value_t = 121)]
        alpha_points: usize,
        #[arg(long, default_value_t = 400.0)]
        beta_max_khz: f64,
        #[arg(long, default_value_t = 41)]
        beta_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest |α| satisfying the frequency-error, bandwidth and mask constraints.
    Optimize {
        #[arg(long, default_value = "nbiot")]
        profile: String,
        /// Waveform length, μs. Defaults to the profile's.
        #[arg(long)]
        t_us: Option<f64>,
        #[arg(long)]
        df_max_khz: Option<f64>,
        #[arg(long)]
        w_khz: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Feasible-region CSV.
        #[arg(long)]
        region: Option<PathBuf>,
    },
    /// Paired-peak detection on an IQ capture.
    Detect {
        #[arg(long)]
        input: PathBuf,
        /// Sub-waveform chirp rate, kHz/μs.
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Sub-waveform length, μs.
        #[arg(long)]
        t_us: f64,
        #[arg(long, default_value_t = 20.0)]
        df_max_khz: f64,
        #[arg(long, default_value_t = sync::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Start-to-start spacing of separate chirps, μs; omit for a composite.
        #[arg(long)]
        period_us: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Writes `<prefix>_up.csv` and `<prefix>_down.csv`.
        #[arg(long)]
        corr_prefix: Option<PathBuf>,
    },
    /// Frequency error from a measured peak distance.
    Estimate {
        #[arg(long)]
        d_us: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Half-length of the composite, μs.
        #[arg(long, conflicts_with = "period_us", required_unless_present = "period_us")]
        half_us: Option<f64>,
        #[arg(long)]
        period_us: Option<f64>,
    },
    /// Monte-Carlo evaluation of the estimator.
    Simulate {
        /// TOML config; without it the profile's simulation settings are used.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "nbiot")]
        profile: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated SNRs in dB.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr: Option<Vec<f64>>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Correlation-peak loss versus frequency error, analytic and measured.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        t_us: f64,
        #[arg(long, default_value_t = 1.6e6)]
        fs: f64,
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        df_min_khz: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        df_max_khz: f64,
        #[arg(long, default_value_t = 0.5)]
        df_step_khz: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SNR from transmit power, path loss, noise figure and bandwidth.
    Linkbudget {
        /// Transmit power, dBm.
        #[arg(long, default_value_t = 43.0, allow_hyphen_values = true)]
        p: f64,
        /// Path loss, dB.
        #[arg(long, default_value_t = 164.0, allow_hyphen_values = true)]
        delta: f64,
        /// Noise figure, dB.
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        xi: f64,
        #[arg(long, default_value_t = 53.0, allow_hyphen_values = true)]
        w_dbhz: f64,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match run(cli.command) {
        Ok((summary, code)) => {
            let _ = writeln!(out, "{summary}");
            code
        }
        Err(e) => {
            let code = match e {
                Error::Format(_) | Error::InvalidParameter(_) => EXIT_USAGE,
                _ => EXIT_DOMAIN,
            };
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}

pub fn main() -> i32 {
    dispatch(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn write_json(path: &Option<PathBuf>, v: &impl serde::Serialize) -> Result<()> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(p, text + "\n")?;
    }
    Ok(())
}

fn to_value(v: &impl serde::Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Format(e.to_string()))
}

fn run(cmd: Command) -> Result<(Value, i32)> {
    let ok = |v: Value| Ok((v, EXIT_OK));
    match cmd {
        Command::Waveform { w, composite, out, csv } => {
            let p = w.params()?;
            let sig = if composite {
                synthesize_composite(&p, w.fs)?
            } else {
                synthesize_prototype(&p, w.fs)?
            };
            sig.write_iq(&out)?;
            if let Some(c) = &csv {
                sig.write_csv(c)?;
            }
            ok(json!({
                "command": "waveform",
                "samples": sig.len(),
                "sample_rate_hz": sig.sample_rate(),
                "t0_us": units::us(sig.t0()),
                "energy": sig.energy(),
                "out": out,
            }))
        }
        Command::Spectrum { w, sigma, profile, out, mask_csv } => {
            let p = w.params()?;
            let mask = Profile::named(&profile)?.mask()?;
            let obw = spectral::occupied_bandwidth(&p, sigma, w.fs)?;
            let report = spectral::mask_check(&p, &mask, w.fs)?;
            if let Some(path) = &out {
                spectral::power_spectrum(&p, w.fs, FINE_ZERO_PAD)?.write_csv(path, MASK_RBW_HZ)?;
            }
            if let Some(path) = &mask_csv {
                mask.write_csv(path)?;
            }
            ok(json!({
                "command": "spectrum",
                "occupied_bandwidth_khz": units::khz(obw),
                "sigma": sigma,
                "mask_pass": report.pass,
                "worst_margin_db": report.worst_margin_db,
                "worst_freq_khz": units::khz(report.worst_freq_hz),
            }))
        }
        Command::Contour {
            w_khz,
            sigma,
            t_us,
            fs,
            alpha_max,
            alpha_points,
            beta_max_khz,
            beta_points,
            out,
        } => {
            let w = from_khz(w_khz);
            let t = from_us(t_us);
            let grid = ParamGrid {
                alpha_max: alpha_max.map(from_khz_per_us).unwrap_or(3.0 * w / t),
                alpha_points,
                beta_max: from_khz(beta_max_khz),
                beta_points,
            };
            let region = spectral::bandwidth_contour(w, sigma, t, fs, &grid)?;
            if let Some(path) = &out {
                region.write_csv(path)?;
            }
            ok(json!({
                "command": "contour",
                "points": region.points.len(),
                "boundary_points": region.boundary.len(),
                "alpha_extremum_khz_per_us": region.axis_alpha_extremum.map(units::khz_per_us),
            }))
        }
        Command::Optimize { profile, t_us, df_max_khz, w_khz, out, region } => {
            let prof = Profile::named(&profile)?;
            let t = t_us.map(from_us).unwrap_or(prof.duration());
            let mut cs = ConstraintSet::from_profile(&prof, t)?;
            if let Some(df) = df_max_khz {
                cs.delta_f_max = from_khz(df);
            }
            if let Some(wk) = w_khz {
                cs.max_bandwidth = from_khz(wk);
                cs.grid = crate::optimize::default_grid(cs.max_bandwidth, t);
            }
            cs.validate()?;
            let best = optimize_alpha(&cs)?;
            let report = best.report();
            write_json(&out, &report)?;
            if let Some(path) = &region {
                crate::optimize::feasible_region(&cs)?.write_csv(path)?;
            }
            let mut v = to_value(&report)?;
            v["command"] = json!("optimize");
            ok(v)
        }
        Command::Detect {
            input,
            alpha,
            t_us,
            df_max_khz,
            threshold,
            period_us,
            out,
            corr_prefix,
        } => {
            let rx = ComplexSignal::read_iq(&input)?;
            let sub = ChirpParams::new(from_khz_per_us(alpha), 0.0, from_us(t_us))?;
            let cfg = SearchConfig {
                delta_f_max: from_khz(df_max_khz),
                threshold,
                separation: period_us.map(from_us),
            };
            if let Some(prefix) = &corr_prefix {
                let (up, down) = sync::correlate_both(&rx, &sub)?;
                let name = |s: &str| {
                    let mut p = prefix.clone().into_os_string();
                    p.push(s);
                    PathBuf::from(p)
                };
                up.write_csv(&name("_up.csv"))?;
                down.write_csv(&name("_down.csv"))?;
            }
            let result = sync::synchronize(&rx, &sub, &cfg);
            if let Err(e) = &result {
                if !matches!(e, Error::NotDetected { .. }) {
                    return Err(result.unwrap_err());
                }
            }
            let report = DetectionReport::from_result(threshold, &result);
            write_json(&out, &report)?;
            let mut v = to_value(&report)?;
            v["command"] = json!("detect");
            Ok((v, if report.detected { EXIT_OK } else { EXIT_DOMAIN }))
        }
        Command::Estimate { d_us, alpha, half_us, period_us } => {
            let mode = match (half_us, period_us) {
                (Some(h), None) => EstimationMode::Composite { half_duration: from_us(h) },
                (None, Some(p)) => EstimationMode::Alternate { period: from_us(p) },
                _ => return Err(Error::ModeMismatch("give exactly one of --half-us and --period-us".into())),
            };
            let peaks = PairedPeaks {
                t1: 0.0,
                t2: from_us(d_us),
                d_hat: from_us(d_us),
                up_magnitude: f64::NAN,
                down_magnitude: f64::NAN,
                joint_metric: f64::NAN,
                nominal_separation: mode.nominal(),
                alpha_dot: from_khz_per_us(alpha),
            };
            let est = sync::estimate_frequency_error(&peaks, mode, from_khz_per_us(alpha))?;
            ok(json!({
                "command": "estimate",
                "delta_f_hat_hz": est.delta_f_hat,
                "tau_hat_us": units::us(est.tau_hat),
            }))
        }
        Command::Simulate { config, profile, trials, seed, snr, out_dir } => {
            let mut cfg = match &config {
                Some(path) => SimConfigFile::parse(&std::fs::read_to_string(path)?)?.into_config()?,
                None => profile_sim_config(&Profile::named(&profile)?)?,
            };
            if let Some(n) = trials {
                cfg.n_trials = n;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(list) = snr {
                cfg.snr_db = list;
            }
            let report = montecarlo::run_trials(&cfg)?;
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir)?;
                report.write_trials_csv(&dir.join("trials.csv"))?;
                report.write_cdf_csv(&dir.join("cdf.csv"))?;
                report.write_percentiles_csv(&dir.join("percentiles.csv"))?;
            }
            let per_snr: Vec<Value> = report
                .summaries
                .iter()
                .map(|s| {
                    json!({
                        "snr_db": s.snr_db,
                        "detected_fraction": s.detected_fraction,
                        "within_400hz": s.fraction_within(400.0, false),
                        "timing_p95_us": s.timing_percentile(95.0, false).map(units::us),
                    })
                })
                .collect();
            ok(json!({
                "command": "simulate",
                "n_trials": cfg.n_trials,
                "seed": cfg.master_seed,
                "results": per_snr,
            }))
        }
        Command::Sweep {
            alpha,
            t_us,
            fs,
            df_min_khz,
            df_max_khz,
            df_step_khz,
            out,
        } => {
            if !(df_step_khz > 0.0) || df_max_khz < df_min_khz {
                return Err(Error::InvalidParameter("sweep needs df_min ≤ df_max and a positive step".into()));
            }
            let p = ChirpParams::new(from_khz_per_us(alpha), 0.0, from_us(t_us))?;
            let steps = ((df_max_khz - df_min_khz) / df_step_khz + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=steps).map(|i| from_khz(df_min_khz + i as f64 * df_step_khz)).collect();
            let points = montecarlo::degradation_sweep(&p, &grid, fs)?;
            if let Some(path) = &out {
                montecarlo::write_degradation_csv(&points, path)?;
            }
            let worst = points
                .iter()
                .map(|p| (p.measured_db - p.analytic_db).abs())
                .fold(0.0f64, f64::max);
            ok(json!({
                "command": "sweep",
                "points": points.len(),
                "max_abs_deviation_db": worst,
            }))
        }
        Command::Linkbudget { p, delta, xi, w_dbhz } => {
            let b = montecarlo::link_budget(p, delta, xi, w_dbhz)?;
            ok(json!({
                "command": "linkbudget",
                "received_power_dbm": b.received_power_dbm,
                "noise_power_dbm": b.noise_power_dbm,
                "snr_db": b.snr_db,
            }))
        }
    }
}

/// Simulation settings of a profile: the optimized sub-waveform rate over the
/// half-length, frequency errors uniform in ±|Δf_max|.
pub fn profile_sim_config(p: &Profile) -> Result<SimConfig> {
    let cfg = SimConfig {
        sub_params: ChirpParams::new(from_khz_per_us(p.simulation.alpha_khz_per_us), 0.0, p.half_duration())?,
        sample_rate: p.sample_rate_hz,
        snr_db: p.simulation.snr_db.clone(),
        n_trials: p.simulation.n_trials,
        df_min: -p.delta_f_max(),
        df_max: p.delta_f_max(),
        master_seed: p.simulation.seed,
        threshold: p.simulation.threshold,
        channel: montecarlo::ChannelModel::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}
