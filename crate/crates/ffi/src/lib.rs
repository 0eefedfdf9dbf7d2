//! C ABI over the chirpsync library.
//!
//! Every fallible function returns a [`CsStatus`]; on failure the message is
//! available from [`cs_last_error_message`] on the same thread. Signals are
//! opaque handles released with [`cs_signal_free`]. Units are SI.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use chirpsync::chirp::{synthesize_composite, synthesize_prototype, ChirpParams};
use chirpsync::montecarlo::{awgn_channel, link_budget, ChannelModel};
use chirpsync::optimize::{optimize_alpha, Constraint, ConstraintSet};
use chirpsync::profile::Profile;
use chirpsync::spectral::{mask_check, occupied_bandwidth};
use chirpsync::sync::{synchronize, SearchConfig};
use chirpsync::{ComplexSignal, Error};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    InvalidParameter = 1,
    Aliasing = 2,
    SampleRateMismatch = 3,
    OutsideSupport = 4,
    ZeroChirpRate = 5,
    EmptyWindow = 6,
    ContourExitsGrid = 7,
    Infeasible = 8,
    NotDetected = 9,
    ModeMismatch = 10,
    Io = 11,
    Format = 12,
    NullPointer = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

impl From<&Error> for CsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => CsStatus::InvalidParameter,
            Error::Aliasing { .. } => CsStatus::Aliasing,
            Error::SampleRateMismatch(..) => CsStatus::SampleRateMismatch,
            Error::OutsideSupport { .. } => CsStatus::OutsideSupport,
            Error::ZeroChirpRate => CsStatus::ZeroChirpRate,
            Error::EmptyWindow => CsStatus::EmptyWindow,
            Error::ContourExitsGrid(_) => CsStatus::ContourExitsGrid,
            Error::Infeasible(_) => CsStatus::Infeasible,
            Error::NotDetected { .. } => CsStatus::NotDetected,
            Error::ModeMismatch(_) => CsStatus::ModeMismatch,
            Error::Io(_) => CsStatus::Io,
            Error::Format(_) => CsStatus::Format,
        }
    }
}

/// Opaque sampled signal.
pub struct CsSignal(ComplexSignal);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsMaskReport {
    pub pass: bool,
    pub worst_margin_db: f64,
    pub worst_freq_hz: f64,
}

/// Binding constraint: 1, 2 or 3 for S1, S2, S3.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsOptimum {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub binding_constraint: i32,
    pub occupied_bandwidth: f64,
    pub mask_margin_db: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsSyncResult {
    pub t1: f64,
    pub t2: f64,
    pub d_hat: f64,
    pub joint_metric: f64,
    pub delta_f_hat: f64,
    pub corrected_timing: f64,
    pub timing_discrepancy: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsLinkBudget {
    pub received_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub snr_db: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), CsFail>) -> CsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err(CsFail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CsStatus::Panic
        }
    }
}

struct CsFail(CsStatus, String);

impl From<Error> for CsFail {
    fn from(e: Error) -> Self {
        CsFail(CsStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> CsFail {
    CsFail(CsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, CsFail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<&'static Path, CsFail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| CsFail(CsStatus::InvalidParameter, "path is not UTF-8".into()))?;
    Ok(Path::new(s))
}

fn publish(out: &mut *mut CsSignal, s: ComplexSignal) {
    *out = Box::into_raw(Box::new(CsSignal(s)));
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Samples ⟨alpha, beta, duration⟩ at `sample_rate`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn cs_chirp_prototype(
    alpha: f64,
    beta: f64,
    duration: f64,
    sample_rate: f64,
    out: *mut *mut CsSignal,
) -> CsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = ChirpParams::new(alpha, beta, duration)?;
        publish(out, synthesize_prototype(&p, sample_rate)?);
        Ok(())
    })
}

/// Up-chirp ⟨alpha, beta, half_duration⟩ followed by its conjugate pair.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn cs_chirp_composite(
    alpha: f64,
    beta: f64,
    half_duration: f64,
    sample_rate: f64,
    out: *mut *mut CsSignal,
) -> CsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = ChirpParams::new(alpha, beta, half_duration)?;
        publish(out, synthesize_composite(&p, sample_rate)?);
        Ok(())
    })
}

/// Builds a signal from `n` interleaved (re, im) pairs.
///
/// # Safety
/// `interleaved` must point to `2 * n` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_signal_from_samples(
    interleaved: *const f64,
    n: usize,
    sample_rate: f64,
    t0: f64,
    out: *mut *mut CsSignal,
) -> CsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if interleaved.is_null() {
            return Err(null("samples"));
        }
        let raw = std::slice::from_raw_parts(interleaved, 2 * n);
        let s = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        publish(out, ComplexSignal::new(s, sample_rate, t0)?);
        Ok(())
    })
}

/// Reads an IQ file and its `.json` sidecar.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_signal_read_iq(path: *const c_char, out: *mut *mut CsSignal) -> CsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        publish(out, ComplexSignal::read_iq(path_arg(path)?)?);
        Ok(())
    })
}

/// Writes an IQ file and its `.json` sidecar.
///
/// # Safety
/// `signal` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cs_signal_write_iq(signal: *const CsSignal, path: *const c_char) -> CsStatus {
    guard(|| {
        let s = signal.as_ref().ok_or_else(|| null("signal"))?;
        s.0.write_iq(path_arg(path)?)?;
        Ok(())
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `signal` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_signal_len(signal: *const CsSignal) -> usize {
    signal.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `signal` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_signal_sample_rate(signal: *const CsSignal) -> f64 {
    signal.as_ref().map_or(f64::NAN, |s| s.0.sample_rate())
}

/// # Safety
/// `signal` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_signal_t0(signal: *const CsSignal) -> f64 {
    signal.as_ref().map_or(f64::NAN, |s| s.0.t0())
}

/// Copies the samples as interleaved (re, im) into `buf`, which holds
/// `capacity` complex values.
///
/// # Safety
/// `signal` must be a live handle; `buf` must point to `2 * capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_signal_copy_samples(signal: *const CsSignal, buf: *mut f64, capacity: usize) -> CsStatus {
    guard(|| {
        let s = signal.as_ref().ok_or_else(|| null("signal"))?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if capacity < s.0.len() {
            return Err(CsFail(
                CsStatus::BufferTooSmall,
                format!("buffer holds {capacity} samples, signal has {}", s.0.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, 2 * s.0.len());
        for (d, v) in dst.chunks_exact_mut(2).zip(s.0.samples()) {
            d[0] = v.re;
            d[1] = v.im;
        }
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `signal` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_signal_free(signal: *mut CsSignal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

/// Smallest symmetric band holding 1 − sigma of the energy, Hz.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_occupied_bandwidth(
    alpha: f64,
    beta: f64,
    duration: f64,
    sigma: f64,
    sample_rate: f64,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = occupied_bandwidth(&ChirpParams::new(alpha, beta, duration)?, sigma, sample_rate)?;
        Ok(())
    })
}

/// Checks the waveform against the bundled narrowband mask.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_mask_check_nbiot(
    alpha: f64,
    beta: f64,
    duration: f64,
    sample_rate: f64,
    out: *mut CsMaskReport,
) -> CsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let mask = Profile::nbiot().mask()?;
        let r = mask_check(&ChirpParams::new(alpha, beta, duration)?, &mask, sample_rate)?;
        *out = CsMaskReport {
            pass: r.pass,
            worst_margin_db: r.worst_margin_db,
            worst_freq_hz: r.worst_freq_hz,
        };
        Ok(())
    })
}

/// Optimal |α| under the bundled profile at waveform length `duration`.
/// A non-positive `delta_f_max` keeps the profile's value.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_optimize_nbiot(duration: f64, delta_f_max: f64, out: *mut CsOptimum) -> CsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let mut cs = ConstraintSet::from_profile(&Profile::nbiot(), duration)?;
        if delta_f_max > 0.0 {
            cs.delta_f_max = delta_f_max;
        }
        let best = optimize_alpha(&cs)?;
        *out = CsOptimum {
            alpha_hat: best.alpha_hat,
            beta_hat: best.beta_hat,
            binding_constraint: match best.binding_constraint {
                Constraint::S1 => 1,
                Constraint::S2 => 2,
                Constraint::S3 => 3,
            },
            occupied_bandwidth: best.occupied_bandwidth,
            mask_margin_db: best.mask_margin_db,
        };
        Ok(())
    })
}

/// Paired-peak detection and estimation. `separation <= 0` means back-to-back
/// composite halves.
///
/// # Safety
/// `signal` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_synchronize(
    signal: *const CsSignal,
    alpha_dot: f64,
    sub_duration: f64,
    delta_f_max: f64,
    threshold: f64,
    separation: f64,
    out: *mut CsSyncResult,
) -> CsStatus {
    guard(|| {
        let s = signal.as_ref().ok_or_else(|| null("signal"))?;
        let out = out_ref(out, "out")?;
        let sub = ChirpParams::new(alpha_dot, 0.0, sub_duration)?;
        let cfg = SearchConfig {
            delta_f_max,
            threshold,
            separation: (separation > 0.0).then_some(separation),
        };
        let (p, e, t) = synchronize(&s.0, &sub, &cfg)?;
        *out = CsSyncResult {
            t1: p.t1,
            t2: p.t2,
            d_hat: p.d_hat,
            joint_metric: p.joint_metric,
            delta_f_hat: e.delta_f_hat,
            corrected_timing: t.midpoint,
            timing_discrepancy: t.discrepancy,
        };
        Ok(())
    })
}

/// Passes `signal` through the default channel: delay, frequency error, AWGN
/// at `snr_db` in 200 kHz (`INFINITY` disables noise), random-data background
/// and the 200 kHz receive filter.
///
/// # Safety
/// `signal` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_awgn_channel(
    signal: *const CsSignal,
    snr_db: f64,
    delta_f: f64,
    delay: f64,
    seed: u64,
    out: *mut *mut CsSignal,
) -> CsStatus {
    guard(|| {
        let s = signal.as_ref().ok_or_else(|| null("signal"))?;
        let out = out_ref(out, "out")?;
        publish(out, awgn_channel(&s.0, &ChannelModel::default(), snr_db, delta_f, delay, seed)?);
        Ok(())
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_link_budget(
    tx_power_dbm: f64,
    path_loss_db: f64,
    noise_figure_db: f64,
    bandwidth_dbhz: f64,
    out: *mut CsLinkBudget,
) -> CsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let b = link_budget(tx_power_dbm, path_loss_db, noise_figure_db, bandwidth_dbhz)?;
        *out = CsLinkBudget {
            received_power_dbm: b.received_power_dbm,
            noise_power_dbm: b.noise_power_dbm,
            snr_db: b.snr_db,
        };
        Ok(())
    })
}
