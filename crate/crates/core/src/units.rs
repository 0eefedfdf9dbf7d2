//! Conversions between SI units used internally and the display units used
//! on the command line (kHz/μs, μs, kHz).

/// 1 kHz/μs expressed in Hz/s.
pub const HZ_PER_S_PER_KHZ_PER_US: f64 = 1e9;

pub fn khz_per_us(alpha_hz_per_s: f64) -> f64 {
    alpha_hz_per_s / HZ_PER_S_PER_KHZ_PER_US
}

pub fn from_khz_per_us(alpha: f64) -> f64 {
    alpha * HZ_PER_S_PER_KHZ_PER_US
}

pub fn us(seconds: f64) -> f64 {
    seconds * 1e6
}

pub fn from_us(micros: f64) -> f64 {
    micros * 1e-6
}

pub fn khz(hz: f64) -> f64 {
    hz * 1e-3
}

pub fn from_khz(k: f64) -> f64 {
    k * 1e3
}

pub fn db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(decibels: f64) -> f64 {
    10f64.powf(decibels / 10.0)
}
