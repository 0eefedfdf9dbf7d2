//! Uniformly sampled complex baseband signals and their on-disk formats.
//!
//! The binary format is raw little-endian `f64` interleaved I/Q pairs. Every
//! binary file is accompanied by a JSON sidecar (`<file>.json`) carrying
//! `{"sample_rate_hz", "n_samples", "t0_s"}`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    sample_rate: f64,
    /// Time of the first sample, seconds.
    t0: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, t0: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidParameter("signal has no samples".into()));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("t0 must be finite, got {t0}")));
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Time of sample `n`.
    pub fn time_of(&self, n: usize) -> f64 {
        self.t0 + n as f64 / self.sample_rate
    }

    /// Duration covered by the samples, `len / sample_rate`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Σ|s|² / fs, the Riemann approximation of ∫|s(t)|² dt.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.sample_rate
    }

    /// Mean |s|² per sample.
    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn conj(&self) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s.conj()).collect(),
            sample_rate: self.sample_rate,
            t0: self.t0,
        }
    }

    /// Multiplies by e^{j2πΔf t}, with t the absolute sample time.
    pub fn rotate(&mut self, delta_f: f64) {
        let fs = self.sample_rate;
        let t0 = self.t0;
        for (n, s) in self.samples.iter_mut().enumerate() {
            let t = t0 + n as f64 / fs;
            *s *= Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * delta_f * t);
        }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            sample_rate_hz: self.sample_rate,
            n_samples: self.samples.len(),
            t0_s: self.t0,
        }
    }

    /// Writes raw little-endian f64 I/Q to `path` and the JSON sidecar next to it.
    pub fn write_iq(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for s in &self.samples {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
        w.flush()?;
        let side = serde_json::to_string_pretty(&self.sidecar())
            .map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(sidecar_path(path), side)?;
        Ok(())
    }

    /// Reads a raw I/Q file and its sidecar.
    pub fn read_iq(path: &Path) -> Result<Self> {
        let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)
            .map_err(|e| Error::Format(format!("sidecar: {e}")))?;
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        if bytes.len() % 16 != 0 {
            return Err(Error::Format(format!(
                "I/Q file length {} is not a multiple of 16 bytes",
                bytes.len()
            )));
        }
        let samples: Vec<Complex64> = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        if samples.len() != side.n_samples {
            return Err(Error::Format(format!(
                "sidecar declares {} samples, file holds {}",
                side.n_samples,
                samples.len()
            )));
        }
        Self::new(samples, side.sample_rate_hz, side.t0_s)
    }

    /// CSV with columns `t,re,im` for inspection.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "t,re,im")?;
        for (n, s) in self.samples.iter().enumerate() {
            writeln!(w, "{:.12e},{:.17e},{:.17e}", self.time_of(n), s.re, s.im)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub t0_s: f64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
