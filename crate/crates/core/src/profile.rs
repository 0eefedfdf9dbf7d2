//! Named parameter profiles shipped with the library.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{MaskSegment, SpectralMask};
use crate::units;

pub const PROFILE_VERSION: u32 = 1;

const NBIOT: &str = include_str!("../profiles/nbiot.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskEntry {
    pub lower_khz: f64,
    pub upper_khz: Option<f64>,
    pub level_dbc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEntry {
    pub tx_power_dbm: f64,
    pub path_loss_db: f64,
    pub noise_figure_db: f64,
    pub bandwidth_dbhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationEntry {
    pub alpha_khz_per_us: f64,
    pub snr_db: Vec<f64>,
    pub n_trials: usize,
    pub threshold: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub version: u32,
    pub name: String,
    pub duration_us: f64,
    pub max_bandwidth_khz: f64,
    pub sigma: f64,
    pub delta_f_max_khz: f64,
    pub sample_rate_hz: f64,
    pub mask: Vec<MaskEntry>,
    pub link: LinkEntry,
    pub simulation: SimulationEntry,
}

impl Profile {
    pub fn parse(text: &str) -> Result<Self> {
        let p: Profile = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if p.version != PROFILE_VERSION {
            return Err(Error::Format(format!(
                "profile version {} is not supported (expected {PROFILE_VERSION})",
                p.version
            )));
        }
        p.mask()?;
        Ok(p)
    }

    pub fn nbiot() -> Self {
        Self::parse(NBIOT).expect("bundled profile parses")
    }

    /// Looks up a bundled profile by name.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "nbiot" => Ok(Self::nbiot()),
            other => Err(Error::InvalidParameter(format!("unknown profile '{other}'"))),
        }
    }

    /// Composite duration, s.
    pub fn duration(&self) -> f64 {
        units::from_us(self.duration_us)
    }

    /// Length of each half of the composite, s.
    pub fn half_duration(&self) -> f64 {
        self.duration() / 2.0
    }

    pub fn max_bandwidth(&self) -> f64 {
        units::from_khz(self.max_bandwidth_khz)
    }

    pub fn delta_f_max(&self) -> f64 {
        units::from_khz(self.delta_f_max_khz)
    }

    pub fn mask(&self) -> Result<SpectralMask> {
        SpectralMask::new(
            self.mask
                .iter()
                .map(|m| MaskSegment {
                    lower: units::from_khz(m.lower_khz),
                    upper: m.upper_khz.map(units::from_khz),
                    level_db: m.level_dbc,
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_profile_matches_builtin_mask() {
        let p = Profile::nbiot();
        assert_eq!(p.mask().unwrap(), SpectralMask::nbiot());
        assert_eq!(p.half_duration(), units::from_us(390.0));
        assert_eq!(p.sample_rate_hz, 1.6e6);
    }

    #[test]
    fn rejects_unknown_version_and_name() {
        let text = NBIOT.replace("version = 1", "version = 7");
        assert!(Profile::parse(&text).is_err());
        assert!(Profile::named("lte").is_err());
    }
}
