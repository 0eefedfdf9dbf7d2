//! Constrained maximization of |α|.
//!
//! Three constraints restrict the prototype ⟨α, β, T⟩:
//!
//! * S1, frequency-error tolerance: |α| > |Δf_max| / T, so the shifted peak
//!   stays inside the waveform;
//! * S2, occupied bandwidth: at least 1−σ of the energy within ±W/2;
//! * S3, emission mask.
//!
//! The search scans a symmetric (α, β) grid for S1 ∧ S2 ∧ S3, then bisects the
//! edge of every feasible β-slice and keeps the largest |α|, breaking ties
//! toward β = 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chirp::ChirpParams;
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::spectral::{
    self, bisect_edge, evaluate_symmetric, FeasibleRegion, ParamGrid, RegionKind, SpectralMask,
    ALPHA_TOLERANCE,
};
use crate::units;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    /// |Δf_max|, Hz.
    pub delta_f_max: f64,
    /// Waveform duration T, s.
    pub duration: f64,
    /// Occupied-bandwidth limit W, Hz.
    pub max_bandwidth: f64,
    /// Out-of-band energy fraction σ.
    pub sigma: f64,
    pub mask: SpectralMask,
    pub sample_rate: f64,
    pub grid: ParamGrid,
}

/// Default grid: |α| ≤ 3W/T in 61 steps per side, |β| ≤ 2W in 20 steps per side.
pub fn default_grid(max_bandwidth: f64, duration: f64) -> ParamGrid {
    ParamGrid {
        alpha_max: 3.0 * max_bandwidth / duration,
        alpha_points: 2 * 60 + 1,
        beta_max: 2.0 * max_bandwidth,
        beta_points: 2 * 20 + 1,
    }
}

impl ConstraintSet {
    pub fn new(
        delta_f_max: f64,
        duration: f64,
        max_bandwidth: f64,
        sigma: f64,
        mask: SpectralMask,
        sample_rate: f64,
    ) -> Result<Self> {
        let cs = Self {
            delta_f_max,
            duration,
            max_bandwidth,
            sigma,
            mask,
            sample_rate,
            grid: default_grid(max_bandwidth, duration),
        };
        cs.validate()?;
        Ok(cs)
    }

    /// Constraint set of a named profile at waveform length `duration`.
    pub fn from_profile(profile: &Profile, duration: f64) -> Result<Self> {
        Self::new(
            profile.delta_f_max(),
            duration,
            profile.max_bandwidth(),
            profile.sigma,
            profile.mask()?,
            profile.sample_rate_hz,
        )
    }

    pub fn with_grid(mut self, grid: ParamGrid) -> Result<Self> {
        self.grid = grid;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta_f_max", self.delta_f_max),
            ("duration", self.duration),
            ("max_bandwidth", self.max_bandwidth),
            ("sample_rate", self.sample_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::InvalidParameter(format!("sigma must lie in (0, 1), got {}", self.sigma)));
        }
        if self.max_bandwidth > self.sample_rate / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "bandwidth limit {} Hz exceeds half the sample rate",
                self.max_bandwidth
            )));
        }
        self.mask.validate()?;
        self.grid.validate()?;
        let needed = 3.0 * self.max_bandwidth / self.duration;
        if self.grid.alpha_max < needed * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "grid reaches |α| = {} kHz/μs, needs at least {} kHz/μs",
                units::khz_per_us(self.grid.alpha_max),
                units::khz_per_us(needed)
            )));
        }
        Ok(())
    }

    /// |Δf_max| / T.
    pub fn s1_threshold(&self) -> f64 {
        self.delta_f_max / self.duration
    }

    pub fn params(&self, alpha: f64, beta: f64) -> Result<ChirpParams> {
        ChirpParams::new(alpha, beta, self.duration)
    }
}

pub fn s1_feasible(alpha: f64, cs: &ConstraintSet) -> bool {
    alpha.abs() > cs.s1_threshold()
}

/// Occupied bandwidth within W. Points whose sweep cannot be sampled at the
/// constraint sample rate lie far outside any W ≤ fs/2 and are infeasible.
pub fn s2_feasible(params: &ChirpParams, cs: &ConstraintSet) -> Result<bool> {
    if cs.sample_rate < params.min_sample_rate() {
        return Ok(false);
    }
    spectral::within_bandwidth(params, cs.max_bandwidth, cs.sigma, cs.sample_rate)
}

pub fn s3_feasible(params: &ChirpParams, cs: &ConstraintSet) -> Result<bool> {
    if cs.sample_rate < params.min_sample_rate() {
        return Ok(false);
    }
    Ok(spectral::mask_check(params, &cs.mask, cs.sample_rate)?.pass)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    S1,
    S2,
    S3,
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Constraint::S1 => "S1",
            Constraint::S2 => "S2",
            Constraint::S3 => "S3",
        };
        f.write_str(s)
    }
}

/// First violated constraint at ⟨α, β⟩, or `None` when all hold.
pub fn violated(alpha: f64, beta: f64, cs: &ConstraintSet) -> Result<Option<Constraint>> {
    if !s1_feasible(alpha, cs) {
        return Ok(Some(Constraint::S1));
    }
    let p = cs.params(alpha, beta)?;
    if !s2_feasible(&p, cs)? {
        return Ok(Some(Constraint::S2));
    }
    if !s3_feasible(&p, cs)? {
        return Ok(Some(Constraint::S3));
    }
    Ok(None)
}

pub fn feasible(alpha: f64, beta: f64, cs: &ConstraintSet) -> Result<bool> {
    Ok(violated(alpha, beta, cs)?.is_none())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPair {
    /// Positive representative α̂, Hz/s.
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// ⟨+α̂, β̂⟩ and ⟨−α̂, β̂⟩.
    pub pair: [ChirpParams; 2],
    /// Constraint violated just above α̂ on the β̂ slice.
    pub binding_constraint: Constraint,
    pub tolerance: f64,
    pub grid: ParamGrid,
    pub occupied_bandwidth: f64,
    pub mask_margin_db: f64,
}

/// JSON report with display units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub alpha_hat_khz_per_us: f64,
    pub beta_hat_khz: f64,
    pub binding_constraint: String,
    pub tolerance: f64,
    pub grid_spec: GridSpec,
    pub occupied_bandwidth_khz: f64,
    pub mask_margin_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha_max_khz_per_us: f64,
    pub alpha_points: usize,
    pub beta_max_khz: f64,
    pub beta_points: usize,
}

impl OptimalPair {
    pub fn report(&self) -> OptimizeReport {
        OptimizeReport {
            alpha_hat_khz_per_us: units::khz_per_us(self.alpha_hat),
            beta_hat_khz: units::khz(self.beta_hat),
            binding_constraint: self.binding_constraint.to_string(),
            tolerance: units::khz_per_us(self.tolerance),
            grid_spec: GridSpec {
                alpha_max_khz_per_us: units::khz_per_us(self.grid.alpha_max),
                alpha_points: self.grid.alpha_points,
                beta_max_khz: units::khz(self.grid.beta_max),
                beta_points: self.grid.beta_points,
            },
            occupied_bandwidth_khz: units::khz(self.occupied_bandwidth),
            mask_margin_db: self.mask_margin_db,
        }
    }
}

/// The S1 ∧ S2 ∧ S3 region on the constraint grid.
pub fn feasible_region(cs: &ConstraintSet) -> Result<FeasibleRegion> {
    cs.validate()?;
    let member = evaluate_symmetric(&cs.grid, |a, b| feasible(a, b, cs))?;
    FeasibleRegion::from_mask(RegionKind::Intersection, cs.grid, &member)
}

/// Refined largest feasible α ≥ 0 on one β slice, given the grid membership of
/// that slice's α ≥ 0 half.
fn refine_slice(cs: &ConstraintSet, beta: f64, alphas: &[f64], member: &[bool]) -> Result<Option<f64>> {
    let Some(last) = (0..alphas.len()).rev().find(|&i| member[i]) else {
        return Ok(None);
    };
    if last + 1 == alphas.len() {
        return Err(Error::ContourExitsGrid(format!(
            "feasible point at the α edge of the grid (β = {:.1} kHz)",
            units::khz(beta)
        )));
    }
    let edge = bisect_edge(alphas[last], alphas[last + 1], ALPHA_TOLERANCE, |a| {
        feasible(a, beta, cs)
    })?;
    Ok(Some(edge))
}

pub fn optimize_alpha(cs: &ConstraintSet) -> Result<OptimalPair> {
    let region = feasible_region(cs)?;
    let alphas_all = cs.grid.alphas();
    let betas_all = cs.grid.betas();
    let (na, nb) = (alphas_all.len(), betas_all.len());
    let alphas = &alphas_all[na / 2..];

    if region.points.is_empty() {
        let envelope = (0..nb)
            .flat_map(|ib| (na / 2..na).map(move |ia| (ia, ib)))
            .filter_map(|(ia, ib)| {
                let p = cs.params(alphas_all[ia], betas_all[ib]).ok()?;
                let ok = s2_feasible(&p, cs).ok()? && s3_feasible(&p, cs).ok()?;
                ok.then_some(alphas_all[ia])
            })
            .fold(0.0f64, f64::max);
        return Err(Error::Infeasible(format!(
            "S1 requires |α| > {:.4} kHz/μs but S2 ∩ S3 allows at most {:.4} kHz/μs on the grid",
            units::khz_per_us(cs.s1_threshold()),
            units::khz_per_us(envelope)
        )));
    }

    // Membership of the α ≥ 0, β ≥ 0 quadrant, slice by slice.
    let slices: Vec<(f64, Vec<bool>)> = (nb / 2..nb)
        .map(|ib| {
            let beta = betas_all[ib];
            let m = alphas.iter().map(|&a| region.contains(a, beta)).collect();
            (beta, m)
        })
        .collect();
    let edges: Vec<Option<f64>> = slices
        .par_iter()
        .map(|(beta, m)| refine_slice(cs, *beta, alphas, m))
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, f64)> = None;
    for ((beta, _), edge) in slices.iter().zip(&edges) {
        let Some(a) = *edge else { continue };
        best = match best {
            // Slices are visited by increasing |β|; only a clear improvement wins.
            Some((ba, bb)) if a <= ba + ALPHA_TOLERANCE => Some((ba, bb)),
            _ => Some((a, *beta)),
        };
    }
    let (alpha_hat, beta_hat) = best.expect("non-empty region has a feasible slice");

    let binding = violated(alpha_hat + 2.0 * ALPHA_TOLERANCE, beta_hat, cs)?.unwrap_or(Constraint::S2);
    let p = cs.params(alpha_hat, beta_hat)?;
    let occupied_bandwidth = spectral::occupied_bandwidth(&p, cs.sigma, cs.sample_rate)?;
    let mask_margin_db = spectral::mask_check(&p, &cs.mask, cs.sample_rate)?.worst_margin_db;
    Ok(OptimalPair {
        alpha_hat,
        beta_hat,
        pair: [p, p.conjugate_pair()],
        binding_constraint: binding,
        tolerance: ALPHA_TOLERANCE,
        grid: cs.grid,
        occupied_bandwidth,
        mask_margin_db,
    })
}
