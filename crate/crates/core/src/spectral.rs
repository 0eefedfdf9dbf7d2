//! Power spectrum, occupied bandwidth, the bandwidth contour over (α, β) and
//! spectral-mask compliance.
//!
//! The power spectrum is the squared magnitude of the continuous-time Fourier
//! transform, approximated by `DFT(x)/fs` over a zero-padded record, so that
//! `Σ psd · bin_width` equals the time-domain energy exactly.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chirp::{synthesize_prototype, ChirpParams};
use crate::dsp;
use crate::error::{Error, Result};
use crate::units;

/// Zero-padding used for occupied-bandwidth evaluation: the record's own
/// resolution, bins spaced 1/T apart.
pub const OBW_ZERO_PAD: usize = 1;
/// Zero-padding used for plotting and mask checks.
pub const FINE_ZERO_PAD: usize = 64;
/// Resolution bandwidth of the mask comparison, Hz.
pub const MASK_RBW_HZ: f64 = 1e3;
/// Axis refinement tolerance on α, Hz/s (10⁻³ kHz/μs).
pub const ALPHA_TOLERANCE: f64 = 1e6;

// Bins within this relative slack of a band edge are counted as inside.
const EDGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    /// Bin centre frequencies, ascending, with 0 Hz at index `len/2`.
    pub freqs: Vec<f64>,
    /// |X(f)|², energy per Hz.
    pub psd: Vec<f64>,
    pub bin_width: f64,
}

impl SpectrumEstimate {
    /// Index of the 0 Hz bin.
    pub fn center(&self) -> usize {
        self.psd.len() / 2
    }

    /// Index of the bin at −f for bin `i`. The −fs/2 bin maps to itself.
    pub fn negated_index(&self, i: usize) -> usize {
        let m = self.psd.len();
        let c = self.center();
        (2 * c + m - i) % m
    }

    /// Σ psd · bin_width.
    pub fn energy(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width
    }

    /// Number of bins on each side of 0 Hz whose centres lie within ±half_width.
    pub fn bins_within(&self, half_width: f64) -> usize {
        let k = (half_width / self.bin_width * (1.0 + EDGE_SLACK)).floor() as usize;
        k.min(self.center())
    }

    /// Fraction of the total energy in bins with |f| ≤ half_width.
    pub fn fraction_within(&self, half_width: f64) -> f64 {
        let c = self.center();
        let k = self.bins_within(half_width);
        let hi = (c + k).min(self.psd.len() - 1);
        let inside: f64 = self.psd[c - k..=hi].iter().sum();
        inside / self.psd.iter().sum::<f64>()
    }

    /// Power within a `rbw`-wide window around each bin, relative to total
    /// power, in dB.
    pub fn rbw_dbc(&self, rbw: f64) -> Vec<f64> {
        let m = self.psd.len();
        let total: f64 = self.psd.iter().sum();
        let mut prefix = Vec::with_capacity(m + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &p in &self.psd {
            acc += p;
            prefix.push(acc);
        }
        let half = ((rbw / 2.0) / self.bin_width).floor() as usize;
        (0..m)
            .map(|i| {
                let lo = i.saturating_sub(half);
                let hi = (i + half).min(m - 1);
                let p = (prefix[hi + 1] - prefix[lo]) / total;
                10.0 * p.max(1e-300).log10()
            })
            .collect()
    }

    /// CSV `f_hz,psd_dbc` using the mask-comparison scale.
    pub fn write_csv(&self, path: &Path, rbw: f64) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "f_hz,psd_dbc")?;
        for (f, d) in self.freqs.iter().zip(self.rbw_dbc(rbw)) {
            writeln!(w, "{f:.6},{d:.6}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// |X(f)|² of the sampled prototype on a `zero_pad_factor`-times padded grid.
pub fn power_spectrum(
    params: &ChirpParams,
    sample_rate: f64,
    zero_pad_factor: usize,
) -> Result<SpectrumEstimate> {
    if zero_pad_factor < 1 {
        return Err(Error::InvalidParameter("zero_pad_factor must be ≥ 1".into()));
    }
    let sig = synthesize_prototype(params, sample_rate)?;
    let n = sig.len();
    let m = n * zero_pad_factor;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(sig.samples());
    dsp::fft(&mut buf);

    let bin_width = sample_rate / m as f64;
    let c = m / 2;
    let scale = 1.0 / (sample_rate * sample_rate);
    // fftshift: output index i holds DFT bin (i − c) mod m.
    let psd = (0..m)
        .map(|i| buf[(i + m - c) % m].norm_sqr() * scale)
        .collect();
    let freqs = (0..m).map(|i| (i as f64 - c as f64) * bin_width).collect();
    Ok(SpectrumEstimate {
        freqs,
        psd,
        bin_width,
    })
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must lie in (0, 1), got {sigma}"
        )));
    }
    Ok(())
}

/// Smallest symmetric band [−W/2, W/2] holding at least 1−σ of the energy,
/// at record resolution. W is a multiple of two bins.
pub fn occupied_bandwidth(params: &ChirpParams, sigma: f64, sample_rate: f64) -> Result<f64> {
    occupied_bandwidth_with(params, sigma, sample_rate, OBW_ZERO_PAD)
}

pub fn occupied_bandwidth_with(
    params: &ChirpParams,
    sigma: f64,
    sample_rate: f64,
    zero_pad_factor: usize,
) -> Result<f64> {
    check_sigma(sigma)?;
    let est = power_spectrum(params, sample_rate, zero_pad_factor)?;
    Ok(occupied_bandwidth_of(&est, sigma))
}

/// Occupied bandwidth of an already computed spectrum.
pub fn occupied_bandwidth_of(est: &SpectrumEstimate, sigma: f64) -> f64 {
    let total: f64 = est.psd.iter().sum();
    let target = (1.0 - sigma) * total;
    let c = est.center();
    let m = est.psd.len();
    let mut acc = est.psd[c];
    let mut k = 0;
    while acc < target && k < c {
        k += 1;
        acc += est.psd[c - k];
        if c + k < m {
            acc += est.psd[c + k];
        }
    }
    2.0 * k as f64 * est.bin_width
}

/// True when at least 1−σ of the energy lies in bins with |f| ≤ W/2.
pub fn within_bandwidth(
    params: &ChirpParams,
    max_bandwidth: f64,
    sigma: f64,
    sample_rate: f64,
) -> Result<bool> {
    check_sigma(sigma)?;
    let est = power_spectrum(params, sample_rate, OBW_ZERO_PAD)?;
    Ok(est.fraction_within(max_bandwidth / 2.0) >= 1.0 - sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSegment {
    /// Inclusive lower |f| bound, Hz.
    pub lower: f64,
    /// Exclusive upper |f| bound, Hz; `None` for unbounded.
    pub upper: Option<f64>,
    /// Limit in dBc.
    pub level_db: f64,
}

/// Piecewise emission mask over |f|. Frequencies not covered are unconstrained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMask {
    pub segments: Vec<MaskSegment>,
}

impl SpectralMask {
    pub fn new(segments: Vec<MaskSegment>) -> Result<Self> {
        let m = Self { segments };
        m.validate()?;
        Ok(m)
    }

    /// −40 dBc for 300 kHz ≤ |f| < 500 kHz, −50 dBc for |f| ≥ 500 kHz.
    pub fn nbiot() -> Self {
        Self {
            segments: vec![
                MaskSegment {
                    lower: 300e3,
                    upper: Some(500e3),
                    level_db: -40.0,
                },
                MaskSegment {
                    lower: 500e3,
                    upper: None,
                    level_db: -50.0,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidParameter("mask has no segments".into()));
        }
        let mut prev_upper = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            if !s.level_db.is_finite() || !s.lower.is_finite() || s.lower < 0.0 {
                return Err(Error::InvalidParameter(format!("mask segment {i} is not finite")));
            }
            if s.lower < prev_upper {
                return Err(Error::InvalidParameter(format!(
                    "mask segment {i} overlaps or is out of order"
                )));
            }
            match s.upper {
                Some(u) if !(u > s.lower) => {
                    return Err(Error::InvalidParameter(format!(
                        "mask segment {i} has upper ≤ lower"
                    )))
                }
                Some(u) => prev_upper = u,
                None if i + 1 != self.segments.len() => {
                    return Err(Error::InvalidParameter(
                        "only the last mask segment may be unbounded".into(),
                    ))
                }
                None => prev_upper = f64::INFINITY,
            }
        }
        Ok(())
    }

    /// Mask level at |f|, if constrained.
    pub fn level_at(&self, f: f64) -> Option<f64> {
        let a = f.abs();
        self.segments
            .iter()
            .find(|s| a >= s.lower && s.upper.is_none_or(|u| a < u))
            .map(|s| s.level_db)
    }

    /// Lowest |f| of the outermost segment; the sample rate must reach it.
    pub fn outermost_lower(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.lower)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "lower_khz,upper_khz,level_dbc")?;
        for s in &self.segments {
            let upper = s.upper.map_or("inf".to_string(), |u| format!("{}", u / 1e3));
            writeln!(w, "{},{},{}", s.lower / 1e3, upper, s.level_db)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskReport {
    pub pass: bool,
    /// min(mask − psd) over constrained bins, dB.
    pub worst_margin_db: f64,
    pub worst_freq_hz: f64,
}

/// Compares the RBW-integrated spectrum (dBc relative to total power) with
/// the mask at every representable constrained frequency.
pub fn mask_check(params: &ChirpParams, mask: &SpectralMask, sample_rate: f64) -> Result<MaskReport> {
    mask.validate()?;
    if sample_rate / 2.0 < mask.outermost_lower() {
        return Err(Error::InvalidParameter(format!(
            "sample rate {sample_rate} Hz cannot represent |f| ≥ {} Hz",
            mask.outermost_lower()
        )));
    }
    let est = power_spectrum(params, sample_rate, FINE_ZERO_PAD)?;
    Ok(mask_check_spectrum(&est, mask, MASK_RBW_HZ))
}

pub fn mask_check_spectrum(est: &SpectrumEstimate, mask: &SpectralMask, rbw: f64) -> MaskReport {
    let dbc = est.rbw_dbc(rbw);
    let mut worst = f64::INFINITY;
    let mut worst_f = 0.0f64;
    for (f, d) in est.freqs.iter().zip(&dbc) {
        if let Some(level) = mask.level_at(*f) {
            let margin = level - d;
            // Ties resolve toward the smaller |f| so ±f mirrors agree.
            if margin < worst || (margin == worst && f.abs() < worst_f.abs()) {
                worst = margin;
                worst_f = *f;
            }
        }
    }
    MaskReport {
        pass: worst >= 0.0,
        worst_margin_db: worst,
        worst_freq_hz: worst_f,
    }
}

/// Symmetric (α, β) grid: `points` odd samples from −max to +max on each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub alpha_max: f64,
    pub alpha_points: usize,
    pub beta_max: f64,
    pub beta_points: usize,
}

impl ParamGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = |max: f64, n: usize| max.is_finite() && max >= 0.0 && n >= 3 && n % 2 == 1;
        if !ok(self.alpha_max, self.alpha_points) || !ok(self.beta_max, self.beta_points) {
            return Err(Error::InvalidParameter(format!(
                "grid needs finite non-negative extents and an odd number (≥ 3) of points per axis: {self:?}"
            )));
        }
        Ok(())
    }

    fn axis(max: f64, n: usize) -> Vec<f64> {
        let d = (n - 1) as f64;
        // Integer numerator keeps v[n−1−i] == −v[i] exactly.
        (0..n)
            .map(|i| max * (2.0 * i as f64 - d) / d)
            .collect()
    }

    pub fn alphas(&self) -> Vec<f64> {
        Self::axis(self.alpha_max, self.alpha_points)
    }

    pub fn betas(&self) -> Vec<f64> {
        Self::axis(self.beta_max, self.beta_points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    S1,
    S2Contour,
    S2Enclosure,
    S3,
    Intersection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleRegion {
    pub kind: RegionKind,
    pub grid: ParamGrid,
    /// Member ⟨α, β⟩ points, Hz/s and Hz.
    pub points: Vec<(f64, f64)>,
    /// Members with at least one 4-neighbour outside the region.
    pub boundary: Vec<(f64, f64)>,
    /// Largest feasible |α| on β = 0 after bisection refinement, if computed.
    pub axis_alpha_extremum: Option<f64>,
}

impl FeasibleRegion {
    /// Builds a region from a membership mask over the grid (row-major, β
    /// outer) and checks the symmetries α → −α and β → −β.
    pub fn from_mask(kind: RegionKind, grid: ParamGrid, member: &[bool]) -> Result<Self> {
        let alphas = grid.alphas();
        let betas = grid.betas();
        let (na, nb) = (alphas.len(), betas.len());
        assert_eq!(member.len(), na * nb);
        let idx = |ia: usize, ib: usize| ib * na + ia;
        for ib in 0..nb {
            for ia in 0..na {
                let m = member[idx(ia, ib)];
                if m != member[idx(na - 1 - ia, ib)] || m != member[idx(ia, nb - 1 - ib)] {
                    return Err(Error::InvalidParameter(format!(
                        "region is not symmetric at ⟨{}, {}⟩",
                        alphas[ia], betas[ib]
                    )));
                }
            }
        }
        let mut points = Vec::new();
        let mut boundary = Vec::new();
        for ib in 0..nb {
            for ia in 0..na {
                if !member[idx(ia, ib)] {
                    continue;
                }
                let p = (alphas[ia], betas[ib]);
                points.push(p);
                let edge = ia == 0 || ib == 0 || ia + 1 == na || ib + 1 == nb;
                let outside_neighbour = edge
                    || !member[idx(ia - 1, ib)]
                    || !member[idx(ia + 1, ib)]
                    || !member[idx(ia, ib - 1)]
                    || !member[idx(ia, ib + 1)];
                if outside_neighbour {
                    boundary.push(p);
                }
            }
        }
        Ok(Self {
            kind,
            grid,
            points,
            boundary,
            axis_alpha_extremum: None,
        })
    }

    pub fn contains(&self, alpha: f64, beta: f64) -> bool {
        self.points.iter().any(|&(a, b)| a == alpha && b == beta)
    }

    /// CSV `alpha_khz_per_us,beta_khz,boundary`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "alpha_khz_per_us,beta_khz,boundary")?;
        for p in &self.points {
            let on_edge = self.boundary.contains(p);
            writeln!(
                w,
                "{:.6},{:.6},{}",
                units::khz_per_us(p.0),
                units::khz(p.1),
                on_edge as u8
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates `feasible(|α|, |β|)` once per grid quadrant point and mirrors it,
/// relying on the spectral symmetries in α and β.
pub(crate) fn evaluate_symmetric<F>(grid: &ParamGrid, feasible: F) -> Result<Vec<bool>>
where
    F: Fn(f64, f64) -> Result<bool> + Sync,
{
    grid.validate()?;
    let alphas = grid.alphas();
    let betas = grid.betas();
    let (na, nb) = (alphas.len(), betas.len());
    let (ha, hb) = (na / 2, nb / 2);
    // Quadrant α ≥ 0, β ≥ 0.
    let quad: Vec<(usize, usize)> = (hb..nb)
        .flat_map(|ib| (ha..na).map(move |ia| (ia, ib)))
        .collect();
    let values: Vec<bool> = quad
        .par_iter()
        .map(|&(ia, ib)| feasible(alphas[ia], betas[ib]))
        .collect::<Result<_>>()?;
    let mut member = vec![false; na * nb];
    for (&(ia, ib), &v) in quad.iter().zip(&values) {
        for ja in [ia, na - 1 - ia] {
            for jb in [ib, nb - 1 - ib] {
                member[jb * na + ja] = v;
            }
        }
    }
    Ok(member)
}

/// Largest α in [lo, hi] with `feasible(α)` true, assuming feasibility at `lo`
/// and infeasibility at `hi`, bisected to `tol`.
pub(crate) fn bisect_edge<F>(mut lo: f64, mut hi: f64, tol: f64, feasible: F) -> Result<f64>
where
    F: Fn(f64) -> Result<bool>,
{
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// The enclosure of the `target_bandwidth` contour, i.e. all grid points whose
/// occupied bandwidth is at most the target, plus its boundary points and the
/// refined β = 0 extremum.
pub fn bandwidth_contour(
    target_bandwidth: f64,
    sigma: f64,
    duration: f64,
    sample_rate: f64,
    grid: &ParamGrid,
) -> Result<FeasibleRegion> {
    if !(target_bandwidth.is_finite() && target_bandwidth > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target bandwidth must be positive, got {target_bandwidth}"
        )));
    }
    check_sigma(sigma)?;
    if target_bandwidth > sample_rate / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "target bandwidth {target_bandwidth} Hz exceeds half the sample rate"
        )));
    }
    ChirpParams::new(0.0, 0.0, duration)?;
    // A sweep too wide to sample at this rate is also far wider than the target.
    let feasible = |a: f64, b: f64| {
        let p = ChirpParams::new(a, b, duration)?;
        if sample_rate < p.min_sample_rate() {
            return Ok(false);
        }
        within_bandwidth(&p, target_bandwidth, sigma, sample_rate)
    };
    let member = evaluate_symmetric(grid, feasible)?;
    let mut region = FeasibleRegion::from_mask(RegionKind::S2Enclosure, *grid, &member)?;

    let (na, nb) = (grid.alpha_points, grid.beta_points);
    for ib in 0..nb {
        for ia in 0..na {
            let on_edge = ia == 0 || ib == 0 || ia + 1 == na || ib + 1 == nb;
            if on_edge && member[ib * na + ia] {
                let (a, b) = (grid.alphas()[ia], grid.betas()[ib]);
                return Err(Error::ContourExitsGrid(format!(
                    "⟨{:.4} kHz/μs, {:.1} kHz⟩",
                    units::khz_per_us(a),
                    units::khz(b)
                )));
            }
        }
    }

    // Refine the β = 0 axis crossing between the last member and the next grid point.
    let alphas = grid.alphas();
    let center_row = nb / 2;
    let last = (na / 2..na)
        .take_while(|&ia| member[center_row * na + ia])
        .last();
    if let Some(ia) = last {
        let lo = alphas[ia];
        let hi = alphas[ia + 1];
        let edge = bisect_edge(lo, hi, ALPHA_TOLERANCE, |a| feasible(a, 0.0))?;
        region.axis_alpha_extremum = Some(edge);
    }
    Ok(region)
}
