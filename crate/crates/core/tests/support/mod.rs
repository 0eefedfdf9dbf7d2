//! Brute-force oracles and property checks shared by the proptest suites and
//! the acceptance runner.

#![allow(dead_code)]

use std::f64::consts::PI;

use chirpsync::chirp::{synthesize_prototype, ChirpParams};
use chirpsync::correlate::{cross_correlate, cross_correlate_conjugate_pair};
use chirpsync::spectral::power_spectrum;
use chirpsync::units::{from_khz, from_khz_per_us, from_us};
use chirpsync::ComplexSignal;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FS: f64 = 1.6e6;

/// γ[k] = Σₘ r[m+k]·t*[m] / Σ|t|², k = −(Nt−1) … Nr−1, with lag times.
pub fn direct_correlation(received: &ComplexSignal, template: &ComplexSignal) -> (Vec<f64>, Vec<f64>) {
    let r = received.samples();
    let t = template.samples();
    let (nr, nt) = (r.len() as i64, t.len() as i64);
    let energy: f64 = t.iter().map(|v| v.norm_sqr()).sum();
    let fs = received.sample_rate();
    let mut lags = Vec::new();
    let mut mags = Vec::new();
    for k in -(nt - 1)..nr {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..nt {
            let i = m + k;
            if (0..nr).contains(&i) {
                acc += r[i as usize] * t[m as usize].conj();
            }
        }
        lags.push(k as f64 / fs + received.t0() - template.t0());
        mags.push(acc.norm() / energy);
    }
    (lags, mags)
}

pub fn random_signal(rng: &mut ChaCha8Rng, len: usize, t0: f64) -> ComplexSignal {
    let s = (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ComplexSignal::new(s, FS, t0).unwrap()
}

/// Transform-domain correlation (plain and conjugate-pair) against the oracle.
pub fn check_correlation_oracle(seed: u64, nr: usize, nt: usize) -> Result<(), String> {
    let nt = 1 + (nt - 1) % nr;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t0r, t0t) = (rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3));
    let r = random_signal(&mut rng, nr, t0r);
    let t = random_signal(&mut rng, nt, t0t);
    let fast = cross_correlate(&r, &t).map_err(|e| e.to_string())?;
    let (lags, mags) = direct_correlation(&r, &t);
    compare("plain", &fast.lags, &fast.magnitudes, &lags, &mags)?;
    let (up, down) = cross_correlate_conjugate_pair(&r, &t).map_err(|e| e.to_string())?;
    compare("up", &up.lags, &up.magnitudes, &lags, &mags)?;
    let (lags_c, mags_c) = direct_correlation(&r, &t.conj());
    compare("down", &down.lags, &down.magnitudes, &lags_c, &mags_c)
}

fn compare(what: &str, la: &[f64], ma: &[f64], lb: &[f64], mb: &[f64]) -> Result<(), String> {
    if la.len() != lb.len() {
        return Err(format!("{what}: {} lags vs {}", la.len(), lb.len()));
    }
    for i in 0..la.len() {
        if (la[i] - lb[i]).abs() > 1e-12 || (ma[i] - mb[i]).abs() > 1e-9 {
            return Err(format!(
                "{what} lag {i}: ({}, {}) vs oracle ({}, {})",
                la[i], ma[i], lb[i], mb[i]
            ));
        }
    }
    Ok(())
}

/// Random chirp ⟨α, β, T⟩ representable at 1.6 MHz.
#[derive(Debug, Clone, Copy)]
pub struct ChirpCase {
    pub alpha_khz_us: f64,
    pub beta_khz: f64,
    pub t_us: f64,
}

impl ChirpCase {
    pub fn params(&self) -> ChirpParams {
        ChirpParams::new(from_khz_per_us(self.alpha_khz_us), from_khz(self.beta_khz), from_us(self.t_us)).unwrap()
    }

    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        Self {
            alpha_khz_us: rng.random_range(-1.0..1.0),
            beta_khz: rng.random_range(-100.0..100.0),
            t_us: rng.random_range(20.0..400.0),
        }
    }
}

/// |γ| ≤ 1 for a unit-modulus received chirp against a chirp template.
pub fn check_gamma_bounded(tpl: ChirpCase, rx: ChirpCase, delta_f: f64) -> Result<(), String> {
    // The received capture must cover the template.
    let (tpl, rx) = if tpl.t_us > rx.t_us { (rx, tpl) } else { (tpl, rx) };
    let t = synthesize_prototype(&tpl.params(), FS).map_err(|e| e.to_string())?;
    let mut r = synthesize_prototype(&rx.params(), FS).map_err(|e| e.to_string())?;
    r.rotate(delta_f);
    let c = cross_correlate(&r, &t).map_err(|e| e.to_string())?;
    let max = c.magnitudes.iter().cloned().fold(0.0, f64::max);
    if max > 1.0 + 1e-9 {
        return Err(format!("max |γ| = {max}"));
    }
    Ok(())
}

fn relative_gap(a: &[f64], b: impl Fn(usize) -> f64) -> f64 {
    let scale = a.iter().cloned().fold(0.0, f64::max);
    (0..a.len()).map(|i| (a[i] - b(i)).abs()).fold(0.0, f64::max) / scale
}

/// psd(−α, β) = psd(α, β) and psd(α, −β)(f) = psd(α, β)(−f).
pub fn check_spectral_symmetry(c: ChirpCase, pad: usize) -> Result<(), String> {
    let p = c.params();
    let base = power_spectrum(&p, FS, pad).map_err(|e| e.to_string())?;
    let neg_alpha = power_spectrum(&p.conjugate_pair(), FS, pad).map_err(|e| e.to_string())?;
    let neg_beta = power_spectrum(&p.with_beta(-p.beta), FS, pad).map_err(|e| e.to_string())?;
    let g1 = relative_gap(&base.psd, |i| neg_alpha.psd[i]);
    let g2 = relative_gap(&base.psd, |i| neg_beta.psd[base.negated_index(i)]);
    if g1 > 1e-9 || g2 > 1e-9 {
        return Err(format!("α-reflection gap {g1:e}, β-reflection gap {g2:e}"));
    }
    Ok(())
}

/// Conjugate pair samples are exact conjugates when β = 0.
pub fn check_conjugate_pairing(alpha_khz_us: f64, t_us: f64) -> Result<(), String> {
    let p = ChirpCase {
        alpha_khz_us,
        beta_khz: 0.0,
        t_us,
    }
    .params();
    let a = synthesize_prototype(&p, FS).map_err(|e| e.to_string())?;
    let b = synthesize_prototype(&p.conjugate_pair(), FS).map_err(|e| e.to_string())?;
    for (i, (u, v)) in a.samples().iter().zip(b.samples()).enumerate() {
        if *v != u.conj() {
            return Err(format!("sample {i}: {v} vs conj {u}"));
        }
    }
    Ok(())
}

/// Σ psd·Δf equals Σ|x|²/fs.
pub fn check_parseval(c: ChirpCase, pad: usize) -> Result<(), String> {
    let p = c.params();
    let x = synthesize_prototype(&p, FS).map_err(|e| e.to_string())?;
    let s = power_spectrum(&p, FS, pad).map_err(|e| e.to_string())?;
    let rel = (s.energy() - x.energy()).abs() / x.energy();
    if rel > 1e-6 {
        return Err(format!("relative Parseval gap {rel:e}"));
    }
    Ok(())
}

/// x̃(t)e^{j2πΔf t} / x̃(t − τ̂) is constant over the overlap for τ̂ = −Δf/α.
pub fn check_matched_condition(alpha_khz_us: f64, t_us: f64, delta_f: f64) -> Result<(), String> {
    let p = ChirpCase {
        alpha_khz_us,
        beta_khz: 0.0,
        t_us,
    }
    .params();
    let tau = -delta_f / p.alpha;
    let half = p.duration / 2.0;
    let n = p.sample_count(FS);
    let ratios: Vec<Complex64> = (0..n)
        .map(|k| chirpsync::chirp::grid_time(k, n, FS))
        .filter(|&t| (t - tau).abs() <= half)
        .map(|t| p.value_at(t) * Complex64::from_polar(1.0, 2.0 * PI * delta_f * t) / p.value_at(t - tau))
        .collect();
    if ratios.len() < 2 {
        return Err("overlap too short".into());
    }
    let mean: Complex64 = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let var = |f: fn(Complex64) -> f64| {
        ratios.iter().map(|r| (f(*r) - f(mean)).powi(2)).sum::<f64>() / (ratios.len() - 1) as f64
    };
    let (sr, si) = (var(|z| z.re).sqrt(), var(|z| z.im).sqrt());
    if sr >= 1e-9 || si >= 1e-9 {
        return Err(format!("ratio std ({sr:e}, {si:e})"));
    }
    Ok(())
}
