//! Vacuum hidden variables and the down-conversion transform.
//!
//! Each mode carries a complex amplitude α with independent real and
//! imaginary parts of variance ¼. A coupled conjugate pair (k, σ(k)) is
//! mapped to
//!
//! ```text
//! β₁ₖ    = a·α₁ₖ    + g·conj(α₂σ(k))
//! β₂σ(k) = a·α₂σ(k) + g·conj(α₁ₖ)        a = 1 + g²/2
//! ```
//!
//! which gives, per pair,
//!
//! * ⟨β₁β₂⟩ = a·g,
//! * ⟨|β|²⟩ = ½(a² + g²) = ½ + g² + g⁴/8,
//! * cov(|β₁|², |β₂|²) = a²g²,
//! * ⟨β₁β₂*⟩ = ⟨β²⟩ = 0.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;

use crate::config::{DerivedParams, ExperimentConfig};
use crate::error::{Error, Result};
use crate::grid::ModeGrid;
use crate::rng::{complex_normal, stream, StreamRole};

/// Variance ⟨|α|²⟩ of a vacuum amplitude.
pub const VACUUM_VARIANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSet {
    pub alpha_beam1: Vec<Complex64>,
    pub alpha_beam2: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamAmplitudes {
    pub beta_beam1: Vec<Complex64>,
    pub beta_beam2: Vec<Complex64>,
    pub g_used: f64,
}

/// Which beam-1 modes are coupled to their conjugates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalPairs {
    #[default]
    All,
    /// The given number of elements nearest the band centre. The count is
    /// lowered by one when its parity differs from the element count, so
    /// the coupled set stays symmetric about the centre.
    Central(usize),
}

impl SignalPairs {
    /// Coupling mask over beam-1 modes. For `Central(n)` the mask is
    /// symmetric about the centre, so a coupled mode's conjugate is coupled.
    pub fn mask(&self, grid: &ModeGrid) -> Vec<bool> {
        match *self {
            SignalPairs::All => vec![true; grid.n_modes()],
            SignalPairs::Central(_) => {
                let count = self.count(grid) as i64;
                let reach = grid.modes_per_element as i64 * (count - 1);
                grid.mode_units
                    .iter()
                    .map(|&u| count > 0 && u.abs() <= reach)
                    .collect()
            }
        }
    }

    pub fn count(&self, grid: &ModeGrid) -> usize {
        match *self {
            SignalPairs::All => grid.n_elements(),
            SignalPairs::Central(c) => {
                let n = grid.n_elements();
                let c = c.min(n);
                if (n - c) % 2 == 1 {
                    c - 1
                } else {
                    c
                }
            }
        }
    }
}

/// Amplitude factor a = 1 + g²/2 on the unchanged vacuum term.
pub fn direct_factor(g: f64) -> f64 {
    1.0 + 0.5 * g * g
}

/// ⟨β₁ₖβ₂σ(k)⟩ on a coupled pair.
pub fn anomalous_moment(g: f64) -> f64 {
    g * direct_factor(g)
}

/// ⟨|β|²⟩ on a coupled mode.
pub fn coupled_variance(g: f64) -> f64 {
    let a = direct_factor(g);
    0.5 * (a * a + g * g)
}

/// Relative excess of a coupled element's mean intensity, 2g² + g⁴/4.
pub fn relative_excess(g: f64) -> f64 {
    let g2 = g * g;
    2.0 * g2 + 0.25 * g2 * g2
}

/// cov(|β₁ₖ|², |β₂σ(k)|²) on a coupled pair.
pub fn intensity_covariance(g: f64) -> f64 {
    let a = direct_factor(g);
    a * a * g * g
}

pub fn sample_beam(n_modes: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..n_modes).map(|_| complex_normal(rng, VACUUM_VARIANCE)).collect()
}

/// Draws both beams from their own streams.
pub fn sample_vacuum(grid: &ModeGrid, beam1: &mut impl Rng, beam2: &mut impl Rng) -> AmplitudeSet {
    AmplitudeSet {
        alpha_beam1: sample_beam(grid.n_modes(), beam1),
        alpha_beam2: sample_beam(grid.n_modes(), beam2),
    }
}

/// The vacuum sample of trial `trial` under `seed`.
pub fn sample_vacuum_trial(grid: &ModeGrid, seed: u64, trial: u64) -> AmplitudeSet {
    sample_vacuum(
        grid,
        &mut stream(seed, trial, StreamRole::Beam1),
        &mut stream(seed, trial, StreamRole::Beam2),
    )
}

/// Couples every conjugate pair.
pub fn apply_pdc(amplitudes: &AmplitudeSet, grid: &ModeGrid, g: f64) -> Result<BeamAmplitudes> {
    apply_pdc_pairs(amplitudes, grid, g, SignalPairs::All)
}

pub fn apply_pdc_pairs(
    amplitudes: &AmplitudeSet,
    grid: &ModeGrid,
    g: f64,
    pairs: SignalPairs,
) -> Result<BeamAmplitudes> {
    apply_pdc_masked(amplitudes, grid, g, &pairs.mask(grid))
}

/// Couples beam-1 mode k to beam-2 mode σ(k) wherever `mask[k]` is set.
pub fn apply_pdc_masked(
    amplitudes: &AmplitudeSet,
    grid: &ModeGrid,
    g: f64,
    mask: &[bool],
) -> Result<BeamAmplitudes> {
    if !(g * g < 1.0) {
        return Err(Error::InvalidParams(format!("g² must be below 1, got g = {g}")));
    }
    let n = grid.n_modes();
    for len in [amplitudes.alpha_beam1.len(), amplitudes.alpha_beam2.len(), mask.len()] {
        if len != n {
            return Err(Error::PairingOutOfRange {
                index: len.saturating_sub(1),
                len: n,
            });
        }
    }
    let a = direct_factor(g);
    let (alpha1, alpha2) = (&amplitudes.alpha_beam1, &amplitudes.alpha_beam2);
    let mut beta1 = alpha1.clone();
    let mut beta2 = alpha2.clone();
    for k in 0..n {
        if !mask[k] {
            continue;
        }
        let s = grid.conjugate_mode(k)?;
        beta1[k] = alpha1[k] * a + alpha2[s].conj() * g;
        beta2[s] = alpha2[s] * a + alpha1[k].conj() * g;
    }
    Ok(BeamAmplitudes {
        beta_beam1: beta1,
        beta_beam2: beta2,
        g_used: g,
    })
}

/// Draws the transformed amplitudes directly, without the vacuum step.
/// Coupled pairs get the same second moments as [`apply_pdc_masked`]:
/// β₁ = √v·z₁ and β₂ = c·conj(z₁) + d·z₂ with v = ⟨|β|²⟩, c = ag/√v,
/// d = sqrt(v − c²).
pub fn sample_pdc_direct(
    grid: &ModeGrid,
    g: f64,
    mask: &[bool],
    beam1: &mut impl Rng,
    beam2: &mut impl Rng,
) -> BeamAmplitudes {
    let n = grid.n_modes();
    let v = coupled_variance(g);
    let sv = v.sqrt();
    let c = anomalous_moment(g) / sv;
    let d = (v - c * c).max(0.0).sqrt();
    let z1: Vec<Complex64> = (0..n).map(|_| complex_normal(beam1, 1.0)).collect();
    let z2: Vec<Complex64> = (0..n).map(|_| complex_normal(beam2, 1.0)).collect();
    let vac = VACUUM_VARIANCE.sqrt();
    let mut beta1 = vec![Complex64::default(); n];
    let mut beta2 = vec![Complex64::default(); n];
    let mut coupled2 = vec![false; n];
    for k in 0..n {
        let s = n - 1 - k;
        if mask[k] {
            beta1[k] = z1[k] * sv;
            beta2[s] = z1[k].conj() * c + z2[s] * d;
            coupled2[s] = true;
        } else {
            beta1[k] = z1[k] * vac;
        }
    }
    for s in 0..n {
        if !coupled2[s] {
            beta2[s] = z2[s] * vac;
        }
    }
    BeamAmplitudes {
        beta_beam1: beta1,
        beta_beam2: beta2,
        g_used: g,
    }
}

/// Mean excess effective intensity Ī_s = Σ_coupled κ_g·Ī₀ⱼ, W/m².
pub fn expected_signal_intensity(
    config: &ExperimentConfig,
    grid: &ModeGrid,
    pairs: SignalPairs,
) -> f64 {
    let kappa = relative_excess(config.g_coupling);
    let n = grid.n_elements();
    let count = pairs.count(grid);
    let first = (n - count) / 2;
    grid.frequencies[first..first + count]
        .iter()
        .map(|&w| kappa * crate::config::element_zpf_intensity(config, w))
        .sum()
}

/// Ī_s/Ī₀ for the configuration.
pub fn expected_signal_ratio(
    config: &ExperimentConfig,
    derived: &DerivedParams,
    grid: &ModeGrid,
    pairs: SignalPairs,
) -> f64 {
    expected_signal_intensity(config, grid, pairs) / derived.i0_bar
}

/// Writes `trial,beam,mode,re,im` rows.
pub fn write_amplitudes_csv(
    out: &mut impl Write,
    trial: u64,
    set: &AmplitudeSet,
    header: bool,
) -> std::io::Result<()> {
    if header {
        writeln!(out, "trial,beam,mode,re,im")?;
    }
    for (beam, values) in [(1, &set.alpha_beam1), (2, &set.alpha_beam2)] {
        for (k, a) in values.iter().enumerate() {
            writeln!(out, "{trial},{beam},{k},{:e},{:e}", a.re, a.im)?;
        }
    }
    Ok(())
}
