//! Joint detection by two detectors with correlated Gaussian intensities.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::{element_zpf_intensity, ExperimentConfig};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::field::{coupled_variance, intensity_covariance, SignalPairs, VACUUM_VARIANCE};
use crate::grid::ModeGrid;
use crate::quad::{integrate_2d, QuadResult};

use super::single::SingleParams;

/// Requested absolute accuracy of the joint probability.
pub const JOINT_EPSABS: f64 = 1e-10;
/// Standardized deviations beyond this are dropped from the integration
/// domain; the neglected mass is below Q(10) ≈ 7.6e-24.
pub const TRUNCATION_SD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointParams {
    pub d1: SingleParams,
    pub d2: SingleParams,
    /// Intensity correlation coefficient.
    pub rho_c: f64,
}

impl JointParams {
    pub fn new(d1: SingleParams, d2: SingleParams, rho_c: f64) -> Result<Self> {
        let p = Self { d1, d2, rho_c };
        p.validate()?;
        Ok(p)
    }

    pub fn symmetric(d: SingleParams, rho_c: f64) -> Result<Self> {
        Self::new(d, d, rho_c)
    }

    pub fn validate(&self) -> Result<()> {
        self.d1.validate()?;
        self.d2.validate()?;
        if !(self.rho_c.abs() < 1.0) {
            return Err(Error::InvalidParams(format!(
                "rho_c must satisfy |rho_c| < 1, got {}",
                self.rho_c
            )));
        }
        Ok(())
    }
}

/// Standard bivariate normal density with correlation ρ.
pub fn standard_bivariate_density(v1: f64, v2: f64, rho: f64) -> f64 {
    let q = 1.0 - rho * rho;
    (-(v1 * v1 - 2.0 * rho * v1 * v2 + v2 * v2) / (2.0 * q)).exp() / (2.0 * PI * q.sqrt())
}

/// General bivariate normal density.
pub fn bivariate_density(u1: f64, u2: f64, mean: (f64, f64), sd: (f64, f64), rho: f64) -> f64 {
    standard_bivariate_density((u1 - mean.0) / sd.0, (u2 - mean.1) / sd.1, rho) / (sd.0 * sd.1)
}

/// Equal-width form: both intensities share σ, with means Ī₁, Ī₂ and
/// intensity covariance c = ρσ².
pub fn equal_sigma_density(i1: f64, i2: f64, mean1: f64, mean2: f64, sigma: f64, cov: f64) -> f64 {
    let s2 = sigma * sigma;
    let det = s2 * s2 - cov * cov;
    let (a, b) = (i1 - mean1, i2 - mean2);
    let quad = (s2 * a * a - 2.0 * cov * a * b + s2 * b * b) / det;
    (-0.5 * quad).exp() / (2.0 * PI * det.sqrt())
}

/// Joint click probability by iterated adaptive quadrature over the region
/// above both thresholds. Returns the value and the achieved error bound.
pub fn p_joint_model(p: &JointParams) -> Result<QuadResult> {
    p.validate()?;
    let (a, b) = (p.d1, p.d2);
    let lo1 = (a.m - a.x).max(-TRUNCATION_SD);
    let lo2 = (b.m - b.x).max(-TRUNCATION_SD);
    if lo1 >= TRUNCATION_SD || lo2 >= TRUNCATION_SD {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let rho = p.rho_c;
    let r = integrate_2d(
        |v1, v2| {
            standard_bivariate_density(v1, v2, rho)
                * (-(-a.gamma * (v1 + a.x)).exp_m1())
                * (-(-b.gamma * (v2 + b.x)).exp_m1())
        },
        (lo1, TRUNCATION_SD),
        |_| lo2,
        |_| TRUNCATION_SD,
        JOINT_EPSABS,
    )?;
    Ok(QuadResult {
        value: r.value.clamp(0.0, 1.0),
        ..r
    })
}

/// Linear-regime joint probability γ₁γ₂(x₁x₂ + ρ), i.e. ζ₁ζ₂(Ī₁ₛĪ₂ₛ + cov).
pub fn p_joint_linear(p: &JointParams) -> f64 {
    p.d1.gamma * p.d2.gamma * (p.d1.x * p.d2.x + p.rho_c)
}

/// Photon-counting joint probability η₁η₂⟨Ĩ₁ₛĨ₂ₛ⟩/(ħω₁·ħω₂).
pub fn p_joint_quantum(eta1: f64, eta2: f64, omega1: f64, omega2: f64, product_moment: f64) -> f64 {
    eta1 * eta2 * product_moment / (HBAR * omega1 * HBAR * omega2)
}

/// ⟨Ĩ₁ₛĨ₂ₛ⟩ = (AT)²·(Ī₁ₛĪ₂ₛ + cov) for spatially coherent signals.
pub fn windowed_product_moment(area: f64, t_window: f64, i1s: f64, i2s: f64, cov: f64) -> f64 {
    let at = area * t_window;
    at * at * (i1s * i2s + cov)
}

/// Mean, spread and cross-covariance of the two effective intensities
/// implied by the down-conversion transform, in W/m² (covariance in W²/m⁴).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalMoments {
    /// Σ_j Ī₀ⱼ.
    pub zpf_mean: f64,
    /// Excess mean intensity of beam 1 and beam 2.
    pub i1s: f64,
    pub i2s: f64,
    /// Standard deviations of the two effective intensities.
    pub sd1: f64,
    pub sd2: f64,
    pub cov: f64,
    pub rho_c: f64,
}

/// Exact moments for a one-mode-per-element grid. Each element intensity is
/// exponential, so its variance is its squared mean; conjugate elements have
/// covariance (2Ī₀ⱼ)(2Ī₀σ(j))·a²g².
pub fn pdc_signal_moments(config: &ExperimentConfig, grid: &ModeGrid, pairs: SignalPairs) -> SignalMoments {
    let g = config.g_coupling;
    let mask = pairs.mask(grid);
    let n = grid.n_elements();
    let weights: Vec<f64> = grid
        .frequencies
        .iter()
        .map(|&w| element_zpf_intensity(config, w) / VACUUM_VARIANCE)
        .collect();
    let v_c = coupled_variance(g);
    let (mut zpf, mut mean1, mut mean2, mut var1, mut var2, mut cov) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..n {
        let s = n - 1 - j;
        let w = weights[j];
        zpf += w * VACUUM_VARIANCE;
        let v1 = if mask[j] { v_c } else { VACUUM_VARIANCE };
        // Beam-2 element j is coupled when its conjugate beam-1 element is.
        let v2 = if mask[s] { v_c } else { VACUUM_VARIANCE };
        mean1 += w * v1;
        mean2 += w * v2;
        var1 += (w * v1).powi(2);
        var2 += (w * v2).powi(2);
        if mask[j] {
            cov += w * weights[s] * intensity_covariance(g);
        }
    }
    let (sd1, sd2) = (var1.sqrt(), var2.sqrt());
    SignalMoments {
        zpf_mean: zpf,
        i1s: mean1 - zpf,
        i2s: mean2 - zpf,
        sd1,
        sd2,
        cov,
        rho_c: cov / (sd1 * sd2),
    }
}
