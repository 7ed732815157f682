//! Closed-form distributions and detection probabilities, the vacuum
//! intensity integral, and a report tying them to a configuration.

pub mod joint;
pub mod single;
pub mod zpf;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

pub use joint::{
    bivariate_density, equal_sigma_density, p_joint_linear, p_joint_model, p_joint_quantum,
    pdc_signal_moments, standard_bivariate_density, windowed_product_moment, JointParams, SignalMoments,
};
pub use single::{
    p_dark, p_dark_exact, p_single_linear, p_single_model, p_single_quantum, quantum_equivalent_gain, rho_density,
    signal_window_energy, sub_zero_mass, LinearForms, SingleParams,
};
pub use zpf::{zpf_element_intensity, zpf_element_quadrature, zpf_statistics, ZpfMethod, ZpfStatistics};

use crate::config::{derive_params, ExperimentConfig};
use crate::constants::{C, EPSILON0};
use crate::error::Result;
use crate::field::SignalPairs;
use crate::grid::ModeGrid;
use crate::quad::{integrate, Tolerance};
use crate::special::sinc;

/// Explicit values replacing the ones derived from the configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnalyticOverrides {
    pub m: Option<f64>,
    pub x: Option<f64>,
    pub gamma: Option<f64>,
    pub rho_c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticReport {
    #[serde(rename = "I0_bar")]
    pub i0_bar: f64,
    pub sigma0: f64,
    pub m: f64,
    pub x: f64,
    pub gamma: f64,
    pub rho_c: f64,
    pub p_single_model: f64,
    pub p_single_linear: f64,
    pub p_single_linear_limit: f64,
    pub p_dark: f64,
    pub p_joint_model: f64,
    pub p_joint_abs_error: f64,
    pub p_joint_linear: f64,
    pub p_single_quantum: f64,
    pub p_joint_quantum: f64,
    /// ηTA/(ħω̄) with A the detector cross-section.
    pub zeta_quantum: f64,
    pub sub_zero_mass: f64,
    pub linear_regime_warning: bool,
}

/// Evaluates every probability for the configuration. Unless overridden,
/// x = Ī_s/σ₀ with Ī_s from the down-conversion coupling, m is the
/// configured margin, γ = ζσ₀, and ρ_c the transform's intensity
/// correlation.
pub fn analytic_report(
    config: &ExperimentConfig,
    grid: &ModeGrid,
    overrides: AnalyticOverrides,
) -> Result<AnalyticReport> {
    let d = derive_params(config);
    let moments = pdc_signal_moments(config, grid, SignalPairs::All);
    let m = overrides.m.unwrap_or(config.i_m_margin);
    let x = overrides.x.unwrap_or(moments.i1s / d.sigma0);
    let gamma = overrides.gamma.unwrap_or(config.zeta_gain * d.sigma0);
    let rho_c = overrides.rho_c.unwrap_or(moments.rho_c);
    let single = SingleParams::new(m, x, gamma)?;
    let joint = JointParams::symmetric(single, rho_c)?;
    let joint_value = p_joint_model(&joint)?;
    let linear = p_single_linear(&single);

    let area = PI * config.detector_r * config.detector_r;
    let signal = x * d.sigma0;
    let energy = signal_window_energy(area, config.t_window, signal);
    let cov = rho_c * d.sigma0 * d.sigma0;
    let product = windowed_product_moment(area, config.t_window, signal, signal, cov);

    Ok(AnalyticReport {
        i0_bar: d.i0_bar,
        sigma0: d.sigma0,
        m,
        x,
        gamma,
        rho_c,
        p_single_model: p_single_model(&single),
        p_single_linear: linear.full,
        p_single_linear_limit: linear.limit,
        p_dark: p_dark(m, gamma),
        p_joint_model: joint_value.value,
        p_joint_abs_error: joint_value.abs_error,
        p_joint_linear: p_joint_linear(&joint),
        p_single_quantum: p_single_quantum(config.eta, energy, d.omega_bar).min(1.0),
        p_joint_quantum: p_joint_quantum(config.eta, config.eta, d.omega_bar, d.omega_bar, product).min(1.0),
        zeta_quantum: quantum_equivalent_gain(config.eta, config.t_window, area, d.omega_bar),
        sub_zero_mass: sub_zero_mass(x, d.s()),
        linear_regime_warning: linear.warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    /// Effective intensity cε₀Σ_j|Ē_j|² of the signal alone, W/m².
    pub lhs: f64,
    /// Window- and aperture-integrated intensity divided by A·T, W/m².
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Compares the filtered-field intensity of a plane wave E₀·e^{−iω_s t},
/// uniform over the detector cross-section, with its directly averaged
/// intensity. Each element sees the windowed Fourier component
/// Ē_j = (1/T)∫₀^T E(t)e^{iω_j t}dt = E₀·e^{iΔT/2}·sinc(ΔT/2), Δ = ω_j − ω_s.
pub fn coherent_identity_check(
    config: &ExperimentConfig,
    grid: &ModeGrid,
    amplitude: Complex64,
    omega_signal: f64,
) -> Result<IdentityCheck> {
    let t = config.t_window;
    let lhs: f64 = grid
        .frequencies
        .iter()
        .map(|&w| {
            let half = 0.5 * (w - omega_signal) * t;
            let e = amplitude * Complex64::from_polar(1.0, half) * sinc(half);
            C * EPSILON0 * e.norm_sqr()
        })
        .sum();
    let area = PI * config.detector_r * config.detector_r;
    // |E(t)|² over the window, integrated numerically in units of T.
    let instantaneous = |tau: f64| {
        let e = amplitude * Complex64::from_polar(1.0, -omega_signal * tau * t);
        C * EPSILON0 * e.norm_sqr()
    };
    let windowed = integrate(instantaneous, 0.0, 1.0, Tolerance::relative(1e-10))?.value * t;
    let rhs = area * windowed / (area * t);
    Ok(IdentityCheck { lhs, rhs })
}
