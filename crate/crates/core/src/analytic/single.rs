//! Single-detector probabilities.
//!
//! With u normal of mean 1 + x·s and sd s, and the detection law
//! (1 − e^{−γ(u−1)/s})·Θ[u − 1 − m·s], the window probability is
//!
//! ```text
//! p = ½erfc((m−x)/√2) − ½·e^{−γx + γ²/2}·erfc((m−x+γ)/√2).
//! ```

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::special::{erfc, ln_erfc, normal_pdf};

/// Dimensionless single-detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleParams {
    /// Threshold margin (I_m − Ī₀)/σ.
    pub m: f64,
    /// Signal Ī_s/σ.
    pub x: f64,
    /// Gain ζσ.
    pub gamma: f64,
}

impl SingleParams {
    pub fn new(m: f64, x: f64, gamma: f64) -> Result<Self> {
        let p = Self { m, x, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.x.is_finite() && self.gamma.is_finite()) {
            return Err(Error::InvalidParams("m, x and gamma must be finite".into()));
        }
        if !(self.m > 0.0) {
            return Err(Error::InvalidParams(format!("m must be > 0, got {}", self.m)));
        }
        if !(self.x >= 0.0) {
            return Err(Error::InvalidParams(format!("x must be >= 0, got {}", self.x)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma must be > 0, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Detection probability for a standardized intensity deviation
    /// v = (u − ⟨u⟩)/s.
    pub fn law(&self, v: f64) -> f64 {
        if v > self.m - self.x {
            -(-self.gamma * (v + self.x)).exp_m1()
        } else {
            0.0
        }
    }
}

/// Density of u for signal x and relative width s (x = 0: vacuum alone).
pub fn rho_density(u: f64, x: f64, s: f64) -> f64 {
    normal_pdf((u - 1.0 - x * s) / s) / s
}

/// Closed-form single-detection probability.
pub fn p_single_model(p: &SingleParams) -> f64 {
    let d = p.m - p.x;
    let first = 0.5 * erfc(d / SQRT_2);
    let ln_second = -p.gamma * p.x + 0.5 * p.gamma * p.gamma + ln_erfc((d + p.gamma) / SQRT_2) - 2f64.ln();
    (first - ln_second.exp()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearForms {
    /// γx·½erfc((m−x)/√2) + γ·φ(m−x).
    pub full: f64,
    /// γx.
    pub limit: f64,
    /// Set when γx exceeds 0.1 and the first-order expansion is doubtful.
    pub warning: bool,
}

/// First order in γ of the single-detection probability.
pub fn p_single_linear(p: &SingleParams) -> LinearForms {
    let d = p.m - p.x;
    LinearForms {
        full: p.gamma * p.x * 0.5 * erfc(d / SQRT_2) + p.gamma * normal_pdf(d),
        limit: p.gamma * p.x,
        warning: p.gamma * p.x > 0.1,
    }
}

/// Vacuum-only click probability γ·φ(m) = γ/√(2π)·e^{−m²/2}.
pub fn p_dark(m: f64, gamma: f64) -> f64 {
    gamma * normal_pdf(m)
}

/// Vacuum-only click probability without the small-γ expansion,
/// ½erfc(m/√2) − ½e^{γ²/2}erfc((m+γ)/√2).
pub fn p_dark_exact(m: f64, gamma: f64) -> f64 {
    p_single_model(&SingleParams { m, x: 0.0, gamma })
}

/// Probability mass of the intensity density below zero, ½erfc((1+xs)/(s√2)).
pub fn sub_zero_mass(x: f64, s: f64) -> f64 {
    0.5 * erfc((1.0 + x * s) / (s * SQRT_2))
}

/// Photon-counting reference η·E/(ħω) for a mean windowed signal energy E.
pub fn p_single_quantum(eta: f64, signal_window_energy: f64, omega: f64) -> f64 {
    eta * signal_window_energy / (HBAR * omega)
}

/// Windowed, aperture-integrated signal energy A·T·Ī_s for a spatially
/// coherent signal.
pub fn signal_window_energy(area: f64, t_window: f64, signal_intensity: f64) -> f64 {
    area * t_window * signal_intensity
}

/// Gain ζ = ηTA/(ħω) for which the linear model limit equals the
/// photon-counting value.
pub fn quantum_equivalent_gain(eta: f64, t_window: f64, area: f64, omega: f64) -> f64 {
    eta * t_window * area / (HBAR * omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn density_peak() {
        let s = 0.01;
        assert!((rho_density(1.0, 0.0, s) - 1.0 / (s * (2.0 * PI).sqrt())).abs() < 1e-10);
        // Signal shifts the mean by x·s.
        assert!((rho_density(1.0 + 3.0 * s, 3.0, s) - rho_density(1.0, 0.0, s)).abs() < 1e-9);
    }

    #[test]
    fn dark_rate_value() {
        let want = 0.01 * (-12.5f64).exp() / (2.0 * PI).sqrt();
        assert!((p_dark(5.0, 0.01) / want - 1.0).abs() < 1e-15);
        assert!((want - 1.4868e-8).abs() < 1e-12);
        assert!(p_dark(40.0, 0.01) < 1e-300);
    }

    #[test]
    fn linear_form_at_zero_signal_is_dark_rate() {
        let p = SingleParams::new(5.0, 0.0, 0.01).unwrap();
        assert_eq!(p_single_linear(&p).full, p_dark(5.0, 0.01));
    }

    #[test]
    fn dark_rate_expansion_is_first_order() {
        for m in [4.0, 5.0, 6.0] {
            for gamma in [1e-4, 1e-3, 1e-2] {
                let r = p_dark_exact(m, gamma) / p_dark(m, gamma);
                assert!((r - 1.0).abs() <= 0.05, "m {m} gamma {gamma} ratio {r}");
            }
        }
        // The gap closes as γ → 0.
        let a = (p_dark_exact(5.0, 1e-2) / p_dark(5.0, 1e-2) - 1.0).abs();
        let b = (p_dark_exact(5.0, 1e-4) / p_dark(5.0, 1e-4) - 1.0).abs();
        assert!(b < a);
    }

    #[test]
    fn linear_full_form_tail() {
        // x − m = 6, γx = 0.01.
        let p = SingleParams::new(4.0, 10.0, 0.001).unwrap();
        let l = p_single_linear(&p);
        assert!((l.full / l.limit - 1.0).abs() < 0.002);
    }

    #[test]
    fn large_gamma_does_not_overflow() {
        let p = SingleParams::new(3.0, 6.0, 60.0).unwrap();
        let v = p_single_model(&p);
        assert!(v.is_finite());
        assert!((v - 0.5 * erfc(-3.0 / SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn threshold_at_mean_small_gamma() {
        let x = 4.0;
        let gamma = 1e-6;
        let p = SingleParams::new(x, x, gamma).unwrap();
        let expect = gamma * (0.5 * x + 1.0 / (2.0 * PI).sqrt());
        assert!((p_single_model(&p) / expect - 1.0).abs() < 1e-4);
    }

    #[test]
    fn invalid_params() {
        assert!(SingleParams::new(0.0, 1.0, 0.1).is_err());
        assert!(SingleParams::new(1.0, -1.0, 0.1).is_err());
        assert!(SingleParams::new(1.0, 1.0, 0.0).is_err());
        assert!(SingleParams::new(f64::NAN, 1.0, 0.1).is_err());
    }

    #[test]
    fn quantum_linearity() {
        assert_eq!(p_single_quantum(0.1, 0.0, 1e15), 0.0);
        let a = p_single_quantum(0.1, 1e-19, 2.7e15);
        let b = p_single_quantum(0.2, 1e-19, 2.7e15);
        assert!((b / a - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sub_zero_mass_is_negligible_for_narrow_density() {
        assert!(sub_zero_mass(0.0, 0.01) < 1e-300 || sub_zero_mass(0.0, 0.01) == 0.0);
        assert!((sub_zero_mass(0.0, 1.0) - 0.5 * erfc(1.0 / SQRT_2)).abs() < 1e-16);
    }
}
