//! Vacuum effective intensity per element and its grid statistics.
//!
//! The full element integral is
//!
//! ```text
//! Ī₀ⱼ = ħω²/(2πcTL) · ∫₀^V sinc²(v)·(2J₁(x)/x)² dv,   V = Lω/(2c),
//! x = (2ωR/c)·sqrt(q(1−q)),  q = v/(2V)
//! ```
//!
//! and tends to ħω²/(4cTL) when the transverse factor is ≈ 1 over the
//! region where sinc² is not negligible.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::{derive_params, element_zpf_intensity, ExperimentConfig};
use crate::constants::{C, HBAR};
use crate::error::Result;
use crate::grid::ModeGrid;
use crate::quad::{integrate_with_breakpoints, QuadResult, Tolerance};
use crate::special::{airy_factor, sinc};

/// Relative tolerance of the element quadrature.
pub const ZPF_QUAD_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZpfMethod {
    Closed,
    Quadrature,
}

/// Ī₀ⱼ at `omega`, W/m².
pub fn zpf_element_intensity(config: &ExperimentConfig, omega: f64, method: ZpfMethod) -> Result<f64> {
    match method {
        ZpfMethod::Closed => Ok(element_zpf_intensity(config, omega)),
        ZpfMethod::Quadrature => Ok(zpf_element_quadrature(config, omega)?.value),
    }
}

/// The full Bessel–sinc integral, with its achieved error (both in W/m²).
pub fn zpf_element_quadrature(config: &ExperimentConfig, omega: f64) -> Result<QuadResult> {
    let v_max = config.detector_l * omega / (2.0 * C);
    let k = 2.0 * omega * config.detector_r / C;
    let integrand = |v: f64| {
        let q = v / (2.0 * v_max);
        let x = k * (q * (1.0 - q)).max(0.0).sqrt();
        let s = sinc(v);
        s * s * airy_factor(x)
    };
    // Panels between consecutive zeros of sinc.
    let n_full = (v_max / PI).floor() as usize;
    let mut points: Vec<f64> = (0..=n_full).map(|n| n as f64 * PI).collect();
    if v_max > points[n_full] {
        points.push(v_max);
    }
    let r = integrate_with_breakpoints(integrand, &points, Tolerance::relative(ZPF_QUAD_RTOL))?;
    let prefactor = HBAR * omega * omega / (2.0 * PI * C * config.t_window * config.detector_l);
    Ok(QuadResult {
        value: prefactor * r.value,
        abs_error: prefactor * r.abs_error,
        evaluations: r.evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZpfStatistics {
    /// Continuum mean ħω̄²δω/(8πcL), W/m².
    pub i0_bar: f64,
    /// σ₀ = Ī₀·sqrt(τ/T), W/m².
    pub sigma0: f64,
    /// Σ_j ħω_j²/(4cTL) over the grid, W/m².
    pub grid_sum: f64,
    /// |grid_sum/i0_bar − 1|.
    pub relative_gap: f64,
}

pub fn zpf_statistics(config: &ExperimentConfig, grid: &ModeGrid) -> ZpfStatistics {
    let d = derive_params(config);
    let grid_sum: f64 = grid
        .frequencies
        .iter()
        .map(|&w| element_zpf_intensity(config, w))
        .sum();
    ZpfStatistics {
        i0_bar: d.i0_bar,
        sigma0: d.sigma0,
        grid_sum,
        relative_gap: (grid_sum / d.i0_bar - 1.0).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{config_from_str, small_radius_limit};
    use crate::grid::build_mode_grid;

    fn config(lambda: f64, length: f64, radius_fraction: f64) -> ExperimentConfig {
        let mut c = config_from_str(
            &format!(
                r#"{{"lambda_center": {lambda:e}, "delta_lambda": 1e-8, "T_window": 1e-8, "detector_L": {length:e}}}"#
            ),
            &[],
        )
        .unwrap();
        c.detector_r = radius_fraction * small_radius_limit(lambda, length);
        c
    }

    #[test]
    fn closed_form_scales_quadratically() {
        let c = config(7e-7, 1e-2, 0.3);
        let w = 2.0 * PI * C / 7e-7;
        let a = zpf_element_intensity(&c, w, ZpfMethod::Closed).unwrap();
        let b = zpf_element_intensity(&c, 2.0 * w, ZpfMethod::Closed).unwrap();
        assert!((b / a - 4.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_matches_closed_for_small_radius() {
        let c = config(7e-7, 1e-2, 0.3);
        let w = 2.0 * PI * C / 7e-7;
        let q = zpf_element_quadrature(&c, w).unwrap();
        let closed = element_zpf_intensity(&c, w);
        assert!((q.value / closed - 1.0).abs() < 0.02, "ratio {}", q.value / closed);
        assert!(q.abs_error <= 1e-6 * q.value);
    }

    #[test]
    fn discrepancy_grows_at_radius_limit() {
        let c = config(7e-7, 1e-2, 1.0);
        let w = 2.0 * PI * C / 7e-7;
        let ratio = zpf_element_quadrature(&c, w).unwrap().value / element_zpf_intensity(&c, w);
        assert!(ratio < 0.98, "ratio {ratio}");
    }

    #[test]
    fn grid_sum_close_to_continuum() {
        let c = config(7e-7, 1e-2, 0.3);
        let g = build_mode_grid(&c).unwrap();
        let s = zpf_statistics(&c, &g);
        assert!(s.relative_gap <= 2.0 / g.n_elements() as f64);
        assert!((s.sigma0 / s.i0_bar - 1e-2).abs() < 1e-15);
    }
}
