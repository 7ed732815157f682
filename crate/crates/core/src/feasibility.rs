//! Experiment-design bounds: lens gain, diffraction-limited detector
//! radius, and the minimal signal intensity and counting rates for which
//! the model's signal stands out of the vacuum fluctuations.
//!
//! With s = sqrt(τT):
//!
//! ```text
//! I_s,min   = ħω̄²/(4cL·s)
//! Rate_lens = ηλf²/(2R_l²L·s)
//! Rate_coh  = ηf²R_C²/(2Ld²λ·s)
//! ```
//!
//! "Much greater than" is read as a strictness factor k applied to each
//! bound; both the raw and the k-scaled values are reported.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::config::{derive_params, ExperimentConfig, FIRST_RING, SECOND_RING};
use crate::constants::{C, HBAR};
use crate::error::{Error, Result};
use crate::field::{expected_signal_intensity, SignalPairs};
use crate::grid::build_mode_grid;

pub const DEFAULT_STRICTNESS: f64 = 10.0;
/// Share of an Airy pattern's power inside the first and second dark rings.
pub const FIRST_RING_POWER: f64 = 0.84;
pub const SECOND_RING_POWER: f64 = 0.91;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LensGeometry {
    /// Intensity gain π²R_l⁴/(λ²f²).
    pub b_squared: f64,
    /// Aperture ratio 2R_l/f.
    pub aperture_ratio: f64,
    #[serde(rename = "R_diffraction_first")]
    pub r_first: f64,
    #[serde(rename = "R_diffraction_second")]
    pub r_second: f64,
}

pub fn lens_and_diffraction(config: &ExperimentConfig) -> Result<LensGeometry> {
    let (rl, f, lambda) = (config.lens_rl, config.lens_f, config.lambda_center);
    if !(rl > 0.0 && f > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidParams("lens radius, focal length and wavelength must be > 0".into()));
    }
    let ar = 2.0 * rl / f;
    Ok(LensGeometry {
        b_squared: PI * PI * rl.powi(4) / (lambda * lambda * f * f),
        aperture_ratio: ar,
        r_first: FIRST_RING * lambda / ar,
        r_second: SECOND_RING * lambda / ar,
    })
}

/// Right-hand sides of the three inequalities, without strictness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawBounds {
    #[serde(rename = "I_s_min")]
    pub i_s_min: f64,
    pub rate_min_lens: f64,
    pub rate_min_coherence: f64,
}

/// Bounds for an explicit coherence time, independent of the configured
/// band.
pub fn raw_bounds(config: &ExperimentConfig, tau: f64) -> RawBounds {
    let root = (tau * config.t_window).sqrt();
    let omega_bar = 0.5 * (config.omega_min + config.omega_max);
    let (l, f, rl) = (config.detector_l, config.lens_f, config.lens_rl);
    let (lambda, d, rc) = (config.lambda_center, config.source_distance_d, config.crystal_radius_rc);
    RawBounds {
        i_s_min: HBAR * omega_bar * omega_bar / (4.0 * C * l * root),
        rate_min_lens: config.eta * lambda * f * f / (2.0 * rl * rl * l * root),
        rate_min_coherence: config.eta * f * f * rc * rc / (2.0 * l * d * d * lambda * root),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintFlags {
    /// Ī_s ≥ k·σ₀.
    pub signal_above_noise: bool,
    /// dλ ≥ R_l·R_C.
    pub spatial_coherence: bool,
    /// R < sqrt(λL/8π²).
    pub small_radius: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub strictness: f64,
    #[serde(flatten)]
    pub lens: LensGeometry,
    pub first_ring_power: f64,
    pub second_ring_power: f64,
    pub raw: RawBounds,
    #[serde(rename = "I_s_min")]
    pub i_s_min: f64,
    /// Incoming intensity before the lens, I_s,min/b².
    #[serde(rename = "I_in_min")]
    pub i_in_min: f64,
    pub rate_min_lens: f64,
    pub rate_min_coherence: f64,
    #[serde(rename = "sigma0")]
    pub sigma0: f64,
    /// Configured mean signal intensity at the detector.
    #[serde(rename = "I_s")]
    pub i_s: f64,
    /// Photon-counting rate of the configured signal, ηπR²Ī_s/(ħω̄).
    pub signal_rate: f64,
    pub margin_intensity: f64,
    pub margin_rate_lens: f64,
    pub margin_rate_coherence: f64,
    pub constraint_flags: ConstraintFlags,
}

/// Evaluates all bounds for the configuration with strictness `k` ≥ 1.
pub fn minimal_bounds(config: &ExperimentConfig, k: f64) -> Result<FeasibilityReport> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::OutOfRange {
            key: "strictness".into(),
            value: k,
            reason: "must be a finite value >= 1".into(),
        });
    }
    let lens = lens_and_diffraction(config)?;
    let raw = raw_bounds(config, config.tau_coherence);
    let d = derive_params(config);
    let grid = build_mode_grid(config)?;
    let i_s = expected_signal_intensity(config, &grid, SignalPairs::All);
    let area = PI * config.detector_r * config.detector_r;
    let signal_rate = config.eta * area * i_s / (HBAR * d.omega_bar);
    let i_s_min = k * raw.i_s_min;
    let rate_min_lens = k * raw.rate_min_lens;
    let rate_min_coherence = k * raw.rate_min_coherence;
    Ok(FeasibilityReport {
        strictness: k,
        lens,
        first_ring_power: FIRST_RING_POWER,
        second_ring_power: SECOND_RING_POWER,
        raw,
        i_s_min,
        i_in_min: i_s_min / lens.b_squared,
        rate_min_lens,
        rate_min_coherence,
        sigma0: d.sigma0,
        i_s,
        signal_rate,
        margin_intensity: i_s / i_s_min,
        margin_rate_lens: signal_rate / rate_min_lens,
        margin_rate_coherence: signal_rate / rate_min_coherence,
        constraint_flags: ConstraintFlags {
            signal_above_noise: i_s >= k * d.sigma0,
            spatial_coherence: config.source_distance_d * config.lambda_center
                >= config.lens_rl * config.crystal_radius_rc,
            small_radius: config.detector_r < d.small_radius_limit,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    #[serde(rename = "I_s_min")]
    pub i_s_min: f64,
    #[serde(rename = "I_in_min")]
    pub i_in_min: f64,
    pub rate_min_lens: f64,
    pub rate_min_coherence: f64,
}

/// k-scaled bounds over a list of coherence times.
pub fn sweep_tau(config: &ExperimentConfig, taus: &[f64], k: f64) -> Result<Vec<SweepRow>> {
    let lens = lens_and_diffraction(config)?;
    taus.iter()
        .map(|&tau| {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::OutOfRange {
                    key: "tau_coherence".into(),
                    value: tau,
                    reason: "must be a finite value > 0".into(),
                });
            }
            let r = raw_bounds(config, tau);
            Ok(SweepRow {
                tau,
                i_s_min: k * r.i_s_min,
                i_in_min: k * r.i_s_min / lens.b_squared,
                rate_min_lens: k * r.rate_min_lens,
                rate_min_coherence: k * r.rate_min_coherence,
            })
        })
        .collect()
}

/// `n` points spaced evenly from `lo` to `hi` inclusive.
pub fn linear_taus(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn write_sweep_csv(out: &mut impl Write, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "tau,I_s_min,I_in_min,rate_min_lens,rate_min_coherence")?;
    for r in rows {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e}",
            r.tau, r.i_s_min, r.i_in_min, r.rate_min_lens, r.rate_min_coherence
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::config_from_str;

    fn config() -> ExperimentConfig {
        config_from_str(
            r#"{"lambda_center": 7e-7, "delta_lambda": 1e-8, "T_window": 1e-8, "eta": 0.1}"#,
            &[],
        )
        .unwrap()
    }

    #[test]
    fn unit_aperture() {
        let mut c = config();
        c.lens_rl = 0.5 * c.lens_f;
        let g = lens_and_diffraction(&c).unwrap();
        assert_eq!(g.aperture_ratio, 1.0);
        assert!((g.r_first - 1.22 * c.lambda_center).abs() < 1e-22);
    }

    #[test]
    fn gain_is_quartic_in_lens_radius() {
        let mut c = config();
        let a = lens_and_diffraction(&c).unwrap().b_squared;
        c.lens_rl *= 2.0;
        let b = lens_and_diffraction(&c).unwrap().b_squared;
        assert!((b / a - 16.0).abs() < 1e-12);
    }

    #[test]
    fn direct_evaluation() {
        let mut c = config();
        c.lens_rl = 5e-3;
        c.lens_f = 25e-3;
        let g = lens_and_diffraction(&c).unwrap();
        let want = PI * PI * 625e-12 / (49e-14 * 625e-6);
        assert!((g.b_squared / want - 1.0).abs() < 1e-12);
        assert!((g.r_second - 2.23 * 7e-7 / 0.4).abs() < 1e-20);
    }

    #[test]
    fn bounds_vanish_for_long_coherence() {
        let r = raw_bounds(&config(), 1e30);
        assert!(r.i_s_min < 1e-10 && r.rate_min_lens < 1e-10 && r.rate_min_coherence < 1e-10);
    }

    #[test]
    fn rate_forms_coincide_when_coherence_is_saturated() {
        let mut c = config();
        c.crystal_radius_rc = c.source_distance_d * c.lambda_center / c.lens_rl;
        let r = raw_bounds(&c, 1e-12);
        assert!((r.rate_min_lens / r.rate_min_coherence - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_scale_as_inverse_root_tau() {
        let c = config();
        let rows = sweep_tau(&c, &linear_taus(1e-13, 4e-12, 9), 1.0).unwrap();
        for w in rows.windows(2) {
            let ratio = (w[1].tau / w[0].tau).sqrt();
            assert!((w[0].rate_min_lens / w[1].rate_min_lens / ratio - 1.0).abs() < 1e-12);
            assert!((w[0].i_s_min / w[1].i_s_min / ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn strictness_scales_and_validates() {
        let c = config();
        let a = minimal_bounds(&c, 1.0).unwrap();
        let b = minimal_bounds(&c, 10.0).unwrap();
        assert!((b.rate_min_lens / a.rate_min_lens - 10.0).abs() < 1e-12);
        assert_eq!(a.raw, b.raw);
        assert!(minimal_bounds(&c, 0.5).is_err());
        // Intensity bound equals σ₀ when the band is 2π/τ wide.
        assert!((a.raw.i_s_min / a.sigma0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows = sweep_tau(&config(), &[1e-13, 1e-12], 10.0).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("tau,"));
    }
}
