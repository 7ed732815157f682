//! Filtered fields, effective intensity and the threshold detection law.
//!
//! Element `j` sees `Ē_j = scale_j · Σ_k β_k·sinc[T/2·(ω_k − ω_j)]`. The
//! scale is fixed so that, for the bare vacuum, `cε₀⟨|Ē_j|²⟩ = ħω_j²/(4cTL)`.
//! Transverse factors are taken as 1 (small detector radius).

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::config::{element_zpf_intensity, ExperimentConfig};
use crate::constants::{C, EPSILON0};
use crate::error::{Error, Result};
use crate::field::{BeamAmplitudes, VACUUM_VARIANCE};
use crate::grid::ModeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DetectorId {
    One = 1,
    Two = 2,
}

impl TryFrom<u8> for DetectorId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(DetectorId::One),
            2 => Ok(DetectorId::Two),
            other => Err(Error::InvalidDetector(other)),
        }
    }
}

impl DetectorId {
    pub fn index(self) -> usize {
        self as usize - 1
    }
}

/// Per-element normalization shared by both detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementScales {
    /// Field scale per element, V/m per unit amplitude.
    pub field: Vec<f64>,
    /// Pure-vacuum mean intensity Ī₀ⱼ per element, W/m².
    pub zpf_intensity: Vec<f64>,
    /// cε₀·scale_j², so that Ī = Σ_j weight_j·|Σ_k w_kj β_k|².
    pub intensity_weight: Vec<f64>,
}

impl ElementScales {
    pub fn new(config: &ExperimentConfig, grid: &ModeGrid) -> Self {
        let n = grid.n_elements();
        let mut field = Vec::with_capacity(n);
        let mut zpf = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        for j in 0..n {
            let i0 = element_zpf_intensity(config, grid.frequencies[j]);
            let norm = if grid.modes_per_element == 1 {
                1.0
            } else {
                grid.element_support(j).iter().map(|(_, w)| w * w).sum()
            };
            let w = i0 / (VACUUM_VARIANCE * norm);
            field.push((w / (C * EPSILON0)).sqrt());
            zpf.push(i0);
            weight.push(w);
        }
        Self {
            field,
            zpf_intensity: zpf,
            intensity_weight: weight,
        }
    }

    /// Σ_j Ī₀ⱼ, the grid-summed vacuum mean intensity.
    pub fn total_zpf(&self) -> f64 {
        self.zpf_intensity.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredFieldSet {
    pub e_plus: Vec<Complex64>,
    pub detector_id: DetectorId,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensitySample {
    /// Effective intensity Ī, W/m².
    pub i_bar: f64,
    /// Ī/Ī₀.
    pub u: f64,
    pub detector_id: DetectorId,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClickOutcome {
    pub clicked: [bool; 2],
    pub probability_used: [f64; 2],
}

pub fn filter_fields(
    beams: &BeamAmplitudes,
    grid: &ModeGrid,
    scales: &ElementScales,
    detector: u8,
) -> Result<FilteredFieldSet> {
    let detector_id = DetectorId::try_from(detector)?;
    let beta = match detector_id {
        DetectorId::One => &beams.beta_beam1,
        DetectorId::Two => &beams.beta_beam2,
    };
    if beta.len() != grid.n_modes() {
        return Err(Error::InvalidParams(format!(
            "beam has {} modes, grid has {}",
            beta.len(),
            grid.n_modes()
        )));
    }
    let e_plus = if grid.modes_per_element == 1 {
        beta.iter().zip(&scales.field).map(|(b, s)| b * *s).collect()
    } else {
        (0..grid.n_elements())
            .map(|j| {
                let sum: Complex64 = grid
                    .element_support(j)
                    .iter()
                    .map(|&(k, w)| beta[k] * w)
                    .sum();
                sum * scales.field[j]
            })
            .collect()
    };
    Ok(FilteredFieldSet { e_plus, detector_id })
}

/// Ī = cε₀·Σ_j |Ē_j|² and u = Ī/Ī₀.
pub fn effective_intensity(fields: &FilteredFieldSet, i0_bar: f64) -> IntensitySample {
    let sum: f64 = fields.e_plus.iter().map(|e| e.norm_sqr()).sum();
    let i_bar = C * EPSILON0 * sum;
    IntensitySample {
        i_bar,
        u: i_bar / i0_bar,
        detector_id: fields.detector_id,
    }
}

/// Dimensionless detection law parameters: threshold margin m, gain
/// γ = ζσ₀ and relative width s = σ₀/Ī₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionLaw {
    pub m: f64,
    pub gamma: f64,
    pub s: f64,
}

impl DetectionLaw {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        let d = crate::config::derive_params(config);
        Self {
            m: config.i_m_margin,
            gamma: config.zeta_gain * d.sigma0,
            s: d.s(),
        }
    }

    /// Threshold in units of Ī₀.
    pub fn threshold_u(&self) -> f64 {
        1.0 + self.m * self.s
    }
}

/// P = (1 − exp(−γ(u−1)/s))·Θ[u − (1 + m·s)].
pub fn detection_probability(u: f64, law: &DetectionLaw) -> f64 {
    if u > law.threshold_u() {
        (-(-law.gamma * (u - 1.0) / law.s).exp_m1()).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// The same law in SI form: (1 − e^{−ζ(Ī−Ī₀)})·Θ[Ī − I_m].
pub fn detection_probability_si(i_bar: f64, i0_bar: f64, i_m: f64, zeta: f64) -> f64 {
    if i_bar > i_m {
        (-(-zeta * (i_bar - i0_bar)).exp_m1()).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Independent Bernoulli decisions given the two probabilities. Two uniforms
/// are always consumed, in detector order.
pub fn sample_clicks(p1: f64, p2: f64, rng: &mut impl Rng) -> ClickOutcome {
    let r1: f64 = rng.random();
    let r2: f64 = rng.random();
    ClickOutcome {
        clicked: [r1 < p1, r2 < p2],
        probability_used: [p1, p2],
    }
}

/// Writes `trial,detector,u,probability,clicked` rows.
pub fn write_trace_csv(
    out: &mut impl Write,
    trial: u64,
    samples: &[IntensitySample],
    outcome: &ClickOutcome,
    header: bool,
) -> std::io::Result<()> {
    if header {
        writeln!(out, "trial,detector,u,probability,clicked")?;
    }
    for s in samples {
        let i = s.detector_id.index();
        writeln!(
            out,
            "{trial},{},{:e},{:e},{}",
            s.detector_id as u8,
            s.u,
            outcome.probability_used[i],
            outcome.clicked[i] as u8
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::config_from_str;
    use crate::field::{apply_pdc, sample_vacuum_trial};
    use crate::grid::{build_mode_grid, build_mode_grid_oversampled};
    use crate::rng::{stream, StreamRole};

    fn setup(n: usize) -> (ExperimentConfig, ModeGrid, ElementScales) {
        let c = config_from_str(
            &format!(
                r#"{{"lambda_center": 7e-7, "delta_lambda": 1e-8, "T_window": 1e-8, "tau_coherence": {:e}}}"#,
                1e-8 / n as f64
            ),
            &[],
        )
        .unwrap();
        let g = build_mode_grid(&c).unwrap();
        let s = ElementScales::new(&c, &g);
        (c, g, s)
    }

    #[test]
    fn default_grid_field_is_scaled_beta() {
        let (_, g, s) = setup(20);
        let b = apply_pdc(&sample_vacuum_trial(&g, 2, 0), &g, 0.1).unwrap();
        let f = filter_fields(&b, &g, &s, 1).unwrap();
        for j in 0..g.n_elements() {
            assert_eq!(f.e_plus[j], b.beta_beam1[j] * s.field[j]);
        }
        let i = effective_intensity(&f, 1.0);
        let direct: f64 = (0..g.n_elements())
            .map(|j| s.intensity_weight[j] * b.beta_beam1[j].norm_sqr())
            .sum();
        assert!((i.i_bar / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_detector() {
        let (_, g, s) = setup(10);
        let b = apply_pdc(&sample_vacuum_trial(&g, 2, 0), &g, 0.0).unwrap();
        assert!(matches!(filter_fields(&b, &g, &s, 3), Err(Error::InvalidDetector(3))));
    }

    #[test]
    fn zero_field_zero_intensity() {
        let f = FilteredFieldSet {
            e_plus: vec![Complex64::default(); 5],
            detector_id: DetectorId::One,
        };
        assert_eq!(effective_intensity(&f, 1.0).i_bar, 0.0);
    }

    #[test]
    fn global_phase_invariance() {
        let (_, g, s) = setup(12);
        let mut b = apply_pdc(&sample_vacuum_trial(&g, 5, 0), &g, 0.1).unwrap();
        let before = effective_intensity(&filter_fields(&b, &g, &s, 1).unwrap(), 1.0).i_bar;
        let phase = Complex64::from_polar(1.0, 0.7);
        b.beta_beam1.iter_mut().for_each(|x| *x *= phase);
        let after = effective_intensity(&filter_fields(&b, &g, &s, 1).unwrap(), 1.0).i_bar;
        assert!((after / before - 1.0).abs() < 1e-13);
    }

    #[test]
    fn oversampled_grid_mixes_neighbours() {
        let c = config_from_str(
            r#"{"lambda_center": 7e-7, "delta_lambda": 1e-8, "T_window": 1e-8, "tau_coherence": 1e-9}"#,
            &[],
        )
        .unwrap();
        let g = build_mode_grid_oversampled(&c, 2).unwrap();
        let s = ElementScales::new(&c, &g);
        let mut beta = vec![Complex64::default(); g.n_modes()];
        let j = 4;
        beta[g.center_mode(j) + 1] = Complex64::new(1.0, 0.0);
        let b = BeamAmplitudes {
            beta_beam1: beta.clone(),
            beta_beam2: beta,
            g_used: 0.0,
        };
        let f = filter_fields(&b, &g, &s, 1).unwrap();
        let w = f.e_plus[j].re / s.field[j];
        assert!((w - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn law_examples() {
        let law = DetectionLaw {
            m: 5.0,
            gamma: 0.01,
            s: 0.01,
        };
        assert_eq!(detection_probability(law.threshold_u(), &law), 0.0);
        assert_eq!(detection_probability(0.5, &law), 0.0);
        // Ī − Ī₀ = 10/ζ, i.e. (u − 1)/s = 10/γ.
        let u = 1.0 + 10.0 / law.gamma * law.s;
        let p = detection_probability(u, &law);
        assert!((p - (1.0 - (-10.0f64).exp())).abs() < 1e-15);
        assert!((p - 0.999_954_6).abs() < 1e-7);
        let hard = DetectionLaw { gamma: 1e6, ..law };
        assert_eq!(detection_probability(1.06, &hard), 1.0);
    }

    #[test]
    fn si_and_dimensionless_laws_agree() {
        let (c, _, _) = setup(100);
        let law = DetectionLaw::from_config(&c);
        let d = crate::config::derive_params(&c);
        for k in 0..50 {
            let u = 0.9 + 0.005 * k as f64;
            let a = detection_probability(u, &law);
            let b = detection_probability_si(u * d.i0_bar, d.i0_bar, d.i_m, c.zeta_gain);
            assert!((a - b).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn click_extremes() {
        let mut rng = stream(0, 0, StreamRole::Clicks);
        for _ in 0..1000 {
            assert_eq!(sample_clicks(0.0, 0.0, &mut rng).clicked, [false, false]);
            assert_eq!(sample_clicks(1.0, 1.0, &mut rng).clicked, [true, true]);
        }
    }

    #[test]
    fn trace_rows() {
        let s = [IntensitySample {
            i_bar: 1.0,
            u: 1.0,
            detector_id: DetectorId::Two,
        }];
        let o = ClickOutcome {
            clicked: [false, true],
            probability_used: [0.0, 0.25],
        };
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, 3, &s, &o, true).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "trial,detector,u,probability,clicked\n3,2,1e0,2.5e-1,1\n"
        );
    }
}
