//! Experiment configuration, derived parameters and modelling diagnostics.
//!
//! The configuration is a flat JSON object in SI units (see `docs/config.md`).
//! Only `lambda_center`, `delta_lambda` and `T_window` are required; every
//! other key has a documented default. Unknown keys are rejected.
//!
//! Internally the analytic and Monte Carlo code mostly works in the
//! dimensionless set
//!
//! * `u = Ī/Ī₀` (effective intensity in units of the mean zeropoint level),
//! * `s = σ₀/Ī₀ = sqrt(τ/T)`,
//! * `m = (I_m − Ī₀)/σ₀` (threshold margin),
//! * `x = Ī_s/σ₀` (signal),
//! * `γ = ζσ₀` (gain),
//!
//! and the conversions live in [`DerivedParams`].

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::constants::{C, HBAR};
use crate::error::{Error, Result};

/// Airy-pattern constant for the first dark ring.
pub const FIRST_RING: f64 = 1.22;
/// Airy-pattern constant for the second dark ring.
pub const SECOND_RING: f64 = 2.23;

/// Smallest accepted window-to-coherence-time ratio.
pub const MIN_WINDOW_RATIO: f64 = 10.0;

/// Coupling above which `g² ≪ 1` is considered violated (warning only).
pub const WEAK_COUPLING_LIMIT: f64 = 0.1;

pub const DEFAULT_TAU: f64 = 1.0e-12;
pub const DEFAULT_DETECTOR_R: f64 = 2.0e-6;
pub const DEFAULT_DETECTOR_L: f64 = 1.0e-2;
pub const DEFAULT_ETA: f64 = 0.1;
pub const DEFAULT_ZETA: f64 = 1.0e-2;
pub const DEFAULT_MARGIN: f64 = 5.0;
pub const DEFAULT_LENS_RL: f64 = 2.5e-3;
pub const DEFAULT_LENS_F: f64 = 5.0e-3;
pub const DEFAULT_SOURCE_DISTANCE: f64 = 1.0;
pub const DEFAULT_CRYSTAL_RADIUS: f64 = 2.0e-4;
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 0;

/// Every key accepted in a configuration document, in schema order.
pub const CONFIG_KEYS: [&str; 19] = [
    "lambda_center",
    "delta_lambda",
    "omega_min",
    "omega_max",
    "T_window",
    "tau_coherence",
    "detector_R",
    "detector_L",
    "g_coupling",
    "eta",
    "zeta_gain",
    "I_m_margin",
    "lens_Rl",
    "lens_f",
    "source_distance_d",
    "crystal_radius_Rc",
    "omega_pump",
    "n_trials",
    "seed",
];

/// Fully resolved experiment configuration (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Central wavelength λ, m.
    pub lambda_center: f64,
    /// Bandwidth Δλ, m. Informational: τ is never derived from it.
    pub delta_lambda: f64,
    /// Lower band edge, rad/s.
    pub omega_min: f64,
    /// Upper band edge, rad/s.
    pub omega_max: f64,
    /// Detection window T, s.
    #[serde(rename = "T_window")]
    pub t_window: f64,
    /// Coherence time τ, s.
    pub tau_coherence: f64,
    /// Detector cylinder radius R, m.
    #[serde(rename = "detector_R")]
    pub detector_r: f64,
    /// Detector cylinder length L, m.
    #[serde(rename = "detector_L")]
    pub detector_l: f64,
    /// Down-conversion coupling g.
    pub g_coupling: f64,
    /// Quantum efficiency η.
    pub eta: f64,
    /// Response gain ζ, (W/m²)⁻¹.
    pub zeta_gain: f64,
    /// Threshold margin (I_m − Ī₀)/σ₀.
    #[serde(rename = "I_m_margin")]
    pub i_m_margin: f64,
    /// Lens radius, m.
    #[serde(rename = "lens_Rl")]
    pub lens_rl: f64,
    /// Lens focal length, m.
    pub lens_f: f64,
    /// Source-to-detector distance, m.
    pub source_distance_d: f64,
    /// Active crystal radius, m.
    #[serde(rename = "crystal_radius_Rc")]
    pub crystal_radius_rc: f64,
    /// Pump frequency ω₀ = ω_min + ω_max, rad/s.
    pub omega_pump: f64,
    pub n_trials: u64,
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    lambda_center: f64,
    delta_lambda: f64,
    #[serde(rename = "T_window")]
    t_window: f64,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    tau_coherence: Option<f64>,
    #[serde(rename = "detector_R")]
    detector_r: Option<f64>,
    #[serde(rename = "detector_L")]
    detector_l: Option<f64>,
    g_coupling: Option<f64>,
    eta: Option<f64>,
    zeta_gain: Option<f64>,
    #[serde(rename = "I_m_margin")]
    i_m_margin: Option<f64>,
    #[serde(rename = "lens_Rl")]
    lens_rl: Option<f64>,
    lens_f: Option<f64>,
    source_distance_d: Option<f64>,
    #[serde(rename = "crystal_radius_Rc")]
    crystal_radius_rc: Option<f64>,
    omega_pump: Option<f64>,
    n_trials: Option<u64>,
    seed: Option<u64>,
}

impl RawConfig {
    fn resolve(self) -> ExperimentConfig {
        let tau = self.tau_coherence.unwrap_or(DEFAULT_TAU);
        // Default band: centred on 2πc/λ with width 2π/τ, so that the element
        // count T/τ tiles it exactly.
        let omega_c = 2.0 * PI * C / self.lambda_center;
        let omega_min = self.omega_min.unwrap_or(omega_c - PI / tau);
        let omega_max = self.omega_max.unwrap_or(omega_c + PI / tau);
        ExperimentConfig {
            lambda_center: self.lambda_center,
            delta_lambda: self.delta_lambda,
            omega_min,
            omega_max,
            t_window: self.t_window,
            tau_coherence: tau,
            detector_r: self.detector_r.unwrap_or(DEFAULT_DETECTOR_R),
            detector_l: self.detector_l.unwrap_or(DEFAULT_DETECTOR_L),
            g_coupling: self.g_coupling.unwrap_or(0.0),
            eta: self.eta.unwrap_or(DEFAULT_ETA),
            zeta_gain: self.zeta_gain.unwrap_or(DEFAULT_ZETA),
            i_m_margin: self.i_m_margin.unwrap_or(DEFAULT_MARGIN),
            lens_rl: self.lens_rl.unwrap_or(DEFAULT_LENS_RL),
            lens_f: self.lens_f.unwrap_or(DEFAULT_LENS_F),
            source_distance_d: self.source_distance_d.unwrap_or(DEFAULT_SOURCE_DISTANCE),
            crystal_radius_rc: self.crystal_radius_rc.unwrap_or(DEFAULT_CRYSTAL_RADIUS),
            omega_pump: self.omega_pump.unwrap_or(omega_min + omega_max),
            n_trials: self.n_trials.unwrap_or(DEFAULT_TRIALS),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
        }
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    load_config_with_overrides(path, &[])
}

/// Reads a configuration file and applies `KEY=VALUE` overrides before
/// validation.
pub fn load_config_with_overrides(
    path: impl AsRef<Path>,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    config_from_str(&text, overrides)
}

/// Parses a JSON document, applies overrides and validates the result.
pub fn config_from_str(text: &str, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let object = value
        .as_object_mut()
        .ok_or_else(|| Error::Parse("top level must be a JSON object".into()))?;
    apply_overrides(object, overrides)?;
    config_from_value(value)
}

fn config_from_value(value: Value) -> Result<ExperimentConfig> {
    let raw: RawConfig = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let config = raw.resolve();
    config.check()?;
    Ok(config)
}

/// Splits `KEY=VALUE` into its parts. Only `.` is accepted as the decimal
/// separator.
pub fn parse_override(item: &str) -> Result<(String, String)> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| Error::BadOverride(item.to_string()))?;
    let key = key.trim();
    let value = value.trim();
    if key.is_empty() || value.is_empty() {
        return Err(Error::BadOverride(item.to_string()));
    }
    Ok((key.to_string(), value.to_string()))
}

fn apply_overrides(object: &mut Map<String, Value>, overrides: &[(String, String)]) -> Result<()> {
    for (key, text) in overrides {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownKey(key.clone()));
        }
        let value = if key == "seed" || key == "n_trials" {
            let n: u64 = text
                .parse()
                .map_err(|_| Error::BadOverride(format!("{key}={text}")))?;
            Value::from(n)
        } else {
            let x: f64 = text
                .parse()
                .map_err(|_| Error::BadOverride(format!("{key}={text}")))?;
            if !x.is_finite() {
                return Err(Error::BadOverride(format!("{key}={text}")));
            }
            Value::from(x)
        };
        object.insert(key.clone(), value);
    }
    Ok(())
}

fn positive(key: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { key });
    }
    if value <= 0.0 {
        return Err(Error::OutOfRange {
            key,
            value,
            reason: "must be strictly positive",
        });
    }
    Ok(())
}

impl ExperimentConfig {
    /// Hard validity checks; violations are errors naming the key.
    pub fn check(&self) -> Result<()> {
        positive("lambda_center", self.lambda_center)?;
        positive("delta_lambda", self.delta_lambda)?;
        positive("omega_min", self.omega_min)?;
        positive("omega_max", self.omega_max)?;
        positive("T_window", self.t_window)?;
        positive("tau_coherence", self.tau_coherence)?;
        positive("detector_R", self.detector_r)?;
        positive("detector_L", self.detector_l)?;
        positive("eta", self.eta)?;
        positive("zeta_gain", self.zeta_gain)?;
        positive("I_m_margin", self.i_m_margin)?;
        positive("lens_Rl", self.lens_rl)?;
        positive("lens_f", self.lens_f)?;
        positive("source_distance_d", self.source_distance_d)?;
        positive("crystal_radius_Rc", self.crystal_radius_rc)?;
        positive("omega_pump", self.omega_pump)?;
        if !self.g_coupling.is_finite() {
            return Err(Error::NonFinite { key: "g_coupling" });
        }
        if self.eta > 1.0 {
            return Err(Error::OutOfRange {
                key: "eta",
                value: self.eta,
                reason: "quantum efficiency must lie in (0, 1]",
            });
        }
        if self.omega_min >= self.omega_max {
            return Err(Error::OutOfRange {
                key: "omega_max",
                value: self.omega_max,
                reason: "must exceed omega_min",
            });
        }
        if self.g_coupling * self.g_coupling >= 1.0 {
            return Err(Error::OutOfRange {
                key: "g_coupling",
                value: self.g_coupling,
                reason: "g² must be below 1",
            });
        }
        if self.t_window / self.tau_coherence < MIN_WINDOW_RATIO {
            return Err(Error::OutOfRange {
                key: "T_window",
                value: self.t_window,
                reason: "T_window/tau_coherence must be at least 10",
            });
        }
        if self.n_trials == 0 {
            return Err(Error::OutOfRange {
                key: "n_trials",
                value: 0.0,
                reason: "at least one trial is required",
            });
        }
        let pump = self.omega_min + self.omega_max;
        if (self.omega_pump - pump).abs() > 1e-12 * pump {
            return Err(Error::OutOfRange {
                key: "omega_pump",
                value: self.omega_pump,
                reason: "must equal omega_min + omega_max (perfect matching)",
            });
        }
        Ok(())
    }

    /// Non-fatal remarks worth surfacing to a user (weak-coupling regime).
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let g2 = self.g_coupling * self.g_coupling;
        if g2 > WEAK_COUPLING_LIMIT {
            out.push(format!(
                "g_coupling² = {g2:.4} exceeds {WEAK_COUPLING_LIMIT}; the second-order field expansion is not small"
            ));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Quantities computed once from a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Band centre ω̄ = (ω_max + ω_min)/2, rad/s.
    pub omega_bar: f64,
    /// Band width δω, rad/s.
    pub delta_omega: f64,
    /// Element spacing Δω = 2π/T, rad/s.
    pub delta_omega_element: f64,
    /// Number of independent detector elements, round(T/τ).
    pub n_elements: usize,
    /// Mean zeropoint effective intensity Ī₀, W/m².
    pub i0_bar: f64,
    /// Its standard deviation σ₀ = Ī₀·sqrt(τ/T), W/m².
    pub sigma0: f64,
    /// Absolute threshold I_m = Ī₀ + margin·σ₀, W/m².
    pub i_m: f64,
    /// Lens gain b² = π²R_l⁴/(λ²f²).
    pub b_squared: f64,
    /// Relative aperture A_r = 2R_l/f.
    pub aperture_ratio: f64,
    /// First-ring diffraction radius 1.22·λ/A_r, m.
    pub r_diffraction: f64,
    /// Largest detector radius for which the transverse factor is ≈ 1, m.
    pub small_radius_limit: f64,
}

impl DerivedParams {
    /// σ₀/Ī₀.
    pub fn s(&self) -> f64 {
        self.sigma0 / self.i0_bar
    }

    /// Dimensionless gain γ = ζσ₀.
    pub fn gamma(&self, config: &ExperimentConfig) -> f64 {
        config.zeta_gain * self.sigma0
    }

    /// Dimensionless signal x = Ī_s/σ₀.
    pub fn x_of(&self, signal_intensity: f64) -> f64 {
        signal_intensity / self.sigma0
    }

    /// Closed-form zeropoint intensity of the element at `omega`,
    /// ħω²/(4cTL).
    pub fn element_intensity(&self, config: &ExperimentConfig, omega: f64) -> f64 {
        element_zpf_intensity(config, omega)
    }
}

pub(crate) fn element_zpf_intensity(config: &ExperimentConfig, omega: f64) -> f64 {
    HBAR * omega * omega / (4.0 * C * config.t_window * config.detector_l)
}

/// `sqrt(λL/8π²)`.
pub fn small_radius_limit(lambda: f64, length: f64) -> f64 {
    (lambda * length / (8.0 * PI * PI)).sqrt()
}

pub fn derive_params(config: &ExperimentConfig) -> DerivedParams {
    let omega_bar = 0.5 * (config.omega_max + config.omega_min);
    let delta_omega = config.omega_max - config.omega_min;
    let ratio = config.t_window / config.tau_coherence;
    let n_elements = ratio.round().max(2.0) as usize;
    let i0_bar = HBAR * omega_bar * omega_bar * delta_omega / (8.0 * PI * C * config.detector_l);
    let sigma0 = i0_bar * (config.tau_coherence / config.t_window).sqrt();
    let lambda = config.lambda_center;
    let aperture_ratio = 2.0 * config.lens_rl / config.lens_f;
    DerivedParams {
        omega_bar,
        delta_omega,
        delta_omega_element: 2.0 * PI / config.t_window,
        n_elements,
        i0_bar,
        sigma0,
        i_m: i0_bar + config.i_m_margin * sigma0,
        b_squared: PI * PI * config.lens_rl.powi(4) / (lambda * lambda * config.lens_f * config.lens_f),
        aperture_ratio,
        r_diffraction: FIRST_RING * lambda / aperture_ratio,
        small_radius_limit: small_radius_limit(lambda, config.detector_l),
    }
}

/// A violated modelling condition with the measured and required values.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Diagnostic {
    /// R < sqrt(λL/8π²) is needed for the transverse factor to be ≈ 1.
    SmallRadius { detector_r: f64, limit: f64 },
    /// dλ ≥ R_l·R_C is needed for spatial coherence on the lens.
    SpatialCoherence { d_lambda: f64, rl_rc: f64 },
    /// The threshold must sit above the mean zeropoint level.
    Threshold { margin: f64 },
    /// The window must be much longer than the coherence time.
    WindowRatio { ratio: f64, required: f64 },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::SmallRadius { detector_r, limit } => write!(
                f,
                "small-radius condition violated: R = {detector_r:e} m, need R < {limit:e} m"
            ),
            Diagnostic::SpatialCoherence { d_lambda, rl_rc } => write!(
                f,
                "spatial coherence violated: d·λ = {d_lambda:e} m², need ≥ R_l·R_C = {rl_rc:e} m²"
            ),
            Diagnostic::Threshold { margin } => {
                write!(f, "threshold margin (I_m − Ī₀)/σ₀ = {margin} must be > 0")
            }
            Diagnostic::WindowRatio { ratio, required } => {
                write!(f, "T/τ = {ratio} is below the required {required}")
            }
        }
    }
}

/// Checks the soft modelling conditions. An empty list means all hold.
pub fn validate_config(config: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let limit = small_radius_limit(config.lambda_center, config.detector_l);
    if !(config.detector_r < limit) {
        out.push(Diagnostic::SmallRadius {
            detector_r: config.detector_r,
            limit,
        });
    }
    let d_lambda = config.source_distance_d * config.lambda_center;
    let rl_rc = config.lens_rl * config.crystal_radius_rc;
    if !(d_lambda >= rl_rc) {
        out.push(Diagnostic::SpatialCoherence { d_lambda, rl_rc });
    }
    if !(config.i_m_margin > 0.0) {
        out.push(Diagnostic::Threshold {
            margin: config.i_m_margin,
        });
    }
    let ratio = config.t_window / config.tau_coherence;
    if !(ratio >= MIN_WINDOW_RATIO) {
        out.push(Diagnostic::WindowRatio {
            ratio,
            required: MIN_WINDOW_RATIO,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"{
        "lambda_center": 7.0e-7,
        "delta_lambda": 1.0e-8,
        "T_window": 1.0e-8
    }"#;

    fn minimal() -> ExperimentConfig {
        config_from_str(MINIMAL, &[]).unwrap()
    }

    #[test]
    fn minimal_file_echoes_values_and_defaults() {
        let c = minimal();
        assert_eq!(c.lambda_center, 7.0e-7);
        assert_eq!(c.delta_lambda, 1.0e-8);
        assert_eq!(c.t_window, 1.0e-8);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.seed, 0);
        assert_eq!(c.tau_coherence, DEFAULT_TAU);
        assert_eq!(c.omega_pump, c.omega_min + c.omega_max);
    }

    #[test]
    fn eta_out_of_range_names_key() {
        let text = MINIMAL.replace("\"T_window\"", "\"eta\": 1.5, \"T_window\"");
        let err = config_from_str(&text, &[]).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { key: "eta", .. }), "{err}");
        assert!(err.to_string().contains("eta"));
    }

    #[test]
    fn missing_and_unknown_keys_are_named() {
        let err = config_from_str(r#"{"lambda_center": 7e-7, "T_window": 1e-8}"#, &[]).unwrap_err();
        assert!(err.to_string().contains("delta_lambda"), "{err}");
        let text = MINIMAL.replace("\"T_window\"", "\"bogus\": 1, \"T_window\"");
        let err = config_from_str(&text, &[]).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn malformed_and_missing_file() {
        assert!(matches!(config_from_str("{", &[]), Err(Error::Parse(_))));
        assert!(matches!(config_from_str("[1,2]", &[]), Err(Error::Parse(_))));
        assert!(matches!(
            load_config("/definitely/not/here.json"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn huge_number_is_rejected() {
        let text = MINIMAL.replace("1.0e-8\n", "1.0e400\n");
        assert!(config_from_str(&text, &[]).is_err());
    }

    #[test]
    fn overrides_are_applied_and_checked() {
        let c = config_from_str(
            MINIMAL,
            &[
                parse_override("seed=7").unwrap(),
                parse_override("g_coupling=0.1").unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.g_coupling, 0.1);
        assert!(matches!(
            config_from_str(MINIMAL, &[parse_override("nope=1").unwrap()]),
            Err(Error::UnknownKey(_))
        ));
        assert!(matches!(
            config_from_str(MINIMAL, &[parse_override("eta=0,5").unwrap()]),
            Err(Error::BadOverride(_))
        ));
        assert!(parse_override("eta").is_err());
    }

    #[test]
    fn window_ratio_enforced() {
        let err = config_from_str(MINIMAL, &[("tau_coherence".into(), "5e-9".into())]).unwrap_err();
        assert!(err.to_string().contains("T_window"));
    }

    #[test]
    fn pump_must_match_band() {
        let err = config_from_str(MINIMAL, &[("omega_pump".into(), "1e15".into())]).unwrap_err();
        assert!(err.to_string().contains("omega_pump"));
    }

    #[test]
    fn element_count_from_window_ratio() {
        let c = minimal();
        let d = derive_params(&c);
        assert_eq!(d.n_elements, 10_000);
    }

    #[test]
    fn i0_bar_matches_direct_evaluation() {
        let c = minimal();
        let d = derive_params(&c);
        // ħω̄²δω/(8πcL) evaluated independently with ω̄ = 2πc/λ, δω = 2π/τ.
        let w = 2.0 * PI * 299_792_458.0 / 7.0e-7;
        let dw = 2.0 * PI / 1.0e-12;
        let expect = 1.054_571_817e-34 * w * w * dw / (8.0 * PI * 299_792_458.0 * 1.0e-2);
        assert!((d.i0_bar / expect - 1.0).abs() < 1e-12);
        assert!(d.i0_bar > 10.0 && d.i0_bar < 1000.0, "order 10² W/m², got {}", d.i0_bar);
    }

    #[test]
    fn sigma_equals_i0_when_tau_equals_window() {
        let mut c = minimal();
        c.tau_coherence = c.t_window;
        let d = derive_params(&c);
        assert_eq!(d.sigma0, d.i0_bar);
    }

    #[test]
    fn sigma_ratio_is_exact() {
        let d = derive_params(&minimal());
        let c = minimal();
        assert!((d.sigma0 / d.i0_bar - (c.tau_coherence / c.t_window).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn validate_small_radius_margin() {
        let mut c = minimal();
        c.detector_r = 0.1 * small_radius_limit(c.lambda_center, c.detector_l);
        assert!(validate_config(&c).is_empty());
    }

    #[test]
    fn validate_flags_coherence_and_threshold() {
        let mut c = minimal();
        c.source_distance_d = 0.5 * c.lens_rl * c.crystal_radius_rc / c.lambda_center;
        let diags = validate_config(&c);
        assert_eq!(diags.len(), 1);
        assert!(matches!(diags[0], Diagnostic::SpatialCoherence { .. }));

        let mut c = minimal();
        c.i_m_margin = 0.0;
        let diags = validate_config(&c);
        assert_eq!(diags, vec![Diagnostic::Threshold { margin: 0.0 }]);

        let mut c = minimal();
        c.tau_coherence = c.t_window / 4.0;
        c.detector_r = 1.0;
        let diags = validate_config(&c);
        assert_eq!(diags.len(), 2);
    }

    #[test]
    fn weak_coupling_warning() {
        let mut c = minimal();
        assert!(c.warnings().is_empty());
        c.g_coupling = 0.5;
        assert_eq!(c.warnings().len(), 1);
    }

    #[test]
    fn load_and_derive_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, MINIMAL).unwrap();
        let a = derive_params(&load_config(&path).unwrap());
        let b = derive_params(&load_config(&path).unwrap());
        assert_eq!(a, b);
    }
}
