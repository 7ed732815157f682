//! Monte Carlo engine.
//!
//! One trial is one detection window: sample the vacuum, apply the
//! down-conversion transform, filter, form the effective intensity, evaluate
//! the detection law and draw the clicks. Trials are grouped in fixed-size
//! chunks; chunks run in parallel and their accumulators are merged in chunk
//! order, so results depend only on (config, scenario, seed, n_trials).

pub mod effective;
pub mod histogram;
pub mod moments;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

pub use effective::{config_for_single_target, effective_params, EffectiveParams};
pub use histogram::{histogram_u, HistBin, Histogram};
pub use moments::{conjugate_pair_moments, joint_density_mc, single_density_mc, MomentRow};

use crate::analytic::{p_dark, p_joint_model, p_single_model};
use crate::config::{derive_params, ExperimentConfig};
use crate::detector::{
    detection_probability, effective_intensity, filter_fields, sample_clicks, DetectionLaw, ElementScales,
};
use crate::error::{Error, Result};
use crate::field::{apply_pdc_masked, sample_pdc_direct, sample_vacuum_trial, SignalPairs};
use crate::grid::{build_mode_grid, ModeGrid};
use crate::rng::{stream, StreamRole};
use crate::stats::{Bivariate, CoincidenceCounts};

/// Trials per parallel work unit. Part of the determinism contract only
/// through the merge order, which is fixed.
pub const CHUNK_TRIALS: u64 = 1024;

/// Acceptance threshold on |z|.
pub const Z_LIMIT: f64 = 4.0;

/// −ln(0.05): one-sided 95% Poisson bound on the mean when no events occur.
pub const ZERO_EVENT_BOUND: f64 = 2.995_732_273_553_991;

/// Largest per-trial working set accepted, bytes.
pub const MAX_TRIAL_BYTES: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Vacuum only (g forced to 0), both detectors.
    Zpf,
    /// Detector 1 alone, with the configured coupling.
    Single,
    /// Both detectors with the configured coupling.
    Joint,
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zpf" => Ok(ScenarioKind::Zpf),
            "single" => Ok(ScenarioKind::Single),
            "joint" => Ok(ScenarioKind::Joint),
            other => Err(Error::InvalidParams(format!("unknown scenario `{other}`"))),
        }
    }
}

/// How a trial's amplitudes are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerPath {
    /// Vacuum amplitudes, then the transform, then the filter.
    Mode,
    /// Element amplitudes drawn directly with the transform's second
    /// moments. Requires a one-mode-per-element grid.
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub path: SamplerPath,
    #[serde(skip)]
    pub signal_pairs: SignalPairs,
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            kind,
            path: SamplerPath::Fast,
            signal_pairs: SignalPairs::All,
        }
    }

    pub fn with_path(mut self, path: SamplerPath) -> Self {
        self.path = path;
        self
    }

    fn two_detectors(&self) -> bool {
        self.kind != ScenarioKind::Single
    }

    /// Configuration actually simulated (vacuum-only forces g = 0).
    pub fn effective_config(&self, config: &ExperimentConfig) -> ExperimentConfig {
        let mut c = config.clone();
        if self.kind == ScenarioKind::Zpf {
            c.g_coupling = 0.0;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub quantity: String,
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub quantity: String,
    pub mc: RateEstimate,
    pub analytic: f64,
    /// (mc − analytic)/std_error, absent when the standard error is zero.
    pub z_score: Option<f64>,
    /// One-sided 95% bound used when all or no trials produced the event.
    pub upper_bound: Option<f64>,
    pub pass: bool,
}

impl ComparisonRow {
    /// Row judged by |z|. A zero standard error (no variation in the
    /// sample) falls back to the zero-event bound on |mc − analytic|.
    fn statistical(mc: RateEstimate, analytic: f64) -> Self {
        if !(mc.std_error > 0.0) {
            return Self::bounded(mc, analytic);
        }
        let z = (mc.mean - analytic) / mc.std_error;
        Self {
            quantity: mc.quantity.clone(),
            mc,
            analytic,
            z_score: Some(z),
            upper_bound: None,
            pass: z.abs() <= Z_LIMIT,
        }
    }

    /// Row judged by |mc − analytic| ≤ the zero-event bound.
    fn bounded(mc: RateEstimate, analytic: f64) -> Self {
        let bound = ZERO_EVENT_BOUND / mc.n as f64;
        let pass = (mc.mean - analytic).abs() <= bound;
        Self {
            quantity: mc.quantity.clone(),
            mc,
            analytic,
            z_score: None,
            upper_bound: Some(bound),
            pass,
        }
    }

    /// Click-rate row. With no events the analytic rate must lie below the
    /// zero-event bound; with every trial clicking, 1 − rate must.
    fn rate(mc: RateEstimate, analytic: f64) -> Self {
        let bound = ZERO_EVENT_BOUND / mc.n as f64;
        if mc.mean == 0.0 {
            let pass = analytic <= bound;
            Self {
                quantity: mc.quantity.clone(),
                mc,
                analytic,
                z_score: None,
                upper_bound: Some(bound),
                pass,
            }
        } else if mc.mean == 1.0 {
            let pass = 1.0 - analytic <= bound;
            Self {
                quantity: mc.quantity.clone(),
                mc,
                analytic,
                z_score: None,
                upper_bound: Some(bound),
                pass,
            }
        } else {
            Self::statistical(mc, analytic)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub scenario: Scenario,
    pub n_trials: u64,
    pub seed: u64,
    pub rows: Vec<ComparisonRow>,
    pub all_pass: bool,
}

/// Merged accumulators of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub intensity: Bivariate,
    pub counts: CoincidenceCounts,
    pub histogram: Option<HistogramCounts>,
    pub seed: u64,
    pub two_detectors: bool,
}

/// Fixed-edge counts of u₁.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramCounts {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl HistogramCounts {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self {
            lo,
            hi,
            counts: vec![0; bins],
            below: 0,
            above: 0,
        }
    }

    fn push(&mut self, u: f64) {
        if u < self.lo {
            self.below += 1;
        } else if u >= self.hi {
            self.above += 1;
        } else {
            let bins = self.counts.len();
            let k = (((u - self.lo) / (self.hi - self.lo)) * bins as f64) as usize;
            self.counts[k.min(bins - 1)] += 1;
        }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.below += other.below;
        self.above += other.above;
    }
}

struct Engine {
    grid: ModeGrid,
    scales: ElementScales,
    /// intensity_weight/Ī₀: u = Σ_j weight_u[j]·|β_j|².
    weight_u: Vec<f64>,
    mask: Vec<bool>,
    /// ⟨|β|²⟩ per beam-1 element, for the single-arm fast path.
    variance1: Vec<f64>,
    g: f64,
    i0_bar: f64,
    law: DetectionLaw,
    scenario: Scenario,
}

impl Engine {
    fn new(config: &ExperimentConfig, scenario: Scenario) -> Result<Self> {
        let config = scenario.effective_config(config);
        let grid = build_mode_grid(&config)?;
        let bytes = grid.n_modes().saturating_mul(16 * 6);
        if bytes > MAX_TRIAL_BYTES {
            return Err(Error::Resource(format!(
                "{} modes need {bytes} bytes per trial, above the {MAX_TRIAL_BYTES}-byte limit",
                grid.n_modes()
            )));
        }
        let scales = ElementScales::new(&config, &grid);
        let d = derive_params(&config);
        let weight_u = scales.intensity_weight.iter().map(|w| w / d.i0_bar).collect();
        let mask = scenario.signal_pairs.mask(&grid);
        let v_c = crate::field::coupled_variance(config.g_coupling);
        let variance1 = mask
            .iter()
            .map(|&m| if m { v_c } else { crate::field::VACUUM_VARIANCE })
            .collect();
        Ok(Self {
            grid,
            scales,
            weight_u,
            mask,
            variance1,
            g: config.g_coupling,
            i0_bar: d.i0_bar,
            law: DetectionLaw::from_config(&config),
            scenario,
        })
    }

    fn intensities(&self, seed: u64, trial: u64) -> Result<(f64, f64)> {
        let two = self.scenario.two_detectors();
        match self.scenario.path {
            SamplerPath::Mode => {
                let amps = sample_vacuum_trial(&self.grid, seed, trial);
                let beams = apply_pdc_masked(&amps, &self.grid, self.g, &self.mask)?;
                let u1 = effective_intensity(&filter_fields(&beams, &self.grid, &self.scales, 1)?, self.i0_bar).u;
                let u2 = if two {
                    effective_intensity(&filter_fields(&beams, &self.grid, &self.scales, 2)?, self.i0_bar).u
                } else {
                    0.0
                };
                Ok((u1, u2))
            }
            SamplerPath::Fast => {
                if self.grid.modes_per_element != 1 {
                    return Err(Error::InvalidParams("fast path needs one mode per element".into()));
                }
                if !two || self.g == 0.0 {
                    // Intensity only needs |β|², which is v·Exp(1).
                    let mut r1 = stream(seed, trial, StreamRole::Beam1);
                    let u1 = self.exp_sum(&mut r1, &self.variance1);
                    let u2 = if two {
                        let mut r2 = stream(seed, trial, StreamRole::Beam2);
                        self.exp_sum(&mut r2, &self.variance1)
                    } else {
                        0.0
                    };
                    Ok((u1, u2))
                } else {
                    let mut r1 = stream(seed, trial, StreamRole::Beam1);
                    let mut r2 = stream(seed, trial, StreamRole::Beam2);
                    let beams = sample_pdc_direct(&self.grid, self.g, &self.mask, &mut r1, &mut r2);
                    let u = |beta: &[num_complex::Complex64]| -> f64 {
                        beta.iter().zip(&self.weight_u).map(|(b, w)| w * b.norm_sqr()).sum()
                    };
                    Ok((u(&beams.beta_beam1), u(&beams.beta_beam2)))
                }
            }
        }
    }

    fn exp_sum(&self, rng: &mut impl Rng, variance: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (w, v) in self.weight_u.iter().zip(variance) {
            let e: f64 = rng.sample(Exp1);
            acc += w * v * e;
        }
        acc
    }

    fn run_chunk(&self, seed: u64, start: u64, end: u64, hist: Option<&HistogramCounts>) -> Result<TrialSummary> {
        let two = self.scenario.two_detectors();
        let mut summary = TrialSummary {
            intensity: Bivariate::new(1.0, if two { 1.0 } else { 0.0 }),
            counts: CoincidenceCounts::default(),
            histogram: hist.cloned(),
            seed,
            two_detectors: two,
        };
        for trial in start..end {
            let (u1, u2) = self.intensities(seed, trial)?;
            let p1 = detection_probability(u1, &self.law);
            let p2 = if two { detection_probability(u2, &self.law) } else { 0.0 };
            let clicks = sample_clicks(p1, p2, &mut stream(seed, trial, StreamRole::Clicks));
            summary.intensity.push(u1, u2);
            summary.counts.push(clicks.clicked[0], clicks.clicked[1]);
            if let Some(h) = summary.histogram.as_mut() {
                h.push(u1);
            }
        }
        Ok(summary)
    }
}

fn run(
    config: &ExperimentConfig,
    scenario: Scenario,
    n_trials: u64,
    seed: u64,
    hist: Option<HistogramCounts>,
) -> Result<TrialSummary> {
    if n_trials == 0 {
        return Err(Error::InvalidParams("n_trials must be at least 1".into()));
    }
    let engine = Engine::new(config, scenario)?;
    let n_chunks = n_trials.div_ceil(CHUNK_TRIALS);
    let parts: Vec<TrialSummary> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_TRIALS;
            let end = (start + CHUNK_TRIALS).min(n_trials);
            engine.run_chunk(seed, start, end, hist.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut iter = parts.into_iter();
    let mut total = iter.next().expect("at least one chunk");
    for part in iter {
        total.intensity.merge(&part.intensity);
        total.counts.merge(&part.counts);
        if let (Some(a), Some(b)) = (total.histogram.as_mut(), part.histogram.as_ref()) {
            a.merge(b);
        }
    }
    Ok(total)
}

/// Runs the trials and returns the merged accumulators.
pub fn run_summary(config: &ExperimentConfig, scenario: Scenario, n_trials: u64, seed: u64) -> Result<TrialSummary> {
    run(config, scenario, n_trials, seed, None)
}

pub(crate) fn run_with_histogram(
    config: &ExperimentConfig,
    scenario: Scenario,
    n_trials: u64,
    seed: u64,
    hist: HistogramCounts,
) -> Result<TrialSummary> {
    run(config, scenario, n_trials, seed, Some(hist))
}

fn estimate(quantity: &str, mean: f64, std_error: f64, n: u64, seed: u64) -> RateEstimate {
    RateEstimate {
        quantity: quantity.to_string(),
        mean,
        std_error,
        n,
        seed,
    }
}

impl TrialSummary {
    /// Estimators in a fixed order.
    pub fn estimates(&self) -> Vec<RateEstimate> {
        let n = self.counts.n();
        let s = self.seed;
        let a = &self.intensity.a;
        let c = &self.counts;
        let mut out = vec![
            estimate("u1_mean", a.mean(), a.se_mean(), n, s),
            estimate("u1_sd", a.sd(), a.se_sd(), n, s),
            estimate("p1", c.p1(), c.se_p1(), n, s),
        ];
        if self.two_detectors {
            let b = &self.intensity.b;
            out.extend([
                estimate("u2_mean", b.mean(), b.se_mean(), n, s),
                estimate("u2_sd", b.sd(), b.se_sd(), n, s),
                estimate("u_cov", self.intensity.covariance(), self.intensity.se_covariance(), n, s),
                estimate("p2", c.p2(), c.se_p2(), n, s),
                estimate("p12", c.p12(), c.se_p12(), n, s),
                estimate("p12_excess", c.excess(), c.se_excess(), n, s),
            ]);
        }
        out
    }
}

/// Estimators for ⟨u⟩, sd(u), click rates, coincidences and the intensity
/// covariance.
pub fn run_trials(config: &ExperimentConfig, scenario: Scenario, n_trials: u64, seed: u64) -> Result<Vec<RateEstimate>> {
    Ok(run_summary(config, scenario, n_trials, seed)?.estimates())
}

/// Monte Carlo estimators side by side with their analytic values.
pub fn compare(config: &ExperimentConfig, scenario: Scenario, n_trials: u64, seed: u64) -> Result<Comparison> {
    let summary = run_summary(config, scenario, n_trials, seed)?;
    let sim_config = scenario.effective_config(config);
    let grid = build_mode_grid(&sim_config)?;
    let eff = effective_params(&sim_config, &grid, scenario.signal_pairs);
    let p1 = p_single_model(&eff.single1);
    let p2 = p_single_model(&eff.single2);
    let p12 = if scenario.two_detectors() {
        p_joint_model(&eff.joint())?.value
    } else {
        0.0
    };
    let dark = scenario.kind == ScenarioKind::Zpf;
    let mut rows = Vec::new();
    for e in summary.estimates() {
        let row = match e.quantity.as_str() {
            "u1_mean" => ComparisonRow::statistical(e, eff.mean_u1),
            "u1_sd" => ComparisonRow::statistical(e, eff.sd_u1),
            "u2_mean" => ComparisonRow::statistical(e, eff.mean_u2),
            "u2_sd" => ComparisonRow::statistical(e, eff.sd_u2),
            "u_cov" => ComparisonRow::statistical(e, eff.cov_u),
            "p1" if dark => ComparisonRow::rate(relabel(e, "p_dark1"), p_dark(eff.single1.m, eff.single1.gamma)),
            "p2" if dark => ComparisonRow::rate(relabel(e, "p_dark2"), p_dark(eff.single2.m, eff.single2.gamma)),
            "p1" => ComparisonRow::rate(e, p1),
            "p2" => ComparisonRow::rate(e, p2),
            "p12" => ComparisonRow::rate(e, p12),
            // Without coincidences the cell-based standard error collapses;
            // judge the excess by the zero-event bound instead.
            "p12_excess" if summary.counts.n11 == 0 => ComparisonRow::bounded(e, p12 - p1 * p2),
            "p12_excess" => ComparisonRow::statistical(e, p12 - p1 * p2),
            _ => continue,
        };
        rows.push(row);
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(Comparison {
        scenario,
        n_trials,
        seed,
        rows,
        all_pass,
    })
}

fn relabel(mut e: RateEstimate, label: &str) -> RateEstimate {
    e.quantity = label.to_string();
    e
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::config_from_str;

    fn config(n: usize, extra: &str) -> ExperimentConfig {
        config_from_str(
            &format!(
                r#"{{"lambda_center": 7e-7, "delta_lambda": 1e-8, "T_window": 1e-8, "tau_coherence": {:e}{extra}}}"#,
                1e-8 / n as f64
            ),
            &[],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let c = config(100, r#", "g_coupling": 0.2, "I_m_margin": 1.0, "zeta_gain": 1.0"#);
        let s = Scenario::new(ScenarioKind::Joint);
        let a = with_workers(1, || run_summary(&c, s, 3000, 5)).unwrap().unwrap();
        let b = with_workers(4, || run_summary(&c, s, 3000, 5)).unwrap().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_trials_rejected() {
        let c = config(100, "");
        assert!(run_trials(&c, Scenario::new(ScenarioKind::Zpf), 0, 1).is_err());
    }

    #[test]
    fn intensities_are_nonnegative() {
        let c = config(50, r#", "g_coupling": 0.3"#);
        for path in [SamplerPath::Mode, SamplerPath::Fast] {
            let s = Scenario::new(ScenarioKind::Joint).with_path(path);
            let sum = run_summary(&c, s, 2000, 3).unwrap();
            assert!(sum.intensity.a.min() >= 0.0 && sum.intensity.b.min() >= 0.0);
        }
    }

    #[test]
    fn zero_event_row_reports_bound() {
        let e = estimate("p_dark1", 0.0, 0.0, 1000, 0);
        let row = ComparisonRow::rate(e, 1e-8);
        assert!(row.pass);
        assert_eq!(row.upper_bound, Some(ZERO_EVENT_BOUND / 1000.0));
        let e = estimate("p1", 1.0, 0.0, 1000, 0);
        assert!(!ComparisonRow::rate(e, 0.5).pass);
    }

    #[test]
    fn vacuum_scenario_matches_analytic() {
        let c = config(1000, "");
        let cmp = compare(&c, Scenario::new(ScenarioKind::Zpf), 20_000, 11).unwrap();
        assert!(cmp.all_pass, "{:#?}", cmp.rows);
    }

    #[test]
    fn single_scenario_paths_agree_with_analytic() {
        let base = config(200, "");
        let c = config_for_single_target(&base, crate::analytic::SingleParams::new(2.0, 3.0, 0.5).unwrap()).unwrap();
        for path in [SamplerPath::Mode, SamplerPath::Fast] {
            let cmp = compare(&c, Scenario::new(ScenarioKind::Single).with_path(path), 20_000, 2).unwrap();
            assert!(cmp.all_pass, "{path:?} {:#?}", cmp.rows);
        }
    }
}
