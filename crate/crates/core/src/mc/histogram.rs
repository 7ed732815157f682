//! Binned density of the effective intensity u₁.

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::grid::build_mode_grid;
use crate::special::normal_sf;

use super::effective::effective_params;
use super::{run_with_histogram, HistogramCounts, Scenario};

/// Half-width of the binned range in standard deviations.
pub const RANGE_SD: f64 = 5.0;
/// Bins with fewer expected counts are left out of χ².
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistBin {
    pub bin_left: f64,
    pub bin_right: f64,
    /// Observed count/(n·width).
    pub density: f64,
    /// Normal density with the realized mean and sd, averaged over the bin.
    pub expected_density: f64,
    #[serde(skip)]
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: Vec<HistBin>,
    pub n: u64,
    /// Trials outside the binned range.
    pub outside: u64,
    pub mean: f64,
    pub se_mean: f64,
    pub sd: f64,
    pub skewness: f64,
    /// Expected mean of u, 1 + Ī_s/Ī₀.
    pub expected_mean: f64,
    pub expected_sd: f64,
    pub chi2: f64,
    pub dof: usize,
}

impl Histogram {
    /// Two-sample χ² between equal-range histograms, with its degrees of
    /// freedom. Bins empty in both are skipped.
    pub fn chi2_against(&self, other: &Histogram) -> Result<(f64, usize)> {
        if self.bins.len() != other.bins.len() || self.bins[0].bin_left != other.bins[0].bin_left {
            return Err(Error::InvalidParams("histograms have different binning".into()));
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
        let mut chi2 = 0.0;
        let mut used = 0usize;
        for (a, b) in self.bins.iter().zip(&other.bins) {
            let total = a.count + b.count;
            if total == 0 {
                continue;
            }
            let diff = ka * a.count as f64 - kb * b.count as f64;
            chi2 += diff * diff / total as f64;
            used += 1;
        }
        Ok((chi2, used.saturating_sub(1)))
    }
}

/// Histogram of u₁ over mean ± 5 sd of the realized distribution, with a
/// χ² goodness-of-fit statistic against the matching normal density.
pub fn histogram_u(
    config: &ExperimentConfig,
    scenario: Scenario,
    n_trials: u64,
    seed: u64,
    bins: usize,
) -> Result<Histogram> {
    if bins < 10 {
        return Err(Error::InvalidParams(format!("bins must be >= 10, got {bins}")));
    }
    let sim = scenario.effective_config(config);
    let grid = build_mode_grid(&sim)?;
    let eff = effective_params(&sim, &grid, scenario.signal_pairs);
    let (mu, sd) = (eff.mean_u1, eff.sd_u1);
    let lo = mu - RANGE_SD * sd;
    let hi = mu + RANGE_SD * sd;
    let summary = run_with_histogram(config, scenario, n_trials, seed, HistogramCounts::new(lo, hi, bins))?;
    let counts = summary.histogram.expect("histogram requested");
    let n = summary.counts.n();
    let width = (hi - lo) / bins as f64;
    let mut out = Vec::with_capacity(bins);
    let mut chi2 = 0.0;
    let mut used = 0usize;
    for (k, &count) in counts.counts.iter().enumerate() {
        let left = lo + k as f64 * width;
        let right = if k + 1 == bins { hi } else { left + width };
        let mass = normal_sf((left - mu) / sd) - normal_sf((right - mu) / sd);
        let expected = n as f64 * mass;
        if expected >= MIN_EXPECTED {
            chi2 += (count as f64 - expected).powi(2) / expected;
            used += 1;
        }
        out.push(HistBin {
            bin_left: left,
            bin_right: right,
            density: count as f64 / (n as f64 * (right - left)),
            expected_density: mass / (right - left),
            count,
        });
    }
    let m = &summary.intensity.a;
    Ok(Histogram {
        bins: out,
        n,
        outside: counts.below + counts.above,
        mean: m.mean(),
        se_mean: m.se_mean(),
        sd: m.sd(),
        skewness: m.skewness(),
        expected_mean: mu,
        expected_sd: sd,
        chi2,
        dof: used.saturating_sub(1),
    })
}
