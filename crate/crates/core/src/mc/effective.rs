//! Effective dimensionless parameters of a finite-grid simulation and the
//! inverse map from target parameters to a configuration.
//!
//! The simulated u is a sum of N independent exponential element terms, so
//! its exact mean and standard deviation differ slightly from 1 + x·s and s.
//! Comparisons against the Gaussian closed forms use the realized values:
//!
//! ```text
//! x' = (⟨u⟩ − 1)/σ_u,   m' = m·s/σ_u,   γ' = ζĪ₀·σ_u
//! ```

use serde::Serialize;

use crate::analytic::{pdc_signal_moments, JointParams, SingleParams};
use crate::config::{derive_params, ExperimentConfig};
use crate::error::{Error, Result};
use crate::field::SignalPairs;
use crate::grid::{build_mode_grid, ModeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveParams {
    pub mean_u1: f64,
    pub sd_u1: f64,
    pub mean_u2: f64,
    pub sd_u2: f64,
    /// Covariance of u₁ and u₂.
    pub cov_u: f64,
    pub single1: SingleParams,
    pub single2: SingleParams,
    pub rho_c: f64,
}

impl EffectiveParams {
    pub fn joint(&self) -> JointParams {
        JointParams {
            d1: self.single1,
            d2: self.single2,
            rho_c: self.rho_c,
        }
    }
}

/// Realized moments of u and the matching dimensionless parameters. The
/// returned parameters are not validated (x' may be a hair below zero for
/// the bare vacuum).
pub fn effective_params(config: &ExperimentConfig, grid: &ModeGrid, pairs: SignalPairs) -> EffectiveParams {
    let d = derive_params(config);
    let mo = pdc_signal_moments(config, grid, pairs);
    let i0 = d.i0_bar;
    let mean_u1 = (mo.zpf_mean + mo.i1s) / i0;
    let mean_u2 = (mo.zpf_mean + mo.i2s) / i0;
    let (sd_u1, sd_u2) = (mo.sd1 / i0, mo.sd2 / i0);
    let s = d.s();
    let single = |mean: f64, sd: f64| SingleParams {
        m: config.i_m_margin * s / sd,
        x: (mean - 1.0) / sd,
        gamma: config.zeta_gain * i0 * sd,
    };
    EffectiveParams {
        mean_u1,
        sd_u1,
        mean_u2,
        sd_u2,
        cov_u: mo.cov / (i0 * i0),
        single1: single(mean_u1, sd_u1),
        single2: single(mean_u2, sd_u2),
        rho_c: mo.rho_c,
    }
}

/// Configuration whose effective single-detector parameters equal the
/// target (m, x, γ), obtained from `base` by choosing g (bisection on x'),
/// the threshold margin and the gain. All pairs are coupled.
pub fn config_for_single_target(base: &ExperimentConfig, target: SingleParams) -> Result<ExperimentConfig> {
    target.validate()?;
    let grid = build_mode_grid(base)?;
    let x_of = |g: f64| {
        let mut c = base.clone();
        c.g_coupling = g;
        effective_params(&c, &grid, SignalPairs::All).single1.x
    };
    let mut g = 0.0;
    if target.x > 0.0 {
        let (mut lo, mut hi) = (0.0, 0.99);
        if x_of(hi) < target.x {
            return Err(Error::InvalidParams(format!(
                "signal x = {} is out of reach with g < 1 on this grid",
                target.x
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if x_of(mid) < target.x {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        g = 0.5 * (lo + hi);
    }
    let mut c = base.clone();
    c.g_coupling = g;
    let e = effective_params(&c, &grid, SignalPairs::All);
    let d = derive_params(&c);
    c.i_m_margin = target.m * e.sd_u1 / d.s();
    c.zeta_gain = target.gamma / (d.i0_bar * e.sd_u1);
    c.check()?;
    Ok(c)
}
