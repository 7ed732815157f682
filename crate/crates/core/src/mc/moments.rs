//! Ensemble moments of the transformed amplitudes, and sampling estimates
//! of the detection probabilities directly over the Gaussian densities.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{JointParams, SingleParams};
use crate::error::{Error, Result};
use crate::field::{anomalous_moment, apply_pdc, coupled_variance, intensity_covariance, sample_vacuum_trial};
use crate::grid::ModeGrid;
use crate::rng::{standard_normal, stream, StreamRole};
use crate::stats::{Bivariate, Moments};

use super::{RateEstimate, CHUNK_TRIALS, Z_LIMIT};

/// One sampled moment and its expectation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub quantity: String,
    pub re: f64,
    pub im: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub expected_re: f64,
    pub expected_im: f64,
    pub pass: bool,
}

impl MomentRow {
    fn new(quantity: &str, re: &Moments, im: Option<&Moments>, expected: Complex64) -> Self {
        let (im_mean, im_se) = im.map_or((0.0, 0.0), |m| (m.mean(), m.se_mean()));
        let ok = |v: f64, se: f64, e: f64| if se > 0.0 { ((v - e) / se).abs() <= Z_LIMIT } else { v == e };
        Self {
            quantity: quantity.into(),
            re: re.mean(),
            im: im_mean,
            se_re: re.se_mean(),
            se_im: im_se,
            expected_re: expected.re,
            expected_im: expected.im,
            pass: ok(re.mean(), re.se_mean(), expected.re) && ok(im_mean, im_se, expected.im),
        }
    }

    pub fn z_re(&self) -> f64 {
        (self.re - self.expected_re) / self.se_re
    }
}

const N_COMPLEX: usize = 6;

#[derive(Clone)]
struct PairAccumulator {
    complex: [(Moments, Moments); N_COMPLEX],
    intensity: Bivariate,
    combo: Moments,
}

impl PairAccumulator {
    fn new() -> Self {
        let pair = (Moments::new(0.0), Moments::new(0.0));
        Self {
            complex: [pair; N_COMPLEX],
            intensity: Bivariate::new(0.5, 0.5),
            combo: Moments::new(0.0),
        }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.complex.iter_mut().zip(&other.complex) {
            a.0.merge(&b.0);
            a.1.merge(&b.1);
        }
        self.intensity.merge(&other.intensity);
        self.combo.merge(&other.combo);
    }
}

const COMPLEX_LABELS: [&str; N_COMPLEX] = [
    "conjugate_anomalous",
    "nonconjugate_anomalous",
    "same_beam_anomalous",
    "same_beam_self_anomalous",
    "same_beam_normal",
    "conjugate_normal",
];

/// Samples `n_windows` vacuum draws on the grid, applies the transform with
/// coupling `g`, and estimates the second moments of beam-1 mode `j`
/// against its conjugate, a non-conjugate beam-2 mode and another beam-1
/// mode. The last row is the excess kurtosis of a fixed real linear
/// combination, with standard error sqrt(24/n).
pub fn conjugate_pair_moments(grid: &ModeGrid, g: f64, j: usize, n_windows: u64, seed: u64) -> Result<Vec<MomentRow>> {
    let n = grid.n_modes();
    if n < 3 || j >= n {
        return Err(Error::PairingOutOfRange { index: j, len: n });
    }
    if n_windows < 2 {
        return Err(Error::InvalidParams("need at least two windows".into()));
    }
    let s = grid.conjugate_mode(j)?;
    // A beam-2 mode other than the conjugate, and a second beam-1 mode.
    let other2 = (s + 1) % n;
    let other1 = (j + 1) % n;
    let n_chunks = n_windows.div_ceil(CHUNK_TRIALS);
    let parts = (0..n_chunks)
        .into_par_iter()
        .map(|c| -> Result<PairAccumulator> {
            let mut acc = PairAccumulator::new();
            let end = ((c + 1) * CHUNK_TRIALS).min(n_windows);
            for trial in c * CHUNK_TRIALS..end {
                let beams = apply_pdc(&sample_vacuum_trial(grid, seed, trial), grid, g)?;
                let (b1, b2) = (&beams.beta_beam1, &beams.beta_beam2);
                let products = [
                    b1[j] * b2[s],
                    b1[j] * b2[other2],
                    b1[j] * b1[other1],
                    b1[j] * b1[j],
                    b1[j] * b1[other1].conj(),
                    b1[j] * b2[s].conj(),
                ];
                for (slot, p) in acc.complex.iter_mut().zip(products) {
                    slot.0.push(p.re);
                    slot.1.push(p.im);
                }
                acc.intensity.push(b1[j].norm_sqr(), b2[s].norm_sqr());
                acc.combo.push(0.7 * b1[j].re - 0.4 * b2[s].im + 0.3 * b1[other1].re + 0.5 * b2[other2].im);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut iter = parts.into_iter();
    let mut total = iter.next().expect("at least one chunk");
    for p in iter {
        total.merge(&p);
    }

    let mut rows = Vec::new();
    for (k, label) in COMPLEX_LABELS.iter().enumerate() {
        let expected = if k == 0 { anomalous_moment(g) } else { 0.0 };
        let (re, im) = &total.complex[k];
        rows.push(MomentRow::new(label, re, Some(im), Complex64::new(expected, 0.0)));
    }
    rows.push(MomentRow::new(
        "intensity_beam1",
        &total.intensity.a,
        None,
        Complex64::new(coupled_variance(g), 0.0),
    ));
    let nw = total.intensity.n() as f64;
    rows.push(MomentRow {
        quantity: "intensity_covariance".into(),
        re: total.intensity.covariance(),
        im: 0.0,
        se_re: total.intensity.se_covariance(),
        se_im: 0.0,
        expected_re: intensity_covariance(g),
        expected_im: 0.0,
        pass: ((total.intensity.covariance() - intensity_covariance(g)) / total.intensity.se_covariance()).abs()
            <= Z_LIMIT,
    });
    let kurt = total.combo.excess_kurtosis();
    let se_kurt = (24.0 / nw).sqrt();
    rows.push(MomentRow {
        quantity: "combination_excess_kurtosis".into(),
        re: kurt,
        im: 0.0,
        se_re: se_kurt,
        se_im: 0.0,
        expected_re: 0.0,
        expected_im: 0.0,
        pass: (kurt / se_kurt).abs() <= Z_LIMIT,
    });
    Ok(rows)
}

/// Samples per work unit of the density estimators.
const DENSITY_CHUNK: u64 = 1 << 16;

fn density_estimate(
    quantity: &str,
    n_samples: u64,
    seed: u64,
    f: impl Fn(&mut crate::rng::Stream) -> f64 + Sync,
) -> Result<RateEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidParams("need at least two samples".into()));
    }
    let n_chunks = n_samples.div_ceil(DENSITY_CHUNK);
    let parts: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c, StreamRole::Auxiliary);
            let mut m = Moments::new(0.0);
            let len = DENSITY_CHUNK.min(n_samples - c * DENSITY_CHUNK);
            for _ in 0..len {
                m.push(f(&mut rng));
            }
            m
        })
        .collect();
    let mut total = parts[0];
    for p in &parts[1..] {
        total.merge(p);
    }
    Ok(RateEstimate {
        quantity: quantity.into(),
        mean: total.mean(),
        std_error: total.se_mean(),
        n: total.n,
        seed,
    })
}

/// Mean of the detection law over draws from the single-detector normal
/// density.
pub fn single_density_mc(p: &SingleParams, n_samples: u64, seed: u64) -> Result<RateEstimate> {
    p.validate()?;
    density_estimate("p1", n_samples, seed, |rng| p.law(standard_normal(rng)))
}

/// Mean of P₁·P₂ over draws from the bivariate normal density with
/// correlation ρ_c.
pub fn joint_density_mc(p: &JointParams, n_samples: u64, seed: u64) -> Result<RateEstimate> {
    p.validate()?;
    let rho = p.rho_c;
    let q = (1.0 - rho * rho).sqrt();
    density_estimate("p12", n_samples, seed, |rng| {
        let z1 = standard_normal(rng);
        let z2 = rho * z1 + q * standard_normal(rng);
        p.d1.law(z1) * p.d2.law(z2)
    })
}
