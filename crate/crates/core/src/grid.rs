//! Detector-element frequency grid and the conjugate pairing between beams.
//!
//! Frequencies are stored as exact integer offsets from the band centre in
//! units of `Δω/(2M)`, where `Δω = 2π/T` is the element spacing and `M` the
//! number of modes per element. Pairing and sinc weights are then decided in
//! integer arithmetic, so `ω₁ⱼ + ω₂σ(j) = 2ω̄` holds exactly on the grid.

use std::f64::consts::PI;

use crate::config::{derive_params, ExperimentConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    /// Band centre ω̄, rad/s. Equal to half the pump frequency.
    pub omega_bar: f64,
    /// Element spacing Δω = 2π/T, rad/s.
    pub delta_omega_element: f64,
    /// Field modes sampled per detector element.
    pub modes_per_element: usize,
    /// Element centre frequencies ω_j, rad/s.
    pub frequencies: Vec<f64>,
    pub(crate) element_units: Vec<i64>,
    pub(crate) mode_units: Vec<i64>,
}

impl ModeGrid {
    pub fn n_elements(&self) -> usize {
        self.frequencies.len()
    }

    pub fn n_modes(&self) -> usize {
        self.mode_units.len()
    }

    fn unit(&self) -> f64 {
        self.delta_omega_element / (2 * self.modes_per_element) as f64
    }

    /// Frequency of field mode `k`, rad/s.
    pub fn mode_frequency(&self, k: usize) -> f64 {
        self.omega_bar + self.mode_units[k] as f64 * self.unit()
    }

    pub fn mode_frequencies(&self) -> Vec<f64> {
        (0..self.n_modes()).map(|k| self.mode_frequency(k)).collect()
    }

    /// Conjugate element σ(j) such that ω₁ⱼ + ω₂σ(j) = ω₀.
    pub fn conjugate(&self, j: usize) -> Result<usize> {
        let n = self.n_elements();
        if j >= n {
            return Err(Error::PairingOutOfRange { index: j, len: n });
        }
        Ok(n - 1 - j)
    }

    /// Conjugate field mode of mode `k`.
    pub fn conjugate_mode(&self, k: usize) -> Result<usize> {
        let n = self.n_modes();
        if k >= n {
            return Err(Error::PairingOutOfRange { index: k, len: n });
        }
        Ok(n - 1 - k)
    }

    /// The pairing σ as a list: entry `j` is σ(j).
    pub fn conjugate_pairing(&self) -> Vec<usize> {
        let n = self.n_elements();
        (0..n).map(|j| n - 1 - j).collect()
    }

    /// Checks exact pairing in integer units: offsets of paired elements
    /// cancel.
    pub fn pairing_is_exact(&self) -> bool {
        let n = self.n_elements();
        (0..n).all(|j| self.element_units[j] + self.element_units[n - 1 - j] == 0)
            && {
                let m = self.n_modes();
                (0..m).all(|k| self.mode_units[k] + self.mode_units[m - 1 - k] == 0)
            }
    }

    /// Weight `sinc[T/2·(ω_k − ω_j)]` of mode `k` in element `j`.
    pub fn sinc_weight(&self, k: usize, j: usize) -> f64 {
        let two_m = 2 * self.modes_per_element as i64;
        let d = self.mode_units[k] - self.element_units[j];
        if d == 0 {
            1.0
        } else if d % two_m == 0 {
            0.0
        } else {
            let arg = PI * d as f64 / two_m as f64;
            arg.sin() / arg
        }
    }

    /// Modes contributing with nonzero weight to element `j`, with weights.
    pub fn element_support(&self, j: usize) -> Vec<(usize, f64)> {
        (0..self.n_modes())
            .map(|k| (k, self.sinc_weight(k, j)))
            .filter(|&(_, w)| w != 0.0)
            .collect()
    }

    /// Index of the mode sitting exactly at the centre of element `j`.
    pub fn center_mode(&self, j: usize) -> usize {
        j * self.modes_per_element
    }
}

/// One-mode-per-element grid for the configuration.
pub fn build_mode_grid(config: &ExperimentConfig) -> Result<ModeGrid> {
    build_mode_grid_oversampled(config, 1)
}

/// Grid with `modes_per_element` field modes per element spacing. Element
/// centres coincide with every `modes_per_element`-th mode.
pub fn build_mode_grid_oversampled(
    config: &ExperimentConfig,
    modes_per_element: usize,
) -> Result<ModeGrid> {
    if modes_per_element == 0 {
        return Err(Error::Grid("modes_per_element must be at least 1".into()));
    }
    let d = derive_params(config);
    let spacing = d.delta_omega_element;
    // The band edges are large numbers differing by a small one, so an exact
    // multiple of the spacing can come out as 19.99999999.
    let fit = (d.delta_omega / spacing + 1e-6).floor();
    if fit < 1.0 {
        return Err(Error::Grid(format!(
            "band width {:e} rad/s is narrower than one element spacing {:e} rad/s",
            d.delta_omega, spacing
        )));
    }
    let n = d.n_elements.min(fit as usize);
    let m = modes_per_element as i64;
    let n_i = n as i64;
    let element_units: Vec<i64> = (0..n_i).map(|j| 2 * m * j - m * (n_i - 1)).collect();
    let n_modes = (modes_per_element * (n - 1) + 1) as i64;
    let mode_units: Vec<i64> = (0..n_modes).map(|i| 2 * i - m * (n_i - 1)).collect();
    let unit = spacing / (2 * modes_per_element) as f64;
    let frequencies = element_units
        .iter()
        .map(|&k| d.omega_bar + k as f64 * unit)
        .collect();
    Ok(ModeGrid {
        omega_bar: d.omega_bar,
        delta_omega_element: spacing,
        modes_per_element,
        frequencies,
        element_units,
        mode_units,
    })
}
