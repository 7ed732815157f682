//! Physical constants (CODATA 2018, SI). Every formula in the crate reads
//! them from here.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPSILON0: f64 = 8.854_187_812_8e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub epsilon0: f64,
}

impl PhysicalConstants {
    pub const SI: Self = Self {
        hbar: HBAR,
        c: C,
        epsilon0: EPSILON0,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}
