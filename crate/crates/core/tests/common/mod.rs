//! Reference computations that share no code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre rule: `panels` equal panels of `order` points.
pub fn composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        total += rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h;
    }
    total
}

pub fn phi(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * PI).sqrt()
}

/// Upper normal tail through the musl erfc.
pub fn q_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

const CUTOFF: f64 = 12.0;

/// Single-detection probability by direct integration of the normal density
/// times the detection law.
pub fn single_oracle(m: f64, x: f64, gamma: f64) -> f64 {
    let lo = (m - x).max(-CUTOFF);
    composite(|v| phi(v) * (1.0 - (-gamma * (v + x)).exp()), lo, CUTOFF, 64, 20)
}

/// Expectation of the detection law over v ~ N(mu, s²).
fn conditional_law(m: f64, x: f64, gamma: f64, mu: f64, s: f64) -> f64 {
    let c = m - x;
    let a = (c - mu) / s;
    q_tail(a) - (-gamma * (x + mu) + 0.5 * gamma * gamma * s * s).exp() * q_tail(a + gamma * s)
}

/// Joint probability: outer integral over v₁, inner expectation over
/// v₂ | v₁ ~ N(ρv₁, 1−ρ²) in closed form.
pub fn joint_oracle(d1: (f64, f64, f64), d2: (f64, f64, f64), rho: f64) -> f64 {
    let (m1, x1, g1) = d1;
    let (m2, x2, g2) = d2;
    let s = (1.0 - rho * rho).sqrt();
    let lo = (m1 - x1).max(-CUTOFF);
    composite(
        |v| phi(v) * (1.0 - (-g1 * (v + x1)).exp()) * conditional_law(m2, x2, g2, rho * v, s),
        lo,
        CUTOFF,
        64,
        20,
    )
}

/// Probabilists' Gauss–Hermite rule with five points (exact to degree 9).
pub const HERMITE5: [(f64, f64); 5] = [
    (-2.856_970_013_872_805_6, 0.011_257_411_327_720_691),
    (-1.355_626_179_974_265_9, 0.222_075_922_005_612_6),
    (0.0, 0.533_333_333_333_333_3),
    (1.355_626_179_974_265_9, 0.222_075_922_005_612_6),
    (2.856_970_013_872_805_6, 0.011_257_411_327_720_691),
];

/// Exact Gaussian expectation of a polynomial of degree ≤ 9 in the four
/// real components of two independent vacuum amplitudes (each N(0, ¼)).
pub fn vacuum_expectation(f: impl Fn((f64, f64), (f64, f64)) -> f64) -> f64 {
    let sd = 0.5;
    let mut total = 0.0;
    for &(a, wa) in &HERMITE5 {
        for &(b, wb) in &HERMITE5 {
            for &(c, wc) in &HERMITE5 {
                for &(d, wd) in &HERMITE5 {
                    total += wa * wb * wc * wd * f((sd * a, sd * b), (sd * c, sd * d));
                }
            }
        }
    }
    total
}

pub const SMALL_CONFIG: &str =
    r#"{"lambda_center": 7e-7, "delta_lambda": 1e-8, "T_window": 1e-8, "tau_coherence": 1e-11}"#;
