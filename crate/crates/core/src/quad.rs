//! Globally adaptive Gauss–Kronrod 10/21-point quadrature.
//!
//! Intervals are bisected in order of largest error estimate until the
//! summed estimate meets `max(epsabs, epsrel·|I|)`. Initial breakpoints may
//! be supplied, which is how oscillatory integrands are split into panels
//! between their zeros.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_168,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Default cap on the number of subintervals.
pub const DEFAULT_LIMIT: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub epsabs: f64,
    pub epsrel: f64,
    pub limit: usize,
}

impl Tolerance {
    pub fn absolute(epsabs: f64) -> Self {
        Self {
            epsabs,
            epsrel: 0.0,
            limit: DEFAULT_LIMIT,
        }
    }

    pub fn relative(epsrel: f64) -> Self {
        Self {
            epsabs: 0.0,
            epsrel,
            limit: DEFAULT_LIMIT,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.epsabs.max(self.epsrel * value.abs())
    }
}

/// One Gauss–Kronrod 10/21 rule on [a, b]: (kronrod, |kronrod − gauss|).
pub fn gk21(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = half * XGK[i];
        let s = f(centre - dx) + f(centre + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integration of `f` over [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult> {
    integrate_with_breakpoints(f, &[a, b], tol)
}

/// Adaptive integration over consecutive panels `[p₀,p₁], [p₁,p₂], ...`.
/// The breakpoints must be nondecreasing.
pub fn integrate_with_breakpoints(
    f: impl Fn(f64) -> f64,
    points: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::with_capacity(points.len());
    let mut evaluations = 0;
    let mut value = 0.0;
    let mut error = 0.0;
    for w in points.windows(2) {
        let (v, e) = gk21(&f, w[0], w[1]);
        evaluations += 21;
        value += v;
        error += e;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let limit = tol.limit.max(points.len() - 1);
    while error > tol.target(value) {
        if heap.len() >= limit {
            return Err(Error::Quadrature {
                achieved: error,
                requested: tol.target(value),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature {
                achieved: error,
                requested: tol.target(value),
            });
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Resum from scratch so the running update's rounding does not leak out.
    let (mut value, mut error) = (0.0, 0.0);
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    for p in &pieces {
        value += p.value;
        error += p.error;
    }
    Ok(QuadResult {
        value,
        abs_error: error,
        evaluations,
    })
}

/// Iterated 2-D integral ∫_{x₀}^{x₁} ∫_{y₀(x)}^{y₁(x)} f(x, y) dy dx with an
/// absolute tolerance. A tenth of the budget, spread over the outer range,
/// goes to each inner integral.
pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    x_range: (f64, f64),
    y_lo: impl Fn(f64) -> f64,
    y_hi: impl Fn(f64) -> f64,
    epsabs: f64,
) -> Result<QuadResult> {
    let (x0, x1) = x_range;
    if x1 <= x0 {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let inner_tol = Tolerance::absolute(0.1 * epsabs / (x1 - x0));
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_error = RefCell::new(0.0_f64);
    let inner_evals = RefCell::new(0_usize);
    let outer = |x: f64| {
        let (a, b) = (y_lo(x), y_hi(x));
        if b <= a {
            return 0.0;
        }
        match integrate(|y| f(x, y), a, b, inner_tol) {
            Ok(r) => {
                let mut e = inner_error.borrow_mut();
                *e = e.max(r.abs_error);
                *inner_evals.borrow_mut() += r.evaluations;
                r.value
            }
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                0.0
            }
        }
    };
    let result = integrate(outer, x0, x1, Tolerance::absolute(0.9 * epsabs));
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let r = result?;
    Ok(QuadResult {
        value: r.value,
        abs_error: r.abs_error + inner_error.into_inner() * (x1 - x0),
        evaluations: r.evaluations + inner_evals.into_inner(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, Tolerance::absolute(1e-14)).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_normalisation() {
        let r = integrate(
            |x| (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            -12.0,
            12.0,
            Tolerance::absolute(1e-13),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_panels() {
        let pts: Vec<f64> = (0..=50).map(|n| n as f64 * PI).collect();
        let r = integrate_with_breakpoints(|x| x.sin().powi(2), &pts, Tolerance::relative(1e-10)).unwrap();
        assert!((r.value - 25.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, Tolerance::absolute(1e-6)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-5);
    }

    #[test]
    fn failure_reports_achieved() {
        let tol = Tolerance {
            epsabs: 1e-15,
            epsrel: 0.0,
            limit: 3,
        };
        match integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, tol) {
            Err(Error::Quadrature { achieved, requested }) => assert!(achieved > requested),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn two_dimensional_triangle() {
        // ∫₀¹∫₀ˣ xy dy dx = 1/8
        let r = integrate_2d(|x, y| x * y, (0.0, 1.0), |_| 0.0, |x| x, 1e-12).unwrap();
        assert!((r.value - 0.125).abs() < 1e-12);
    }
}
