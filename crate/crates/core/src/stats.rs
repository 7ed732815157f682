//! Mergeable accumulators: compensated sums, moment accumulators for one and
//! two variables, and click-coincidence counts.

use serde::Serialize;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Power sums of `x − shift` up to fourth order. The shift should be close
/// to the expected mean and must be equal in accumulators that are merged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub shift: f64,
    s1: NeumaierSum,
    s2: NeumaierSum,
    s3: NeumaierSum,
    s4: NeumaierSum,
    min: f64,
    max: f64,
}

impl Moments {
    pub fn new(shift: f64) -> Self {
        Self {
            n: 0,
            shift,
            s1: NeumaierSum::default(),
            s2: NeumaierSum::default(),
            s3: NeumaierSum::default(),
            s4: NeumaierSum::default(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    pub fn push(&mut self, x: f64) {
        let d = x - self.shift;
        let d2 = d * d;
        self.n += 1;
        self.s1.add(d);
        self.s2.add(d2);
        self.s3.add(d2 * d);
        self.s4.add(d2 * d2);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.shift, other.shift, "merging moments with different shifts");
        self.n += other.n;
        self.s1.merge(&other.s1);
        self.s2.merge(&other.s2);
        self.s3.merge(&other.s3);
        self.s4.merge(&other.s4);
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    fn raw(&self) -> (f64, f64, f64, f64) {
        let n = self.n as f64;
        (
            self.s1.value() / n,
            self.s2.value() / n,
            self.s3.value() / n,
            self.s4.value() / n,
        )
    }

    /// Population central moments (m2, m3, m4).
    fn central(&self) -> (f64, f64, f64) {
        let (a1, a2, a3, a4) = self.raw();
        let m2 = a2 - a1 * a1;
        let m3 = a3 - 3.0 * a1 * a2 + 2.0 * a1.powi(3);
        let m4 = a4 - 4.0 * a1 * a3 + 6.0 * a1 * a1 * a2 - 3.0 * a1.powi(4);
        (m2.max(0.0), m3, m4.max(0.0))
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.raw().0
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        self.central().0 * n / (n - 1.0)
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Large-sample standard error of the sample standard deviation.
    pub fn se_sd(&self) -> f64 {
        let (m2, _, m4) = self.central();
        if m2 <= 0.0 {
            return 0.0;
        }
        ((m4 - m2 * m2).max(0.0) / (4.0 * m2 * self.n as f64)).sqrt()
    }

    pub fn skewness(&self) -> f64 {
        let (m2, m3, _) = self.central();
        if m2 <= 0.0 {
            return 0.0;
        }
        m3 / m2.powf(1.5)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        let (m2, _, m4) = self.central();
        if m2 <= 0.0 {
            return 0.0;
        }
        m4 / (m2 * m2) - 3.0
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

/// Two variables with their cross product sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bivariate {
    pub a: Moments,
    pub b: Moments,
    cross: NeumaierSum,
}

impl Bivariate {
    pub fn new(shift_a: f64, shift_b: f64) -> Self {
        Self {
            a: Moments::new(shift_a),
            b: Moments::new(shift_b),
            cross: NeumaierSum::default(),
        }
    }

    pub fn push(&mut self, x: f64, y: f64) {
        self.a.push(x);
        self.b.push(y);
        self.cross.add((x - self.a.shift) * (y - self.b.shift));
    }

    pub fn merge(&mut self, other: &Self) {
        self.a.merge(&other.a);
        self.b.merge(&other.b);
        self.cross.merge(&other.cross);
    }

    pub fn n(&self) -> u64 {
        self.a.n
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> f64 {
        let n = self.n() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let ma = self.a.s1.value() / n;
        let mb = self.b.s1.value() / n;
        (self.cross.value() / n - ma * mb) * n / (n - 1.0)
    }

    /// Large-sample standard error of the covariance (Gaussian approximation).
    pub fn se_covariance(&self) -> f64 {
        let c = self.covariance();
        ((self.a.variance() * self.b.variance() + c * c) / self.n() as f64).sqrt()
    }

    pub fn correlation(&self) -> f64 {
        let d = self.a.sd() * self.b.sd();
        if d > 0.0 {
            self.covariance() / d
        } else {
            0.0
        }
    }
}

/// Click outcome counts for two detectors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CoincidenceCounts {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl CoincidenceCounts {
    pub fn push(&mut self, click1: bool, click2: bool) {
        match (click1, click2) {
            (true, true) => self.n11 += 1,
            (true, false) => self.n10 += 1,
            (false, true) => self.n01 += 1,
            (false, false) => self.n00 += 1,
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.n11 += other.n11;
        self.n10 += other.n10;
        self.n01 += other.n01;
        self.n00 += other.n00;
    }

    pub fn n(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    pub fn p1(&self) -> f64 {
        (self.n11 + self.n10) as f64 / self.n() as f64
    }

    pub fn p2(&self) -> f64 {
        (self.n11 + self.n01) as f64 / self.n() as f64
    }

    pub fn p12(&self) -> f64 {
        self.n11 as f64 / self.n() as f64
    }

    fn se_binomial(p: f64, n: u64) -> f64 {
        (p * (1.0 - p) / n as f64).sqrt()
    }

    pub fn se_p1(&self) -> f64 {
        Self::se_binomial(self.p1(), self.n())
    }

    pub fn se_p2(&self) -> f64 {
        Self::se_binomial(self.p2(), self.n())
    }

    pub fn se_p12(&self) -> f64 {
        Self::se_binomial(self.p12(), self.n())
    }

    /// Excess coincidence p12 − p1·p2.
    pub fn excess(&self) -> f64 {
        self.p12() - self.p1() * self.p2()
    }

    /// Standard error of the excess: sqrt(Var[(X₁−p₁)(X₂−p₂)]/n), evaluated
    /// exactly from the four cell frequencies.
    pub fn se_excess(&self) -> f64 {
        let n = self.n() as f64;
        let (p1, p2) = (self.p1(), self.p2());
        let d = self.excess();
        let cell = |count: u64, x1: f64, x2: f64| {
            count as f64 / n * ((x1 - p1) * (x2 - p2)).powi(2)
        };
        let second = cell(self.n11, 1.0, 1.0)
            + cell(self.n10, 1.0, 0.0)
            + cell(self.n01, 0.0, 1.0)
            + cell(self.n00, 0.0, 0.0);
        ((second - d * d).max(0.0) / n).sqrt()
    }
}
