//! Shared statistical and quadrature helpers for the integration tests.
//!
//! Everything here is deliberately brute-force: these routines serve as
//! independent oracles for the closed forms and samplers under test, so they
//! must not reuse the library's own quadrature or special functions.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Kolmogorov-Smirnov statistic of a sample against a reference CDF.
/// Sorts the slice in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let hi = (i + 1) as f64 / n - f;
        let lo = f - i as f64 / n;
        sup = sup.max(hi.abs()).max(lo.abs());
    }
    sup
}

/// Chi-square goodness-of-fit p-value for observed counts against expected
/// counts (same binning, expected from a fully specified model: df = bins - 1).
pub fn chi_square_pvalue(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    assert!(observed.len() > 1);
    let mut stat = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        assert!(e > 0.0, "expected count must be positive (pool small bins)");
        stat += (o - e) * (o - e) / e;
    }
    let df = (observed.len() - 1) as f64;
    let dist = ChiSquared::new(df).expect("positive dof");
    1.0 - dist.cdf(stat)
}

/// Compensated (Kahan) summation.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Composite midpoint rule with `n` panels on [a, b].
pub fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n > 0 && b > a);
    let h = (b - a) / n as f64;
    let sum = kahan_sum((0..n).map(|i| f(a + (i as f64 + 0.5) * h)));
    sum * h
}

/// Composite Simpson rule with `n` panels (2n+1 nodes) on [a, b].
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n > 0 && b > a);
    let h = (b - a) / (2 * n) as f64;
    let mut acc = f(a) + f(b);
    let mut carry = 0.0;
    let mut add = |v: f64| {
        let y = v - carry;
        let t = acc + y;
        carry = (t - acc) - y;
        acc = t;
    };
    for i in 1..2 * n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        add(w * f(a + i as f64 * h));
    }
    acc * h / 3.0
}

/// Sample mean.
pub fn mean(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty());
    kahan_sum(samples.iter().copied()) / samples.len() as f64
}

/// Sample standard deviation (n - 1 normalization).
pub fn std_dev(samples: &[f64]) -> f64 {
    assert!(samples.len() > 1);
    let m = mean(samples);
    let ss = kahan_sum(samples.iter().map(|&x| (x - m) * (x - m)));
    (ss / (samples.len() - 1) as f64).sqrt()
}

/// Pearson correlation coefficient of two equal-length series.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ma, mb) = (mean(a), mean(b));
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        da += (x - ma) * (x - ma);
        db += (y - mb) * (y - mb);
    }
    num / (da.sqrt() * db.sqrt())
}

/// Rayleigh CDF parameterized by its mean: F(x) = 1 - exp(-pi x^2 / (4 m^2)).
pub fn rayleigh_cdf_with_mean(mean: f64) -> impl Fn(f64) -> f64 {
    let c = std::f64::consts::PI / (4.0 * mean * mean);
    move |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            1.0 - (-c * x * x).exp()
        }
    }
}
