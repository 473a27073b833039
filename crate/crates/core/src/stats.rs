//! Empirical distributions and the test statistics used by every check:
//! Kolmogorov–Smirnov distances, total variation on integer supports,
//! percentile bootstrap intervals and the reference CDFs.
//!
//! ECDFs are right-continuous. The one-sample KS statistic is the usual
//! `D = max(D+, D-)`.

use std::collections::BTreeMap;

use rand_core::RngCore;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};
use crate::rng::{sample_index, RandomStream};

/// Sorted sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Sorts the samples. Rejects empty input and NaN.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("EmpiricalDistribution"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(invalid("samples", "contain NaN"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn from_slice(samples: &[f64]) -> Result<Self> {
        Self::new(samples.to_vec())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn min(&self) -> f64 {
        self.samples[0]
    }

    pub fn max(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }

    /// Right-continuous ECDF at `x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }

    /// Unbiased sample variance (0 for a single sample).
    pub fn variance(&self) -> f64 {
        variance(&self.samples)
    }

    /// Type-7 (linear interpolation) quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.samples.len();
        let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        let (a, b) = (self.samples[lo], self.samples[hi]);
        (a + (h - lo as f64) * (b - a)).clamp(a, b)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Two-sample KS distance, exact via a merge scan over both sorted samples.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (xs, ys) = (a.samples(), b.samples());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS statistic against a CDF.
///
/// The CDF is evaluated at every sample point; a decrease between
/// consecutive distinct points is reported as [`Error::NonMonotoneCdf`].
pub fn ks_against_cdf(a: &EmpiricalDistribution, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let xs = a.samples();
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut k = i;
        while k < xs.len() && xs[k] == x {
            k += 1;
        }
        let f = cdf(x);
        if let Some((x_lo, f_lo)) = prev {
            if f < f_lo {
                return Err(Error::NonMonotoneCdf {
                    x_lo,
                    f_lo,
                    x_hi: x,
                    f_hi: f,
                });
            }
        }
        prev = Some((x, f));
        d = d
            .max((k as f64 / n - f).abs())
            .max((f - i as f64 / n).abs());
        i = k;
    }
    Ok(d.min(1.0))
}

/// Asymptotic two-sample KS critical value at significance `level`.
pub fn ks_critical_two_sample(n: usize, m: usize, level: f64) -> f64 {
    let c = (-0.5 * (level / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Asymptotic one-sample KS critical value at significance `level`.
pub fn ks_critical_one_sample(n: usize, level: f64) -> f64 {
    (-0.5 * (level / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

/// Counts over integer outcomes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntegerHistogram {
    counts: BTreeMap<i64, u64>,
    total: u64,
}

impl IntegerHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, k: i64) {
        *self.counts.entry(k).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn add_count(&mut self, k: i64, count: u64) {
        if count > 0 {
            *self.counts.entry(k).or_insert(0) += count;
            self.total += count;
        }
    }

    pub fn counts(&self) -> &BTreeMap<i64, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn frequency(&self, k: i64) -> f64 {
        self.counts.get(&k).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn mean(&self) -> f64 {
        self.counts
            .iter()
            .map(|(&k, &c)| k as f64 * c as f64)
            .sum::<f64>()
            / self.total as f64
    }
}

impl FromIterator<i64> for IntegerHistogram {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let mut h = Self::new();
        for k in iter {
            h.add(k);
        }
        h
    }
}

/// Total variation distance between a histogram and a pmf.
///
/// The pmf is queried on `min(0, smallest key) ..= largest key`; whatever
/// mass it puts elsewhere counts fully towards the distance.
pub fn tv_integer(h: &IntegerHistogram, pmf: impl Fn(i64) -> f64) -> Result<f64> {
    if h.total == 0 {
        return Err(Error::EmptyInput("tv_integer"));
    }
    let lo = h.counts.keys().next().copied().unwrap_or(0).min(0);
    let hi = h.counts.keys().next_back().copied().unwrap_or(0);
    let mut queried = 0.0;
    let mut diff = 0.0;
    for k in lo..=hi {
        let p = pmf(k);
        if p < 0.0 || p.is_nan() {
            return Err(invalid("pmf", format!("p({k}) = {p}")));
        }
        queried += p;
        diff += (h.frequency(k) - p).abs();
    }
    if queried > 1.0 + 1e-9 {
        return Err(invalid("pmf", format!("sums to {queried} > 1")));
    }
    Ok((0.5 * (diff + (1.0 - queried).max(0.0))).min(1.0))
}

/// Percentile bootstrap interval for `statistic` at confidence `level`.
pub fn bootstrap_ci(
    a: &EmpiricalDistribution,
    statistic: impl Fn(&[f64]) -> f64,
    level: f64,
    resamples: usize,
    stream: &RandomStream,
) -> Result<(f64, f64)> {
    let stats = bootstrap_statistics(a.samples(), &statistic, resamples, stream)?;
    percentile_interval(stats, level)
}

/// Replicated statistic over `resamples` bootstrap resamples.
pub fn bootstrap_statistics(
    samples: &[f64],
    statistic: impl Fn(&[f64]) -> f64,
    resamples: usize,
    stream: &RandomStream,
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("bootstrap"));
    }
    if resamples < 100 {
        return Err(invalid(
            "resamples",
            format!("need at least 100, got {resamples}"),
        ));
    }
    let n = samples.len();
    let mut buf = vec![0.0; n];
    Ok((0..resamples)
        .map(|r| {
            let mut s = stream.derive(r as u64);
            for slot in buf.iter_mut() {
                *slot = samples[sample_index(&mut s, n)];
            }
            statistic(&buf)
        })
        .collect())
}

/// Central percentile interval of replicated statistics.
pub fn percentile_interval(mut stats: Vec<f64>, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid("level", format!("must lie in (0,1), got {level}")));
    }
    let dist = EmpiricalDistribution::new(std::mem::take(&mut stats))?;
    let tail = (1.0 - level) / 2.0;
    Ok((dist.quantile(tail), dist.quantile(1.0 - tail)))
}

/// Standard Gumbel CDF `exp(-exp(-x))`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Standard normal CDF via `statrs`' `erfc` (absolute error around 1e-11).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Poisson pmf `mean^k e^{-mean} / k!`.
pub fn poisson_pmf(k: i64, mean: f64) -> Result<f64> {
    if !(mean >= 0.0) {
        return Err(invalid("mean", format!("must be nonnegative, got {mean}")));
    }
    if k < 0 {
        return Ok(0.0);
    }
    if mean == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let log_p = k as f64 * mean.ln() - mean - statrs::function::factorial::ln_factorial(k as u64);
    Ok(log_p.exp())
}

/// Upper `level` quantile of the chi-square distribution.
pub fn chi_square_critical(dof: usize, level: f64) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - level)
}

/// Pearson chi-square statistic of a histogram against a pmf, pooling cells
/// so that each expected count is at least 5. Returns `(statistic, dof)`.
pub fn chi_square_gof(h: &IntegerHistogram, pmf: impl Fn(i64) -> f64) -> (f64, usize) {
    let total = h.total() as f64;
    let hi = h.counts().keys().next_back().copied().unwrap_or(0).max(0);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    let mut cum = 0.0;
    for k in 0..=hi {
        let p = pmf(k);
        cum += p;
        obs += h.counts().get(&k).copied().unwrap_or(0) as f64;
        exp += total * p;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    // upper tail beyond the largest observation
    exp += total * (1.0 - cum).max(0.0);
    match cells.last_mut() {
        Some(last) if exp < 5.0 => {
            last.0 += obs;
            last.1 += exp;
        }
        _ => cells.push((obs, exp)),
    }
    let stat = cells
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    (stat, cells.len().saturating_sub(1).max(1))
}

/// Bootstrap standard error of the TV distance between a histogram and a pmf.
pub fn tv_standard_error(
    h: &IntegerHistogram,
    pmf: impl Fn(i64) -> f64,
    resamples: usize,
    stream: &RandomStream,
) -> Result<f64> {
    let outcomes: Vec<i64> = h
        .counts()
        .iter()
        .flat_map(|(&k, &c)| std::iter::repeat_n(k, c as usize))
        .collect();
    let n = outcomes.len();
    let mut tvs = Vec::with_capacity(resamples);
    for r in 0..resamples {
        let mut s = stream.derive(r as u64);
        let mut boot = IntegerHistogram::new();
        for _ in 0..n {
            boot.add(outcomes[(s.next_u64() % n as u64) as usize]);
        }
        tvs.push(tv_integer(&boot, &pmf)?);
    }
    Ok(variance(&tvs).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_exponential;

    fn ed(xs: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::from_slice(xs).unwrap()
    }

    #[test]
    fn ks_two_sample_hand_cases() {
        assert_eq!(
            ks_two_sample(&ed(&[1.0, 2.0, 3.0]), &ed(&[1.0, 2.0, 3.0])),
            0.0
        );
        assert!((ks_two_sample(&ed(&[1.0, 2.0]), &ed(&[1.5, 2.5])) - 0.5).abs() < 1e-15);
        assert_eq!(ks_two_sample(&ed(&[1.0, 2.0]), &ed(&[3.0, 4.0, 5.0])), 1.0);
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(
            EmpiricalDistribution::new(vec![]),
            Err(Error::EmptyInput("EmpiricalDistribution"))
        );
        assert!(EmpiricalDistribution::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn ks_against_cdf_cases() {
        assert!((ks_against_cdf(&ed(&[0.0]), |_| 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(ks_against_cdf(&ed(&[1.0, 2.0]), |_| 0.0).unwrap(), 1.0);
        let bad = ks_against_cdf(&ed(&[1.0, 2.0]), |x| if x < 1.5 { 0.6 } else { 0.2 });
        assert!(matches!(bad, Err(Error::NonMonotoneCdf { .. })));
    }

    #[test]
    fn ks_null_quantile() {
        let mut s = RandomStream::new(77);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| sample_exponential(&mut s, 1.0).unwrap())
            .collect();
        let d = ks_against_cdf(&ed(&xs), |x| 1.0 - (-x).exp()).unwrap();
        assert!(d <= 1.63 / 100.0, "D = {d}");
    }

    #[test]
    fn tv_cases() {
        let h: IntegerHistogram = [0, 1, 2, 2].into_iter().collect();
        let exact = |k: i64| match k {
            0 | 1 => 0.25,
            2 => 0.5,
            _ => 0.0,
        };
        assert!(tv_integer(&h, exact).unwrap().abs() < 1e-15);

        let h: IntegerHistogram = [0].into_iter().collect();
        assert_eq!(tv_integer(&h, |k| (k == 1) as i64 as f64).unwrap(), 1.0);

        let h: IntegerHistogram = [0, 1].into_iter().collect();
        assert!((tv_integer(&h, |k| (k == 0) as i64 as f64).unwrap() - 0.5).abs() < 1e-15);

        assert!(tv_integer(&h, |_| -0.1).is_err());
        assert!(tv_integer(&h, |_| 0.9).is_err());
    }

    #[test]
    fn reference_cdfs() {
        assert!((gumbel_cdf(0.0) - 0.367_879).abs() < 1e-6);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.96) - 0.975_002_1).abs() < 1e-7);
        assert!((poisson_pmf(0, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let e = std::f64::consts::E;
        let total: f64 = (0..=50).map(|k| poisson_pmf(k, e).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(poisson_pmf(0, -1.0).is_err());
    }

    #[test]
    fn bootstrap_degenerate_and_nested() {
        let s = RandomStream::new(3);
        let c = ed(&[2.5; 40]);
        assert_eq!(bootstrap_ci(&c, mean, 0.95, 200, &s).unwrap(), (2.5, 2.5));

        let mut g = RandomStream::new(4);
        let xs: Vec<f64> = (0..100)
            .map(|_| sample_exponential(&mut g, 1.0).unwrap())
            .collect();
        let d = ed(&xs);
        let narrow = bootstrap_ci(&d, mean, 0.95, 500, &s).unwrap();
        let wide = bootstrap_ci(&d, mean, 0.99, 500, &s).unwrap();
        assert!(wide.0 <= narrow.0 && wide.1 >= narrow.1);
        assert!(bootstrap_ci(&d, mean, 1.0, 500, &s).is_err());
        assert!(bootstrap_ci(&d, mean, 0.9, 50, &s).is_err());
    }

    #[test]
    fn chi_square_accepts_matching_poisson() {
        let mut s = RandomStream::new(21);
        let h: IntegerHistogram = (0..20_000)
            .map(|_| crate::rng::sample_poisson(&mut s, 2.0).unwrap() as i64)
            .collect();
        let (stat, dof) = chi_square_gof(&h, |k| poisson_pmf(k, 2.0).unwrap());
        assert!(stat < chi_square_critical(dof, 0.001), "{stat} on {dof}");
        let (stat, dof) = chi_square_gof(&h, |k| poisson_pmf(k, 2.3).unwrap());
        assert!(stat > chi_square_critical(dof, 0.01));
    }
}
