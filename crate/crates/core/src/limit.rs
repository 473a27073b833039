//! Limiting objects: the Gumbel array `D(m)`, the variable `Ξ` built from a
//! Poisson process with Gumbel pair weights, its finite-`α` approximation,
//! and the dual variable `Q = e^{-Ξ}` with its tail formulas.
//!
//! Pair weights are keyed by the pair, so any two computations that look at
//! the same pair of points see the same weight. Every pair search is pruned
//! with [`gumbel_floor`], the smallest Gumbel value a stream can emit; the
//! pruning never changes a result.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::mean_field::pair_index;
use crate::quadrature::adaptive_2d;
use crate::rng::{
    gumbel_floor, sample_poisson, PoissonPoints, RandomSource, RandomStream, UNIFORM_MIN,
};
use crate::stats::{bootstrap_ci, mean, variance, EmpiricalDistribution};

/// Default truncation of the `Ξ` sampler.
pub const DEFAULT_INNER: f64 = 4.0;
pub const DEFAULT_OUTER: f64 = 4.0;
/// Default truncation probability of [`sample_q`].
pub const DEFAULT_DELTA: f64 = 1e-6;
/// Default pair cap of [`tail_q_product`].
pub const DEFAULT_PAIR_CAP: usize = 10_000_000;

#[inline]
fn pair_code(s: usize, t: usize) -> u64 {
    let (lo, hi) = if s < t { (s, t) } else { (t, s) };
    ((lo as u64) << 32) | hi as u64
}

/// Gumbel weight of the unordered pair `{s, t}`, a pure function of the stream and the pair.
#[inline]
pub fn keyed_gumbel(stream: &RandomStream, s: usize, t: usize) -> f64 {
    -(-stream.uniform_at(pair_code(s, t)).ln()).ln()
}

/// Unit exponential of the unordered pair `{s, t}`.
#[inline]
pub fn keyed_exponential(stream: &RandomStream, s: usize, t: usize) -> f64 {
    -stream.uniform_at(pair_code(s, t)).ln()
}

/// `D(m) = (Λ_a + Λ_b - Λ_ab)_{a<b}` in row-major upper-triangular order.
///
/// Draws the `m` vertex Gumbels first, then the pair Gumbels row by row.
pub fn sample_d_array<R: RandomSource + ?Sized>(src: &mut R, m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(invalid("m", format!("need m >= 2, got {m}")));
    }
    let vertex: Vec<f64> = (0..m).map(|_| src.gumbel()).collect();
    let mut out = vec![0.0; m * (m - 1) / 2];
    for a in 0..m {
        for b in (a + 1)..m {
            out[pair_index(m, a, b)] = vertex[a] + vertex[b] - src.gumbel();
        }
    }
    Ok(out)
}

/// Largest `y_s + y_t - w(s, t)` seen so far, with the first pair attaining it.
#[derive(Clone, Copy, Debug)]
struct PairMax {
    value: f64,
    arg: Option<(usize, usize)>,
}

impl PairMax {
    const EMPTY: PairMax = PairMax {
        value: f64::NEG_INFINITY,
        arg: None,
    };

    fn offer(&mut self, value: f64, s: usize, t: usize) {
        if value > self.value {
            self.value = value;
            self.arg = Some((s, t));
        }
    }
}

/// Source of pair weights for a point configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum PairWeights {
    /// `Λ_st` from [`keyed_gumbel`].
    Keyed(RandomStream),
    /// Prescribed weights; missing pairs are an error.
    Fixed(HashMap<(usize, usize), f64>),
}

impl PairWeights {
    pub fn weight(&self, s: usize, t: usize) -> f64 {
        match self {
            PairWeights::Keyed(stream) => keyed_gumbel(stream, s, t),
            PairWeights::Fixed(map) => {
                let key = if s < t { (s, t) } else { (t, s) };
                *map.get(&key)
                    .unwrap_or_else(|| panic!("no weight for pair {key:?}"))
            }
        }
    }
}

/// A truncated realization of the Poisson process with intensity
/// `gamma * e^{-y}` and its pair weights.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitPointConfig {
    pub gamma: f64,
    pub floor: f64,
    /// Strictly descending, all `>= floor`.
    pub points: Vec<f64>,
    pub pair_weights: PairWeights,
}

impl LimitPointConfig {
    pub fn new(
        gamma: f64,
        floor: f64,
        points: Vec<f64>,
        pair_weights: PairWeights,
    ) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if points.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(invalid("points", "must be strictly descending"));
        }
        if points.iter().any(|&y| y < floor) {
            return Err(invalid("points", format!("all must be >= floor {floor}")));
        }
        Ok(Self {
            gamma,
            floor,
            points,
            pair_weights,
        })
    }

    /// Draws all points down to `floor`; points from `stream.derive(0)`,
    /// weights keyed by `stream.derive(1)`.
    pub fn sample(stream: &RandomStream, gamma: f64, floor: f64) -> Result<Self> {
        let mut src = stream.derive(0);
        let points = PoissonPoints::new(&mut src, gamma, floor)?.collect();
        Ok(Self {
            gamma,
            floor,
            points,
            pair_weights: PairWeights::Keyed(stream.derive(1)),
        })
    }
}

/// One draw of `Ξ` at truncation levels `-A` (inner) and `-(A+B)` (outer).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiSample {
    /// Maximum over pairs of points above the outer level; `-inf` if there are fewer than two.
    pub value: f64,
    /// Maximum over pairs of points above the inner level.
    pub inner_value: f64,
    pub inner_level: f64,
    pub outer_level: f64,
    /// Both maxima are finite and equal.
    pub stable: bool,
    /// Indices (into the descending point list) of the pair attaining `value`.
    pub argpair: Option<(usize, usize)>,
}

impl XiSample {
    pub fn is_degenerate(&self) -> bool {
        self.argpair.is_none()
    }
}

/// Incremental two-level pair maximum over descending points.
struct XiSearch {
    inner_floor: f64,
    outer_floor: f64,
    slack: f64,
    points: Vec<f64>,
    inner: PairMax,
    outer: PairMax,
}

impl XiSearch {
    fn new(inner: f64, outer: f64) -> Self {
        Self {
            inner_floor: -inner,
            outer_floor: -outer,
            slack: -gumbel_floor(),
            points: Vec::new(),
            inner: PairMax::EMPTY,
            outer: PairMax::EMPTY,
        }
    }

    /// Adds the next (smaller) point. Returns `false` once neither this
    /// point nor any later one can change either maximum.
    fn push(&mut self, y: f64, weight: impl Fn(usize, usize) -> f64) -> bool {
        if y < self.outer_floor {
            return false;
        }
        let in_inner = y >= self.inner_floor;
        let threshold = if in_inner {
            self.inner.value
        } else {
            self.outer.value
        };
        let t = self.points.len();
        self.points.push(y);
        if t > 0 && self.points[0] + y + self.slack < threshold {
            return false;
        }
        for s in 0..t {
            let ys = self.points[s];
            if ys + y + self.slack < threshold {
                break;
            }
            let v = ys + y - weight(s, t);
            if in_inner {
                self.inner.offer(v, s, t);
            }
            self.outer.offer(v, s, t);
        }
        true
    }

    fn finish(self, inner_level: f64, outer_level: f64) -> XiSample {
        let stable = self.outer.arg.is_some() && self.inner.value == self.outer.value;
        XiSample {
            value: self.outer.value,
            inner_value: self.inner.value,
            inner_level,
            outer_level,
            stable,
            argpair: self.outer.arg,
        }
    }
}

fn check_levels(inner: f64, outer: f64) -> Result<()> {
    if !inner.is_finite() {
        return Err(invalid("inner", format!("must be finite, got {inner}")));
    }
    if !(outer > 0.0 && outer.is_finite()) {
        return Err(invalid("outer", format!("must be positive, got {outer}")));
    }
    Ok(())
}

/// `Ξ` from a prescribed configuration at inner level `-inner` and outer
/// level `-(inner + outer)`.
pub fn xi_from_config(config: &LimitPointConfig, inner: f64, outer: f64) -> Result<XiSample> {
    check_levels(inner, outer)?;
    let mut search = XiSearch::new(inner, inner + outer);
    for &y in &config.points {
        if !search.push(y, |s, t| config.pair_weights.weight(s, t)) {
            break;
        }
    }
    Ok(search.finish(-inner, -(inner + outer)))
}

/// One draw of `Ξ = max_{s<t} (Y_s + Y_t - Λ_st)` from the process with
/// intensity `gamma * e^{-y}`.
///
/// Uses the same streams as [`LimitPointConfig::sample`] with floor
/// `-(inner + outer)`, and returns the same result, but generates points
/// lazily and stops as soon as no further point can matter.
pub fn sample_xi(stream: &RandomStream, gamma: f64, inner: f64, outer: f64) -> Result<XiSample> {
    check_levels(inner, outer)?;
    let floor = -(inner + outer);
    let mut src = stream.derive(0);
    let weights = stream.derive(1);
    let mut search = XiSearch::new(inner, inner + outer);
    for y in PoissonPoints::new(&mut src, gamma, floor)? {
        if !search.push(y, |s, t| keyed_gumbel(&weights, s, t)) {
            break;
        }
    }
    Ok(search.finish(-inner, floor))
}

/// `max_{s<t} (Λ_s + Λ_t - Λ_st - 2α)` over the given vertex Gumbels;
/// `-inf` with fewer than two.
pub fn xi_alpha_from_parts(vertex: &[f64], pair: impl Fn(usize, usize) -> f64, alpha: f64) -> f64 {
    if vertex.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let mut order: Vec<usize> = (0..vertex.len()).collect();
    order.sort_by(|&a, &b| vertex[b].total_cmp(&vertex[a]).then(a.cmp(&b)));
    let slack = -gumbel_floor();
    let mut best = f64::NEG_INFINITY;
    for (i, &s) in order.iter().enumerate() {
        let ys = vertex[s];
        if i + 1 < order.len() && ys + vertex[order[i + 1]] + slack < best {
            break;
        }
        for &t in &order[i + 1..] {
            let yt = vertex[t];
            if ys + yt + slack < best {
                break;
            }
            best = best.max(ys + yt - pair(s, t));
        }
    }
    best - 2.0 * alpha
}

/// `Ξ_α`: `N ~ Poisson(e^α)` vertex Gumbels with keyed pair Gumbels.
///
/// `N` comes from `stream.derive(0)`, the vertex Gumbels from
/// `stream.derive(1)`, the pair Gumbels from `stream.derive(2)`.
pub fn sample_xi_alpha(stream: &RandomStream, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(invalid("alpha", format!("must be finite, got {alpha}")));
    }
    let n = sample_poisson(&mut stream.derive(0), alpha.exp())? as usize;
    let mut src = stream.derive(1);
    let vertex: Vec<f64> = (0..n).map(|_| src.gumbel()).collect();
    let pairs = stream.derive(2);
    Ok(xi_alpha_from_parts(
        &vertex,
        |s, t| keyed_gumbel(&pairs, s, t),
        alpha,
    ))
}

/// `min_{s<t} S_s S_t / E'_st` over the given partial sums.
pub fn q_from_prefix(partial_sums: &[f64], pair: impl Fn(usize, usize) -> f64) -> f64 {
    let mut q = f64::INFINITY;
    for t in 1..partial_sums.len() {
        for s in 0..t {
            q = q.min(partial_sums[s] * partial_sums[t] / pair(s, t));
        }
    }
    q
}

/// Expected number of pairs beyond the first `T` partial sums with
/// `S_s S_t / E'_st < q`, as a function of the realized sums.
///
/// Pairs `(s, t)` with `s <= T < t` contribute at most
/// `e^{-S_s S_T / q} q / S_s` each row; pairs with both indices beyond `T`
/// contribute at most `e^{-S_T^2 / q} q^2 / S_T^2`.
pub fn q_truncation_bound(partial_sums: &[f64], q: f64) -> f64 {
    let Some(&last) = partial_sums.last() else {
        return f64::INFINITY;
    };
    if !q.is_finite() {
        return f64::INFINITY;
    }
    let rows: f64 = partial_sums
        .iter()
        .map(|&s| (-s * last / q).exp() * q / s)
        .sum();
    rows + (-last * last / q).exp() * (q / last).powi(2)
}

/// One draw of `Q = min_{s<t} S_s S_t / E'_st`.
///
/// Partial sums come from `stream.derive(0)`, the pair exponentials are
/// keyed by `stream.derive(1)`. Points are added until
/// [`q_truncation_bound`] drops below `delta`.
pub fn sample_q(stream: &RandomStream, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    // no keyed exponential exceeds this, so larger products cannot win
    let e_max = -UNIFORM_MIN.ln();
    let mut src = stream.derive(0);
    let pairs = stream.derive(1);
    let mut sums = vec![src.unit_exponential()];
    let mut q = f64::INFINITY;
    loop {
        let t = sums.len();
        let st = sums[t - 1] + src.unit_exponential();
        sums.push(st);
        for (s, &ss) in sums[..t].iter().enumerate() {
            let product = ss * st;
            if product >= q * e_max {
                break;
            }
            q = q.min(product / keyed_exponential(&pairs, s, t));
        }
        if q_truncation_bound(&sums, q) < delta {
            return Ok(q);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    Direct,
    ProductFormula,
    LowerBound,
}

/// An estimate of `P(Q > x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailEstimate {
    pub x: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub method: TailMethod,
}

impl TailEstimate {
    /// Normal-approximation interval `estimate ± z * std_error`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (
            self.estimate - z * self.std_error,
            self.estimate + z * self.std_error,
        )
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(
            "x",
            format!("must be positive and finite, got {x}"),
        ));
    }
    Ok(())
}

/// `P(Q > x)` as the fraction of `replicates` draws of [`sample_q`] above `x`
/// (draw `r` uses `stream.derive(r)`).
pub fn tail_q_direct(
    stream: &RandomStream,
    x: f64,
    delta: f64,
    replicates: usize,
) -> Result<TailEstimate> {
    check_x(x)?;
    if replicates == 0 {
        return Err(Error::EmptyInput("replicates"));
    }
    let hits = (0..replicates)
        .into_par_iter()
        .map(|r| sample_q(&stream.derive(r as u64), delta).map(|q| usize::from(q > x)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let p = hits as f64 / replicates as f64;
    Ok(TailEstimate {
        x,
        estimate: p,
        std_error: (p * (1.0 - p) / replicates as f64).sqrt(),
        method: TailMethod::Direct,
    })
}

/// Omitted-log-factor tolerance of the product formula.
const PRODUCT_TOL: f64 = 1e-8;
/// Products below this are reported as zero.
const PRODUCT_NEGLIGIBLE: f64 = 1e-15;

/// `prod_{s<t} (1 - e^{-S_s S_t / x})` for one realization of the partial sums.
fn tail_product(src: &mut RandomStream, x: f64, pair_cap: usize) -> Result<f64> {
    let mut sums = vec![src.unit_exponential()];
    let mut log_product = 0.0;
    let mut pairs = 0usize;
    loop {
        let t = sums.len();
        let st = sums[t - 1] + src.unit_exponential();
        sums.push(st);
        pairs += t;
        if pairs > pair_cap {
            return Err(Error::BudgetExceeded(format!(
                "product formula at x={x} needs more than {pair_cap} pairs"
            )));
        }
        for &ss in &sums[..t] {
            log_product += (-(-ss * st / x).exp()).ln_1p();
        }
        if log_product < PRODUCT_NEGLIGIBLE.ln() {
            return Ok(0.0);
        }
        if q_truncation_bound(&sums, x) < PRODUCT_TOL {
            return Ok(log_product.exp());
        }
    }
}

/// `P(Q > x) = E[prod_{s<t} (1 - e^{-S_s S_t / x})]` by Monte Carlo over
/// `replicates` realizations of the partial sums.
pub fn tail_q_product(
    stream: &RandomStream,
    x: f64,
    pair_cap: usize,
    replicates: usize,
) -> Result<TailEstimate> {
    check_x(x)?;
    if replicates < 2 {
        return Err(invalid(
            "replicates",
            format!("need at least 2, got {replicates}"),
        ));
    }
    let values = (0..replicates)
        .into_par_iter()
        .map(|r| tail_product(&mut stream.derive(r as u64), x, pair_cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(TailEstimate {
        x,
        estimate: mean(&values).clamp(0.0, 1.0),
        std_error: (variance(&values) / replicates as f64).sqrt(),
        method: TailMethod::ProductFormula,
    })
}

/// `e^{-1} exp(∫_0^∞ ∫_0^∞ log(1 - e^{-(u+1)(v+1)/x}) du dv)`, a lower bound on `P(Q > x)`.
pub fn tail_q_lower_bound(x: f64) -> Result<f64> {
    check_x(x)?;
    // beyond u + 1 = x (25 + log x) the remaining mass is below e^{-25} x^2 / (u + 1)
    let edge = (x * (25.0 + x.ln()) - 1.0).max(1.0);
    let integrand = |u: f64, v: f64| {
        let z = (u + 1.0) * (v + 1.0) / x;
        if z > 1.0 {
            (-(-z).exp()).ln_1p()
        } else {
            (-(-z).exp_m1()).ln()
        }
    };
    let log_integral = adaptive_2d(integrand, (0.0, edge), (0.0, edge), 1e-7)?;
    Ok((log_integral - 1.0).exp())
}

/// Moment estimates of `Ξ` from stable samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiMoments {
    pub mean: f64,
    pub variance: f64,
    pub mean_ci: (f64, f64),
    pub variance_ci: (f64, f64),
    pub replicates: usize,
    pub stable: usize,
    /// Unstable draws, degenerate ones included.
    pub unstable: usize,
}

/// Bootstrap resamples behind the moment intervals.
pub const MOMENT_RESAMPLES: usize = 2000;
/// Largest tolerated fraction of unstable draws.
pub const MAX_UNSTABLE_FRACTION: f64 = 0.05;

/// `replicates` draws of [`sample_xi`] at `gamma = 1`, draw `r` from
/// `stream.derive(r)`, in parallel but in a fixed order.
pub fn sample_xi_batch(
    stream: &RandomStream,
    replicates: usize,
    inner: f64,
    outer: f64,
) -> Result<Vec<XiSample>> {
    (0..replicates)
        .into_par_iter()
        .map(|r| sample_xi(&stream.derive(r as u64), 1.0, inner, outer))
        .collect()
}

/// Mean and variance of `Ξ` with 95% percentile-bootstrap intervals.
pub fn estimate_xi_moments(
    stream: &RandomStream,
    replicates: usize,
    inner: f64,
    outer: f64,
) -> Result<XiMoments> {
    if replicates < 100 {
        return Err(invalid(
            "replicates",
            format!("need at least 100, got {replicates}"),
        ));
    }
    let samples = sample_xi_batch(&stream.derive(0), replicates, inner, outer)?;
    xi_moments_from_samples(&samples, &stream.derive(1))
}

/// Moments of the stable draws in `samples`; `stream` drives the bootstrap.
pub fn xi_moments_from_samples(samples: &[XiSample], stream: &RandomStream) -> Result<XiMoments> {
    let replicates = samples.len();
    let values: Vec<f64> = samples
        .iter()
        .filter(|s| s.stable)
        .map(|s| s.value)
        .collect();
    let unstable = replicates - values.len();
    let fraction = unstable as f64 / replicates.max(1) as f64;
    if fraction > MAX_UNSTABLE_FRACTION {
        return Err(Error::Unstable {
            fraction,
            limit: MAX_UNSTABLE_FRACTION,
        });
    }
    let dist = EmpiricalDistribution::new(values)?;
    let mean_ci = bootstrap_ci(&dist, mean, 0.95, MOMENT_RESAMPLES, &stream.derive(0))?;
    let variance_ci = bootstrap_ci(&dist, variance, 0.95, MOMENT_RESAMPLES, &stream.derive(1))?;
    Ok(XiMoments {
        mean: dist.mean(),
        variance: dist.variance(),
        mean_ci,
        variance_ci,
        replicates,
        stable: dist.count(),
        unstable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ScriptedSource;

    #[test]
    fn d_array_stub_zero() {
        let mut src = ScriptedSource::new().with_gumbels([0.0; 10]);
        assert_eq!(sample_d_array(&mut src, 4).unwrap(), vec![0.0; 6]);
        assert!(sample_d_array(&mut src, 1).is_err());
    }

    #[test]
    fn xi_single_pair_stub() {
        let weights = PairWeights::Fixed(HashMap::from([((0, 1), 0.2)]));
        let config = LimitPointConfig::new(1.0, -8.0, vec![1.0, 0.5], weights).unwrap();
        let xi = xi_from_config(&config, 4.0, 4.0).unwrap();
        assert!((xi.value - 1.3).abs() < 1e-15);
        assert!(xi.stable);
        assert_eq!(xi.argpair, Some((0, 1)));
    }

    #[test]
    fn xi_degenerate_is_tagged() {
        let config =
            LimitPointConfig::new(1.0, -1.0, vec![0.3], PairWeights::Fixed(HashMap::new()))
                .unwrap();
        let xi = xi_from_config(&config, 0.5, 0.5).unwrap();
        assert_eq!(xi.value, f64::NEG_INFINITY);
        assert!(!xi.stable && xi.is_degenerate());
    }

    #[test]
    fn config_validation() {
        let w = || PairWeights::Fixed(HashMap::new());
        assert!(LimitPointConfig::new(1.0, 0.0, vec![1.0, 1.0], w()).is_err());
        assert!(LimitPointConfig::new(1.0, 0.0, vec![1.0, -0.5], w()).is_err());
        assert!(LimitPointConfig::new(0.0, 0.0, vec![], w()).is_err());
        assert!(sample_xi(&RandomStream::new(0), 1.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn lazy_xi_matches_full_scan() {
        for r in 0..300 {
            let stream = RandomStream::new(77).derive(r);
            let lazy = sample_xi(&stream, 1.0, 2.0, 2.0).unwrap();
            let config = LimitPointConfig::sample(&stream, 1.0, -4.0).unwrap();
            let n = config.points.len();
            let mut full = f64::NEG_INFINITY;
            let mut inner = f64::NEG_INFINITY;
            for t in 1..n {
                for s in 0..t {
                    let v = config.points[s] + config.points[t] - config.pair_weights.weight(s, t);
                    full = full.max(v);
                    if config.points[t] >= -2.0 {
                        inner = inner.max(v);
                    }
                }
            }
            assert_eq!(lazy.value, full);
            assert_eq!(lazy.inner_value, inner);
            assert!(lazy.value >= lazy.inner_value);
        }
    }

    #[test]
    fn xi_alpha_stub() {
        assert_eq!(xi_alpha_from_parts(&[0.0, 0.0], |_, _| 0.0, 1.0), -2.0);
        assert_eq!(
            xi_alpha_from_parts(&[0.0], |_, _| 0.0, 1.0),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn xi_alpha_pruning_is_exact() {
        let stream = RandomStream::new(5);
        let mut src = stream.derive(1);
        let vertex: Vec<f64> = (0..60).map(|_| src.gumbel()).collect();
        let pairs = stream.derive(2);
        let mut brute = f64::NEG_INFINITY;
        for t in 1..vertex.len() {
            for s in 0..t {
                brute = brute.max(vertex[s] + vertex[t] - keyed_gumbel(&pairs, s, t));
            }
        }
        let pruned = xi_alpha_from_parts(&vertex, |s, t| keyed_gumbel(&pairs, s, t), 0.5);
        assert_eq!(pruned, brute - 1.0);
    }

    #[test]
    fn q_stub() {
        let q = q_from_prefix(&[1.0, 2.0], |_, _| 1.0);
        assert_eq!(q, 2.0);
        assert!(q_truncation_bound(&[1.0, 2.0], q) < 1.5);
        assert!(sample_q(&RandomStream::new(0), 0.0).is_err());
        assert!(sample_q(&RandomStream::new(0), 1.0).is_err());
    }

    #[test]
    fn q_matches_prefix_minimum() {
        for r in 0..200 {
            let stream = RandomStream::new(3).derive(r);
            let q = sample_q(&stream, 1e-6).unwrap();
            // recompute over a long prefix by brute force
            let mut src = stream.derive(0);
            let mut sums = Vec::new();
            let mut acc = 0.0;
            for _ in 0..60 {
                acc += src.unit_exponential();
                sums.push(acc);
            }
            let pairs = stream.derive(1);
            let brute = q_from_prefix(&sums, |s, t| keyed_exponential(&pairs, s, t));
            assert!(q >= brute);
            assert!(q > 0.0);
        }
    }

    #[test]
    fn tail_limits() {
        let s = RandomStream::new(9);
        assert!(
            tail_q_product(&s, 1e-3, DEFAULT_PAIR_CAP, 200)
                .unwrap()
                .estimate
                > 0.999
        );
        assert!(
            tail_q_product(&s, 50.0, DEFAULT_PAIR_CAP, 200)
                .unwrap()
                .estimate
                < 1e-3
        );
        assert!(tail_q_product(&s, 0.0, DEFAULT_PAIR_CAP, 200).is_err());
        let small = tail_q_lower_bound(1e-3).unwrap();
        assert!((small - (-1.0f64).exp()).abs() < 1e-9);
        assert!(tail_q_lower_bound(20.0).unwrap() < 1e-6);
    }

    /// `Li_2(z)` for `0 <= z <= 0.99` by its power series.
    fn dilog(z: f64) -> f64 {
        let mut sum = 0.0;
        let mut power = z;
        for k in 1..5000 {
            sum += power / (k * k) as f64;
            power *= z;
            if power < 1e-18 {
                break;
            }
        }
        sum
    }

    #[test]
    fn lower_bound_matches_dilog_form() {
        // inner integral in closed form: -x * int_1^inf Li_2(e^{-a/x}) / a da,
        // here with a = 1/t so the range becomes (0, 1]
        for x in [0.5, 1.0, 2.0] {
            let oracle = crate::quadrature::tanh_sinh(
                |t, _, _| dilog((-1.0 / (t * x)).exp()) / t,
                0.0,
                1.0,
                1e-12,
            )
            .unwrap();
            let expect = (-x * oracle - 1.0).exp();
            let got = tail_q_lower_bound(x).unwrap();
            assert!(
                (got / expect - 1.0).abs() < 2e-6,
                "x={x}: {got} vs {expect}"
            );
        }
    }
}
