//! Exact finite-`n` representations of distances in the mean-field model.
//!
//! Exploring the complete graph from a set `A` adds vertices one at a time;
//! with `k` vertices found the next edge weight is exponential with mean
//! `n / (k (n - k))` and the new vertex is uniform among the unreached ones.
//! Distances between sets are therefore sums of independent exponentials
//! stopped at an urn waiting time. These samplers never build a graph and
//! serve as oracles for the simulator in [`crate::mean_field`].

use crate::error::{invalid, Result};
use crate::quadrature::tanh_sinh;
use crate::rng::{sample_index, RandomSource};

/// Urn with `black` target balls and `white` others, drawn without replacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UrnSpec {
    pub black: usize,
    pub white: usize,
}

impl UrnSpec {
    pub fn new(black: usize, white: usize) -> Result<Self> {
        if black + white == 0 {
            return Err(invalid("urn", "needs at least one ball"));
        }
        Ok(Self { black, white })
    }

    /// `P(N > k) = prod_{i<k} (white - i) / (black + white - i)`.
    pub fn survival(&self, k: usize) -> f64 {
        (0..k.min(self.white + 1))
            .map(|i| {
                if i >= self.white {
                    0.0
                } else {
                    (self.white - i) as f64 / (self.black + self.white - i) as f64
                }
            })
            .product()
    }
}

/// Number of draws until the first black ball, in `1..=white + 1`.
pub fn sample_urn_waiting_time<R: RandomSource + ?Sized>(
    src: &mut R,
    spec: UrnSpec,
) -> Result<usize> {
    if spec.black == 0 {
        return Err(invalid(
            "black",
            "waiting time needs at least one black ball",
        ));
    }
    for drawn in 0..spec.white {
        let left = spec.black + spec.white - drawn;
        if src.uniform() * (left as f64) < spec.black as f64 {
            return Ok(drawn + 1);
        }
    }
    Ok(spec.white + 1)
}

/// A sampled distance `d_w(A, B)` with the number of exploration steps it took.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SetDistanceSample {
    pub distance: f64,
    pub steps: usize,
}

/// `sum_{k=a_size}^{a_size+steps-1} E_k / (k (n - k))` with `E_k` exponential of mean `n`.
pub fn set_distance_given_steps<R: RandomSource + ?Sized>(
    src: &mut R,
    n: usize,
    a_size: usize,
    steps: usize,
) -> f64 {
    let nf = n as f64;
    (a_size..a_size + steps)
        .map(|k| nf * src.unit_exponential() / (k as f64 * (n - k) as f64))
        .sum()
}

/// Distance between disjoint vertex sets of sizes `a_size` and `b_size` in `K_n`.
pub fn sample_set_distance<R: RandomSource + ?Sized>(
    src: &mut R,
    n: usize,
    a_size: usize,
    b_size: usize,
) -> Result<SetDistanceSample> {
    if a_size == 0 || b_size == 0 || a_size + b_size > n {
        return Err(invalid(
            "set sizes",
            format!("need a, b >= 1 and a + b <= n; got a={a_size}, b={b_size}, n={n}"),
        ));
    }
    let steps = sample_urn_waiting_time(src, UrnSpec::new(b_size, n - a_size - b_size)?)?;
    let distance = set_distance_given_steps(src, n, a_size, steps);
    Ok(SetDistanceSample { distance, steps })
}

/// Distance between two fixed vertices: `N` uniform on `1..=n-1`.
pub fn sample_two_point_distance<R: RandomSource + ?Sized>(src: &mut R, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid("n", format!("need n >= 2, got {n}")));
    }
    let steps = 1 + sample_index(src, n - 1);
    Ok(set_distance_given_steps(src, n, 1, steps))
}

/// Remaining path weight once both endpoints have left through their nearest
/// neighbours: a sum over cluster sizes `2..N-1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinPairSum {
    pub value: f64,
    pub steps: usize,
}

/// `sum_{k=2}^{steps-1} n E'_k / (k (n - k))` with mean-one `E'_k`; zero when `steps <= 2`.
pub fn min_pair_sum_given_steps<R: RandomSource + ?Sized>(
    src: &mut R,
    n: usize,
    steps: usize,
) -> f64 {
    let nf = n as f64;
    (2..steps)
        .map(|k| nf * src.unit_exponential() / (k as f64 * (n - k) as f64))
        .sum()
}

/// Draws `N`, the smaller of two distinct positions chosen uniformly from
/// `2..=n-1`, then the sum up to `N - 1`.
pub fn sample_min_pair_sum<R: RandomSource + ?Sized>(src: &mut R, n: usize) -> Result<MinPairSum> {
    if n < 5 {
        return Err(invalid("n", format!("need n >= 5, got {n}")));
    }
    let positions = n - 2;
    let first = sample_index(src, positions);
    let mut second = sample_index(src, positions - 1);
    if second >= first {
        second += 1;
    }
    let steps = 2 + first.min(second);
    let value = min_pair_sum_given_steps(src, n, steps);
    Ok(MinPairSum { value, steps })
}

/// Law of `N` in [`sample_min_pair_sum`]: `2 (n - 1 - j) / ((n - 2)(n - 3))` on `2..=n-2`.
pub fn min_pair_steps_pmf(n: usize, j: usize) -> f64 {
    if n < 5 || j < 2 || j > n - 2 {
        return 0.0;
    }
    2.0 * (n - 1 - j) as f64 / ((n - 2) as f64 * (n - 3) as f64)
}

/// `2 * int_0^1 u^a (1 - u)^{1-a} du`, the limiting constant in the
/// exponential tail bound `P(S_N >= log n + x) <= C e^{-a x}`.
pub fn tail_bound_constant(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 2.0) {
        return Err(invalid("a", format!("must lie in (0, 2), got {a}")));
    }
    // 1 - u = v^p with p = 1 / (2 - a) removes the endpoint singularity:
    // the integral becomes 2 p int_0^1 (1 - v^p)^a dv
    let p = 1.0 / (2.0 - a);
    tanh_sinh(
        |v, _, one_minus_v| {
            let ln_v = if v < 0.5 {
                v.ln()
            } else {
                (-one_minus_v).ln_1p()
            };
            2.0 * p * (-(p * ln_v).exp_m1()).powf(a)
        },
        0.0,
        1.0,
        1e-10,
    )
}

/// `exp((log n - alpha) / n) - 1`.
pub fn slow_count_epsilon(n: usize, alpha: f64) -> f64 {
    (((n as f64).ln() - alpha) / n as f64).exp_m1()
}

/// Expected number of vertices whose nearest neighbour is at least `log n - alpha` away:
/// `n exp(-(n-1)(log n - alpha)/n)`, which equals `(1 + eps_n) e^alpha`.
pub fn expected_slow_count(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    nf * (-(nf - 1.0) * (nf.ln() - alpha) / nf).exp()
}

/// Stein–Chen bound `2 (1 + eps_n) e^{2 alpha} log n / n` on the total
/// variation distance between the slow-vertex count and Poisson.
pub fn stein_chen_bound(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    2.0 * (1.0 + slow_count_epsilon(n, alpha)) * (2.0 * alpha).exp() * nf.ln() / nf
}
