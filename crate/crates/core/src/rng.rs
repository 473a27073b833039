//! Reproducible randomness.
//!
//! Every random quantity in the laboratory is a pure function of a
//! [`RandomStream`]: a master seed plus a path of 64-bit labels. Output word
//! `c` of a stream is a keyed hash of `(stream key, c)`, so streams can be
//! split, replayed and accessed at random positions without shared state.
//! The same keyed hash gives the lazy edge weights of [`EdgeWeightOracle`]:
//! the weight of a pair is computed on demand and never stored.
//!
//! Exponentials are parameterised by their **mean** throughout; a rate-λ
//! exponential is `sample_exponential(src, 1.0 / λ)`.

use std::collections::VecDeque;

use rand_distr::Distribution;

use crate::error::{invalid, Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const COUNTER_SALT: u64 = 0x6A09_E667_F3BC_C909;
const SEED_SALT: u64 = 0xBB67_AE85_84CA_A73B;
const LABEL_SALT: u64 = 0x3C6E_F372_FE94_F82B;

/// Smallest value returned by [`u64_to_open_unit`]; the all-zero word maps here.
pub const UNIFORM_MIN: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 finaliser.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed hash used for all counter-based output. For a fixed key the map
/// `counter -> output` is a bijection, so a stream never repeats a word.
#[inline]
pub fn keyed_u64(key: u64, counter: u64) -> u64 {
    mix64(key ^ mix64(counter.wrapping_mul(GOLDEN).wrapping_add(COUNTER_SALT)))
}

/// Maps a word onto the open interval (0, 1) with 53 bits of resolution.
#[inline]
pub fn u64_to_open_unit(x: u64) -> f64 {
    let u = (x >> 11) as f64 * UNIFORM_MIN;
    if u == 0.0 {
        UNIFORM_MIN
    } else {
        u
    }
}

/// Smallest standard Gumbel value any source can produce, `-ln(-ln(UNIFORM_MIN))`.
///
/// The pair searches in `limit` use it as an exact pruning bound.
pub fn gumbel_floor() -> f64 {
    -(-UNIFORM_MIN.ln()).ln()
}

/// A source of random draws.
///
/// Implemented by [`RandomStream`] for real sampling and by [`ScriptedSource`]
/// for tests that need to inject prescribed values.
pub trait RandomSource {
    fn next_u64(&mut self) -> u64;

    /// Uniform on (0, 1), never exactly 0 or 1.
    fn uniform(&mut self) -> f64 {
        u64_to_open_unit(self.next_u64())
    }

    /// Exponential with mean 1.
    fn unit_exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }

    /// Standard Gumbel, CDF `exp(-exp(-x))`.
    fn gumbel(&mut self) -> f64 {
        -(-self.uniform().ln()).ln()
    }
}

impl<R: RandomSource + ?Sized> RandomSource for &mut R {
    fn next_u64(&mut self) -> u64 {
        (**self).next_u64()
    }
    fn uniform(&mut self) -> f64 {
        (**self).uniform()
    }
    fn unit_exponential(&mut self) -> f64 {
        (**self).unit_exponential()
    }
    fn gumbel(&mut self) -> f64 {
        (**self).gumbel()
    }
}

/// A hierarchical, counter-based random stream.
///
/// Cloning a stream copies its position; the clone and the original then
/// produce the same sequence. Child streams from [`RandomStream::derive`] are
/// keyed by the full label path, so sibling order matters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RandomStream {
    master_seed: u64,
    path: Vec<u64>,
    key: u64,
    counter: u64,
}

impl RandomStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            path: Vec::new(),
            key: mix64(master_seed ^ SEED_SALT),
            counter: 0,
        }
    }

    /// Child stream with `label` appended to the path, positioned at its start.
    pub fn derive(&self, label: u64) -> Self {
        let mut path = self.path.clone();
        path.push(label);
        Self {
            master_seed: self.master_seed,
            path,
            key: mix64(self.key ^ mix64(label.wrapping_add(LABEL_SALT))).wrapping_add(GOLDEN),
            counter: 0,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Number of words consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Word at an arbitrary position, without advancing the stream.
    #[inline]
    pub fn word_at(&self, counter: u64) -> u64 {
        keyed_u64(self.key, counter)
    }

    /// Uniform on (0, 1) at an arbitrary position, without advancing the stream.
    #[inline]
    pub fn uniform_at(&self, counter: u64) -> f64 {
        u64_to_open_unit(self.word_at(counter))
    }
}

/// Free-function form of [`RandomStream::derive`].
pub fn derive_stream(parent: &RandomStream, label: u64) -> RandomStream {
    parent.derive(label)
}

impl RandomSource for RandomStream {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        let word = keyed_u64(self.key, self.counter);
        self.counter += 1;
        word
    }
}

impl rand_core::RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        (RandomSource::next_u64(self) >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        RandomSource::next_u64(self)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        rand_core::impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand_core::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// Adapter exposing any [`RandomSource`] as a `rand_core` generator.
struct SourceRng<'a, R: RandomSource + ?Sized>(&'a mut R);

impl<R: RandomSource + ?Sized> rand_core::RngCore for SourceRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        (self.0.next_u64() >> 32) as u32
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        rand_core::impls::fill_bytes_via_next(self, dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand_core::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// Source that replays prescribed values; panics once a queue runs dry.
///
/// Uniform, exponential and Gumbel draws come from separate queues so a test
/// can script exactly the quantity a formula consumes.
#[derive(Clone, Debug, Default)]
pub struct ScriptedSource {
    uniforms: VecDeque<f64>,
    exponentials: VecDeque<f64>,
    gumbels: VecDeque<f64>,
}

impl ScriptedSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_uniforms(mut self, values: impl IntoIterator<Item = f64>) -> Self {
        self.uniforms.extend(values);
        self
    }

    pub fn with_exponentials(mut self, values: impl IntoIterator<Item = f64>) -> Self {
        self.exponentials.extend(values);
        self
    }

    pub fn with_gumbels(mut self, values: impl IntoIterator<Item = f64>) -> Self {
        self.gumbels.extend(values);
        self
    }

    pub fn remaining(&self) -> usize {
        self.uniforms.len() + self.exponentials.len() + self.gumbels.len()
    }
}

impl RandomSource for ScriptedSource {
    fn next_u64(&mut self) -> u64 {
        panic!("scripted source has no raw words");
    }

    fn uniform(&mut self) -> f64 {
        self.uniforms
            .pop_front()
            .expect("scripted uniforms exhausted")
    }

    fn unit_exponential(&mut self) -> f64 {
        self.exponentials
            .pop_front()
            .expect("scripted exponentials exhausted")
    }

    fn gumbel(&mut self) -> f64 {
        self.gumbels
            .pop_front()
            .expect("scripted gumbels exhausted")
    }
}

/// Exponential draw with the given mean: `-mean * ln(u)`.
pub fn sample_exponential<R: RandomSource + ?Sized>(src: &mut R, mean: f64) -> Result<f64> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(invalid(
            "mean",
            format!("must be positive and finite, got {mean}"),
        ));
    }
    Ok(mean * src.unit_exponential())
}

/// Standard Gumbel draw, `-ln(-ln(u))`.
pub fn sample_gumbel<R: RandomSource + ?Sized>(src: &mut R) -> f64 {
    src.gumbel()
}

/// Uniform index in `0..n`. `n` must be positive.
pub fn sample_index<R: RandomSource + ?Sized>(src: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    ((src.uniform() * n as f64) as usize).min(n - 1)
}

/// Poisson draw with the given mean.
pub fn sample_poisson<R: RandomSource + ?Sized>(src: &mut R, mean: f64) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist =
        rand_distr::Poisson::new(mean).map_err(|e| invalid("mean", format!("{e} (got {mean})")))?;
    Ok(dist.sample(&mut SourceRng(src)) as u64)
}

/// Points `Y_1 > Y_2 > ...` of a Poisson process with intensity `gamma * exp(-y)`,
/// produced lazily from the top down as `Y_s = -ln(S_s / gamma)` with `S_s`
/// the partial sums of unit exponentials.
///
/// The iterator stops at the first point below `floor` (that point is dropped).
pub struct PoissonPoints<R> {
    src: R,
    gamma: f64,
    cutoff: f64,
    partial_sum: f64,
    done: bool,
}

impl<R: RandomSource> PoissonPoints<R> {
    pub fn new(src: R, gamma: f64, floor: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(
                "gamma",
                format!("must be positive and finite, got {gamma}"),
            ));
        }
        if floor.is_nan() {
            return Err(invalid("floor", "is NaN"));
        }
        Ok(Self {
            src,
            gamma,
            cutoff: gamma * (-floor).exp(),
            partial_sum: 0.0,
            done: false,
        })
    }
}

impl<R: RandomSource> Iterator for PoissonPoints<R> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.done {
            return None;
        }
        self.partial_sum += self.src.unit_exponential();
        if self.partial_sum > self.cutoff {
            self.done = true;
            return None;
        }
        Some(-(self.partial_sum / self.gamma).ln())
    }
}

/// All points at or above `floor` of the Poisson process with density `gamma * exp(-y)`,
/// in descending order.
pub fn sample_ppp<R: RandomSource + ?Sized>(
    src: &mut R,
    gamma: f64,
    floor: f64,
) -> Result<Vec<f64>> {
    Ok(PoissonPoints::new(src, gamma, floor)?.collect())
}

/// Weighted complete graph on vertices `0..vertex_count()`.
pub trait EdgeWeights: Sync {
    fn vertex_count(&self) -> usize;

    /// Weight of the edge `{i, j}`; callers guarantee `i != j`, both in range.
    fn weight(&self, i: usize, j: usize) -> f64;
}

impl<W: EdgeWeights + ?Sized> EdgeWeights for &W {
    fn vertex_count(&self) -> usize {
        (**self).vertex_count()
    }
    fn weight(&self, i: usize, j: usize) -> f64 {
        (**self).weight(i, j)
    }
}

/// Lazily evaluated i.i.d. exponential edge weights on the complete graph.
///
/// Vertices are `0..n`. The weight of `{i, j}` is a pure function of the
/// stream key and the canonical pair `(min, max)`.
#[derive(Clone, Debug)]
pub struct EdgeWeightOracle {
    n: usize,
    mean: f64,
    stream: RandomStream,
}

impl EdgeWeightOracle {
    /// Oracle with the standard mean-`n` weights.
    pub fn new(n: usize, stream: RandomStream) -> Result<Self> {
        Self::with_mean(n, n as f64, stream)
    }

    pub fn with_mean(n: usize, mean: f64, stream: RandomStream) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", format!("need at least 2 vertices, got {n}")));
        }
        if n as u64 > u32::MAX as u64 {
            return Err(invalid("n", "vertex count must fit in 32 bits"));
        }
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(invalid(
                "mean",
                format!("must be positive and finite, got {mean}"),
            ));
        }
        Ok(Self { n, mean, stream })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn stream(&self) -> &RandomStream {
        &self.stream
    }

    /// Checked weight lookup.
    pub fn edge_weight(&self, i: usize, j: usize) -> Result<f64> {
        for v in [i, j] {
            if v >= self.n {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    n: self.n,
                });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        Ok(self.weight(i, j))
    }
}

impl EdgeWeights for EdgeWeightOracle {
    fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    fn weight(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i != j && i < self.n && j < self.n);
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let code = ((lo as u64) << 32) | hi as u64;
        -self.mean * self.stream.uniform_at(code).ln()
    }
}

/// Fully materialised symmetric weight table.
///
/// Used for hand-built test instances and to speed up all-pairs work when
/// `n^2` weights fit in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    n: usize,
    weights: Vec<f64>,
}

impl WeightTable {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", format!("need at least 2 vertices, got {n}")));
        }
        let mut weights = vec![f64::NAN; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = f(i, j);
                if !(w > 0.0 && w.is_finite()) {
                    return Err(invalid(
                        "weight",
                        format!("w({i},{j}) = {w} is not positive"),
                    ));
                }
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        Ok(Self { n, weights })
    }

    /// Table from an explicit list of `(i, j, w)`; every pair must appear once.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut lookup = vec![None; n * n];
        for &(i, j, w) in pairs {
            if i >= n || j >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: i.max(j),
                    n,
                });
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            lookup[i * n + j] = Some(w);
            lookup[j * n + i] = Some(w);
        }
        let mut missing = None;
        let table = Self::from_fn(n, |i, j| {
            lookup[i * n + j].unwrap_or_else(|| {
                missing.get_or_insert((i, j));
                1.0
            })
        })?;
        match missing {
            Some((i, j)) => Err(invalid("pairs", format!("no weight given for ({i},{j})"))),
            None => Ok(table),
        }
    }

    pub fn materialize<W: EdgeWeights + ?Sized>(source: &W) -> Self {
        let n = source.vertex_count();
        let mut weights = vec![f64::NAN; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = source.weight(i, j);
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        Self { n, weights }
    }

    /// Row `i` of the table; entry `i` is NaN.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }
}

impl EdgeWeights for WeightTable {
    fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }
}
