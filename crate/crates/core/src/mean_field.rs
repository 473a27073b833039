//! Finite-`n` simulation on the implicit complete graph.
//!
//! Shortest paths use the dense `O(n^2)` form of Dijkstra's algorithm: the
//! graph is complete, so every settled vertex relaxes all unsettled ones and
//! a linear scan finds the next vertex. Vertices are `0..n`.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng::{sample_index, EdgeWeightOracle, EdgeWeights, RandomSource, RandomStream};

const NO_PARENT: usize = usize::MAX;

/// Default vertex budget for [`diameter_exact`].
pub const DEFAULT_EXACT_BUDGET: usize = 4000;

/// Incremental single-source exploration; settles one vertex per step in
/// increasing distance order.
struct Explorer<'a, W: ?Sized> {
    weights: &'a W,
    dist: Vec<f64>,
    parent: Vec<usize>,
    hops: Vec<u32>,
    order: Vec<usize>,
    unsettled: Vec<usize>,
    next: usize,
}

impl<'a, W: EdgeWeights + ?Sized> Explorer<'a, W> {
    fn new(weights: &'a W, source: usize) -> Result<Self> {
        let n = weights.vertex_count();
        if source >= n {
            return Err(Error::VertexOutOfRange { vertex: source, n });
        }
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![NO_PARENT; n];
        let mut hops = vec![0u32; n];
        dist[source] = 0.0;
        let mut unsettled = Vec::with_capacity(n - 1);
        let mut next = 0;
        for v in (0..n).filter(|&v| v != source) {
            dist[v] = weights.weight(source, v);
            parent[v] = source;
            hops[v] = 1;
            if dist[v] < dist[*unsettled.get(next).unwrap_or(&v)] {
                next = unsettled.len();
            }
            unsettled.push(v);
        }
        let mut order = Vec::with_capacity(n);
        order.push(source);
        Ok(Self {
            weights,
            dist,
            parent,
            hops,
            order,
            unsettled,
            next,
        })
    }

    /// Distance of the vertex that the next step will settle.
    fn peek(&self) -> Option<(usize, f64)> {
        self.unsettled.get(self.next).map(|&v| (v, self.dist[v]))
    }

    /// Settles the closest unsettled vertex and relaxes the rest.
    fn step(&mut self) -> Option<usize> {
        if self.unsettled.is_empty() {
            return None;
        }
        let u = self.unsettled.swap_remove(self.next);
        self.order.push(u);
        let du = self.dist[u];
        let hu = self.hops[u] + 1;
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (idx, &v) in self.unsettled.iter().enumerate() {
            let candidate = du + self.weights.weight(u, v);
            if candidate < self.dist[v] {
                self.dist[v] = candidate;
                self.parent[v] = u;
                self.hops[v] = hu;
            }
            if self.dist[v] < best_dist {
                best_dist = self.dist[v];
                best = idx;
            }
        }
        self.next = best;
        Some(u)
    }

    fn into_tree(mut self) -> SmallestWeightTree {
        for &v in &self.unsettled {
            self.dist[v] = f64::INFINITY;
            self.parent[v] = NO_PARENT;
            self.hops[v] = 0;
        }
        let source = self.order[0];
        SmallestWeightTree {
            source,
            dist: self.dist,
            parent: self
                .parent
                .into_iter()
                .map(|p| (p != NO_PARENT).then_some(p))
                .collect(),
            hops: self.hops,
            order: self.order,
        }
    }
}

/// Shortest-path tree from one source.
///
/// A tree built by an early-stopped exploration is *partial*: unreached
/// vertices have infinite distance and no parent.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallestWeightTree {
    pub source: usize,
    pub dist: Vec<f64>,
    pub parent: Vec<Option<usize>>,
    pub hops: Vec<u32>,
    /// Vertices in the order they were settled, starting with the source.
    pub order: Vec<usize>,
}

impl SmallestWeightTree {
    pub fn is_complete(&self) -> bool {
        self.order.len() == self.dist.len()
    }

    /// Largest finite distance from the source.
    pub fn max_distance(&self) -> f64 {
        self.order.iter().map(|&v| self.dist[v]).fold(0.0, f64::max)
    }

    /// Vertices on the geodesic from the source to `target`, both ends included.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if target != self.source && self.parent[target].is_none() {
            return None;
        }
        let mut path = vec![target];
        let mut v = target;
        while let Some(p) = self.parent[v] {
            path.push(p);
            v = p;
        }
        path.reverse();
        Some(path)
    }

    /// Checks the parent/distance/hop invariants against `weights`.
    pub fn validate<W: EdgeWeights + ?Sized>(
        &self,
        weights: &W,
    ) -> std::result::Result<(), String> {
        if self.dist[self.source] != 0.0 || self.hops[self.source] != 0 {
            return Err("source must have distance 0 and 0 hops".into());
        }
        for &v in &self.order[1..] {
            let p = self.parent[v].ok_or_else(|| format!("settled vertex {v} has no parent"))?;
            if self.dist[v] != self.dist[p] + weights.weight(p, v) {
                return Err(format!("dist[{v}] != dist[{p}] + w({p},{v})"));
            }
            if self.hops[v] != self.hops[p] + 1 {
                return Err(format!("hops[{v}] != hops[{p}] + 1"));
            }
            if self.dist[v] <= self.dist[p] {
                return Err(format!("distance does not increase from {p} to {v}"));
            }
        }
        Ok(())
    }
}

/// Full shortest-path tree from `source`.
pub fn smallest_weight_tree<W: EdgeWeights + ?Sized>(
    weights: &W,
    source: usize,
) -> Result<SmallestWeightTree> {
    let mut explorer = Explorer::new(weights, source)?;
    while explorer.step().is_some() {}
    Ok(explorer.into_tree())
}

/// Tree from `source`, stopped once every vertex in `targets` is settled.
pub fn partial_tree<W: EdgeWeights + ?Sized>(
    weights: &W,
    source: usize,
    targets: &[usize],
) -> Result<SmallestWeightTree> {
    let n = weights.vertex_count();
    let mut wanted = vec![false; n];
    let mut remaining = 0;
    for &t in targets {
        if t >= n {
            return Err(Error::VertexOutOfRange { vertex: t, n });
        }
        if t != source && !wanted[t] {
            wanted[t] = true;
            remaining += 1;
        }
    }
    let mut explorer = Explorer::new(weights, source)?;
    while remaining > 0 {
        let u = explorer.step().expect("targets are reachable");
        if wanted[u] {
            remaining -= 1;
        }
    }
    Ok(explorer.into_tree())
}

/// Distance and hopcount of the geodesic between two vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geodesic {
    pub distance: f64,
    pub hops: u32,
}

/// Geodesic from `source` to `target`, exploring only until `target` settles.
pub fn geodesic<W: EdgeWeights + ?Sized>(
    weights: &W,
    source: usize,
    target: usize,
) -> Result<Geodesic> {
    let tree = partial_tree(weights, source, &[target])?;
    Ok(Geodesic {
        distance: tree.dist[target],
        hops: tree.hops[target],
    })
}

/// `Flood[source] = max_j d_w(source, j)`.
pub fn flooding<W: EdgeWeights + ?Sized>(weights: &W, source: usize) -> Result<f64> {
    Ok(smallest_weight_tree(weights, source)?.max_distance())
}

/// When to stop growing the smallest-weight graph.
#[derive(Clone, Debug, PartialEq)]
pub enum SwgStop {
    /// Stop once the graph holds this many vertices (source included).
    Size(usize),
    /// Include every vertex within this distance.
    Time(f64),
    /// Stop at the first vertex of the set.
    Target(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwgStopReason {
    SizeReached,
    TimeReached,
    TargetHit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwgEvent {
    pub time: f64,
    pub vertex: usize,
}

/// Arrival times of the smallest-weight graph around a source.
///
/// The source itself (time 0) is not listed; event `k` is the `k`-th closest
/// other vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct SwgTrace {
    pub source: usize,
    pub events: Vec<SwgEvent>,
    pub stop_reason: SwgStopReason,
}

impl SwgTrace {
    pub fn final_time(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }

    /// `|SWG_t|`, the source included.
    pub fn size_at(&self, t: f64) -> usize {
        1 + self.events.partition_point(|e| e.time <= t)
    }
}

/// Grows `SWG_t` from `source` until the stop criterion fires.
pub fn swg_growth<W: EdgeWeights + ?Sized>(
    weights: &W,
    source: usize,
    stop: &SwgStop,
) -> Result<SwgTrace> {
    let n = weights.vertex_count();
    let mut target = vec![false; n];
    match stop {
        SwgStop::Size(k) if *k == 0 || *k > n => {
            return Err(invalid("size", format!("must lie in 1..={n}, got {k}")))
        }
        SwgStop::Time(t) if !(*t >= 0.0) => {
            return Err(invalid("time", format!("must be >= 0, got {t}")))
        }
        SwgStop::Target(set) => {
            if set.is_empty() {
                return Err(Error::EmptyInput("swg target set"));
            }
            for &v in set {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
                if v == source {
                    return Err(invalid("target", "target set contains the source"));
                }
                target[v] = true;
            }
        }
        _ => {}
    }
    let mut explorer = Explorer::new(weights, source)?;
    let mut events = Vec::new();
    let stop_reason = loop {
        match stop {
            SwgStop::Size(k) if events.len() + 1 >= *k => break SwgStopReason::SizeReached,
            SwgStop::Time(t) => match explorer.peek() {
                Some((_, d)) if d <= *t => {}
                _ => break SwgStopReason::TimeReached,
            },
            _ => {}
        }
        let Some(u) = explorer.step() else {
            break SwgStopReason::SizeReached;
        };
        events.push(SwgEvent {
            time: explorer.dist[u],
            vertex: u,
        });
        if target[u] {
            break SwgStopReason::TargetHit;
        }
    };
    Ok(SwgTrace {
        source,
        events,
        stop_reason,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiameterMode {
    Exact,
    Candidate,
}

/// `Diam_w = max_{i,j} d_w(i, j)` with the maximising ordered pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiameterResult {
    pub value: f64,
    /// `(source, target)`: `value` is the distance computed from `pair.0`.
    pub pair: (usize, usize),
    pub mode: DiameterMode,
    pub sources_explored: usize,
}

/// Larger value wins; ties go to the lexicographically smaller pair.
fn better(a: (f64, (usize, usize)), b: (f64, (usize, usize))) -> (f64, (usize, usize)) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

fn farthest(
    tree: &SmallestWeightTree,
    among: impl Iterator<Item = usize>,
) -> (f64, (usize, usize)) {
    among
        .filter(|&v| v != tree.source)
        .map(|v| (tree.dist[v], (tree.source, v)))
        .fold((f64::NEG_INFINITY, (usize::MAX, usize::MAX)), better)
}

/// Exact weighted diameter from all `n` single-source trees.
pub fn diameter_exact<W: EdgeWeights + ?Sized>(
    weights: &W,
    budget: usize,
) -> Result<DiameterResult> {
    let n = weights.vertex_count();
    if n > budget {
        return Err(Error::BudgetExceeded(format!(
            "exact diameter on {n} vertices exceeds the budget of {budget}"
        )));
    }
    let (value, pair) = (0..n)
        .into_par_iter()
        .map(|s| {
            let tree = smallest_weight_tree(weights, s).expect("source in range");
            farthest(&tree, 0..n)
        })
        .reduce(|| (f64::NEG_INFINITY, (usize::MAX, usize::MAX)), better);
    Ok(DiameterResult {
        value,
        pair,
        mode: DiameterMode::Exact,
        sources_explored: n,
    })
}

/// `ceil(4 log n)`.
pub fn default_candidates(n: usize) -> usize {
    (4.0 * (n as f64).ln()).ceil() as usize
}

/// Diameter restricted to the `k_candidates` vertices with the largest
/// nearest-neighbour distance. Never exceeds the exact diameter.
pub fn diameter_candidate<W: EdgeWeights + ?Sized>(
    weights: &W,
    k_candidates: usize,
) -> Result<DiameterResult> {
    let n = weights.vertex_count();
    if k_candidates < 2 || k_candidates > n {
        return Err(invalid(
            "k_candidates",
            format!("must lie in 2..={n}, got {k_candidates}"),
        ));
    }
    let profile = min_edge_profile(weights);
    Ok(diameter_among(weights, &profile.order[..k_candidates]))
}

/// Largest distance between members of `candidates`, using one tree per candidate.
pub fn diameter_among<W: EdgeWeights + ?Sized>(
    weights: &W,
    candidates: &[usize],
) -> DiameterResult {
    let (value, pair) = candidates
        .par_iter()
        .map(|&s| {
            let tree = partial_tree(weights, s, candidates).expect("candidates in range");
            farthest(&tree, candidates.iter().copied())
        })
        .reduce(|| (f64::NEG_INFINITY, (usize::MAX, usize::MAX)), better);
    DiameterResult {
        value,
        pair,
        mode: DiameterMode::Candidate,
        sources_explored: candidates.len(),
    }
}

/// Nearest-neighbour distance `X_(i) = min_j w(i, j)` of every vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct MinEdgeProfile {
    pub x_min: Vec<f64>,
    /// Vertices sorted by `x_min` descending, ties by index ascending.
    pub order: Vec<usize>,
}

impl MinEdgeProfile {
    pub fn from_minima(x_min: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..x_min.len()).collect();
        order.sort_by(|&a, &b| x_min[b].total_cmp(&x_min[a]).then(a.cmp(&b)));
        Self { x_min, order }
    }

    pub fn n(&self) -> usize {
        self.x_min.len()
    }

    /// `N_n(alpha) = #{i : X_(i) >= log n - alpha}`.
    pub fn count_slow(&self, alpha: f64) -> usize {
        let threshold = (self.n() as f64).ln() - alpha;
        self.x_min.iter().filter(|&&x| x >= threshold).count()
    }

    /// The vertices counted by [`MinEdgeProfile::count_slow`], slowest first.
    pub fn slow_vertices(&self, alpha: f64) -> &[usize] {
        &self.order[..self.count_slow(alpha)]
    }
}

pub fn min_edge_profile<W: EdgeWeights + ?Sized>(weights: &W) -> MinEdgeProfile {
    let n = weights.vertex_count();
    let mut x_min = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weights.weight(i, j);
            if w < x_min[i] {
                x_min[i] = w;
            }
            if w < x_min[j] {
                x_min[j] = w;
            }
        }
    }
    MinEdgeProfile::from_minima(x_min)
}

/// Samples `N_n(alpha)` exactly without an edge table.
///
/// A vertex is slow iff none of its edges is shorter than `T = log n - alpha`.
/// Each edge is short independently with probability `1 - exp(-T/n)`, so the
/// count is the number of isolated vertices of the corresponding
/// Erdős–Rényi graph, whose edges are enumerated by geometric skipping.
pub fn sample_slow_count<R: RandomSource + ?Sized>(
    src: &mut R,
    n: usize,
    alpha: f64,
) -> Result<usize> {
    if n < 2 {
        return Err(invalid("n", format!("need n >= 2, got {n}")));
    }
    let threshold = (n as f64).ln() - alpha;
    if threshold <= 0.0 {
        return Ok(n);
    }
    // skip lengths are floor(E / -ln(1-p)) with -ln(1-p) = T/n
    let scale = n as f64 / threshold;
    let mut touched = vec![false; n];
    let (mut row, mut col) = (1usize, -1i64);
    loop {
        let skip = (src.unit_exponential() * scale).floor();
        if skip >= (n * n) as f64 {
            break;
        }
        col += 1 + skip as i64;
        while row < n && col >= row as i64 {
            col -= row as i64;
            row += 1;
        }
        if row >= n {
            break;
        }
        touched[row] = true;
        touched[col as usize] = true;
    }
    Ok(touched.iter().filter(|&&t| !t).count())
}

/// All-pairs distances and hopcounts; row `i` comes from the tree rooted at `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<f64>,
    hops: Vec<u32>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn hops(&self, i: usize, j: usize) -> u32 {
        self.hops[i * self.n + j]
    }

    pub fn from_trees(trees: &[SmallestWeightTree]) -> Result<Self> {
        let n = trees.len();
        let mut dist = vec![0.0; n * n];
        let mut hops = vec![0; n * n];
        for (i, tree) in trees.iter().enumerate() {
            if tree.source != i || tree.dist.len() != n || !tree.is_complete() {
                return Err(invalid(
                    "trees",
                    format!("tree {i} is not a complete tree rooted at {i}"),
                ));
            }
            dist[i * n..(i + 1) * n].copy_from_slice(&tree.dist);
            hops[i * n..(i + 1) * n].copy_from_slice(&tree.hops);
        }
        Ok(Self { n, dist, hops })
    }

    /// Exact diameter read off the matrix (same tie rule as [`diameter_exact`]).
    pub fn diameter(&self) -> DiameterResult {
        let mut best = (f64::NEG_INFINITY, (usize::MAX, usize::MAX));
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    best = better(best, (self.distance(i, j), (i, j)));
                }
            }
        }
        DiameterResult {
            value: best.0,
            pair: best.1,
            mode: DiameterMode::Exact,
            sources_explored: self.n,
        }
    }

    /// Candidate-mode diameter read off the matrix.
    pub fn diameter_among(&self, candidates: &[usize]) -> DiameterResult {
        let mut best = (f64::NEG_INFINITY, (usize::MAX, usize::MAX));
        for &i in candidates {
            for &j in candidates {
                if i != j {
                    best = better(best, (self.distance(i, j), (i, j)));
                }
            }
        }
        DiameterResult {
            value: best.0,
            pair: best.1,
            mode: DiameterMode::Candidate,
            sources_explored: candidates.len(),
        }
    }
}

/// All `n` shortest-path trees, computed in parallel over sources.
pub fn all_pairs<W: EdgeWeights + ?Sized>(weights: &W) -> DistanceMatrix {
    let n = weights.vertex_count();
    let trees: Vec<SmallestWeightTree> = (0..n)
        .into_par_iter()
        .map(|s| smallest_weight_tree(weights, s).expect("source in range"))
        .collect();
    DistanceMatrix::from_trees(&trees).expect("complete trees")
}

/// `R_n(alpha)`: ordered pairs `(i, j)` with `X_(i) <= log n - alpha`,
/// `X_(j) <= log n + alpha/2` and `d_w(i, j) >= 3 log n - alpha/8`.
pub fn count_bad_pairs(
    distances: &DistanceMatrix,
    profile: &MinEdgeProfile,
    alpha: f64,
) -> Result<usize> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let n = profile.n();
    if distances.n() != n {
        return Err(invalid(
            "distances",
            format!("matrix covers {} vertices, profile {n}", distances.n()),
        ));
    }
    let log_n = (n as f64).ln();
    let (first, second, far) = (
        log_n - alpha,
        log_n + alpha / 2.0,
        3.0 * log_n - alpha / 8.0,
    );
    let mut count = 0;
    for i in (0..n).filter(|&i| profile.x_min[i] <= first) {
        for j in (0..n).filter(|&j| j != i && profile.x_min[j] <= second) {
            if distances.distance(i, j) >= far {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HopcountStats {
    /// Hopcount to a uniformly chosen non-source vertex.
    pub typical_hop: u32,
    /// Height of the tree.
    pub max_hop: u32,
}

pub fn hopcount_stats<R: RandomSource + ?Sized>(
    tree: &SmallestWeightTree,
    src: &mut R,
) -> Result<HopcountStats> {
    if !tree.is_complete() {
        return Err(invalid("tree", "hopcount statistics need a complete tree"));
    }
    let n = tree.dist.len();
    let mut target = sample_index(src, n - 1);
    if target >= tree.source {
        target += 1;
    }
    Ok(HopcountStats {
        typical_hop: tree.hops[target],
        max_hop: tree.hops.iter().copied().max().unwrap_or(0),
    })
}

/// Largest hopcount over all geodesics.
pub fn max_hopcount(distances: &DistanceMatrix) -> u32 {
    distances.hops.iter().copied().max().unwrap_or(0)
}

/// Unique root of `x log x - x = 1` (about 3.5911), the growth constant of
/// the largest hopcount.
pub fn alpha_star() -> f64 {
    let f = |x: f64| x * x.ln() - x - 1.0;
    let (mut lo, mut hi) = (std::f64::consts::E, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Recentered distances among the tagged vertices `0..m`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistances {
    pub m: usize,
    /// Upper triangle in row-major order: `(0,1), (0,2), ..., (m-2,m-1)`.
    pub entries: Vec<f64>,
    /// Some tagged vertex lies strictly inside the geodesic of another tagged pair.
    pub interior_hit: bool,
}

impl JointDistances {
    pub fn entry(&self, a: usize, b: usize) -> f64 {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.entries[pair_index(self.m, a, b)]
    }
}

/// Row-major index of `(a, b)`, `a < b`, in an `m`-vertex upper triangle.
pub fn pair_index(m: usize, a: usize, b: usize) -> usize {
    a * (2 * m - a - 1) / 2 + (b - a - 1)
}

/// `d_w(a, b) - log n` for all tagged pairs plus the interior-hit indicator.
pub fn joint_distance_experiment<W: EdgeWeights + ?Sized>(
    weights: &W,
    m: usize,
) -> Result<JointDistances> {
    let n = weights.vertex_count();
    if m < 2 || m > n {
        return Err(invalid("m", format!("must lie in 2..={n}, got {m}")));
    }
    let log_n = (n as f64).ln();
    let tagged: Vec<usize> = (0..m).collect();
    let mut entries = Vec::with_capacity(m * (m - 1) / 2);
    let mut interior_hit = false;
    for a in 0..m - 1 {
        let tree = partial_tree(weights, a, &tagged)?;
        for b in (a + 1)..m {
            entries.push(tree.dist[b] - log_n);
            let path = tree.path_to(b).expect("tagged vertex settled");
            if path[1..path.len() - 1].iter().any(|&v| v < m) {
                interior_hit = true;
            }
        }
    }
    Ok(JointDistances {
        m,
        entries,
        interior_hit,
    })
}

/// Output of [`conditional_slow_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalSlowResult {
    /// `d_w(V_s, V_t) - 3 log n + 2 alpha` for every pair of slow vertices of
    /// every accepted instance, `m (m - 1) / 2` values per instance.
    pub distances: Vec<f64>,
    pub accepted: usize,
    pub attempts: usize,
}

impl ConditionalSlowResult {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.attempts as f64
    }
}

/// Rejection sampler for the slow-vertex distances conditioned on `N_n(alpha) = m`.
///
/// Runs `budget` independent instances (instance `a` uses `stream.derive(a)`).
pub fn conditional_slow_experiment(
    stream: &RandomStream,
    n: usize,
    alpha: f64,
    m: usize,
    budget: usize,
) -> Result<ConditionalSlowResult> {
    if m < 2 || m > n {
        return Err(invalid("m", format!("must lie in 2..={n}, got {m}")));
    }
    let log_n = (n as f64).ln();
    let per_attempt: Vec<Option<Vec<f64>>> = (0..budget)
        .into_par_iter()
        .map(|a| -> Result<Option<Vec<f64>>> {
            let oracle = EdgeWeightOracle::new(n, stream.derive(a as u64))?;
            let profile = min_edge_profile(&oracle);
            let slow = profile.slow_vertices(alpha);
            if slow.len() != m {
                return Ok(None);
            }
            let mut out = Vec::with_capacity(m * (m - 1) / 2);
            for (idx, &s) in slow.iter().enumerate().take(m - 1) {
                let tree = partial_tree(&oracle, s, slow)?;
                for &t in &slow[idx + 1..] {
                    out.push(tree.dist[t] - 3.0 * log_n + 2.0 * alpha);
                }
            }
            Ok(Some(out))
        })
        .collect::<Result<_>>()?;
    let accepted = per_attempt.iter().filter(|o| o.is_some()).count();
    if accepted == 0 {
        return Err(Error::BudgetExceeded(format!(
            "no instance with N_n({alpha}) = {m} in {budget} attempts"
        )));
    }
    Ok(ConditionalSlowResult {
        distances: per_attempt.into_iter().flatten().flatten().collect(),
        accepted,
        attempts: budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::WeightTable;

    fn triangle() -> WeightTable {
        WeightTable::from_pairs(3, &[(0, 1, 1.0), (0, 2, 5.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn hand_checked_triangle() {
        let w = triangle();
        let t = smallest_weight_tree(&w, 0).unwrap();
        assert_eq!(t.dist, vec![0.0, 1.0, 2.0]);
        assert_eq!(t.parent[2], Some(1));
        assert_eq!(t.hops, vec![0, 1, 2]);
        assert!(t.validate(&w).is_ok());

        assert_eq!(flooding(&w, 2).unwrap(), 2.0);
        let d = diameter_exact(&w, DEFAULT_EXACT_BUDGET).unwrap();
        assert_eq!(d.value, 2.0);
        assert_eq!(d.pair, (0, 2));
        assert_eq!(d.mode, DiameterMode::Exact);

        let mut s = crate::rng::ScriptedSource::new().with_uniforms([0.9]);
        let h = hopcount_stats(&t, &mut s).unwrap();
        assert_eq!(
            h,
            HopcountStats {
                typical_hop: 2,
                max_hop: 2
            }
        );
        assert_eq!(max_hopcount(&all_pairs(&w)), 2);
    }

    #[test]
    fn profile_on_triangle() {
        let w = WeightTable::from_pairs(3, &[(0, 1, 1.0), (0, 2, 5.0), (1, 2, 3.0)]).unwrap();
        let p = min_edge_profile(&w);
        assert_eq!(p.x_min, vec![1.0, 1.0, 3.0]);
        assert_eq!(p.order, vec![2, 0, 1]);
    }

    #[test]
    fn count_slow_cases() {
        let n = 10;
        let alpha = 0.5;
        let thr = (n as f64).ln() - alpha;
        let alternating: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { thr + 0.1 } else { thr - 0.1 })
            .collect();
        assert_eq!(
            MinEdgeProfile::from_minima(alternating).count_slow(alpha),
            5
        );
        let low = MinEdgeProfile::from_minima(vec![thr - 1.0; n]);
        assert_eq!(low.count_slow(alpha), 0);
        assert_eq!(low.count_slow(100.0), n);
    }

    #[test]
    fn errors_reported() {
        let w = triangle();
        assert!(smallest_weight_tree(&w, 3).is_err());
        assert!(diameter_exact(&w, 2).is_err());
        assert!(diameter_candidate(&w, 1).is_err());
        assert!(diameter_candidate(&w, 4).is_err());
        assert!(swg_growth(&w, 0, &SwgStop::Target(vec![])).is_err());
        assert!(swg_growth(&w, 0, &SwgStop::Target(vec![0])).is_err());
        assert!(joint_distance_experiment(&w, 4).is_err());
        let dm = all_pairs(&w);
        let p = min_edge_profile(&w);
        assert!(count_bad_pairs(&dm, &p, 0.0).is_err());
        let partial = partial_tree(&w, 0, &[1]).unwrap();
        assert!(hopcount_stats(&partial, &mut RandomStream::new(0)).is_err());
    }

    #[test]
    fn bad_pairs_all_close_is_zero() {
        let w = triangle();
        let dm = all_pairs(&w);
        let p = min_edge_profile(&w);
        assert_eq!(count_bad_pairs(&dm, &p, 1.0).unwrap(), 0);
    }

    #[test]
    fn bad_pairs_single_hit() {
        // log 3 = 1.0986; alpha = 0.8 gives the cutoffs 0.2986, 1.4986 and 3.1958
        let w = WeightTable::from_pairs(3, &[(0, 1, 3.5), (0, 2, 0.1), (1, 2, 3.45)]).unwrap();
        let dm = all_pairs(&w);
        assert_eq!(dm.distance(0, 1), 3.5);
        // the real profile has X_(1) = 3.45, so no second endpoint qualifies
        assert_eq!(count_bad_pairs(&dm, &min_edge_profile(&w), 0.8).unwrap(), 0);
        // only vertex 0 passes the first cutoff and only d(0,1) is long enough
        let forced = MinEdgeProfile::from_minima(vec![0.1, 1.0, 1.0]);
        assert_eq!(count_bad_pairs(&dm, &forced, 0.8).unwrap(), 1);
    }

    #[test]
    fn swg_stops() {
        let w = triangle();
        let all = swg_growth(&w, 0, &SwgStop::Size(3)).unwrap();
        assert_eq!(
            all.events.iter().map(|e| e.vertex).collect::<Vec<_>>(),
            vec![1, 2]
        );
        assert_eq!(all.final_time(), flooding(&w, 0).unwrap());
        let t = swg_growth(&w, 0, &SwgStop::Time(1.5)).unwrap();
        assert_eq!(t.events.len(), 1);
        assert_eq!(t.stop_reason, SwgStopReason::TimeReached);
        let hit = swg_growth(&w, 0, &SwgStop::Target(vec![2])).unwrap();
        assert_eq!(hit.stop_reason, SwgStopReason::TargetHit);
        assert_eq!(hit.final_time(), 2.0);
        assert_eq!(hit.size_at(1.0), 2);
    }

    #[test]
    fn alpha_star_root() {
        let a = alpha_star();
        assert!((a - 3.5911).abs() < 1e-4, "{a}");
        assert!((a * a.ln() - a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_index_layout() {
        let m = 5;
        let mut k = 0;
        for a in 0..m {
            for b in (a + 1)..m {
                assert_eq!(pair_index(m, a, b), k);
                k += 1;
            }
        }
    }

    #[test]
    fn slow_count_extremes() {
        let mut s = RandomStream::new(1);
        assert_eq!(sample_slow_count(&mut s, 50, 10.0).unwrap(), 50);
        assert!(sample_slow_count(&mut s, 1, 0.0).is_err());
    }
}
