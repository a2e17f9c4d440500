//! Graph metrics on percolated samples and the distortion of maps
//! `f: H_n -> H_{n,p}`.
//!
//! For a map `f`, `D_+(f) = max{1, sup d_Y(f(a), f(b)) / d_X(a, b)}` and
//! `D_-(f) = inf max{1, d_Y(f(a), f(b))} / d_X(a, b)`, with `d_X` the Hamming
//! distance and `d_Y` the open-path distance. Because `d_X` is a path metric
//! whose geodesics are cube paths, the supremum in `D_+` is attained on
//! adjacent pairs, so only `n 2^(n-1)` pairs are inspected for it.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::hypercube::{CubeShape, VertexId};
use crate::percolation::PercolationSample;
use crate::rng::CounterRng;

/// Largest dimension accepted by exact distortion evaluation.
pub const EXACT_CAP: u32 = 12;

/// Largest dimension accepted by the brute-force minimal-distortion search.
pub const BRUTE_FORCE_CAP: u32 = 3;

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("source vertex {0} is absent from the sample")]
    SourceAbsent(VertexId),
    #[error("dimension {n} exceeds the exact-evaluation cap {cap}")]
    CapExceeded { n: u32, cap: u32 },
    #[error("map has {found} images, expected {expected}")]
    MapSizeMismatch { expected: usize, found: usize },
    #[error("image {0} is absent from the sample")]
    ImageAbsent(VertexId),
    #[error("brute force needs n <= {BRUTE_FORCE_CAP}, got {0}")]
    TooLarge(u32),
    #[error("sample has no present vertices")]
    Empty,
}

/// Exact shortest-path distances from `source` up to an optional cutoff.
#[derive(Clone, Debug)]
pub struct DistanceField {
    source: VertexId,
    cutoff: Option<u32>,
    dist: Vec<u32>,
}

impl DistanceField {
    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn cutoff(&self) -> Option<u32> {
        self.cutoff
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> Option<u32> {
        match self.dist[v.0 as usize] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    /// Reached vertex with the largest distance (smallest id on ties).
    pub fn farthest(&self) -> (VertexId, u32) {
        let mut best = (self.source, 0);
        for (v, &d) in self.dist.iter().enumerate() {
            if d != UNREACHABLE && d > best.1 {
                best = (VertexId(v as u32), d);
            }
        }
        best
    }

    pub fn raw(&self) -> &[u32] {
        &self.dist
    }
}

/// Breadth-first search over open edges, stopping at depth `cutoff`.
pub fn bfs(
    sample: &PercolationSample,
    source: VertexId,
    cutoff: Option<u32>,
) -> Result<DistanceField, MetricsError> {
    if !sample.shape().contains(source) || !sample.is_present(source) {
        return Err(MetricsError::SourceAbsent(source));
    }
    let mut dist = vec![UNREACHABLE; sample.shape().vertex_count() as usize];
    dist[source.0 as usize] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.0 as usize];
        if cutoff.is_some_and(|c| du >= c) {
            continue;
        }
        for w in sample.open_neighbors(u) {
            if dist[w.0 as usize] == UNREACHABLE {
                dist[w.0 as usize] = du + 1;
                queue.push_back(w);
            }
        }
    }
    Ok(DistanceField { source, cutoff, dist })
}

/// Open-path distance between `s` and `t` by bidirectional breadth-first
/// search; `None` if it exceeds `cutoff` or the two are disconnected.
///
/// Touches only the two balls, so it works on lazy samples of any dimension.
pub fn pair_distance(sample: &PercolationSample, s: VertexId, t: VertexId, cutoff: Option<u32>) -> Option<u32> {
    if !sample.is_present(s) || !sample.is_present(t) {
        return None;
    }
    if s == t {
        return Some(0);
    }
    let limit = cutoff.unwrap_or(u32::MAX);
    let mut seen = [HashMap::from([(s, 0u32)]), HashMap::from([(t, 0u32)])];
    let mut frontier = [vec![s], vec![t]];
    let mut radius = [0u32, 0u32];
    loop {
        if radius[0] + radius[1] >= limit {
            return None;
        }
        // Grow the side with the smaller frontier by one full level.
        let side = if frontier[0].len() <= frontier[1].len() { 0 } else { 1 };
        let other = 1 - side;
        if frontier[side].is_empty() {
            return None;
        }
        let mut next = Vec::new();
        let mut best: Option<u32> = None;
        for &u in &frontier[side] {
            for w in sample.open_neighbors(u) {
                if seen[side].contains_key(&w) {
                    continue;
                }
                seen[side].insert(w, radius[side] + 1);
                if let Some(&dw) = seen[other].get(&w) {
                    let total = radius[side] + 1 + dw;
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
                next.push(w);
            }
        }
        radius[side] += 1;
        if let Some(d) = best {
            return (d <= limit).then_some(d);
        }
        frontier[side] = next;
    }
}

/// Connected components of the open subgraph.
#[derive(Clone, Debug)]
pub struct ComponentLabeling {
    labels: Vec<u32>,
    sizes: Vec<u64>,
    giant: Option<u32>,
}

pub const NO_LABEL: u32 = u32::MAX;

impl ComponentLabeling {
    /// Component label of `v`, `None` if `v` is absent.
    #[inline]
    pub fn label(&self, v: VertexId) -> Option<u32> {
        match self.labels[v.0 as usize] {
            NO_LABEL => None,
            l => Some(l),
        }
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    /// Label of the largest component (smallest label on ties).
    pub fn giant(&self) -> Option<u32> {
        self.giant
    }

    pub fn giant_size(&self) -> u64 {
        self.giant.map_or(0, |g| self.sizes[g as usize])
    }

    /// Size of the largest component other than the giant.
    pub fn second_largest(&self) -> u64 {
        self.sizes
            .iter()
            .enumerate()
            .filter(|&(l, _)| Some(l as u32) != self.giant)
            .map(|(_, &s)| s)
            .max()
            .unwrap_or(0)
    }

    #[inline]
    pub fn in_giant(&self, v: VertexId) -> bool {
        self.giant.is_some() && self.labels[v.0 as usize] == self.giant.unwrap()
    }

    /// Members of component `label`, ascending.
    pub fn members(&self, label: u32) -> Vec<VertexId> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == label)
            .map(|(v, _)| VertexId(v as u32))
            .collect()
    }

    /// Smallest vertex carrying `label`.
    pub fn representative(&self, label: u32) -> Option<VertexId> {
        self.labels.iter().position(|&l| l == label).map(|v| VertexId(v as u32))
    }
}

struct DisjointSet {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(len: usize) -> Self {
        Self { parent: (0..len as u32).collect(), rank: vec![0; len] }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            Ordering::Less => self.parent[ra as usize] = rb,
            Ordering::Greater => self.parent[rb as usize] = ra,
            Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
    }
}

/// Label components by union over open edges. Labels are assigned in order of
/// each component's smallest vertex.
pub fn components(sample: &PercolationSample) -> ComponentLabeling {
    let nv = sample.shape().vertex_count() as usize;
    let mut dsu = DisjointSet::new(nv);
    sample.for_each_open_edge(|u, w| dsu.union(u.0, w.0));
    drop(std::mem::take(&mut dsu.rank));

    let mut root_label = vec![NO_LABEL; nv];
    let mut sizes = Vec::new();
    let mut labels = vec![NO_LABEL; nv];
    for v in 0..nv as u32 {
        if !sample.is_present(VertexId(v)) {
            continue;
        }
        let r = dsu.find(v) as usize;
        if root_label[r] == NO_LABEL {
            root_label[r] = sizes.len() as u32;
            sizes.push(0u64);
        }
        labels[v as usize] = root_label[r];
        sizes[root_label[r] as usize] += 1;
    }
    let giant = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(l, _)| l as u32);
    ComponentLabeling { labels, sizes, giant }
}

/// Double-sweep lower bound on the diameter of component `label`.
pub fn diameter_lower_bound(sample: &PercolationSample, labeling: &ComponentLabeling, label: u32) -> u32 {
    let Some(start) = labeling.representative(label) else { return 0 };
    let first = bfs(sample, start, None).expect("representative is present");
    let (far, _) = first.farthest();
    let second = bfs(sample, far, None).expect("reached vertex is present");
    second.farthest().1
}

/// A total map `H_n -> H_{n,p}`, not necessarily injective.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexMap {
    shape: CubeShape,
    image: Vec<VertexId>,
}

impl VertexMap {
    pub fn identity(shape: CubeShape) -> Self {
        Self { shape, image: shape.vertices().collect() }
    }

    pub fn constant(shape: CubeShape, target: VertexId) -> Self {
        Self { shape, image: vec![target; shape.vertex_count() as usize] }
    }

    pub fn from_fn(shape: CubeShape, f: impl Fn(VertexId) -> VertexId) -> Self {
        Self { shape, image: shape.vertices().map(f).collect() }
    }

    pub fn from_images(shape: CubeShape, image: Vec<VertexId>) -> Result<Self, MetricsError> {
        let expected = shape.vertex_count() as usize;
        if image.len() != expected {
            return Err(MetricsError::MapSizeMismatch { expected, found: image.len() });
        }
        Ok(Self { shape, image })
    }

    pub fn shape(&self) -> CubeShape {
        self.shape
    }

    #[inline]
    pub fn apply(&self, v: VertexId) -> VertexId {
        self.image[v.0 as usize]
    }

    pub fn images(&self) -> &[VertexId] {
        &self.image
    }
}

/// Non-negative rational with small terms; `den == 0` means infinity.
#[derive(Clone, Copy, Debug, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };
    pub const INFINITY: Ratio = Ratio { num: 1, den: 0 };

    pub fn new(num: u64, den: u64) -> Ratio {
        Ratio { num, den }
    }

    pub fn value(self) -> f64 {
        if self.den == 0 {
            f64::INFINITY
        } else {
            self.num as f64 / self.den as f64
        }
    }

    pub fn is_infinite(self) -> bool {
        self.den == 0
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.den == 0, other.den == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            _ => (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128)),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 0 {
            write!(f, "inf")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    /// Computed from the listed number of sampled pairs only: `D_+` is a lower
    /// bound and `D_-` an upper bound, so the distortion is optimistic.
    SampledLowerBound { pairs_evaluated: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistortionMode {
    Exact,
    Sampled { pairs: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistortionReport {
    pub d_plus: Ratio,
    pub d_minus: Ratio,
    /// Adjacent pair attaining `D_+` (or the disconnected pair).
    pub witness_plus: (VertexId, VertexId),
    pub witness_minus: (VertexId, VertexId),
    pub exactness: Exactness,
    /// A pair whose images lie in different components, if any.
    pub disconnected: Option<(VertexId, VertexId)>,
}

impl DistortionReport {
    pub fn is_infinite(&self) -> bool {
        self.disconnected.is_some()
    }

    /// `D = D_+ / D_-` as an exact ratio, `None` when infinite.
    pub fn distortion_ratio(&self) -> Option<Ratio> {
        if self.is_infinite() {
            return None;
        }
        Some(Ratio::new(self.d_plus.num * self.d_minus.den, self.d_plus.den * self.d_minus.num))
    }

    pub fn distortion(&self) -> f64 {
        self.distortion_ratio().map_or(f64::INFINITY, Ratio::value)
    }

    fn infinite(pair: (VertexId, VertexId), exactness: Exactness) -> Self {
        DistortionReport {
            d_plus: Ratio::INFINITY,
            d_minus: Ratio::ONE,
            witness_plus: pair,
            witness_minus: pair,
            exactness,
            disconnected: Some(pair),
        }
    }
}

type Pair = (VertexId, VertexId);

/// Running extremum with the lexicographically first witness.
#[derive(Clone, Copy, Debug)]
struct Extremum {
    value: Ratio,
    pair: (VertexId, VertexId),
}

fn better_max(a: Extremum, b: Extremum) -> Extremum {
    match b.value.cmp(&a.value) {
        Ordering::Greater => b,
        Ordering::Equal if b.pair < a.pair => b,
        _ => a,
    }
}

fn better_min(a: Extremum, b: Extremum) -> Extremum {
    match b.value.cmp(&a.value) {
        Ordering::Less => b,
        Ordering::Equal if b.pair < a.pair => b,
        _ => a,
    }
}

pub fn evaluate_distortion(
    sample: &PercolationSample,
    map: &VertexMap,
    mode: DistortionMode,
) -> Result<DistortionReport, MetricsError> {
    let shape = sample.shape();
    if map.shape() != shape {
        return Err(MetricsError::MapSizeMismatch {
            expected: shape.vertex_count() as usize,
            found: map.images().len(),
        });
    }
    if let Some(&absent) = map.images().iter().find(|&&v| !shape.contains(v) || !sample.is_present(v)) {
        return Err(MetricsError::ImageAbsent(absent));
    }
    match mode {
        DistortionMode::Exact => evaluate_exact(sample, map),
        DistortionMode::Sampled { pairs, seed } => Ok(evaluate_sampled(sample, map, pairs, seed)),
    }
}

fn evaluate_exact(sample: &PercolationSample, map: &VertexMap) -> Result<DistortionReport, MetricsError> {
    let shape = sample.shape();
    let n = shape.dimension();
    if n > EXACT_CAP {
        return Err(MetricsError::CapExceeded { n, cap: EXACT_CAP });
    }
    let nv = shape.vertex_count() as u32;

    // One BFS per distinct image; row k holds distances from image k.
    let mut distinct: Vec<VertexId> = map.images().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let slot: HashMap<VertexId, usize> = distinct.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let rows: Vec<Vec<u32>> = distinct
        .par_iter()
        .map(|&src| bfs(sample, src, None).expect("images are present").raw().to_vec())
        .collect();
    let dist = |a: VertexId, b: VertexId| rows[slot[&map.apply(a)]][map.apply(b).0 as usize];

    let per_source: Vec<(Option<Extremum>, Option<Extremum>, Option<Pair>)> = (0..nv)
        .into_par_iter()
        .map(|a| {
            let a = VertexId(a);
            let mut plus: Option<Extremum> = None;
            let mut minus: Option<Extremum> = None;
            for b in a.0 + 1..nv {
                let b = VertexId(b);
                let dy = dist(a, b);
                if dy == UNREACHABLE {
                    return (None, None, Some((a, b)));
                }
                let dx = a.hamming(b) as u64;
                if dx == 1 {
                    let cand = Extremum { value: Ratio::new(dy as u64, 1), pair: (a, b) };
                    plus = Some(plus.map_or(cand, |p| better_max(p, cand)));
                }
                let cand = Extremum { value: Ratio::new((dy as u64).max(1), dx), pair: (a, b) };
                minus = Some(minus.map_or(cand, |m| better_min(m, cand)));
            }
            (plus, minus, None)
        })
        .collect();

    if let Some(pair) = per_source.iter().filter_map(|r| r.2).min() {
        return Ok(DistortionReport::infinite(pair, Exactness::Exact));
    }
    let plus = per_source.iter().filter_map(|r| r.0).reduce(better_max);
    let minus = per_source.iter().filter_map(|r| r.1).reduce(better_min);
    Ok(assemble(plus, minus, Exactness::Exact, shape))
}

fn assemble(
    plus: Option<Extremum>,
    minus: Option<Extremum>,
    exactness: Exactness,
    shape: CubeShape,
) -> DistortionReport {
    let fallback = (VertexId(0), VertexId(1.min(shape.vertex_count() as u32 - 1)));
    let plus = plus.unwrap_or(Extremum { value: Ratio::ONE, pair: fallback });
    let minus = minus.unwrap_or(Extremum { value: Ratio::ONE, pair: fallback });
    DistortionReport {
        d_plus: plus.value.max(Ratio::ONE),
        d_minus: minus.value,
        witness_plus: plus.pair,
        witness_minus: minus.pair,
        exactness,
        disconnected: None,
    }
}

fn ordered(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn evaluate_sampled(sample: &PercolationSample, map: &VertexMap, pairs: u64, seed: u64) -> DistortionReport {
    let shape = sample.shape();
    let n = shape.dimension() as u64;
    let nv = shape.vertex_count();
    let results: Vec<(Extremum, Option<Extremum>, Option<Pair>)> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = CounterRng::new(crate::rng::mix64(seed, i));
            // One random edge for D_+ and one random pair for D_-.
            let a = VertexId(rng.below(nv) as u32);
            let b = a.flip(rng.below(n) as u32);
            let Some(dy) = pair_distance(sample, map.apply(a), map.apply(b), None) else {
                return (Extremum { value: Ratio::ONE, pair: (a, b) }, None, Some(ordered(a, b)));
            };
            let plus = Extremum { value: Ratio::new(dy as u64, 1), pair: ordered(a, b) };
            let c = VertexId(rng.below(nv) as u32);
            let mut d = VertexId(rng.below(nv) as u32);
            if c == d {
                d = c.flip(rng.below(n) as u32);
            }
            let Some(dy) = pair_distance(sample, map.apply(c), map.apply(d), None) else {
                return (plus, None, Some(ordered(c, d)));
            };
            let minus = Extremum { value: Ratio::new((dy as u64).max(1), c.hamming(d) as u64), pair: ordered(c, d) };
            (plus, Some(minus), None)
        })
        .collect();
    let exactness = Exactness::SampledLowerBound { pairs_evaluated: pairs };
    if let Some(pair) = results.iter().filter_map(|r| r.2).min() {
        return DistortionReport::infinite(pair, exactness);
    }
    let plus = results.iter().map(|r| r.0).reduce(better_max);
    let minus = results.iter().filter_map(|r| r.1).reduce(better_min);
    assemble(plus, minus, exactness, shape)
}

/// Global minimum of `D(f)` over all total maps into the giant component,
/// found by exhaustive enumeration. The returned map is the lexicographically
/// first optimum (ordered by `f(0), f(1), ...`).
pub fn brute_force_min_distortion(
    sample: &PercolationSample,
) -> Result<(VertexMap, DistortionReport), MetricsError> {
    let shape = sample.shape();
    let n = shape.dimension();
    if n > BRUTE_FORCE_CAP {
        return Err(MetricsError::TooLarge(n));
    }
    let labeling = components(sample);
    let giant = labeling.giant().ok_or(MetricsError::Empty)?;
    let targets = labeling.members(giant);
    let nv = shape.vertex_count() as usize;

    let table: Vec<Vec<u64>> = targets
        .iter()
        .map(|&s| {
            let field = bfs(sample, s, None).expect("giant members are present");
            targets.iter().map(|&w| field.get(w).expect("same component") as u64).collect()
        })
        .collect();
    let edges: Vec<(usize, usize)> = (0..nv)
        .flat_map(|a| (0..n).map(move |c| (a, a ^ (1 << c))))
        .filter(|&(a, b)| a < b)
        .collect();
    let pairs: Vec<(usize, usize, u64)> = (0..nv)
        .flat_map(|a| (a + 1..nv).map(move |b| (a, b, (a ^ b).count_ones() as u64)))
        .collect();

    // D = D_+ / D_- with D_+ = max(1, max edge d_Y) and D_- = min max(1,d_Y)/d_X.
    let score = |digits: &[usize]| -> (Ratio, Extremum, Extremum) {
        let mut plus = Extremum { value: Ratio::ONE, pair: (VertexId(0), VertexId(1)) };
        let mut plus_set = false;
        for &(a, b) in &edges {
            let d = table[digits[a]][digits[b]];
            let cand = Extremum { value: Ratio::new(d, 1), pair: (VertexId(a as u32), VertexId(b as u32)) };
            plus = if plus_set { better_max(plus, cand) } else { cand };
            plus_set = true;
        }
        let mut minus: Option<Extremum> = None;
        for &(a, b, dx) in &pairs {
            let d = table[digits[a]][digits[b]].max(1);
            let cand = Extremum { value: Ratio::new(d, dx), pair: (VertexId(a as u32), VertexId(b as u32)) };
            minus = Some(minus.map_or(cand, |m| better_min(m, cand)));
        }
        let minus = minus.expect("at least one pair");
        let d_plus = plus.value.max(Ratio::ONE);
        let dist = Ratio::new(d_plus.num * minus.value.den, d_plus.den * minus.value.num);
        (dist, plus, minus)
    };

    // Depth-first over f(0), f(1), ... in lex order. Assigning more vertices
    // can only raise D_+ and lower D_-, so a prefix whose partial distortion
    // already reaches the best value cannot lead to a strictly better map.
    struct Search<'a> {
        table: &'a [Vec<u64>],
        digits: Vec<usize>,
        best: Option<(Ratio, Vec<usize>)>,
    }
    impl Search<'_> {
        fn descend(&mut self, pos: usize, plus: u64, minus: Ratio) {
            let nv = self.digits.len();
            if pos == nv {
                let d = Ratio::new(plus * minus.den, minus.num);
                if self.best.as_ref().is_none_or(|(b, _)| d < *b) {
                    self.best = Some((d, self.digits.clone()));
                }
                return;
            }
            for k in 0..self.table.len() {
                let row = &self.table[k];
                let mut p = plus;
                let mut m = minus;
                for a in 0..pos {
                    let d = row[self.digits[a]];
                    let dx = (a ^ pos).count_ones() as u64;
                    if dx == 1 {
                        p = p.max(d);
                    }
                    m = m.min(Ratio::new(d.max(1), dx));
                }
                let partial = Ratio::new(p * m.den, m.num);
                if self.best.as_ref().is_some_and(|(b, _)| partial >= *b) {
                    continue;
                }
                self.digits[pos] = k;
                self.descend(pos + 1, p, m);
            }
        }
    }
    let mut search = Search { table: &table, digits: vec![0; nv], best: None };
    search.descend(0, 1, Ratio::INFINITY);
    let best = search.best.expect("at least one map");

    let (_, plus, minus) = score(&best.1);
    let map = VertexMap {
        shape,
        image: best.1.iter().map(|&k| targets[k]).collect(),
    };
    let report = DistortionReport {
        d_plus: plus.value.max(Ratio::ONE),
        d_minus: minus.value,
        witness_plus: plus.pair,
        witness_minus: minus.pair,
        exactness: Exactness::Exact,
        disconnected: None,
    };
    Ok((map, report))
}
