//! Sub-critical machinery: images of geodesic cycles under a map, extraction
//! of a simple cycle from a closed walk by repeated removal of the longest
//! loop, bounded simple-cycle search in samples, and the counting bounds for
//! open cycles through a vertex.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::hypercube::{EdgeId, VertexId};
use crate::metrics::{bfs, VertexMap};
use crate::percolation::PercolationSample;

/// Longest cycle `find_cycles_near` will search for.
pub const MAX_CYCLE_LENGTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("invalid walk: {0}")]
    InvalidWalk(String),
    #[error("images {0} and {1} lie in different components")]
    ImagesDisconnected(VertexId, VertexId),
    #[error("walk collapsed to {survivors} vertices")]
    DegenerateWalk { survivors: usize, trace: Vec<Removal> },
    #[error("max length {0} exceeds {MAX_CYCLE_LENGTH}")]
    LengthTooLarge(u32),
    #[error("parameters outside the sub-critical regime: {0}")]
    OutOfRegime(String),
}

/// A closed walk `v_0, ..., v_L = v_0` with marked anchor positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedWalk {
    vertices: Vec<VertexId>,
    anchors: Vec<usize>,
}

impl ClosedWalk {
    /// `vertices` must start and end at the same vertex with consecutive
    /// vertices adjacent in the cube; anchors index into `0..vertices.len()`.
    pub fn new(vertices: Vec<VertexId>, anchors: Vec<usize>) -> Result<Self, CycleError> {
        if vertices.is_empty() {
            return Err(CycleError::InvalidWalk("empty".into()));
        }
        if vertices.first() != vertices.last() {
            return Err(CycleError::InvalidWalk("not closed".into()));
        }
        if let Some(w) = vertices.windows(2).find(|w| w[0].hamming(w[1]) != 1) {
            return Err(CycleError::InvalidWalk(format!("{} and {} are not adjacent", w[0], w[1])));
        }
        if let Some(&a) = anchors.iter().find(|&&a| a >= vertices.len()) {
            return Err(CycleError::InvalidWalk(format!("anchor {a} out of range")));
        }
        Ok(Self { vertices, anchors })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// Number of steps `L`.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_open_in(&self, sample: &PercolationSample) -> bool {
        self.vertices.windows(2).all(|w| sample.is_open_edge(w[0], w[1]).unwrap_or(false))
    }
}

/// Distinct vertices `c_0, ..., c_{k-1}` with `c_{k-1} c_0` closing the cycle.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimpleCycle {
    vertices: Vec<VertexId>,
}

impl SimpleCycle {
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Rotation and direction chosen to give the lexicographically least sequence.
    pub fn canonical(mut vertices: Vec<VertexId>) -> SimpleCycle {
        let k = vertices.len();
        if k == 0 {
            return SimpleCycle { vertices };
        }
        let start = (0..k).min_by_key(|&i| vertices[i]).unwrap();
        vertices.rotate_left(start);
        if k > 2 && vertices[k - 1] < vertices[1] {
            vertices[1..].reverse();
        }
        SimpleCycle { vertices }
    }

    pub fn is_simple_in(&self, sample: &PercolationSample) -> bool {
        let distinct: HashSet<_> = self.vertices.iter().collect();
        let k = self.vertices.len();
        distinct.len() == k
            && k >= 3
            && (0..k).all(|i| {
                sample.is_open_edge(self.vertices[i], self.vertices[(i + 1) % k]).unwrap_or(false)
            })
    }
}

/// One loop-removal step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub vertex: VertexId,
    /// Start of the removed segment in the walk as it stood before this step.
    pub start: usize,
    pub length: usize,
    /// Anchors carried by the vertices strictly inside the segment.
    pub anchors_removed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extraction {
    pub cycle: SimpleCycle,
    /// Distance from the walk's start vertex to the surviving cycle, measured
    /// in the graph formed by the walk's own edges.
    pub anchor_distance: u32,
    pub removals: Vec<Removal>,
    /// `2 D` for the distortion `D` supplied by the caller.
    pub anchor_budget: f64,
}

impl Extraction {
    pub fn max_anchors_removed(&self) -> usize {
        self.removals.iter().map(|r| r.anchors_removed).max().unwrap_or(0)
    }

    /// Every removal covered at most `2 D` anchors.
    pub fn within_anchor_budget(&self) -> bool {
        self.removals.iter().all(|r| r.anchors_removed as f64 <= self.anchor_budget)
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    vertex: VertexId,
    anchors: usize,
}

/// Reduce a closed walk to a simple cycle.
///
/// While some vertex repeats: for every repeated `u` take the shortest cyclic
/// segment running from one occurrence of `u` to another and containing all
/// of them, then cut the longest such segment (earliest start on ties) and
/// keep a single copy of `u`.
pub fn extract_simple_cycle(walk: &ClosedWalk, distortion: f64) -> Result<Extraction, CycleError> {
    let steps = walk.len();
    let mut entries: Vec<Entry> =
        walk.vertices[..steps.max(1)].iter().map(|&vertex| Entry { vertex, anchors: 0 }).collect();
    for &a in &walk.anchors {
        entries[if steps == 0 { 0 } else { a % steps }].anchors += 1;
    }
    let mut removals = Vec::new();

    loop {
        let len = entries.len();
        let mut occurrences: HashMap<VertexId, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            occurrences.entry(e.vertex).or_default().push(i);
        }
        // (segment length, start, vertex) of the best segment so far.
        let mut best: Option<(usize, usize, VertexId)> = None;
        for (&u, pos) in &occurrences {
            if pos.len() < 2 {
                continue;
            }
            // Drop the largest gap between cyclically consecutive occurrences.
            let mut cut: Option<(usize, usize)> = None; // (gap, start of segment)
            for j in 0..pos.len() {
                let from = pos[j];
                let to = if j + 1 < pos.len() { pos[j + 1] } else { pos[0] + len };
                let gap = to - from;
                let start = to % len;
                if cut.is_none_or(|(g, s)| gap > g || (gap == g && start < s)) {
                    cut = Some((gap, start));
                }
            }
            let (gap, start) = cut.unwrap();
            let seg = len - gap;
            let better = match best {
                None => true,
                Some((bl, bs, _)) => seg > bl || (seg == bl && start < bs),
            };
            if better {
                best = Some((seg, start, u));
            }
        }
        let Some((seg, start, vertex)) = best else { break };

        // Entries start+1 ..= start+seg (cyclic) go; the last of them is a copy
        // of `vertex`, whose anchors move onto the kept copy at `start`.
        let removed_idx: Vec<usize> = (1..=seg).map(|k| (start + k) % len).collect();
        let end = *removed_idx.last().unwrap();
        let anchors_removed: usize = removed_idx[..seg - 1].iter().map(|&i| entries[i].anchors).sum();
        entries[start].anchors += entries[end].anchors;
        removals.push(Removal { vertex, start, length: seg, anchors_removed });
        let drop: HashSet<usize> = removed_idx.into_iter().collect();
        entries = entries.into_iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, e)| e).collect();
    }

    if entries.len() < 3 {
        return Err(CycleError::DegenerateWalk { survivors: entries.len(), trace: removals });
    }
    let survivors: Vec<VertexId> = entries.iter().map(|e| e.vertex).collect();
    let anchor_distance = walk_distance_to(walk, &survivors);
    Ok(Extraction {
        cycle: SimpleCycle { vertices: survivors },
        anchor_distance,
        removals,
        anchor_budget: 2.0 * distortion,
    })
}

/// BFS distance from the walk's start to `targets` over the walk's edges.
fn walk_distance_to(walk: &ClosedWalk, targets: &[VertexId]) -> u32 {
    let targets: HashSet<VertexId> = targets.iter().copied().collect();
    let mut adj: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for w in walk.vertices.windows(2) {
        adj.entry(w[0]).or_default().push(w[1]);
        adj.entry(w[1]).or_default().push(w[0]);
    }
    let start = walk.vertices[0];
    let mut dist = HashMap::from([(start, 0u32)]);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        if targets.contains(&u) {
            return dist[&u];
        }
        for &w in adj.get(&u).into_iter().flatten() {
            if !dist.contains_key(&w) {
                dist.insert(w, dist[&u] + 1);
                queue.push_back(w);
            }
        }
    }
    u32::MAX
}

/// Join the images of consecutive cycle vertices by lexicographically least
/// shortest open paths. `cycle` may repeat its first vertex at the end.
pub fn image_walk(map: &VertexMap, cycle: &[VertexId], sample: &PercolationSample) -> Result<ClosedWalk, CycleError> {
    let mut cyc = cycle;
    if cyc.len() > 1 && cyc.first() == cyc.last() {
        cyc = &cyc[..cyc.len() - 1];
    }
    if cyc.is_empty() {
        return Err(CycleError::InvalidWalk("empty cycle".into()));
    }
    let images: Vec<VertexId> = cyc.iter().map(|&v| map.apply(v)).collect();
    let mut vertices = vec![images[0]];
    let mut anchors = Vec::with_capacity(images.len());
    for i in 0..images.len() {
        anchors.push(vertices.len() - 1);
        let (from, to) = (images[i], images[(i + 1) % images.len()]);
        if from == to {
            continue;
        }
        let field = bfs(sample, to, None).map_err(|_| CycleError::ImagesDisconnected(from, to))?;
        let mut cur = from;
        let mut d = field.get(cur).ok_or(CycleError::ImagesDisconnected(from, to))?;
        while d > 0 {
            cur = sample
                .open_neighbors(cur)
                .filter(|&w| field.get(w) == Some(d - 1))
                .min()
                .expect("a BFS predecessor exists");
            vertices.push(cur);
            d -= 1;
        }
    }
    ClosedWalk::new(vertices, anchors)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleSearch {
    /// Canonical forms, sorted.
    pub cycles: Vec<SimpleCycle>,
    pub expansions: u64,
    pub budget_exhausted: bool,
}

/// Simple open cycles of length at most `max_length` through any vertex
/// within open distance `radius` of `v`, up to rotation and reflection.
pub fn find_cycles_near(
    sample: &PercolationSample,
    v: VertexId,
    max_length: u32,
    radius: u32,
    budget: u64,
) -> Result<CycleSearch, CycleError> {
    if max_length > MAX_CYCLE_LENGTH {
        return Err(CycleError::LengthTooLarge(max_length));
    }
    let mut found = BTreeSet::new();
    let mut search = CycleSearch { cycles: Vec::new(), expansions: 0, budget_exhausted: false };
    if !sample.shape().contains(v) || !sample.is_present(v) || max_length < 3 {
        return Ok(search);
    }
    let ball = ball_around(sample, v, radius);
    let mut dfs = Dfs { sample, max_length, budget, expansions: 0, path: Vec::new(), on_path: HashSet::new() };
    for &s in &ball {
        if !dfs.search_from(s, &mut found) {
            search.budget_exhausted = true;
            break;
        }
    }
    search.expansions = dfs.expansions;
    search.cycles = found.into_iter().collect();
    Ok(search)
}

fn ball_around(sample: &PercolationSample, v: VertexId, radius: u32) -> Vec<VertexId> {
    let mut dist = HashMap::from([(v, 0u32)]);
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du == radius {
            continue;
        }
        for w in sample.open_neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(w) {
                slot.insert(du + 1);
                queue.push_back(w);
            }
        }
    }
    let mut ball: Vec<VertexId> = dist.into_keys().collect();
    ball.sort();
    ball
}

struct Dfs<'a> {
    sample: &'a PercolationSample,
    max_length: u32,
    budget: u64,
    expansions: u64,
    path: Vec<VertexId>,
    on_path: HashSet<VertexId>,
}

impl Dfs<'_> {
    /// Returns false when the expansion budget runs out.
    fn search_from(&mut self, root: VertexId, found: &mut BTreeSet<SimpleCycle>) -> bool {
        self.path.clear();
        self.on_path.clear();
        self.path.push(root);
        self.on_path.insert(root);
        self.extend(root, found)
    }

    fn extend(&mut self, root: VertexId, found: &mut BTreeSet<SimpleCycle>) -> bool {
        if self.expansions >= self.budget {
            return false;
        }
        self.expansions += 1;
        let u = *self.path.last().unwrap();
        let edges = self.path.len() as u32 - 1;
        for w in self.sample.open_neighbors(u).collect::<Vec<_>>() {
            if w == root {
                if edges + 1 >= 3 {
                    found.insert(SimpleCycle::canonical(self.path.clone()));
                }
                continue;
            }
            if self.on_path.contains(&w) {
                continue;
            }
            // The walk back to root needs at least hamming(w, root) more steps.
            if edges + 1 + w.hamming(root) > self.max_length {
                continue;
            }
            self.path.push(w);
            self.on_path.insert(w);
            let ok = self.extend(root, found);
            self.on_path.remove(&w);
            self.path.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

/// `ln (2l - 1)!!`.
pub fn ln_double_factorial_odd(l: u64) -> f64 {
    (1..=l).map(|k| ((2 * k - 1) as f64).ln()).sum()
}

/// `(2l - 1)!!` exactly, for small `l`.
pub fn double_factorial_odd(l: u32) -> u128 {
    (1..=l as u128).map(|k| 2 * k - 1).product()
}

/// `ln((2l - 1)!! n^l)`: pairings of the `2l` steps times a coordinate per pair.
pub fn ln_cycle_count_bound(n: u32, l: u32) -> f64 {
    ln_double_factorial_odd(l as u64) + l as f64 * (n as f64).ln()
}

/// Upper bound `(2l - 1)!! n^l` on simple cycles of length `2l` through a vertex of `H_n`.
pub fn cycle_count_bound(n: u32, l: u32) -> f64 {
    ln_cycle_count_bound(n, l).exp()
}

/// `ln((2l - 1)!! (n^(1 - 2 alpha))^l)`, the bound on the probability that a
/// fixed vertex lies on an open cycle of length `2l`. Requires `2l < n^(2 alpha - 1)`.
pub fn ln_cycle_length_probability_bound(n: f64, alpha: f64, l: u64) -> Result<f64, CycleError> {
    if alpha <= 0.5 {
        return Err(CycleError::OutOfRegime(format!("alpha = {alpha} <= 1/2")));
    }
    if 2.0 * l as f64 >= n.powf(2.0 * alpha - 1.0) {
        return Err(CycleError::OutOfRegime(format!("2l = {} >= n^(2 alpha - 1)", 2 * l)));
    }
    Ok(ln_double_factorial_odd(l) + l as f64 * (1.0 - 2.0 * alpha) * n.ln())
}

/// The bounds for open cycles of length `2l` with `l` in `[n^beta, n^gamma]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleProbabilityBound {
    /// `ln` of `sum_l (2l - 1)!! (n^(1 - 2 alpha))^l` over integer `l` in `[ceil n^beta, floor n^gamma]`.
    pub ln_sum: f64,
    /// `ln` of `n (2 l_0 - 1)!! (n^(1 - 2 alpha))^(l_0)` with `l_0 = ceil n^beta`.
    pub ln_first_term_bound: f64,
    /// `delta + 1 + n^beta (beta + 1 - 2 alpha)`: the closed-form bound is `n` to this power.
    pub exponent: f64,
}

impl CycleProbabilityBound {
    pub fn value(&self, n: f64) -> f64 {
        n.powf(self.exponent)
    }
}

/// Probability that a vertex is within distance `delta` of an open simple
/// cycle of length in `[2 n^beta, 2 n^gamma]`, bounded as `n^exponent`.
pub fn cycle_probability_bound(
    n: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
) -> Result<CycleProbabilityBound, CycleError> {
    let regime = |msg: String| Err(CycleError::OutOfRegime(msg));
    if alpha <= 0.5 {
        return regime(format!("alpha = {alpha} <= 1/2"));
    }
    if beta <= 0.0 || gamma <= 0.0 || delta < 0.0 {
        return regime("beta and gamma must be positive, delta non-negative".into());
    }
    if beta + gamma >= 2.0 * alpha - 1.0 {
        return regime(format!("beta + gamma = {} >= 2 alpha - 1 = {}", beta + gamma, 2.0 * alpha - 1.0));
    }
    if 2.0 * n.powf(gamma) >= n.powf(2.0 * alpha - 1.0) {
        return regime("2 n^gamma >= n^(2 alpha - 1): terms are not decreasing".into());
    }
    let lo = n.powf(beta).ceil() as u64;
    let hi = n.powf(gamma).floor() as u64;
    let ln_n = n.ln();
    let term = |l: u64| ln_double_factorial_odd(l) + l as f64 * (1.0 - 2.0 * alpha) * ln_n;
    let terms: Vec<f64> = (lo..=hi).map(term).collect();
    let ln_sum = match terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max) {
        m if m.is_finite() => m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln(),
        m => m,
    };
    Ok(CycleProbabilityBound {
        ln_sum,
        ln_first_term_bound: ln_n + term(lo),
        exponent: delta + 1.0 + n.powf(beta) * (beta + 1.0 - 2.0 * alpha),
    })
}

/// Edges used by a closed walk, for checking that extraction stays inside it.
pub fn walk_edges(walk: &ClosedWalk) -> HashSet<EdgeId> {
    walk.vertices.windows(2).filter_map(|w| EdgeId::between(w[0], w[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::{geodesic_cycle, CubeShape};
    use crate::percolation::{sample, PercModel, SampleMode};

    fn v(bits: u32) -> VertexId {
        VertexId(bits)
    }

    fn full(n: u32) -> PercolationSample {
        sample(CubeShape::new(n).unwrap(), PercModel::bond(1.0).unwrap(), 0, SampleMode::Materialized).unwrap()
    }

    fn closed(vs: &[u32]) -> ClosedWalk {
        ClosedWalk::new(vs.iter().map(|&b| v(b)).collect(), vec![0]).unwrap()
    }

    #[test]
    fn walk_validation() {
        assert!(ClosedWalk::new(vec![v(0), v(1)], vec![]).is_err());
        assert!(ClosedWalk::new(vec![v(0), v(3), v(0)], vec![]).is_err());
        assert!(ClosedWalk::new(vec![v(0), v(1), v(0)], vec![5]).is_err());
    }

    #[test]
    fn simple_input_is_unchanged() {
        let w = closed(&[0, 1, 3, 2, 0]);
        let ex = extract_simple_cycle(&w, 1.0).unwrap();
        assert_eq!(ex.cycle.vertices(), &[v(0), v(1), v(3), v(2)]);
        assert_eq!(ex.anchor_distance, 0);
        assert!(ex.removals.is_empty());
    }

    #[test]
    fn figure_eight_longer_lobe_survives() {
        // Lobes 0,1,9,8,0 and 0,4,12,14,10,2,0 in H_4 share only vertex 0.
        let lobe = geodesic_cycle(CubeShape::new(4).unwrap(), v(0), &[2, 3, 1]).unwrap();
        assert_eq!(lobe.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 4, 12, 14, 10, 2, 0]);
        let w = closed(&[0, 1, 9, 8, 0, 4, 12, 14, 10, 2, 0]);
        let ex = extract_simple_cycle(&w, 1.0).unwrap();
        assert_eq!(ex.cycle.vertices().iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 4, 12, 14, 10, 2]);
        assert_eq!(ex.removals.len(), 1);
        assert_eq!(ex.removals[0].length, 4);
        assert_eq!(ex.anchor_distance, 0);
    }

    #[test]
    fn figure_eight_equal_lobes_drop_the_first() {
        // Lobes 0,1,3,2,0 and 0,4,12,8,0 share only vertex 0.
        let w = closed(&[0, 1, 3, 2, 0, 4, 12, 8, 0]);
        let ex = extract_simple_cycle(&w, 1.0).unwrap();
        assert_eq!(ex.cycle.vertices().iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 4, 12, 8]);
        assert_eq!(ex.removals[0].start, 0);
    }

    #[test]
    fn doubled_traversal_keeps_one_copy() {
        let w = closed(&[0, 1, 3, 2, 0, 1, 3, 2, 0]);
        let ex = extract_simple_cycle(&w, 1.0).unwrap();
        assert_eq!(ex.cycle.len(), 4);
        let mut got: Vec<u32> = ex.cycle.vertices().iter().map(|x| x.0).collect();
        got.sort();
        assert_eq!(got, vec![0, 1, 2, 3]);
    }

    #[test]
    fn backtracking_walk_is_degenerate() {
        let w = closed(&[0, 1, 3, 1, 0]);
        assert!(matches!(extract_simple_cycle(&w, 1.0), Err(CycleError::DegenerateWalk { .. })));
        let w = closed(&[5]);
        assert!(matches!(
            extract_simple_cycle(&w, 1.0),
            Err(CycleError::DegenerateWalk { survivors: 1, .. })
        ));
    }

    #[test]
    fn anchor_distance_when_start_is_cut() {
        // The start vertex 1 sits on the lobe that gets cut.
        let w = closed(&[1, 3, 2, 0, 4, 12, 14, 10, 2, 0, 1]);
        let ex = extract_simple_cycle(&w, 1.0).unwrap();
        assert_eq!(ex.cycle.vertices().iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 4, 12, 14, 10, 2]);
        assert_eq!(ex.removals[0].start, 8);
        assert_eq!(ex.anchor_distance, 1);
    }

    #[test]
    fn image_walk_examples() {
        let s = full(3);
        let cyc = geodesic_cycle(s.shape(), v(0), &[0, 1, 2]).unwrap();
        let w = image_walk(&VertexMap::identity(s.shape()), &cyc, &s).unwrap();
        assert_eq!(w.vertices(), cyc.as_slice());
        assert_eq!(w.anchors(), &[0, 1, 2, 3, 4, 5]);

        let w = image_walk(&VertexMap::constant(s.shape(), v(3)), &cyc, &s).unwrap();
        assert_eq!(w.vertices(), &[v(3)]);
        assert_eq!(w.len(), 0);

        let shift = VertexMap::from_fn(s.shape(), |x| x.flip(2));
        let w = image_walk(&shift, &cyc, &s).unwrap();
        assert_eq!(w.len(), 6);
    }

    #[test]
    fn image_walk_reports_disconnection() {
        let s = sample(CubeShape::new(3).unwrap(), PercModel::bond(0.0).unwrap(), 0, SampleMode::Lazy).unwrap();
        let cyc = geodesic_cycle(s.shape(), v(0), &[0, 1]).unwrap();
        assert!(matches!(
            image_walk(&VertexMap::identity(s.shape()), &cyc, &s),
            Err(CycleError::ImagesDisconnected(..))
        ));
    }

    #[test]
    fn cycles_near_full_and_empty() {
        let r = find_cycles_near(&full(3), v(0), 4, 0, u64::MAX).unwrap();
        assert_eq!(r.cycles.len(), 3);
        assert!(r.cycles.iter().all(|c| c.len() == 4 && c.vertices()[0] == v(0)));
        let empty = sample(CubeShape::new(4).unwrap(), PercModel::bond(0.0).unwrap(), 0, SampleMode::Lazy).unwrap();
        assert!(find_cycles_near(&empty, v(0), 8, 2, u64::MAX).unwrap().cycles.is_empty());
        let r = find_cycles_near(&full(4), v(0), 8, 1, 10);
        assert!(r.unwrap().budget_exhausted);
        assert!(find_cycles_near(&full(4), v(0), 65, 0, 10).is_err());
    }

    #[test]
    fn canonical_form_ignores_rotation_and_direction() {
        let a = SimpleCycle::canonical(vec![v(3), v(2), v(0), v(1)]);
        let b = SimpleCycle::canonical(vec![v(1), v(0), v(2), v(3)]);
        assert_eq!(a, b);
        assert_eq!(a.vertices(), &[v(0), v(1), v(3), v(2)]);
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(double_factorial_odd(1), 1);
        assert_eq!(double_factorial_odd(2), 3);
        assert_eq!(double_factorial_odd(3), 15);
        assert!((cycle_count_bound(3, 2) - 27.0).abs() < 1e-9);

        let b = cycle_probability_bound(100.0, 0.75, 0.2, 0.25, 0.0).unwrap();
        let expected = 1.0 + 100f64.powf(0.2) * (0.2 + 1.0 - 1.5);
        assert!((b.exponent - expected).abs() < 1e-12);
        assert!((b.exponent - 0.246).abs() < 1e-3);
        assert!((b.value(100.0) - 100f64.powf(expected)).abs() < 1e-9);
        assert!(b.ln_sum <= b.ln_first_term_bound);

        assert!(cycle_probability_bound(100.0, 0.4, 0.1, 0.1, 0.0).is_err());
        assert!(cycle_probability_bound(100.0, 0.75, 0.3, 0.25, 0.0).is_err());
        assert!(ln_cycle_length_probability_bound(100.0, 0.75, 5).is_err());
        assert!(ln_cycle_length_probability_bound(100.0, 0.75, 4).is_ok());
    }
}
