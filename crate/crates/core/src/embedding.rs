//! Super-critical machinery: good vertices, the map sending each vertex to a
//! good `B`-neighbour, open-path search over the explicit path families,
//! first and second moments of open-path counts, and percolated distances
//! between cube neighbours.

use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::hypercube::{
    coords_of_mask, CoordinatePartition, CubeError, EdgeId, PathFamily, PathFamilyKind, PathFamilySpec,
    VertexId,
};
use crate::metrics::{pair_distance, ComponentLabeling, VertexMap};
use crate::percolation::PercolationSample;
use crate::rng::CounterRng;

/// Largest family for which the second moment is computed by pairwise census.
pub const CENSUS_CAP: u128 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error(transparent)]
    Family(#[from] CubeError),
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("vertex {0} is not good")]
    NotGood(VertexId),
    #[error("endpoints coincide")]
    SameEndpoints,
    #[error("only {found} usable witnesses at {vertex}, need {needed}")]
    TooFewWitnesses { vertex: VertexId, found: usize, needed: usize },
}

/// Proof that a vertex reaches at least `2m` vertices by open two-step paths
/// inside the `A` coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodnessCertificate {
    pub vertex: VertexId,
    /// Distinct endpoints, ascending.
    pub witnesses: Vec<VertexId>,
    /// For each witness, the intermediate vertex of one open two-step path.
    pub via: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Goodness {
    Good(GoodnessCertificate),
    NotGood { reached: usize, needed: usize },
}

impl Goodness {
    pub fn is_good(&self) -> bool {
        matches!(self, Goodness::Good(_))
    }
}

pub fn is_good(sample: &PercolationSample, v: VertexId, partition: &CoordinatePartition) -> Goodness {
    let needed = 2 * partition.block_size() as usize;
    if !sample.is_present(v) {
        return Goodness::NotGood { reached: 0, needed };
    }
    let a = partition.a();
    // (endpoint, intermediate) for every open two-step path.
    let mut found: Vec<(VertexId, VertexId)> = Vec::new();
    for &first in a {
        if !sample.edge_open(v, first) {
            continue;
        }
        let mid = v.flip(first);
        for &second in a {
            if second != first && sample.edge_open(mid, second) {
                found.push((mid.flip(second), mid));
            }
        }
    }
    found.sort();
    found.dedup_by_key(|(w, _)| *w);
    if found.len() >= needed {
        let (witnesses, via) = found.into_iter().unzip();
        Goodness::Good(GoodnessCertificate { vertex: v, witnesses, via })
    } else {
        Goodness::NotGood { reached: found.len(), needed }
    }
}

/// Vertices left without a good `B`-neighbour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureReport {
    pub bad_vertices: Vec<VertexId>,
    pub good_vertices: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GoodMapOutcome {
    Built(VertexMap),
    Failed(FailureReport),
}

/// Send every `x` to `x ^ e_b` for the lowest `b` in `B` whose image is good.
pub fn build_good_map(sample: &PercolationSample, partition: &CoordinatePartition) -> GoodMapOutcome {
    let shape = sample.shape();
    let good: Vec<bool> = (0..shape.vertex_count() as u32)
        .into_par_iter()
        .map(|v| is_good(sample, VertexId(v), partition).is_good())
        .collect();
    let b = partition.b();
    let choice: Vec<Option<VertexId>> = (0..shape.vertex_count() as u32)
        .into_par_iter()
        .map(|x| {
            let x = VertexId(x);
            b.iter().map(|&c| x.flip(c)).find(|u| good[u.0 as usize])
        })
        .collect();
    let bad: Vec<VertexId> = choice
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(v, _)| VertexId(v as u32))
        .collect();
    if bad.is_empty() {
        GoodMapOutcome::Built(VertexMap::from_fn(shape, |x| choice[x.0 as usize].unwrap()))
    } else {
        GoodMapOutcome::Failed(FailureReport {
            bad_vertices: bad,
            good_vertices: good.iter().filter(|&&g| g).count() as u64,
        })
    }
}

fn path_is_open(sample: &PercolationSample, path: &[VertexId]) -> bool {
    path.windows(2).all(|w| {
        let e = EdgeId::between(w[0], w[1]).expect("family paths are cube paths");
        sample.edge_open(w[0], e.coord())
    })
}

/// First fully open path of the family in enumeration order.
pub fn find_open_path(
    sample: &PercolationSample,
    spec: &PathFamilySpec,
) -> Result<Option<Vec<VertexId>>, EmbeddingError> {
    let family = spec.resolve()?;
    Ok(family.paths().find(|p| path_is_open(sample, p)))
}

/// Number of fully open paths in `family`.
pub fn count_open_paths(sample: &PercolationSample, family: &PathFamily) -> u64 {
    family.paths().filter(|p| path_is_open(sample, p)).count() as u64
}

/// One path family between witnesses plus the two-step links from the
/// centres `fx` and `fy` to those witnesses.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodPairRoute {
    pub spec: PathFamilySpec,
    /// `[fx, intermediate]`; the family starts one step further on.
    pub head: [VertexId; 2],
    /// `[intermediate, fy]`; the family ends one step before.
    pub tail: [VertexId; 2],
}

/// The `m` families joining `f(x)` to `f(y)` through good witnesses:
/// family `i` runs from the `i`-th witness of `fx` to the `i`-th witness of
/// `fy`, both chosen among witnesses agreeing with their centre in the
/// lowest coordinate `e` where `fx` and `fy` differ.
pub fn good_pair_specs(
    sample: &PercolationSample,
    partition: &CoordinatePartition,
    fx: VertexId,
    fy: VertexId,
) -> Result<Vec<GoodPairRoute>, EmbeddingError> {
    if fx == fy {
        return Err(EmbeddingError::SameEndpoints);
    }
    let cert = |v: VertexId| match is_good(sample, v, partition) {
        Goodness::Good(c) => Ok(c),
        Goodness::NotGood { .. } => Err(EmbeddingError::NotGood(v)),
    };
    let (cx, cy) = (cert(fx)?, cert(fy)?);
    let e = (fx.0 ^ fy.0).trailing_zeros();
    let m = partition.block_size() as usize;
    let usable = |c: &GoodnessCertificate| -> Result<Vec<(VertexId, VertexId)>, EmbeddingError> {
        let picked: Vec<_> = c
            .witnesses
            .iter()
            .zip(&c.via)
            .filter(|(w, _)| w.bit(e) == c.vertex.bit(e))
            .map(|(&w, &v)| (w, v))
            .take(m)
            .collect();
        if picked.len() < m {
            return Err(EmbeddingError::TooFewWitnesses { vertex: c.vertex, found: picked.len(), needed: m });
        }
        Ok(picked)
    };
    let (wx, wy) = (usable(&cx)?, usable(&cy)?);
    Ok((0..m)
        .map(|i| {
            let spec =
                PathFamilySpec::good_pair(sample.shape(), partition.clone(), i as u32, e, wx[i].0, wy[i].0);
            GoodPairRoute { spec, head: [fx, wx[i].1], tail: [wy[i].1, fy] }
        })
        .collect())
}

/// An open path `fx -> x_i -> ... -> y_i -> fy` through the first family
/// (in index order) that has an open member.
pub fn connect_good_pair(
    sample: &PercolationSample,
    partition: &CoordinatePartition,
    fx: VertexId,
    fy: VertexId,
) -> Result<Option<Vec<VertexId>>, EmbeddingError> {
    for GoodPairRoute { spec, head, tail } in good_pair_specs(sample, partition, fx, fy)? {
        let family = match spec.resolve() {
            Ok(f) => f,
            // Not enough spare coordinates for this endpoint pair.
            Err(CubeError::InvalidSpec(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        if let Some(mid) = family.paths().find(|p| path_is_open(sample, p)) {
            let mut path = head.to_vec();
            path.extend(mid);
            path.extend(tail);
            return Ok(Some(path));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SecondMoment {
    /// `E X^2` from the census of shared-edge counts over all ordered pairs;
    /// `census[k]` is the number of ordered pairs sharing `k` edges.
    Exact { value: f64, census: Vec<u64> },
    /// Family above [`CENSUS_CAP`]: `(E X)^2 * ratio_bound`.
    Bound(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentEstimate {
    pub family_size: u128,
    pub path_length: u32,
    pub mean: f64,
    pub second_moment: SecondMoment,
    /// Upper bound on `E X^2 / (E X)^2` in the closed form used by the
    /// second-moment argument.
    pub ratio_bound: f64,
}

impl MomentEstimate {
    pub fn second_moment_exact(&self) -> Option<f64> {
        match self.second_moment {
            SecondMoment::Exact { value, .. } => Some(value),
            SecondMoment::Bound(_) => None,
        }
    }

    pub fn second_moment_value(&self) -> f64 {
        match &self.second_moment {
            SecondMoment::Exact { value, .. } => *value,
            SecondMoment::Bound(v) => *v,
        }
    }

    pub fn variance(&self) -> f64 {
        (self.second_moment_value() - self.mean * self.mean).max(0.0)
    }
}

/// First moment exactly, second moment by shared-edge census when the family
/// has at most [`CENSUS_CAP`] paths.
pub fn analytic_moments(spec: &PathFamilySpec, p: f64) -> Result<MomentEstimate, EmbeddingError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EmbeddingError::BadProbability(p));
    }
    let family = spec.resolve()?;
    let size = family.size();
    let len = family.path_length();
    let mean = size as f64 * p.powi(len as i32);
    let n = spec.shape.dimension() as f64;
    let ratio_bound = match &spec.kind {
        // 1 + n^(2 alpha - 1) with p = n^(-alpha).
        PathFamilyKind::NeighborRetrace { .. } => 1.0 + 1.0 / (n * p * p),
        PathFamilyKind::GoodPair { partition, .. } => {
            let m = partition.block_size() as f64;
            let l = family.depth() as i32;
            (0..l).map(|k| (p * p * m).powi(-k)).sum::<f64>() + m.powi(-l) * p.powi(-(len as i32))
        }
    };
    let second_moment = if p == 0.0 {
        SecondMoment::Exact { value: 0.0, census: overlap_census(&family, size) }
    } else if size <= CENSUS_CAP {
        let census = overlap_census(&family, size);
        let value = census
            .iter()
            .enumerate()
            .map(|(k, &count)| count as f64 * p.powi(2 * len as i32 - k as i32))
            .sum();
        SecondMoment::Exact { value, census }
    } else {
        SecondMoment::Bound(mean * mean * ratio_bound)
    };
    Ok(MomentEstimate { family_size: size, path_length: len, mean, second_moment, ratio_bound })
}

fn overlap_census(family: &PathFamily, size: u128) -> Vec<u64> {
    let len = family.path_length() as usize;
    if size > CENSUS_CAP {
        return Vec::new();
    }
    let edge_sets: Vec<Vec<(u32, u32)>> = family
        .paths()
        .map(|p| {
            let mut es: Vec<(u32, u32)> = p
                .windows(2)
                .map(|w| {
                    let e = EdgeId::between(w[0], w[1]).unwrap();
                    (e.coord(), e.base().0)
                })
                .collect();
            es.sort_unstable();
            es
        })
        .collect();
    edge_sets
        .par_iter()
        .map(|a| {
            let mut local = vec![0u64; len + 1];
            for b in &edge_sets {
                local[shared(a, b)] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; len + 1],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(s, t)| *s += t);
                x
            },
        )
}

fn shared(a: &[(u32, u32)], b: &[(u32, u32)]) -> usize {
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                k += 1;
                i += 1;
                j += 1;
            }
        }
    }
    k
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSelection {
    /// Uniform random adjacent pairs (with replacement).
    Sampled,
    /// Fewer eligible pairs than requested; every eligible pair measured once.
    Exhaustive,
}

/// Percolated distances between cube neighbours inside the giant component.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborDistanceStats {
    pub cutoff: u32,
    /// `histogram[d]` = pairs at distance `d`, for `d <= cutoff`.
    pub histogram: Vec<u64>,
    pub overflow: u64,
    pub pairs: u64,
    pub eligible_pairs: u64,
    pub selection: PairSelection,
}

impl NeighborDistanceStats {
    /// Lower median; `cutoff + 1` stands for "beyond the cutoff".
    pub fn median(&self) -> Option<u32> {
        if self.pairs == 0 {
            return None;
        }
        let rank = (self.pairs - 1) / 2;
        let mut acc = 0;
        for (d, &c) in self.histogram.iter().enumerate() {
            acc += c;
            if acc > rank {
                return Some(d as u32);
            }
        }
        Some(self.cutoff + 1)
    }

    pub fn frac_le_cutoff(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            (self.pairs - self.overflow) as f64 / self.pairs as f64
        }
    }

    pub fn overflow_frac(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.overflow as f64 / self.pairs as f64
        }
    }
}

pub fn neighbor_distance_stats(
    sample: &PercolationSample,
    labeling: &ComponentLabeling,
    num_pairs: u64,
    cutoff: u32,
    seed: u64,
) -> NeighborDistanceStats {
    let shape = sample.shape();
    let n = shape.dimension();
    let nv = shape.vertex_count();
    let eligible: u64 = (0..nv as u32)
        .into_par_iter()
        .filter(|&v| labeling.in_giant(VertexId(v)))
        .map(|v| (0..n).filter(|&c| v & (1 << c) == 0 && labeling.in_giant(VertexId(v ^ (1 << c)))).count() as u64)
        .sum();

    let enumerate_all = || -> Vec<(VertexId, VertexId)> {
        (0..nv as u32)
            .filter(|&v| labeling.in_giant(VertexId(v)))
            .flat_map(|v| {
                (0..n)
                    .filter(move |&c| v & (1 << c) == 0)
                    .map(move |c| (VertexId(v), VertexId(v ^ (1 << c))))
            })
            .filter(|&(_, w)| labeling.in_giant(w))
            .collect()
    };

    let mut rng = CounterRng::new(seed);
    let (pairs, selection) = if eligible < num_pairs {
        (enumerate_all(), PairSelection::Exhaustive)
    } else if eligible.saturating_mul(64) < shape.edge_count() {
        // Rejection would be slow; draw from the explicit list instead.
        let all = enumerate_all();
        let picked = (0..num_pairs).map(|_| all[rng.below(all.len() as u64) as usize]).collect();
        (picked, PairSelection::Sampled)
    } else {
        let mut picked = Vec::with_capacity(num_pairs as usize);
        while (picked.len() as u64) < num_pairs {
            let v = VertexId(rng.below(nv) as u32);
            let w = v.flip(rng.below(n as u64) as u32);
            if labeling.in_giant(v) && labeling.in_giant(w) {
                picked.push(if v < w { (v, w) } else { (w, v) });
            }
        }
        (picked, PairSelection::Sampled)
    };

    let distances: Vec<Option<u32>> =
        pairs.par_iter().map(|&(u, w)| pair_distance(sample, u, w, Some(cutoff))).collect();
    let mut histogram = vec![0u64; cutoff as usize + 1];
    let mut overflow = 0;
    for d in distances {
        match d {
            Some(d) => histogram[d as usize] += 1,
            None => overflow += 1,
        }
    }
    NeighborDistanceStats {
        cutoff,
        histogram,
        overflow,
        pairs: pairs.len() as u64,
        eligible_pairs: eligible,
        selection,
    }
}

/// Vertices of a path as a set, for disjointness checks.
pub fn vertex_set(path: &[VertexId]) -> HashSet<VertexId> {
    path.iter().copied().collect()
}

/// Coordinates flipped along a path, in order.
pub fn step_coords(path: &[VertexId]) -> Vec<u32> {
    path.windows(2).flat_map(|w| coords_of_mask(w[0].0 ^ w[1].0)).collect()
}
