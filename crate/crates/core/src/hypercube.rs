//! Static structure of the hypercube: vertices, canonical edge indexing,
//! coordinate partitions, doubled-sequence geodesic cycles and the explicit
//! path families used to certify short percolated distances.

use std::fmt;

use thiserror::Error;

/// Largest dimension any structure in this crate accepts.
pub const MAX_DIMENSION: u32 = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CubeError {
    #[error("dimension {0} outside 1..={MAX_DIMENSION}")]
    DimensionOutOfRange(u32),
    #[error("vertex {vertex} is not a vertex of H_{n}")]
    VertexOutOfRange { vertex: u32, n: u32 },
    #[error("coordinate {coord} is not a coordinate of H_{n}")]
    CoordinateOutOfRange { coord: u32, n: u32 },
    #[error("coordinate {0} appears more than once")]
    DuplicateCoordinate(u32),
    #[error("cycle half-length {l} outside 2..={n}")]
    InvalidLength { l: u32, n: u32 },
    #[error("alpha {0} outside (0, 1/2)")]
    AlphaOutOfRange(f64),
    #[error("dimension {n} too small for l = {l} (block size m = {m})")]
    DimensionTooSmall { n: u32, l: u32, m: u32 },
    #[error("invalid path family: {0}")]
    InvalidSpec(String),
}

/// Dimension of `H_n` together with its derived counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CubeShape {
    n: u32,
}

impl CubeShape {
    pub fn new(n: u32) -> Result<Self, CubeError> {
        if n == 0 || n > MAX_DIMENSION {
            return Err(CubeError::DimensionOutOfRange(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn dimension(self) -> u32 {
        self.n
    }

    #[inline]
    pub fn vertex_count(self) -> u64 {
        1u64 << self.n
    }

    #[inline]
    pub fn edge_count(self) -> u64 {
        self.n as u64 * (1u64 << (self.n - 1))
    }

    #[inline]
    pub fn contains(self, v: VertexId) -> bool {
        (v.0 as u64) < self.vertex_count()
    }

    pub fn check_vertex(self, v: VertexId) -> Result<(), CubeError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(CubeError::VertexOutOfRange { vertex: v.0, n: self.n })
        }
    }

    pub fn check_coord(self, coord: u32) -> Result<(), CubeError> {
        if coord < self.n {
            Ok(())
        } else {
            Err(CubeError::CoordinateOutOfRange { coord, n: self.n })
        }
    }

    pub fn vertices(self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count() as u32).map(VertexId)
    }

    /// Mask with one bit per coordinate.
    #[inline]
    pub fn full_mask(self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }
}

/// A vertex of `H_n`; bit `i` is coordinate `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn flip(self, coord: u32) -> VertexId {
        VertexId(self.0 ^ (1 << coord))
    }

    #[inline]
    pub fn bit(self, coord: u32) -> bool {
        (self.0 >> coord) & 1 == 1
    }

    #[inline]
    pub fn hamming(self, other: VertexId) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    /// Coordinates in which `self` and `other` differ, ascending.
    pub fn differing_coords(self, other: VertexId) -> Vec<u32> {
        coords_of_mask(self.0 ^ other.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Coordinates set in `mask`, ascending.
pub fn coords_of_mask(mut mask: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros());
        mask &= mask - 1;
    }
    out
}

pub fn mask_of_coords(coords: &[u32]) -> u32 {
    coords.iter().fold(0, |m, &c| m | (1 << c))
}

/// An edge in canonical form: `base` has bit `coord` cleared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    coord: u32,
    base: VertexId,
}

impl EdgeId {
    /// The edge incident to `v` in direction `coord`.
    #[inline]
    pub fn at(v: VertexId, coord: u32) -> EdgeId {
        EdgeId { coord, base: VertexId(v.0 & !(1 << coord)) }
    }

    /// The edge joining `u` and `v`, if they are adjacent.
    pub fn between(u: VertexId, v: VertexId) -> Option<EdgeId> {
        let diff = u.0 ^ v.0;
        if diff.count_ones() == 1 {
            Some(EdgeId::at(u, diff.trailing_zeros()))
        } else {
            None
        }
    }

    #[inline]
    pub fn coord(self) -> u32 {
        self.coord
    }

    #[inline]
    pub fn base(self) -> VertexId {
        self.base
    }

    #[inline]
    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.base, self.base.flip(self.coord))
    }

    /// Linear index `coord * 2^(n-1) + compress(base)`.
    #[inline]
    pub fn index(self, shape: CubeShape) -> u64 {
        edge_index(shape.n, self.base.0, self.coord)
    }

    #[inline]
    pub fn from_index(shape: CubeShape, index: u64) -> EdgeId {
        let half = shape.n - 1;
        let coord = (index >> half) as u32;
        let compressed = (index & ((1u64 << half) - 1)) as u32;
        let low = compressed & ((1u32 << coord) - 1);
        let high = (compressed >> coord) << (coord + 1);
        EdgeId { coord, base: VertexId(low | high) }
    }
}

/// Linear index of the edge at `v` in direction `coord` (bit `coord` of `v` is ignored).
#[inline]
pub fn edge_index(n: u32, v: u32, coord: u32) -> u64 {
    let low = v & ((1u32 << coord) - 1);
    let high = (v >> (coord + 1)) << coord;
    ((coord as u64) << (n - 1)) | (low | high) as u64
}

pub fn neighbors(shape: CubeShape, v: VertexId) -> Vec<VertexId> {
    (0..shape.n).map(|i| v.flip(i)).collect()
}

/// Disjoint coordinate blocks `A, B, C_1..C_l` of common size `m` plus the
/// leftover spare coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoordinatePartition {
    n: u32,
    l: u32,
    m: u32,
    a: Vec<u32>,
    b: Vec<u32>,
    c: Vec<Vec<u32>>,
    spare: Vec<u32>,
}

/// Smallest integer `l >= 1` with `(1 - 2 alpha) l > 9 alpha`.
pub fn retrace_depth(alpha: f64) -> Result<u32, CubeError> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(CubeError::AlphaOutOfRange(alpha));
    }
    let mut l = 1u32;
    while (1.0 - 2.0 * alpha) * l as f64 <= 9.0 * alpha {
        l += 1;
    }
    Ok(l)
}

/// `(l, m)` for a cube of dimension `n`, without building the partition.
pub fn partition_sizes(n: u32, alpha: f64) -> Result<(u32, u32), CubeError> {
    let l = retrace_depth(alpha)?;
    Ok((l, n.saturating_sub(1) / (l + 2)))
}

pub fn make_partition(shape: CubeShape, alpha: f64) -> Result<CoordinatePartition, CubeError> {
    CoordinatePartition::with_depth(shape, retrace_depth(alpha)?)
}

impl CoordinatePartition {
    /// Ascending layout for a given depth `l`: `A = [0,m)`, `B = [m,2m)`,
    /// `C_k = [(k+1)m, (k+2)m)`, the rest spare.
    pub fn with_depth(shape: CubeShape, l: u32) -> Result<Self, CubeError> {
        let n = shape.dimension();
        let m = (n - 1) / (l + 2);
        if m < 1 {
            return Err(CubeError::DimensionTooSmall { n, l, m });
        }
        let block = |k: u32| (k * m..(k + 1) * m).collect::<Vec<_>>();
        let spare: Vec<u32> = ((l + 2) * m..n).collect();
        debug_assert!(!spare.is_empty());
        Ok(Self {
            n,
            l,
            m,
            a: block(0),
            b: block(1),
            c: (0..l).map(|k| block(k + 2)).collect(),
            spare,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }
    pub fn depth(&self) -> u32 {
        self.l
    }
    pub fn block_size(&self) -> u32 {
        self.m
    }
    pub fn a(&self) -> &[u32] {
        &self.a
    }
    pub fn b(&self) -> &[u32] {
        &self.b
    }
    pub fn c(&self) -> &[Vec<u32>] {
        &self.c
    }
    pub fn spare(&self) -> &[u32] {
        &self.spare
    }
    pub fn a_mask(&self) -> u32 {
        mask_of_coords(&self.a)
    }
    pub fn b_mask(&self) -> u32 {
        mask_of_coords(&self.b)
    }
    pub fn c_mask(&self) -> u32 {
        self.c.iter().fold(0, |m, set| m | mask_of_coords(set))
    }
}

/// Closed walk `v, ..., v` of length `2l` applying `coords` twice.
pub fn geodesic_cycle(
    shape: CubeShape,
    v: VertexId,
    coords: &[u32],
) -> Result<Vec<VertexId>, CubeError> {
    shape.check_vertex(v)?;
    let l = coords.len() as u32;
    let mut seen = 0u32;
    for &c in coords {
        shape.check_coord(c)?;
        if seen & (1 << c) != 0 {
            return Err(CubeError::DuplicateCoordinate(c));
        }
        seen |= 1 << c;
    }
    if l < 2 || l > shape.dimension() {
        return Err(CubeError::InvalidLength { l, n: shape.dimension() });
    }
    Ok(walk(v, coords.iter().chain(coords.iter()).copied()))
}

/// Number of doubled-sequence geodesic cycles of length `2l` through a vertex:
/// ordered `l`-tuples of distinct coordinates, identified with their reversal.
pub fn count_doubled_geodesic_cycles(shape: CubeShape, l: u32) -> Result<u128, CubeError> {
    let n = shape.dimension();
    if l < 2 || l > n {
        return Err(CubeError::InvalidLength { l, n });
    }
    Ok(falling_factorial(n, l) / 2)
}

fn falling_factorial(n: u32, k: u32) -> u128 {
    (0..k).map(|i| (n - i) as u128).product()
}

fn walk(start: VertexId, steps: impl Iterator<Item = u32>) -> Vec<VertexId> {
    let mut out = vec![start];
    let mut cur = start;
    for c in steps {
        cur = cur.flip(c);
        out.push(cur);
    }
    out
}

/// Which explicit path family joins `x` and `y`.
#[derive(Clone, Debug, PartialEq)]
pub enum PathFamilyKind {
    /// `steps` moves in distinct coordinates, the differing coordinate, then
    /// the same moves in reverse order. Requires `x`, `y` adjacent.
    NeighborRetrace { steps: u32 },
    /// The family routed through `C_1 x ... x C_l` and the `index`-th
    /// `B`-coordinate; `e` is a coordinate in which the endpoints differ.
    GoodPair { index: u32, partition: CoordinatePartition, e: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathFamilySpec {
    pub shape: CubeShape,
    pub kind: PathFamilyKind,
    pub x: VertexId,
    pub y: VertexId,
}

impl PathFamilySpec {
    pub fn neighbor_retrace(shape: CubeShape, x: VertexId, y: VertexId, steps: u32) -> Self {
        Self { shape, kind: PathFamilyKind::NeighborRetrace { steps }, x, y }
    }

    pub fn good_pair(
        shape: CubeShape,
        partition: CoordinatePartition,
        index: u32,
        e: u32,
        x: VertexId,
        y: VertexId,
    ) -> Self {
        Self { shape, kind: PathFamilyKind::GoodPair { index, partition, e }, x, y }
    }

    /// Validate and fix the coordinate layout of the family.
    pub fn resolve(&self) -> Result<PathFamily, CubeError> {
        let invalid = |msg: String| Err(CubeError::InvalidSpec(msg));
        let n = self.shape.dimension();
        self.shape.check_vertex(self.x)?;
        self.shape.check_vertex(self.y)?;
        let diff = self.x.0 ^ self.y.0;
        let layout = match &self.kind {
            PathFamilyKind::NeighborRetrace { steps } => {
                if diff.count_ones() != 1 {
                    return invalid(format!("{} and {} are not adjacent", self.x, self.y));
                }
                if *steps > n - 1 {
                    return invalid(format!("{steps} retrace steps exceed the {} free coordinates", n - 1));
                }
                Layout::Retrace {
                    differing: diff.trailing_zeros(),
                    available: coords_of_mask(self.shape.full_mask() & !diff),
                    steps: *steps as usize,
                }
            }
            PathFamilyKind::GoodPair { index, partition, e } => {
                if partition.dimension() != n {
                    return invalid(format!("partition is for H_{}, not H_{n}", partition.dimension()));
                }
                if *index >= partition.block_size() {
                    return invalid(format!("index {index} >= block size {}", partition.block_size()));
                }
                let d = diff.count_ones();
                if d == 0 || d > 7 {
                    return invalid(format!("endpoints differ in {d} coordinates, expected 1..=7"));
                }
                if diff & (1 << e) == 0 {
                    return invalid(format!("endpoints agree in coordinate {e}"));
                }
                // Differing coordinates may not be reused by the family; each one
                // that falls in B or some C_k is swapped for the lowest unused spare.
                let conflicts = coords_of_mask(diff & (partition.b_mask() | partition.c_mask()));
                let spares: Vec<u32> =
                    partition.spare().iter().copied().filter(|&s| diff & (1 << s) == 0).collect();
                if conflicts.len() > spares.len() {
                    return invalid(format!(
                        "{} conflicting coordinates but only {} free spares",
                        conflicts.len(),
                        spares.len()
                    ));
                }
                let substitute = |c: u32| match conflicts.iter().position(|&k| k == c) {
                    Some(j) => spares[j],
                    None => c,
                };
                Layout::GoodPair {
                    c_sets: partition
                        .c()
                        .iter()
                        .map(|set| set.iter().map(|&c| substitute(c)).collect())
                        .collect(),
                    b: substitute(partition.b()[*index as usize]),
                    middle: coords_of_mask(diff),
                }
            }
        };
        Ok(PathFamily { x: self.x, y: self.y, layout })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Layout {
    Retrace { differing: u32, available: Vec<u32>, steps: usize },
    GoodPair { c_sets: Vec<Vec<u32>>, b: u32, middle: Vec<u32> },
}

/// A validated path family; paths are enumerated in lexicographic order of
/// their leading coordinate choices.
#[derive(Clone, Debug, PartialEq)]
pub struct PathFamily {
    x: VertexId,
    y: VertexId,
    layout: Layout,
}

impl PathFamily {
    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.x, self.y)
    }

    pub fn size(&self) -> u128 {
        match &self.layout {
            Layout::Retrace { available, steps, .. } => {
                falling_factorial(available.len() as u32, *steps as u32)
            }
            Layout::GoodPair { c_sets, .. } => c_sets.iter().map(|s| s.len() as u128).product(),
        }
    }

    /// Number of edges on every path of the family.
    pub fn path_length(&self) -> u32 {
        match &self.layout {
            Layout::Retrace { steps, .. } => 2 * *steps as u32 + 1,
            Layout::GoodPair { c_sets, middle, .. } => 2 * c_sets.len() as u32 + 2 + middle.len() as u32,
        }
    }

    /// Depth `l` of the family (leading steps before the turn-around).
    pub fn depth(&self) -> u32 {
        match &self.layout {
            Layout::Retrace { steps, .. } => *steps as u32,
            Layout::GoodPair { c_sets, .. } => c_sets.len() as u32,
        }
    }

    /// Coordinate of the single `B`-step (after spare substitution).
    pub fn pivot_coord(&self) -> Option<u32> {
        match &self.layout {
            Layout::Retrace { .. } => None,
            Layout::GoodPair { b, .. } => Some(*b),
        }
    }

    pub fn paths(&self) -> Paths<'_> {
        Paths { family: self, cursor: Cursor::first(self) }
    }

    fn build(&self, digits: &[usize]) -> Vec<VertexId> {
        match &self.layout {
            Layout::Retrace { differing, available, .. } => {
                let lead: Vec<u32> = digits.iter().map(|&d| available[d]).collect();
                walk(
                    self.x,
                    lead.iter().copied().chain(std::iter::once(*differing)).chain(lead.iter().rev().copied()),
                )
            }
            Layout::GoodPair { c_sets, b, middle } => {
                let lead: Vec<u32> = digits.iter().zip(c_sets).map(|(&d, set)| set[d]).collect();
                walk(
                    self.x,
                    lead.iter()
                        .copied()
                        .chain(std::iter::once(*b))
                        .chain(middle.iter().copied())
                        .chain(std::iter::once(*b))
                        .chain(lead.iter().rev().copied()),
                )
            }
        }
    }
}

/// Validate `spec` and return its family; iterate with [`PathFamily::paths`].
pub fn enumerate_paths(spec: &PathFamilySpec) -> Result<PathFamily, CubeError> {
    spec.resolve()
}

#[derive(Clone, Debug)]
struct Cursor {
    digits: Vec<usize>,
    done: bool,
}

impl Cursor {
    fn first(family: &PathFamily) -> Cursor {
        match &family.layout {
            Layout::Retrace { available, steps, .. } => Cursor {
                digits: (0..*steps).collect(),
                done: *steps > available.len(),
            },
            Layout::GoodPair { c_sets, .. } => Cursor {
                digits: vec![0; c_sets.len()],
                done: c_sets.iter().any(|s| s.is_empty()),
            },
        }
    }

    fn advance(&mut self, family: &PathFamily) {
        match &family.layout {
            Layout::Retrace { available, .. } => self.advance_permutation(available.len()),
            Layout::GoodPair { c_sets, .. } => {
                for k in (0..self.digits.len()).rev() {
                    self.digits[k] += 1;
                    if self.digits[k] < c_sets[k].len() {
                        return;
                    }
                    self.digits[k] = 0;
                }
                self.done = true;
            }
        }
    }

    /// Next k-permutation of `0..len` in lexicographic order.
    fn advance_permutation(&mut self, len: usize) {
        let k = self.digits.len();
        for pos in (0..k).rev() {
            let used = |digits: &[usize], v: usize| digits[..pos].contains(&v);
            let mut next = self.digits[pos] + 1;
            while next < len && used(&self.digits, next) {
                next += 1;
            }
            if next < len {
                self.digits[pos] = next;
                // Fill the tail with the smallest unused values.
                let mut cand = 0;
                for fill in pos + 1..k {
                    while self.digits[..fill].contains(&cand) {
                        cand += 1;
                    }
                    self.digits[fill] = cand;
                    cand += 1;
                }
                return;
            }
        }
        self.done = true;
    }
}

pub struct Paths<'a> {
    family: &'a PathFamily,
    cursor: Cursor,
}

impl Iterator for Paths<'_> {
    type Item = Vec<VertexId>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor.done {
            return None;
        }
        let path = self.family.build(&self.cursor.digits);
        debug_assert_eq!(path.last(), Some(&self.family.y));
        self.cursor.advance(self.family);
        Some(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(n: u32) -> CubeShape {
        CubeShape::new(n).unwrap()
    }

    fn v(bits: &str) -> VertexId {
        VertexId(u32::from_str_radix(bits, 2).unwrap())
    }

    #[test]
    fn shape_counts_and_caps() {
        let s = shape(4);
        assert_eq!(s.vertex_count(), 16);
        assert_eq!(s.edge_count(), 32);
        assert!(CubeShape::new(0).is_err());
        assert!(CubeShape::new(31).is_err());
        assert_eq!(shape(30).edge_count(), 30 << 29);
    }

    #[test]
    fn neighbors_flip_each_coordinate() {
        let mut got = neighbors(shape(3), v("000"));
        got.sort();
        assert_eq!(got, vec![v("001"), v("010"), v("100")]);
        assert_eq!(neighbors(shape(1), v("0")), vec![v("1")]);
        let mut got = neighbors(shape(4), v("1111"));
        got.sort();
        assert_eq!(got, vec![v("0111"), v("1011"), v("1101"), v("1110")]);
    }

    #[test]
    fn edge_index_is_a_bijection() {
        for n in 1..=8 {
            let s = shape(n);
            let mut seen = vec![false; s.edge_count() as usize];
            for u in s.vertices() {
                for c in 0..n {
                    let e = EdgeId::at(u, c);
                    let idx = e.index(s);
                    assert_eq!(EdgeId::from_index(s, idx), e);
                    assert_eq!(edge_index(n, u.0, c), idx);
                    if !u.bit(c) {
                        assert!(!seen[idx as usize]);
                        seen[idx as usize] = true;
                    }
                }
            }
            assert!(seen.iter().all(|&b| b));
        }
    }

    #[test]
    fn partition_depth_and_block_size() {
        let p = make_partition(shape(10), 0.25).unwrap();
        assert_eq!((p.depth(), p.block_size()), (5, 1));
        assert_eq!(partition_sizes(100, 0.3).unwrap(), (7, 11));
        assert_eq!(partition_sizes(10, 0.25).unwrap(), (5, 1));
        let p = make_partition(shape(30), 0.3).unwrap();
        assert_eq!(p.depth(), 7);
        assert_eq!(p.block_size(), 29 / 9);
        assert!(matches!(
            make_partition(shape(4), 0.25),
            Err(CubeError::DimensionTooSmall { l: 5, m: 0, .. })
        ));
        assert!(matches!(make_partition(shape(10), 0.5), Err(CubeError::AlphaOutOfRange(_))));
        assert!(matches!(make_partition(shape(10), 0.0), Err(CubeError::AlphaOutOfRange(_))));
    }

    #[test]
    fn partition_covers_all_coordinates_disjointly() {
        for n in 4..=30 {
            for l in 1..=6 {
                let Ok(p) = CoordinatePartition::with_depth(shape(n), l) else { continue };
                let m = p.block_size();
                let mut all: Vec<u32> = p.a().to_vec();
                all.extend(p.b());
                assert_eq!(p.a().len() as u32, m);
                assert_eq!(p.b().len() as u32, m);
                for set in p.c() {
                    assert_eq!(set.len() as u32, m);
                    all.extend(set);
                }
                assert!(!p.spare().is_empty());
                all.extend(p.spare());
                all.sort();
                assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn geodesic_cycle_examples() {
        assert_eq!(
            geodesic_cycle(shape(2), v("00"), &[0, 1]).unwrap(),
            vec![v("00"), v("01"), v("11"), v("10"), v("00")]
        );
        assert_eq!(
            geodesic_cycle(shape(3), v("000"), &[0, 1, 2]).unwrap(),
            vec![v("000"), v("001"), v("011"), v("111"), v("110"), v("100"), v("000")]
        );
        assert_eq!(
            geodesic_cycle(shape(3), v("000"), &[0, 0]),
            Err(CubeError::DuplicateCoordinate(0))
        );
        assert!(matches!(
            geodesic_cycle(shape(3), v("000"), &[1]),
            Err(CubeError::InvalidLength { .. })
        ));
    }

    #[test]
    fn doubled_cycle_counts() {
        assert_eq!(count_doubled_geodesic_cycles(shape(3), 2).unwrap(), 3);
        assert_eq!(count_doubled_geodesic_cycles(shape(4), 2).unwrap(), 6);
        assert_eq!(count_doubled_geodesic_cycles(shape(3), 3).unwrap(), 3);
        assert!(count_doubled_geodesic_cycles(shape(3), 4).is_err());
    }

    #[test]
    fn neighbor_retrace_examples() {
        let s = shape(10);
        let fam = enumerate_paths(&PathFamilySpec::neighbor_retrace(s, VertexId(0), VertexId(1), 2)).unwrap();
        assert_eq!(fam.size(), 72);
        let paths: Vec<_> = fam.paths().collect();
        assert_eq!(paths.len(), 72);
        assert!(paths.iter().all(|p| p.len() == 6));

        let s = shape(2);
        let fam = enumerate_paths(&PathFamilySpec::neighbor_retrace(s, v("00"), v("01"), 1)).unwrap();
        let paths: Vec<_> = fam.paths().collect();
        assert_eq!(paths, vec![vec![v("00"), v("10"), v("11"), v("01")]]);
    }

    #[test]
    fn neighbor_retrace_rejects_non_adjacent() {
        let s = shape(4);
        let spec = PathFamilySpec::neighbor_retrace(s, VertexId(0), VertexId(3), 1);
        assert!(matches!(spec.resolve(), Err(CubeError::InvalidSpec(_))));
        let spec = PathFamilySpec::neighbor_retrace(s, VertexId(0), VertexId(1), 4);
        assert!(matches!(spec.resolve(), Err(CubeError::InvalidSpec(_))));
    }

    #[test]
    fn good_pair_family_size_and_length() {
        // n = 15, l = 3 gives m = 2: A={0,1} B={2,3} C={4,5},{6,7},{8,9} spare={10..14}.
        let s = shape(15);
        let part = CoordinatePartition::with_depth(s, 3).unwrap();
        assert_eq!(part.block_size(), 2);
        let y = VertexId(mask_of_coords(&[0, 1, 10, 11, 12, 13, 14]));
        let fam = enumerate_paths(&PathFamilySpec::good_pair(s, part, 0, 10, VertexId(0), y)).unwrap();
        assert_eq!(fam.size(), 8);
        assert_eq!(fam.path_length(), 15);
        let paths: Vec<_> = fam.paths().collect();
        assert_eq!(paths.len(), 8);
        assert!(paths.iter().all(|p| p.len() == 16 && p[0] == VertexId(0) && p[15] == y));
    }

    #[test]
    fn good_pair_substitutes_spare_for_conflicts() {
        // n = 11, l = 3, m = 2, one spare (10). Endpoints differ in B-coordinate 2.
        let s = shape(11);
        let part = CoordinatePartition::with_depth(s, 3).unwrap();
        assert_eq!(part.spare(), &[10]);
        let y = VertexId(mask_of_coords(&[0, 2]));
        let fam = PathFamilySpec::good_pair(s, part.clone(), 0, 2, VertexId(0), y).resolve().unwrap();
        assert_eq!(fam.pivot_coord(), Some(10));
        let fam = PathFamilySpec::good_pair(s, part.clone(), 1, 2, VertexId(0), y).resolve().unwrap();
        assert_eq!(fam.pivot_coord(), Some(3));
        // Two conflicts but a single spare.
        let y = VertexId(mask_of_coords(&[2, 4]));
        assert!(PathFamilySpec::good_pair(s, part.clone(), 0, 2, VertexId(0), y).resolve().is_err());
        // e must be a differing coordinate.
        let y = VertexId(mask_of_coords(&[0]));
        assert!(PathFamilySpec::good_pair(s, part, 0, 1, VertexId(0), y).resolve().is_err());
    }

    #[test]
    fn good_pair_c_conflict_uses_spare_in_block() {
        // Coordinate 5 belongs to C_1 = {4, 5}; the family must use {4, 10} instead.
        let s = shape(11);
        let part = CoordinatePartition::with_depth(s, 3).unwrap();
        let y = VertexId(mask_of_coords(&[0, 5]));
        let fam = PathFamilySpec::good_pair(s, part, 0, 5, VertexId(0), y).resolve().unwrap();
        assert_eq!(fam.size(), 8);
        let mut first_steps = std::collections::BTreeSet::new();
        for path in fam.paths() {
            let steps: Vec<u32> = path.windows(2).map(|w| (w[0].0 ^ w[1].0).trailing_zeros()).collect();
            assert!(!steps[..3].contains(&5));
            first_steps.insert(steps[0]);
            let distinct: std::collections::HashSet<_> = path.iter().collect();
            assert_eq!(distinct.len(), path.len());
        }
        assert_eq!(first_steps.into_iter().collect::<Vec<_>>(), vec![4, 10]);
    }

    #[test]
    fn zero_step_retrace_is_the_edge() {
        let fam = PathFamilySpec::neighbor_retrace(shape(3), VertexId(0), VertexId(4), 0).resolve().unwrap();
        let paths: Vec<_> = fam.paths().collect();
        assert_eq!(paths, vec![vec![VertexId(0), VertexId(4)]]);
    }
}
