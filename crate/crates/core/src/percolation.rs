//! Seeded Bernoulli bond, site and mixed percolation on `H_n`.
//!
//! Every draw is `mix64(seed, index)` compared against a 64-bit fixed-point
//! threshold. Edge `e` uses its linear index; vertex `v` uses
//! `edge_count + v`. A [`PercolationSample`] either stores the resulting bits
//! ([`SampleMode::Materialized`]) or recomputes them per query
//! ([`SampleMode::Lazy`]); both answer every query identically.

use rayon::prelude::*;
use thiserror::Error;

use crate::hypercube::{edge_index, CubeShape, EdgeId, VertexId};
use crate::rng::mix64;

/// Default largest dimension that may be materialized.
pub const DEFAULT_MATERIALIZE_CAP: u32 = 26;

const MAGIC: &[u8; 4] = b"CPRC";
const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PercolationError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("dimension {n} exceeds the materialization cap {cap}")]
    DimensionOverCap { n: u32, cap: u32 },
    #[error("{0} and {1} are not adjacent")]
    NotAdjacent(VertexId, VertexId),
    #[error("vertex {0} is outside the cube")]
    VertexOutOfRange(VertexId),
    #[error("lazy samples cannot be serialized")]
    NotMaterialized,
    #[error("missing CPRC magic")]
    BadMagic,
    #[error("unsupported format version {0}")]
    VersionMismatch(u16),
    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("malformed header: {0}")]
    BadHeader(String),
}

/// A probability quantized to `floor(p * 2^64)`; `u64::MAX` encodes `p = 1`.
///
/// No `f64` strictly below 1 quantizes to `u64::MAX`, so the sentinel is unambiguous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Prob(u64);

impl Prob {
    pub const ZERO: Prob = Prob(0);
    pub const ONE: Prob = Prob(u64::MAX);

    pub fn new(p: f64) -> Result<Prob, PercolationError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PercolationError::BadProbability(p));
        }
        if p == 1.0 {
            return Ok(Prob::ONE);
        }
        // Exact: scaling by a power of two only changes the exponent.
        Ok(Prob((p * 18_446_744_073_709_551_616.0) as u64))
    }

    #[inline]
    pub fn from_fixed(fixed: u64) -> Prob {
        Prob(fixed)
    }

    #[inline]
    pub fn fixed(self) -> u64 {
        self.0
    }

    pub fn value(self) -> f64 {
        if self == Prob::ONE {
            1.0
        } else {
            self.0 as f64 / 18_446_744_073_709_551_616.0
        }
    }

    #[inline]
    pub fn accepts(self, draw: u64) -> bool {
        self.0 == u64::MAX || draw < self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PercModel {
    Bond(Prob),
    /// Vertices kept with probability `p`; every edge between kept vertices is open.
    Site(Prob),
    Mixed { bond: Prob, site: Prob },
}

impl PercModel {
    pub fn bond(p: f64) -> Result<Self, PercolationError> {
        Ok(PercModel::Bond(Prob::new(p)?))
    }

    pub fn site(p: f64) -> Result<Self, PercolationError> {
        Ok(PercModel::Site(Prob::new(p)?))
    }

    pub fn mixed(p_bond: f64, p_site: f64) -> Result<Self, PercolationError> {
        Ok(PercModel::Mixed { bond: Prob::new(p_bond)?, site: Prob::new(p_site)? })
    }

    #[inline]
    pub fn edge_prob(self) -> Prob {
        match self {
            PercModel::Bond(p) => p,
            PercModel::Site(_) => Prob::ONE,
            PercModel::Mixed { bond, .. } => bond,
        }
    }

    #[inline]
    pub fn site_prob(self) -> Option<Prob> {
        match self {
            PercModel::Bond(_) => None,
            PercModel::Site(p) => Some(p),
            PercModel::Mixed { site, .. } => Some(site),
        }
    }

    fn tag(self) -> u8 {
        match self {
            PercModel::Bond(_) => 0,
            PercModel::Site(_) => 1,
            PercModel::Mixed { .. } => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMode {
    Materialized,
    Lazy,
}

/// Fixed-size bitset, bit `i` is bit `i % 64` of word `i / 64`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitSet {
    len: u64,
    words: Vec<u64>,
}

impl BitSet {
    fn from_fn(len: u64, f: impl Fn(u64) -> bool + Sync) -> BitSet {
        let nwords = len.div_ceil(64) as usize;
        let mut words = vec![0u64; nwords];
        words.par_chunks_mut(1 << 12).enumerate().for_each(|(chunk, ws)| {
            for (k, w) in ws.iter_mut().enumerate() {
                let base = ((chunk << 12) + k) as u64 * 64;
                let top = (len - base).min(64);
                let mut word = 0u64;
                for bit in 0..top {
                    if f(base + bit) {
                        word |= 1 << bit;
                    }
                }
                *w = word;
            }
        });
        BitSet { len, words }
    }

    #[inline]
    fn get(&self, i: u64) -> bool {
        (self.words[(i >> 6) as usize] >> (i & 63)) & 1 == 1
    }

    fn count_ones(&self) -> u64 {
        self.words.par_iter().map(|w| w.count_ones() as u64).sum()
    }

    fn byte_len(&self) -> usize {
        self.len.div_ceil(8) as usize
    }

    fn write_bytes(&self, out: &mut Vec<u8>) {
        let nbytes = self.byte_len();
        let start = out.len();
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(start + nbytes);
    }

    fn read_bytes(len: u64, bytes: &[u8]) -> BitSet {
        let words = bytes
            .chunks(8)
            .map(|chunk| {
                let mut buf = [0u8; 8];
                buf[..chunk.len()].copy_from_slice(chunk);
                u64::from_le_bytes(buf)
            })
            .collect();
        BitSet { len, words }
    }

    /// Indices of set bits, ascending.
    fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as u64;
                    w &= w - 1;
                    Some(k as u64 * 64 + bit)
                }
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Storage {
    Materialized { edges: BitSet, vertices: Option<BitSet> },
    Lazy,
}

/// One realization of percolation on `H_n`, viewed as the metric space `H_{n,p}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PercolationSample {
    shape: CubeShape,
    model: PercModel,
    seed: u64,
    storage: Storage,
}

/// Draw a sample, materializing only up to [`DEFAULT_MATERIALIZE_CAP`].
pub fn sample(
    shape: CubeShape,
    model: PercModel,
    seed: u64,
    mode: SampleMode,
) -> Result<PercolationSample, PercolationError> {
    sample_with_cap(shape, model, seed, mode, DEFAULT_MATERIALIZE_CAP)
}

pub fn sample_with_cap(
    shape: CubeShape,
    model: PercModel,
    seed: u64,
    mode: SampleMode,
    cap: u32,
) -> Result<PercolationSample, PercolationError> {
    let lazy = PercolationSample { shape, model, seed, storage: Storage::Lazy };
    match mode {
        SampleMode::Lazy => Ok(lazy),
        SampleMode::Materialized => {
            if shape.dimension() > cap {
                return Err(PercolationError::DimensionOverCap { n: shape.dimension(), cap });
            }
            Ok(lazy.materialize())
        }
    }
}

impl PercolationSample {
    pub fn shape(&self) -> CubeShape {
        self.shape
    }

    pub fn model(&self) -> PercModel {
        self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> SampleMode {
        match self.storage {
            Storage::Materialized { .. } => SampleMode::Materialized,
            Storage::Lazy => SampleMode::Lazy,
        }
    }

    /// Materialized copy of this sample (identical bits).
    pub fn materialize(&self) -> PercolationSample {
        if let Storage::Materialized { .. } = self.storage {
            return self.clone();
        }
        let lazy = self;
        let vertices = self
            .model
            .site_prob()
            .map(|_| BitSet::from_fn(self.shape.vertex_count(), |v| lazy.draw_vertex(v as u32)));
        let shape = self.shape;
        let edges = BitSet::from_fn(shape.edge_count(), |idx| {
            let e = EdgeId::from_index(shape, idx);
            let (u, w) = e.endpoints();
            lazy.draw_edge(idx) && lazy.draw_vertex(u.0) && lazy.draw_vertex(w.0)
        });
        PercolationSample {
            shape,
            model: self.model,
            seed: self.seed,
            storage: Storage::Materialized { edges, vertices },
        }
    }

    #[inline]
    fn draw_edge(&self, index: u64) -> bool {
        self.model.edge_prob().accepts(mix64(self.seed, index))
    }

    #[inline]
    fn draw_vertex(&self, v: u32) -> bool {
        match self.model.site_prob() {
            None => true,
            Some(p) => p.accepts(mix64(self.seed, self.shape.edge_count() + v as u64)),
        }
    }

    /// Whether `v` survived site percolation (always true for bond).
    #[inline]
    pub fn is_present(&self, v: VertexId) -> bool {
        match &self.storage {
            Storage::Materialized { vertices: Some(bits), .. } => bits.get(v.0 as u64),
            Storage::Materialized { vertices: None, .. } => true,
            Storage::Lazy => self.draw_vertex(v.0),
        }
    }

    /// Open state of the edge at `v` in direction `coord`, without validation.
    #[inline]
    pub fn edge_open(&self, v: VertexId, coord: u32) -> bool {
        let idx = edge_index(self.shape.dimension(), v.0, coord);
        match &self.storage {
            Storage::Materialized { edges, .. } => edges.get(idx),
            Storage::Lazy => {
                self.draw_edge(idx) && self.draw_vertex(v.0) && self.draw_vertex(v.0 ^ (1 << coord))
            }
        }
    }

    pub fn is_open_edge(&self, u: VertexId, v: VertexId) -> Result<bool, PercolationError> {
        for w in [u, v] {
            if !self.shape.contains(w) {
                return Err(PercolationError::VertexOutOfRange(w));
            }
        }
        let e = EdgeId::between(u, v).ok_or(PercolationError::NotAdjacent(u, v))?;
        Ok(self.edge_open(u, e.coord()))
    }

    /// Open incident edges at `v`, restricted to coordinates in `filter` when given.
    pub fn open_degree(&self, v: VertexId, filter: Option<u32>) -> u32 {
        let mask = filter.unwrap_or(self.shape.full_mask()) & self.shape.full_mask();
        crate::hypercube::coords_of_mask(mask)
            .into_iter()
            .filter(|&c| self.edge_open(v, c))
            .count() as u32
    }

    /// Open neighbours of `v` in ascending coordinate order.
    pub fn open_neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.shape.dimension()).filter(move |&c| self.edge_open(v, c)).map(move |c| v.flip(c))
    }

    pub fn open_edge_count(&self) -> u64 {
        match &self.storage {
            Storage::Materialized { edges, .. } => edges.count_ones(),
            Storage::Lazy => {
                let shape = self.shape;
                (0..shape.edge_count())
                    .into_par_iter()
                    .filter(|&idx| {
                        let (u, w) = EdgeId::from_index(shape, idx).endpoints();
                        self.draw_edge(idx) && self.draw_vertex(u.0) && self.draw_vertex(w.0)
                    })
                    .count() as u64
            }
        }
    }

    pub fn present_count(&self) -> u64 {
        match (&self.storage, self.model.site_prob()) {
            (_, None) => self.shape.vertex_count(),
            (Storage::Materialized { vertices: Some(bits), .. }, _) => bits.count_ones(),
            _ => (0..self.shape.vertex_count() as u32)
                .into_par_iter()
                .filter(|&v| self.draw_vertex(v))
                .count() as u64,
        }
    }

    /// Every open edge, in ascending edge-index order.
    pub fn for_each_open_edge(&self, mut f: impl FnMut(VertexId, VertexId)) {
        let shape = self.shape;
        match &self.storage {
            Storage::Materialized { edges, .. } => {
                for idx in edges.ones() {
                    let (u, w) = EdgeId::from_index(shape, idx).endpoints();
                    f(u, w);
                }
            }
            Storage::Lazy => {
                for idx in 0..shape.edge_count() {
                    let (u, w) = EdgeId::from_index(shape, idx).endpoints();
                    if self.draw_edge(idx) && self.draw_vertex(u.0) && self.draw_vertex(w.0) {
                        f(u, w);
                    }
                }
            }
        }
    }

    /// Binary `CPRC` encoding; see the crate README for the layout.
    pub fn serialize(&self) -> Result<Vec<u8>, PercolationError> {
        let Storage::Materialized { edges, vertices } = &self.storage else {
            return Err(PercolationError::NotMaterialized);
        };
        let mut out = Vec::with_capacity(32 + edges.byte_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.shape.dimension() as u8);
        out.push(self.model.tag());
        match self.model {
            PercModel::Bond(p) | PercModel::Site(p) => out.extend_from_slice(&p.fixed().to_le_bytes()),
            PercModel::Mixed { bond, site } => {
                out.extend_from_slice(&bond.fixed().to_le_bytes());
                out.extend_from_slice(&site.fixed().to_le_bytes());
            }
        }
        out.extend_from_slice(&self.seed.to_le_bytes());
        edges.write_bytes(&mut out);
        if let Some(vs) = vertices {
            vs.write_bytes(&mut out);
        }
        Ok(out)
    }

    pub fn deserialize(bytes: &[u8]) -> Result<PercolationSample, PercolationError> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(PercolationError::BadMagic);
        }
        let header_short = || PercolationError::BadHeader("truncated header".into());
        let rd_u64 = |at: usize| -> Result<u64, PercolationError> {
            let chunk = bytes.get(at..at + 8).ok_or_else(header_short)?;
            Ok(u64::from_le_bytes(chunk.try_into().unwrap()))
        };
        let version = u16::from_le_bytes(bytes.get(4..6).ok_or_else(header_short)?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(PercolationError::VersionMismatch(version));
        }
        let n = *bytes.get(6).ok_or_else(header_short)? as u32;
        let shape = CubeShape::new(n).map_err(|e| PercolationError::BadHeader(e.to_string()))?;
        let tag = *bytes.get(7).ok_or_else(header_short)?;
        let (model, mut at) = match tag {
            0 => (PercModel::Bond(Prob::from_fixed(rd_u64(8)?)), 16),
            1 => (PercModel::Site(Prob::from_fixed(rd_u64(8)?)), 16),
            2 => (
                PercModel::Mixed { bond: Prob::from_fixed(rd_u64(8)?), site: Prob::from_fixed(rd_u64(16)?) },
                24,
            ),
            t => return Err(PercolationError::BadHeader(format!("unknown model tag {t}"))),
        };
        let seed = rd_u64(at)?;
        at += 8;
        let edge_bytes = shape.edge_count().div_ceil(8) as usize;
        let vertex_bytes = match model.site_prob() {
            Some(_) => shape.vertex_count().div_ceil(8) as usize,
            None => 0,
        };
        let expected = at + edge_bytes + vertex_bytes;
        if bytes.len() != expected {
            return Err(PercolationError::LengthMismatch { expected, found: bytes.len() });
        }
        let edges = BitSet::read_bytes(shape.edge_count(), &bytes[at..at + edge_bytes]);
        let vertices = model
            .site_prob()
            .map(|_| BitSet::read_bytes(shape.vertex_count(), &bytes[at + edge_bytes..]));
        Ok(PercolationSample { shape, model, seed, storage: Storage::Materialized { edges, vertices } })
    }
}
