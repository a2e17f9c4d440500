//! Sweep configuration, read from TOML.
//!
//! ```toml
//! n = [20]
//! alpha = [0.25, 0.75]
//! seeds = { base = 1, count = 10 }
//!
//! [experiment]
//! kind = "neighbor_dist"
//! pairs = 1000
//! cutoff = 9
//! ```

use std::path::Path;

use cubeperc::metrics::EXACT_CAP;
use cubeperc::percolation::DEFAULT_MATERIALIZE_CAP;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub base: u64,
    pub count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// Each vertex sent to its lowest good `B`-neighbour.
    GoodMap,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteEndpoints {
    /// Random cube neighbours, both in the giant component.
    Adjacent,
    /// Two uniform vertices of the giant component.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Bidirectional,
    OneSided,
}

fn default_pairs() -> u64 {
    1000
}
fn default_cutoff() -> u32 {
    9
}
fn default_max_length() -> u32 {
    8
}
fn default_budget() -> u64 {
    1_000_000
}
fn default_vertices() -> u64 {
    100
}
fn default_routes() -> u64 {
    100
}
fn default_trials() -> u64 {
    10_000
}
fn default_map() -> MapKind {
    MapKind::GoodMap
}
fn default_endpoints() -> RouteEndpoints {
    RouteEndpoints::Adjacent
}
fn default_direction() -> Direction {
    Direction::Bidirectional
}
fn unlimited_u32() -> u32 {
    u32::MAX
}
fn unlimited_u64() -> u64 {
    u64::MAX
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Percolated distance between adjacent cube vertices of the giant component.
    NeighborDist {
        #[serde(default = "default_pairs")]
        pairs: u64,
        #[serde(default = "default_cutoff")]
        cutoff: u32,
    },
    /// Distortion of a map `H_n -> H_{n,p}`.
    Distortion {
        #[serde(default = "default_map")]
        map: MapKind,
        /// Retrace depth; derived from alpha when absent.
        #[serde(default)]
        depth: Option<u32>,
        /// Sample this many pairs instead of evaluating all of them.
        #[serde(default)]
        sampled_pairs: Option<u64>,
    },
    /// Short open cycles near random vertices.
    CycleCensus {
        #[serde(default = "default_max_length")]
        max_length: u32,
        #[serde(default)]
        radius: u32,
        #[serde(default = "default_budget")]
        budget: u64,
        #[serde(default = "default_vertices")]
        vertices: u64,
    },
    /// Local-model routing between vertices of the giant component.
    Route {
        #[serde(default = "default_routes")]
        routes: u64,
        #[serde(default = "unlimited_u32")]
        radius: u32,
        #[serde(default = "unlimited_u64")]
        queries: u64,
        #[serde(default = "default_endpoints")]
        endpoints: RouteEndpoints,
        #[serde(default = "default_direction")]
        direction: Direction,
    },
    /// Open-path counts over the neighbour-retrace family against their moments.
    Moments {
        l: u32,
        #[serde(default = "default_trials")]
        trials: u64,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::NeighborDist { .. } => "neighbor_dist",
            Experiment::Distortion { .. } => "distortion",
            Experiment::CycleCensus { .. } => "cycle_census",
            Experiment::Route { .. } => "route",
            Experiment::Moments { .. } => "moments",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: Vec<u32>,
    pub alpha: Vec<f64>,
    pub seeds: Seeds,
    pub experiment: Experiment,
    /// Largest dimension any cell may use.
    #[serde(default)]
    pub max_n: Option<u32>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SweepConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Highest dimension the experiment can handle.
    pub fn dimension_cap(&self) -> u32 {
        let kind_cap = match &self.experiment {
            Experiment::NeighborDist { .. } => DEFAULT_MATERIALIZE_CAP,
            Experiment::Distortion { sampled_pairs: None, .. } => EXACT_CAP,
            Experiment::Distortion { sampled_pairs: Some(_), .. } => 20,
            Experiment::CycleCensus { .. } | Experiment::Moments { .. } => 30,
            Experiment::Route { .. } => DEFAULT_MATERIALIZE_CAP,
        };
        self.max_n.map_or(kind_cap, |m| m.min(kind_cap))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        let cap = self.dimension_cap();
        if let Some(&n) = self.n.iter().find(|&&n| n == 0 || n > cap) {
            return invalid(format!("n = {n} outside 1..={cap} for {}", self.experiment.name()));
        }
        if let Some(&a) = self.alpha.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return invalid(format!("alpha = {a} must be finite and non-negative"));
        }
        if self.seeds.count == 0 {
            return invalid("seeds.count must be at least 1".into());
        }
        match &self.experiment {
            Experiment::NeighborDist { pairs, .. } if *pairs == 0 => invalid("pairs must be positive".into()),
            Experiment::Distortion { sampled_pairs: Some(0), .. } => invalid("sampled_pairs must be positive".into()),
            Experiment::Distortion { depth: Some(0), .. } => invalid("depth must be positive".into()),
            Experiment::CycleCensus { max_length, .. } if *max_length > cubeperc::cycles::MAX_CYCLE_LENGTH => {
                invalid(format!("max_length {max_length} exceeds {}", cubeperc::cycles::MAX_CYCLE_LENGTH))
            }
            Experiment::CycleCensus { vertices: 0, .. } => invalid("vertices must be positive".into()),
            Experiment::Route { routes: 0, .. } => invalid("routes must be positive".into()),
            Experiment::Moments { l, trials } => {
                if *trials == 0 {
                    return invalid("trials must be positive".into());
                }
                if let Some(&n) = self.n.iter().find(|&&n| *l >= n) {
                    return invalid(format!("l = {l} needs n > l, got n = {n}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
