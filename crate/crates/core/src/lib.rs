//! Bernoulli percolation on the hypercube `H_n` and the tools for measuring
//! how faithfully the percolated graph embeds the cube: seeded samples,
//! distances and components, map distortion, explicit open-path families,
//! cycle extraction and search, and local-model routing.

pub mod cycles;
pub mod embedding;
pub mod hypercube;
pub mod metrics;
pub mod percolation;
pub mod rng;
pub mod routing;

pub use hypercube::{CoordinatePartition, CubeError, CubeShape, EdgeId, PathFamily, PathFamilySpec, VertexId};
pub use metrics::{DistortionMode, DistortionReport, Ratio, VertexMap};
pub use percolation::{sample, PercModel, PercolationError, PercolationSample, Prob, SampleMode};
pub use rng::mix64;
