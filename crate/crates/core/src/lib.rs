//! Curation and benchmarking engine for georeferenced hyperspectral tiles.
//!
//! The pipeline turns a tile catalog into a deduplicated multi-temporal
//! patch manifest ([`curation::curate`]), reads and exports patch cubes
//! ([`raster_io`]), pairs patches with land-cover rasters ([`benchmark`]),
//! and scores predictions ([`metrics`]). [`oracle`] holds brute-force
//! reference checks that share no code with the production paths.

pub mod benchmark;
pub mod curation;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod oracle;
pub mod patch_index;
pub mod raster_io;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
