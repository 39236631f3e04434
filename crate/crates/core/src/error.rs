use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("non-convex polygon: {0}")]
    NonConvex(String),

    #[error("coordinate systems differ: EPSG:{0} vs EPSG:{1}")]
    CrossCrs(u32, u32),

    #[error("invalid WKT: {0}")]
    Wkt(String),

    #[error("raster grid misaligned: {0}")]
    Grid(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// A commit would overlap an already committed window.
    #[error("spatial index consistency: window {new} overlaps committed {existing}")]
    IndexConsistency { new: String, existing: String },

    #[error("window out of bounds: {0}")]
    OutOfBounds(String),

    #[error("no-data value {nodata} in kept band {band} at row {row}, col {col}")]
    NoData { nodata: i32, band: usize, row: usize, col: usize },

    #[error("label coverage: {0}")]
    Coverage(String),

    #[error("source code {0} has no entry in the aggregation map")]
    UnmappedCode(u16),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid HSRC file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("tile {tile_id}: {source}")]
    Tile {
        tile_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invariant breached: {0}")]
    Invariant(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn for_tile(self, tile_id: &str) -> Self {
        Error::Tile { tile_id: tile_id.to_string(), source: Box::new(self) }
    }

    /// Process exit code for this error: 1 validation, 2 I/O, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::IndexConsistency { .. } | Error::Invariant(_) => 3,
            Error::Tile { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
