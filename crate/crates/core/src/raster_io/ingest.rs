use std::collections::HashSet;
use std::path::Path;

use serde::Serialize;

use super::catalog::{RejectReason, TileEntry};
use super::window::validate_tile_raster;
use crate::curation::TileRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub cloud_max: f64,
    /// Required CRS; `None` admits any.
    pub crs: Option<u32>,
    /// Open each raster and check it against the entry.
    pub check_rasters: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { cloud_max: 0.10, crs: None, check_rasters: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub line: usize,
    pub tile_id: String,
    pub reason: RejectReason,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    #[serde(skip)]
    pub accepted: Vec<TileRecord>,
    pub n_entries: usize,
    pub n_accepted: usize,
    pub rejected: Vec<Rejection>,
}

/// Validates manifest entries in order. Relative raster paths are resolved
/// against `base_dir`. The first entry with a given tile id wins.
pub fn ingest(entries: &[(usize, TileEntry)], opts: &IngestOptions, base_dir: Option<&Path>) -> IngestReport {
    let mut report = IngestReport { n_entries: entries.len(), ..Default::default() };
    let mut seen = HashSet::new();
    for (line, entry) in entries {
        let reject = |reason, message: String| Rejection { line: *line, tile_id: entry.tile_id.clone(), reason, message };
        let mut tile = match entry.to_record() {
            Ok(t) => t,
            Err((reason, e)) => {
                report.rejected.push(reject(reason, e.to_string()));
                continue;
            }
        };
        if !seen.insert(tile.tile_id.clone()) {
            report.rejected.push(reject(RejectReason::Duplicate, format!("tile_id {} already ingested", tile.tile_id)));
            continue;
        }
        if let Some(crs) = opts.crs.filter(|&c| c != tile.crs) {
            report.rejected.push(reject(RejectReason::Crs, format!("EPSG:{} where EPSG:{crs} is required", tile.crs)));
            continue;
        }
        if tile.cloud_fraction > opts.cloud_max {
            report.rejected.push(reject(
                RejectReason::Cloud,
                format!("cloud_fraction {} exceeds {}", tile.cloud_fraction, opts.cloud_max),
            ));
            continue;
        }
        if let Some(base) = base_dir.filter(|_| Path::new(&tile.raster_ref).is_relative()) {
            tile.raster_ref = base.join(&tile.raster_ref).to_string_lossy().into_owned();
        }
        if opts.check_rasters {
            if let Err(e) = validate_tile_raster(&tile) {
                report.rejected.push(reject(RejectReason::Raster, e.to_string()));
                continue;
            }
        }
        report.accepted.push(tile);
    }
    report.n_accepted = report.accepted.len();
    report
}
