//! Tile manifests: one JSON object per line.
//!
//! ```json
//! {"tile_id":"T1","timestamp":"2023-07-01T10:20:00Z","crs":32633,
//!  "footprint":"POLYGON((...))","raster":"tiles/T1.hsrc",
//!  "cloud_fraction":0.02,"gsd":30.0,"bands":224}
//! ```
//!
//! `origin_x` / `origin_y` may be added to state the raster's upper-left
//! corner explicitly.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::format::Raster;
use crate::curation::TileRecord;
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileEntry {
    pub tile_id: String,
    pub timestamp: String,
    pub crs: u32,
    pub footprint: String,
    pub raster: String,
    pub cloud_fraction: f64,
    pub gsd: f64,
    pub bands: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_y: Option<f64>,
}

/// Why a manifest entry was not admitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Schema,
    Duplicate,
    Cloud,
    Geometry,
    Grid,
    Crs,
    Raster,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Schema => "schema",
            RejectReason::Duplicate => "duplicate",
            RejectReason::Cloud => "cloud",
            RejectReason::Geometry => "geometry",
            RejectReason::Grid => "grid",
            RejectReason::Crs => "crs",
            RejectReason::Raster => "raster",
        }
    }
}

impl TileEntry {
    pub fn from_record(t: &TileRecord) -> Self {
        TileEntry {
            tile_id: t.tile_id.clone(),
            timestamp: format_timestamp(t.timestamp),
            crs: t.crs,
            footprint: t.footprint.to_wkt(),
            raster: t.raster_ref.clone(),
            cloud_fraction: t.cloud_fraction,
            gsd: t.gsd,
            bands: t.band_count,
            origin_x: Some(t.raster_origin.x),
            origin_y: Some(t.raster_origin.y),
        }
    }

    /// Converts to a validated record, classifying the failure.
    pub fn to_record(&self) -> std::result::Result<TileRecord, (RejectReason, Error)> {
        let ts = parse_timestamp(&self.timestamp).map_err(|e| (RejectReason::Schema, e))?;
        let footprint = ConvexPolygon::from_wkt(&self.footprint).map_err(|e| (RejectReason::Geometry, e))?;
        let origin = match (self.origin_x, self.origin_y) {
            (Some(x), Some(y)) => Some(Point2::new(x, y)),
            (None, None) => None,
            _ => return Err((RejectReason::Schema, Error::Validation("origin_x and origin_y go together".into()))),
        };
        TileRecord::new(
            &self.tile_id,
            footprint,
            ts,
            self.crs,
            &self.raster,
            self.cloud_fraction,
            self.gsd,
            self.bands,
            origin,
        )
        .map_err(|e| match e {
            Error::Grid(_) => (RejectReason::Grid, e),
            _ => (RejectReason::Schema, e),
        })
    }
}

pub fn parse_timestamp(s: &str) -> Result<i64> {
    DateTime::parse_from_rfc3339(s)
        .map(|d| d.with_timezone(&Utc).timestamp())
        .map_err(|e| Error::Validation(format!("timestamp {s:?} is not ISO-8601: {e}")))
}

pub fn format_timestamp(ts: i64) -> String {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|d| d.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| ts.to_string())
}

/// Parses every non-blank line. A line that is not a JSON tile entry is a
/// hard error carrying its 1-based line number.
pub fn read_tile_manifest(path: &Path) -> Result<Vec<(usize, TileEntry)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: TileEntry = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push((i + 1, entry));
    }
    Ok(out)
}

/// Reads a normalized catalog; every entry must validate.
pub fn read_catalog(path: &Path) -> Result<Vec<TileRecord>> {
    read_tile_manifest(path)?
        .into_iter()
        .map(|(line, e)| {
            e.to_record().map_err(|(_, err)| Error::Parse { path: path.to_path_buf(), line, reason: err.to_string() })
        })
        .collect()
}

pub fn write_catalog(tiles: &[TileRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in tiles {
        let line = serde_json::to_string(&TileEntry::from_record(t)).expect("serializable");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Tiles with `cloud_fraction <= max_fraction`, order preserved.
pub fn filter_by_cloud(tiles: &[TileRecord], max_fraction: f64) -> Vec<TileRecord> {
    tiles.iter().filter(|t| t.cloud_fraction <= max_fraction).cloned().collect()
}

/// Fraction of non-zero pixels in a single-band cloud mask.
pub fn cloud_fraction_from_mask(mask: &Raster<u8>) -> f64 {
    let n = mask.header.width as usize * mask.header.height as usize;
    let flagged = mask.data[..n].iter().filter(|&&v| v != 0).count();
    flagged as f64 / n as f64
}
