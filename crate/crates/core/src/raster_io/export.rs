use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;

use super::mask::BandMask;
use super::window::{read_window, write_patch};
use crate::curation::TileRecord;
use crate::error::{Error, Result};
use crate::patch_index::PatchManifest;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExportSummary {
    pub written: usize,
    /// Patches rejected for no-data contamination, as `location_id/tile_id`.
    pub nodata_rejected: Vec<String>,
}

/// Writes one HSRC cube per (location, member) as
/// `<out_dir>/<location_id>__<tile_id>.hsrc`.
pub fn export_patches(manifest: &PatchManifest, tiles: &[TileRecord], mask: &BandMask, out_dir: &Path) -> Result<ExportSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let by_id: HashMap<&str, &TileRecord> = tiles.iter().map(|t| (t.tile_id.as_str(), t)).collect();
    let mut summary = ExportSummary::default();
    for rec in &manifest.records {
        let loc = rec.location_id();
        for m in &rec.members {
            let tile = by_id
                .get(m.tile_id.as_str())
                .ok_or_else(|| Error::NotFound(format!("tile {} referenced by {loc}", m.tile_id)))?;
            match read_window(tile, &rec.window, mask) {
                Ok(cube) => {
                    write_patch(&cube, &out_dir.join(format!("{loc}__{}.hsrc", m.tile_id)))?;
                    summary.written += 1;
                }
                Err(Error::NoData { .. }) => summary.nodata_rejected.push(format!("{loc}/{}", m.tile_id)),
                Err(e) => return Err(e.for_tile(&m.tile_id)),
            }
        }
    }
    Ok(summary)
}
