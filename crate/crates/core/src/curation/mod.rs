//! Temporal-views extraction: overlap graph, stack enumeration, and the
//! per-cluster patch placement driver.

mod combinations;
mod graph;
pub mod tile;

pub use combinations::{build_combinations, Combination, UNBOUNDED};
pub use graph::{build_overlap_graph, connected_components, GraphParams, Overlap, OverlapGraph};
pub use tile::TileRecord;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::patch_index::{patchify, Member, PatchManifest, PatchRecord, PatchWindow, SpatialIndex, DEFAULT_PATCH_PX};
use combinations::{expand, Memo, Tuple};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurationConfig {
    /// Tuples retained per enumeration level from order 3 on.
    pub beam: usize,
    pub max_order: usize,
    pub min_dt_seconds: i64,
    pub patch_px: u32,
    pub cloud_max: f64,
    pub band_mask_ref: Option<PathBuf>,
    pub worker_count: usize,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            beam: 64,
            max_order: 32,
            min_dt_seconds: 86_400,
            patch_px: DEFAULT_PATCH_PX,
            cloud_max: 0.10,
            band_mask_ref: None,
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Validation(m.to_string()));
        if self.beam == 0 {
            return fail("beam must be at least 1 (use \"inf\" for no limit)");
        }
        if self.max_order < 2 {
            return fail("max_order must be at least 2");
        }
        if self.min_dt_seconds < 0 {
            return fail("min_dt_seconds must be non-negative");
        }
        if self.patch_px == 0 {
            return fail("patch_px must be positive");
        }
        if !(0.0..=1.0).contains(&self.cloud_max) {
            return fail("cloud_max must lie in [0, 1]");
        }
        if self.worker_count == 0 {
            return fail("worker_count must be at least 1");
        }
        Ok(())
    }

    pub fn graph_params(&self) -> GraphParams {
        GraphParams { min_dt_seconds: self.min_dt_seconds, patch_px: self.patch_px }
    }
}

/// Runs the full extraction over tiles that already passed the cloud filter.
///
/// Work units are clusters of touching footprints and run in parallel.
/// Inside a unit: stacks from every seed are pooled, then patchified in
/// order (order desc, area desc, ids asc) against one shared index, and
/// finally each tile's remaining footprint is patchified as single-date
/// locations.
pub fn curate(tiles: &[TileRecord], cfg: &CurationConfig) -> Result<PatchManifest> {
    cfg.validate()?;
    let g = build_overlap_graph(tiles, &cfg.graph_params())?;
    let units = g.work_units();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| Error::Invariant(format!("worker pool: {e}")))?;
    let per_unit: Vec<Vec<PatchRecord>> =
        pool.install(|| units.par_iter().map(|unit| curate_unit(&g, unit, cfg)).collect::<Result<_>>())?;
    Ok(PatchManifest::new(per_unit.into_iter().flatten().collect()))
}

fn curate_unit(g: &OverlapGraph, unit: &[usize], cfg: &CurationConfig) -> Result<Vec<PatchRecord>> {
    let memo = Memo::default();
    let per_seed: Vec<Vec<Tuple>> = unit.par_iter().map(|&seed| expand(seed, g, cfg.beam, cfg.max_order, &memo)).collect();
    let mut pooled: std::collections::BTreeMap<Vec<usize>, Tuple> = std::collections::BTreeMap::new();
    for t in per_seed.into_iter().flatten() {
        pooled.entry(t.members.clone()).or_insert(t);
    }
    let mut stacks: Vec<Tuple> = pooled.into_values().collect();
    stacks.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then(b.area.total_cmp(&a.area))
            .then_with(|| a.members.cmp(&b.members))
    });

    let mut index = SpatialIndex::new();
    let mut records = Vec::new();
    for stack in &stacks {
        let lattice = g.lattice_of(stack.members[0]);
        let windows = patchify(&stack.intersection, &lattice, &index);
        index.commit(&windows)?;
        for w in windows {
            records.push(record_for(g, &stack.members, w)?);
        }
    }
    for &t in unit {
        let tile = g.tile(t);
        let windows = patchify(&tile.footprint, &g.lattice_of(t), &index);
        index.commit(&windows).map_err(|e| e.for_tile(&tile.tile_id))?;
        for w in windows {
            records.push(record_for(g, &[t], w)?);
        }
    }
    Ok(records)
}

fn record_for(g: &OverlapGraph, members: &[usize], window: PatchWindow) -> Result<PatchRecord> {
    let members = members
        .iter()
        .map(|&i| {
            let tile = g.tile(i);
            let (row, col) = pixel_offset(tile, &window).map_err(|e| e.for_tile(&tile.tile_id))?;
            Ok(Member { tile_id: tile.tile_id.clone(), timestamp: tile.timestamp, row, col })
        })
        .collect::<Result<Vec<_>>>()?;
    PatchRecord::new(window, members)
}

/// Row (from the raster's top) and column of the window's upper-left pixel.
pub fn pixel_offset(tile: &TileRecord, window: &PatchWindow) -> Result<(u32, u32)> {
    let (ox, oy) = tile.grid_origin_index();
    let col = window.lattice_x - ox;
    let row = oy - (window.lattice_y + i64::from(window.size_px));
    if row < 0 || col < 0 || (window.gsd - tile.gsd).abs() > 1e-9 {
        return Err(Error::Invariant(format!(
            "window {} does not lie on the raster grid of tile {}",
            window.location_id(),
            tile.tile_id
        )));
    }
    Ok((row as u32, col as u32))
}
