use std::path::Path;

use super::format::{read_block, read_header, read_raster, write_raster, Raster, RasterHeader};
use super::mask::{apply_band_mask, BandMask};
use crate::curation::{pixel_offset, TileRecord};
use crate::error::{Error, Result};
use crate::patch_index::PatchWindow;

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub tile_id: String,
    pub timestamp: i64,
    pub window: PatchWindow,
}

/// Masked `[bands x size x size]` reflectance extract. Contains no no-data
/// samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchCube {
    pub header: RasterHeader,
    pub values: Vec<i16>,
    /// Not persisted in HSRC; `read_patch` returns `None`.
    pub provenance: Option<Provenance>,
}

impl PatchCube {
    pub fn get(&self, band: usize, row: usize, col: usize) -> i16 {
        let s = self.header.width as usize;
        self.values[(band * self.header.height as usize + row) * s + col]
    }
}

/// Reads the window from the tile's raster file, keeping masked bands.
pub fn read_window(tile: &TileRecord, window: &PatchWindow, mask: &BandMask) -> Result<PatchCube> {
    let path = Path::new(&tile.raster_ref);
    let header = read_header(path)?;
    check_tile_header(tile, &header)?;
    let (row, col) = pixel_offset(tile, window)?;
    let cube_header = cube_header(&header, window, mask)?;
    let size = window.size_px as usize;
    let values = read_block::<i16>(path, &header, &mask.kept_indices(), row as usize, col as usize, size, size)
        .map_err(|e| e.for_tile(&tile.tile_id))?;
    finish(cube_header, values, size, Some(Provenance { tile_id: tile.tile_id.clone(), timestamp: tile.timestamp, window: *window }))
}

/// Same as [`read_window`] against an in-memory raster.
pub fn read_window_in(raster: &Raster<i16>, row: usize, col: usize, window: &PatchWindow, mask: &BandMask) -> Result<PatchCube> {
    let header = &raster.header;
    let cube_header = cube_header(header, window, mask)?;
    let size = window.size_px as usize;
    if row + size > header.height as usize || col + size > header.width as usize {
        return Err(Error::OutOfBounds(format!(
            "window at row {row}, col {col} of size {size} exceeds {}x{}",
            header.height, header.width
        )));
    }
    let mut values = Vec::with_capacity(cube_header.sample_count());
    for b in mask.kept_indices() {
        for r in row..row + size {
            for c in col..col + size {
                values.push(raster.get(b, r, c));
            }
        }
    }
    finish(cube_header, values, size, None)
}

fn cube_header(header: &RasterHeader, window: &PatchWindow, mask: &BandMask) -> Result<RasterHeader> {
    let mut h = apply_band_mask(header, mask)?;
    h.width = window.size_px;
    h.height = window.size_px;
    let o = window.origin();
    h.origin = crate::geometry::Point2::new(o.x, o.y + window.side());
    Ok(h)
}

fn finish(header: RasterHeader, values: Vec<i16>, size: usize, provenance: Option<Provenance>) -> Result<PatchCube> {
    if let Some(i) = values.iter().position(|&v| i32::from(v) == header.nodata) {
        return Err(Error::NoData { nodata: header.nodata, band: i / (size * size), row: (i / size) % size, col: i % size });
    }
    Ok(PatchCube { header, values, provenance })
}

fn check_tile_header(tile: &TileRecord, h: &RasterHeader) -> Result<()> {
    let mismatch = |what: String| Err(Error::Validation(what).for_tile(&tile.tile_id));
    if h.bands != tile.band_count {
        return mismatch(format!("raster has {} bands, catalog says {}", h.bands, tile.band_count));
    }
    if (h.gsd - tile.gsd).abs() > 1e-9 || h.crs != tile.crs {
        return mismatch(format!("raster grid {} m / EPSG:{} disagrees with catalog", h.gsd, h.crs));
    }
    if (h.origin.x - tile.raster_origin.x).abs() > 1e-6 || (h.origin.y - tile.raster_origin.y).abs() > 1e-6 {
        return mismatch(format!(
            "raster origin ({}, {}) differs from catalog ({}, {})",
            h.origin.x, h.origin.y, tile.raster_origin.x, tile.raster_origin.y
        ));
    }
    Ok(())
}

/// Checks that a tile's raster file exists, is registered on the tile's
/// grid, and covers its footprint.
pub fn validate_tile_raster(tile: &TileRecord) -> Result<RasterHeader> {
    let header = read_header(Path::new(&tile.raster_ref))?;
    check_tile_header(tile, &header)?;
    let (w, h) = tile.grid_extent();
    if header.width < w || header.height < h {
        return Err(Error::Validation(format!(
            "raster {}x{} does not cover the footprint ({}x{} needed)",
            header.width, header.height, w, h
        ))
        .for_tile(&tile.tile_id));
    }
    Ok(header)
}

pub fn write_patch(cube: &PatchCube, path: &Path) -> Result<()> {
    if cube.header.bands == 0 {
        return Err(Error::Validation("patch cube has no bands".into()));
    }
    let raster = Raster::new(cube.header.clone(), cube.values.clone())?;
    write_raster(&raster, path)
}

pub fn read_patch(path: &Path) -> Result<PatchCube> {
    let r = read_raster::<i16>(path)?;
    Ok(PatchCube { header: r.header, values: r.data, provenance: None })
}
