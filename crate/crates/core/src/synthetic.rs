//! Synthetic tile layouts and rasters for tests, benchmarks and demos.

use std::path::Path;

use rand::Rng;

use crate::benchmark::LabelRaster;
use crate::curation::TileRecord;
use crate::error::Result;
use crate::geometry::{ConvexPolygon, Point2};
use crate::raster_io::{write_raster, DType, Raster, RasterHeader, DEFAULT_NODATA};

pub const DAY: i64 = 86_400;
/// 2022-01-01T00:00:00Z.
pub const EPOCH_2022: i64 = 1_640_995_200;

#[derive(Debug, Clone)]
pub struct LayoutParams {
    pub n_tiles: usize,
    /// Side of the square region tile centers fall in, meters.
    pub region_m: f64,
    /// Tile side length range, pixels.
    pub tile_px: (u32, u32),
    /// Maximum footprint rotation, radians.
    pub max_rotation: f64,
    /// Probability that a tile revisits an earlier scene. Revisits pick
    /// uniformly among first acquisitions, so stacks stay shallow.
    pub revisit: f64,
    /// Probability that a revisit happens on the same day.
    pub same_day: f64,
    pub gsd: f64,
    pub crs: u32,
    pub bands: u32,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            n_tiles: 20,
            region_m: 60_000.0,
            tile_px: (300, 600),
            max_rotation: 0.3,
            revisit: 0.5,
            same_day: 0.1,
            gsd: 30.0,
            crs: 32633,
            bands: 224,
        }
    }
}

fn rotated_rect(c: Point2, w: f64, h: f64, theta: f64) -> ConvexPolygon {
    let (s, co) = theta.sin_cos();
    let corners = [(-w, -h), (w, -h), (w, h), (-w, h)]
        .map(|(dx, dy)| Point2::new(c.x + 0.5 * (dx * co - dy * s), c.y + 0.5 * (dx * s + dy * co)));
    ConvexPolygon::new(corners.to_vec()).expect("non-degenerate rectangle")
}

/// Rotated-rectangle tiles with revisit stacks. Ids are `T0000`, `T0001`, ...
pub fn random_layout<R: Rng>(rng: &mut R, p: &LayoutParams) -> Vec<TileRecord> {
    let mut scenes: Vec<(Point2, i64)> = Vec::new();
    let mut out = Vec::with_capacity(p.n_tiles);
    for i in 0..p.n_tiles {
        let (center, ts) = if !scenes.is_empty() && rng.gen_bool(p.revisit) {
            let (c, t) = scenes[rng.gen_range(0..scenes.len())];
            let jitter = 0.15 * f64::from(p.tile_px.0) * p.gsd;
            let c = Point2::new(c.x + rng.gen_range(-jitter..=jitter), c.y + rng.gen_range(-jitter..=jitter));
            let ts = if rng.gen_bool(p.same_day) { t + rng.gen_range(0..3600) } else { t + rng.gen_range(2..200) * DAY };
            (c, ts)
        } else {
            let c = Point2::new(rng.gen_range(0.0..p.region_m), rng.gen_range(0.0..p.region_m));
            let ts = EPOCH_2022 + rng.gen_range(0..730) * DAY + rng.gen_range(0..DAY);
            scenes.push((c, ts));
            (c, ts)
        };
        let w = f64::from(rng.gen_range(p.tile_px.0..=p.tile_px.1)) * p.gsd;
        let h = f64::from(rng.gen_range(p.tile_px.0..=p.tile_px.1)) * p.gsd;
        let theta = if p.max_rotation > 0.0 { rng.gen_range(-p.max_rotation..=p.max_rotation) } else { 0.0 };
        let fp = rotated_rect(center, w, h, theta);
        let cloud = rng.gen_range(0.0..0.1);
        let id = format!("T{i:04}");
        out.push(
            TileRecord::new(&id, fp, ts, p.crs, format!("{id}.hsrc"), cloud, p.gsd, p.bands, None).expect("valid synthetic tile"),
        );
    }
    out
}

/// One tile exactly `cols x rows` windows of `patch_px` at 30 m, plus a later
/// tile covering its `doubles` lower-left windows.
pub fn coverage_layout(cols: u32, rows: u32, doubles: u32, patch_px: u32) -> Vec<TileRecord> {
    let side = f64::from(patch_px) * 30.0;
    let a = ConvexPolygon::rectangle(0.0, 0.0, f64::from(cols) * side, f64::from(rows) * side).expect("positive extent");
    let mut tiles = vec![TileRecord::new("A", a, EPOCH_2022, 32633, "A.hsrc", 0.0, 30.0, 1, None).expect("valid tile")];
    if doubles > 0 {
        let b = ConvexPolygon::rectangle(0.0, 0.0, f64::from(doubles) * side, side).expect("positive extent");
        tiles.push(TileRecord::new("B", b, EPOCH_2022 + 30 * DAY, 32633, "B.hsrc", 0.0, 30.0, 1, None).expect("valid tile"));
    }
    tiles
}

/// Writes an i16 raster covering the tile's grid with values drawn from
/// `rng`; pixels whose centers fall outside the footprint get no-data.
/// Points the tile's `raster_ref` at `path`.
pub fn write_tile_raster<R: Rng>(rng: &mut R, tile: &mut TileRecord, path: &Path) -> Result<()> {
    let (w, h) = tile.grid_extent();
    let header = RasterHeader {
        width: w,
        height: h,
        bands: tile.band_count,
        dtype: DType::I16,
        nodata: DEFAULT_NODATA,
        origin: tile.raster_origin,
        gsd: tile.gsd,
        crs: tile.crs,
        wavelengths: None,
    };
    let plane = (w * h) as usize;
    let mut inside = vec![false; plane];
    for r in 0..h as usize {
        for c in 0..w as usize {
            let p = Point2::new(tile.raster_origin.x + (c as f64 + 0.5) * tile.gsd, tile.raster_origin.y - (r as f64 + 0.5) * tile.gsd);
            inside[r * w as usize + c] = tile.footprint.contains_point(p);
        }
    }
    let mut data = vec![0i16; header.sample_count()];
    rng.fill(&mut data[..]);
    for band in data.chunks_mut(plane) {
        for (v, &i) in band.iter_mut().zip(&inside) {
            *v = if i { v.rem_euclid(10_000) } else { DEFAULT_NODATA as i16 };
        }
    }
    write_raster(&Raster::new(header, data)?, path)?;
    tile.raster_ref = path.to_string_lossy().into_owned();
    Ok(())
}

/// Blocky label raster: `block x block` cells share a code drawn from
/// `codes`. Code `nodata` is used as the header's no-data value.
pub fn random_label_raster<R: Rng>(
    rng: &mut R,
    origin: Point2,
    gsd: f64,
    width: u32,
    height: u32,
    block: u32,
    codes: &[u16],
    nodata: u16,
) -> LabelRaster {
    let bw = width.div_ceil(block) as usize;
    let bh = height.div_ceil(block) as usize;
    let blocks: Vec<u16> = (0..bw * bh).map(|_| codes[rng.gen_range(0..codes.len())]).collect();
    let data = (0..height as usize)
        .flat_map(|r| (0..width as usize).map(move |c| (r, c)))
        .map(|(r, c)| blocks[(r / block as usize) * bw + c / block as usize])
        .collect();
    let header = RasterHeader {
        width,
        height,
        bands: 1,
        dtype: DType::U16,
        nodata: i32::from(nodata),
        origin,
        gsd,
        crs: 32633,
        wavelengths: None,
    };
    LabelRaster::new(Raster::new(header, data).expect("consistent shape"), Default::default()).expect("single band")
}
