use std::path::{Path, PathBuf};

use hypercurate_core::benchmark::AggregationMap;
use hypercurate_core::geometry::Point2;
use hypercurate_core::raster_io::{write_catalog, write_raster};
use hypercurate_core::synthetic::{random_label_raster, random_layout, write_tile_raster, LayoutParams};
use hypercurate_core::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::out::ensure_dir;
use crate::Reporter;

const LABEL_GSD: f64 = 100.0;
const LABEL_NODATA: u16 = 0;

pub struct SynthParams {
    pub tiles: usize,
    pub bands: u32,
    pub tile_px: (u32, u32),
    pub region_m: f64,
    pub rasters: bool,
    pub labels: Option<PathBuf>,
}

pub fn run(p: &SynthParams, cfg: &RunConfig, out: &Path, rep: Reporter) -> Result<()> {
    if p.tile_px.0 == 0 || p.tile_px.0 > p.tile_px.1 {
        return Err(Error::Validation(format!("tile_px must be MIN,MAX with 0 < MIN <= MAX, got {:?}", p.tile_px)));
    }
    if p.bands == 0 || !(p.region_m > 0.0) {
        return Err(Error::Validation("bands and region_m must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = LayoutParams { n_tiles: p.tiles, region_m: p.region_m, tile_px: p.tile_px, bands: p.bands, ..Default::default() };
    let mut tiles = random_layout(&mut rng, &params);
    ensure_dir(out)?;
    if p.rasters {
        let dir = out.join("tiles");
        ensure_dir(&dir)?;
        for t in &mut tiles {
            let name = format!("tiles/{}.hsrc", t.tile_id);
            write_tile_raster(&mut rng, t, &out.join(&name))?;
            t.raster_ref = name;
        }
    }
    write_catalog(&tiles, &out.join("tiles.jsonl"))?;
    rep.note(format!("synth: {} tiles{}", tiles.len(), if p.rasters { " with rasters" } else { "" }));
    if let Some(classes) = &p.labels {
        let agg = AggregationMap::load(classes)?;
        let codes: Vec<u16> = agg.declared_codes().filter(|&c| c != LABEL_NODATA).collect();
        if codes.is_empty() {
            return Err(Error::Validation(format!("{} declares no usable codes", classes.display())));
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for t in &tiles {
            let b = t.footprint.bbox();
            (x0, y0, x1, y1) = (x0.min(b.min_x), y0.min(b.min_y), x1.max(b.max_x), y1.max(b.max_y));
        }
        let left = (x0 / LABEL_GSD).floor() * LABEL_GSD;
        let top = (y1 / LABEL_GSD).ceil() * LABEL_GSD;
        let w = ((x1 - left) / LABEL_GSD).ceil().max(1.0) as u32;
        let h = ((top - y0) / LABEL_GSD).ceil().max(1.0) as u32;
        let labels = random_label_raster(&mut rng, Point2::new(left, top), LABEL_GSD, w, h, 6, &codes, LABEL_NODATA);
        write_raster(&labels.raster, &out.join("labels.hsrc"))?;
        rep.note(format!("synth: {w}x{h} label raster at {LABEL_GSD} m"));
    }
    Ok(())
}
