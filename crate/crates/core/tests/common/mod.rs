#![allow(dead_code)]

use std::path::PathBuf;

use hypercurate_core::benchmark::{AggregationMap, LabelRaster};
use hypercurate_core::geometry::Point2;
use hypercurate_core::patch_index::{Lattice, Member, PatchRecord, PatchWindow};
use hypercurate_core::raster_io::{DType, PatchCube, RasterHeader};
use hypercurate_core::synthetic::{random_label_raster, EPOCH_2022};
use rand::Rng;

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn corine() -> AggregationMap {
    AggregationMap::load(&configs_dir().join("corine_bigearthnet19.toml")).unwrap()
}

/// A label raster at a random resolution and a patch window inside it.
/// Labels mix mapped codes, ignored codes and no-data.
pub fn label_scenario<R: Rng>(rng: &mut R, agg: &AggregationMap) -> (LabelRaster, PatchWindow) {
    let patch_gsd = [10.0, 30.0][rng.gen_range(0..2)];
    let size_px = [8u32, 16, 32, 64, 128][rng.gen_range(0..5)];
    let label_gsd = [5.0, 10.0, 30.0, 60.0, 100.0][rng.gen_range(0..5)];
    let lattice = Lattice::new(32633, patch_gsd, size_px);
    let window = lattice.window(rng.gen_range(-20..20), rng.gen_range(100..140));
    // raster covering the window with a random margin, on its own grid
    let o = window.origin();
    let side = window.side();
    let left = ((o.x / label_gsd).floor() - f64::from(rng.gen_range(0..3))) * label_gsd;
    let top = (((o.y + side) / label_gsd).ceil() + f64::from(rng.gen_range(0..3))) * label_gsd;
    let w = ((o.x + side - left) / label_gsd).ceil() as u32 + rng.gen_range(0..3);
    let h = ((top - o.y) / label_gsd).ceil() as u32 + rng.gen_range(0..3);
    let mut codes: Vec<u16> = agg.declared_codes().collect();
    codes.retain(|_| rng.gen_bool(0.5));
    if codes.is_empty() {
        codes.push(agg.declared_codes().next().unwrap());
    }
    let nodata = 999;
    if rng.gen_bool(0.3) {
        codes.push(nodata);
    }
    let block = rng.gen_range(1..8);
    let labels = random_label_raster(rng, Point2::new(left, top), label_gsd, w, h, block, &codes, nodata);
    (labels, window)
}

pub fn random_cube<R: Rng>(rng: &mut R) -> PatchCube {
    let size = rng.gen_range(1..48);
    let bands = rng.gen_range(1..40);
    let gsd = [1.0, 10.0, 30.0, 0.5][rng.gen_range(0..4)];
    let header = RasterHeader {
        width: size,
        height: size,
        bands,
        dtype: DType::I16,
        nodata: -32768,
        origin: Point2::new(f64::from(rng.gen_range(-1000..1000)) * gsd, f64::from(rng.gen_range(-1000..1000)) * gsd),
        gsd,
        crs: rng.gen_range(1..100_000),
        wavelengths: None,
    };
    let values = (0..header.sample_count()).map(|_| rng.gen::<i16>()).collect();
    PatchCube { header, values, provenance: None }
}

fn random_id<R: Rng>(rng: &mut R) -> String {
    const CHARS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-.";
    (0..rng.gen_range(1..24)).map(|_| CHARS[rng.gen_range(0..CHARS.len())] as char).collect()
}

pub fn random_record<R: Rng>(rng: &mut R) -> PatchRecord {
    let gsd = [0.5, 1.0, 10.0, 20.0, 30.0, 60.0][rng.gen_range(0..6)];
    let size = [1u32, 16, 64, 120, 128, 256][rng.gen_range(0..6)];
    let lattice = Lattice::new(rng.gen_range(1..100_000), gsd, size);
    let window = lattice.window(rng.gen_range(-100_000..100_000), rng.gen_range(-100_000..100_000));
    let mut ts = EPOCH_2022 + rng.gen_range(-400_000_000..400_000_000);
    let members = (0..rng.gen_range(1..6))
        .map(|_| {
            ts += rng.gen_range(1..100_000_000);
            Member { tile_id: random_id(rng), timestamp: ts, row: rng.gen_range(0..20_000), col: rng.gen_range(0..20_000) }
        })
        .collect();
    PatchRecord::new(window, members).unwrap()
}
