//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{corine, label_scenario, random_cube, random_record};
use hypercurate_core::benchmark::{multilabel_from_raster, segmentation_mask, Resampling, IGNORE};
use hypercurate_core::curation::{
    build_combinations, build_overlap_graph, curate, CurationConfig, GraphParams, TileRecord, UNBOUNDED,
};
use hypercurate_core::metrics::{
    f1_multilabel, miou, normalized_mse, F1Mode, IoUMode, MaskBatch, MultiLabelBatch, RegressionBatch,
};
use hypercurate_core::oracle::{
    exhaustive_combinations, naive_containment_check, naive_f1, naive_miou, naive_normalized_mse, naive_overlap_check,
};
use hypercurate_core::patch_index::{format_record, parse_record, Lattice};
use hypercurate_core::raster_io::{
    read_patch, read_raster, read_window, read_window_in, write_patch, BandMask, Raster,
};
use hypercurate_core::stats::DatasetStats;
use hypercurate_core::synthetic::{coverage_layout, random_layout, write_tile_raster, LayoutParams, DAY};
use ndarray::{arr2, Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s as f64, || format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn layout(seed: u64, p: LayoutParams) -> Vec<TileRecord> {
    random_layout(&mut rng(seed), &p)
}

fn cfg(workers: usize, patch_px: u32) -> CurationConfig {
    CurationConfig { worker_count: workers, patch_px, ..Default::default() }
}

fn combination_oracle() -> Check {
    const PATCH: u32 = 16;
    let start = Instant::now();
    let (mut sets, mut max_order) = (0, 0);
    for seed in 0..200u64 {
        let n = 2 + (seed as usize % 11);
        let p = LayoutParams {
            n_tiles: n,
            region_m: 5_000.0,
            tile_px: (40, 90),
            max_rotation: 0.4,
            revisit: 0.6,
            same_day: 0.2,
            bands: 1,
            ..Default::default()
        };
        let tiles = layout(10_000 + seed, p);
        let g = build_overlap_graph(&tiles, &GraphParams { min_dt_seconds: DAY, patch_px: PATCH }).map_err(|e| e.to_string())?;
        let mut got = BTreeMap::new();
        for t in &tiles {
            for c in build_combinations(&t.tile_id, &g, UNBOUNDED, UNBOUNDED).map_err(|e| e.to_string())? {
                got.insert(c.tiles, c.area);
            }
        }
        let want = exhaustive_combinations(&tiles, DAY, PATCH).map_err(|e| e.to_string())?;
        ensure(got.keys().eq(want.keys()), || {
            let a: BTreeSet<_> = got.keys().collect();
            let b: BTreeSet<_> = want.keys().collect();
            format!("layout {seed}: only built {:?}, only exhaustive {:?}", a.difference(&b).collect::<Vec<_>>(), b.difference(&a).collect::<Vec<_>>())
        })?;
        for (k, a) in &got {
            ensure((a - want[k]).abs() <= 1e-6 * want[k], || format!("layout {seed} {k:?}: area {a} vs {}", want[k]))?;
        }
        sets += want.len();
        max_order = max_order.max(want.keys().map(Vec::len).max().unwrap_or(0));
    }
    within(start.elapsed(), 60)?;
    Ok(format!("200 layouts, {sets} tile sets up to order {max_order}, {:.1}s", start.elapsed().as_secs_f64()))
}

fn curation_layout(seed: u64, n: usize) -> Vec<TileRecord> {
    layout(seed, LayoutParams { n_tiles: n, region_m: 150_000.0, tile_px: (300, 600), bands: 1, ..Default::default() })
}

fn non_overlap() -> Check {
    let start = Instant::now();
    let (mut locations, mut checked) = (0, 0);
    for run in 0..50u64 {
        let n = 50 + 9 * run as usize;
        let tiles = curation_layout(20_000 + run, n);
        let m = curate(&tiles, &cfg(8, 128)).map_err(|e| e.to_string())?;
        let overlap = naive_overlap_check(&m);
        ensure(overlap.pass, || format!("run {run}: {} overlaps, first {:?}", overlap.violations.len(), overlap.violations.first()))?;
        let contain = naive_containment_check(&m, &tiles);
        ensure(contain.pass, || format!("run {run}: {} containment failures, first {:?}", contain.violations.len(), contain.violations.first()))?;
        locations += m.records.len();
        checked += overlap.checked;
    }
    within(start.elapsed(), 300)?;
    Ok(format!("50 runs of 50-491 tiles, {locations} locations, {checked} pairs checked, {:.1}s", start.elapsed().as_secs_f64()))
}

fn determinism() -> Check {
    let tiles = curation_layout(30_000, 500);
    let reference = curate(&tiles, &cfg(1, 128)).map_err(|e| e.to_string())?.to_text();
    for rep in 0..5 {
        let one = curate(&tiles, &cfg(1, 128)).map_err(|e| e.to_string())?.to_text();
        let eight = curate(&tiles, &cfg(8, 128)).map_err(|e| e.to_string())?.to_text();
        ensure(one.as_bytes() == reference.as_bytes(), || format!("repeat {rep}: workers=1 output changed"))?;
        ensure(eight.as_bytes() == reference.as_bytes(), || format!("repeat {rep}: workers=8 differs from workers=1"))?;
    }
    Ok(format!("500 tiles, {} manifest lines identical across 5 repeats", reference.lines().count()))
}

fn stats_identities() -> Check {
    let m = curate(&coverage_layout(6, 2, 2, 128), &cfg(2, 128)).map_err(|e| e.to_string())?;
    let s = DatasetStats::from_manifest(&m);
    s.check().map_err(|e| e.to_string())?;
    ensure(s.n_locations == 12 && s.n_multitemporal == 2, || format!("{} locations, {} multi-temporal", s.n_locations, s.n_multitemporal))?;
    ensure((100.0 * s.multitemporal_fraction - 16.7).abs() <= 0.1, || format!("fraction {:.3}%", 100.0 * s.multitemporal_fraction))?;
    let mut runs = 1;
    for seed in 0..20 {
        let m = curate(&curation_layout(40_000 + seed, 60 + 20 * seed as usize), &cfg(4, 128)).map_err(|e| e.to_string())?;
        DatasetStats::from_manifest(&m).check().map_err(|e| format!("seed {seed}: {e}"))?;
        runs += 1;
    }
    Ok(format!("12 locations, 2 multi-temporal ({:.1}%); identities hold on {runs} runs", 100.0 * s.multitemporal_fraction))
}

fn band_masking() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut r = rng(5);
    let mut tile = coverage_layout(1, 1, 0, 128).remove(0);
    tile.band_count = 224;
    let path = dir.path().join("tile.hsrc");
    write_tile_raster(&mut r, &mut tile, &path).map_err(|e| e.to_string())?;
    let window = Lattice::new(tile.crs, tile.gsd, 128).window(0, 0);
    let mask = BandMask::enmap_default();
    let cube = read_window(&tile, &window, &mask).map_err(|e| e.to_string())?;
    ensure(cube.header.bands == 202 && cube.values.len() == 202 * 128 * 128, || format!("{} bands", cube.header.bands))?;
    let full = read_raster::<i16>(&path).map_err(|e| e.to_string())?;
    for (out_band, src) in mask.kept_indices().into_iter().enumerate() {
        ensure(cube.get(out_band, 7, 9) == full.get(src, 7, 9), || format!("band {out_band} is not source band {src}"))?;
    }

    let small = Lattice::new(32633, 30.0, 8).window(0, 0);
    let raster = Raster::new(
        hypercurate_core::raster_io::RasterHeader { width: 8, height: 8, ..full.header.clone() },
        (0..224 * 64).map(|_| r.gen_range(0..10_000)).collect(),
    )
    .map_err(|e| e.to_string())?;
    for pair in 0..100 {
        let random_mask = |r: &mut ChaCha8Rng, n: usize| loop {
            let keep: Vec<bool> = (0..n).map(|_| r.gen_bool(0.6)).collect();
            if let Ok(m) = BandMask::new(keep, "m") {
                return m;
            }
        };
        let a = random_mask(&mut r, 224);
        let b = random_mask(&mut r, a.kept_count());
        let composed = a.compose(&b).map_err(|e| e.to_string())?;
        let direct = read_window_in(&raster, 0, 0, &small, &composed).map_err(|e| e.to_string())?;
        let first = read_window_in(&raster, 0, 0, &small, &a).map_err(|e| e.to_string())?;
        let staged = Raster::new(first.header, first.values).map_err(|e| e.to_string())?;
        let second = read_window_in(&staged, 0, 0, &small, &b).map_err(|e| e.to_string())?;
        ensure(direct.values == second.values && direct.header.bands == second.header.bands, || format!("pair {pair}: composition differs"))?;
        ensure(composed.kept_count() == b.kept_count(), || format!("pair {pair}: kept counts differ"))?;
    }
    Ok("224 -> 202 bands; composition holds on 100 random mask pairs".into())
}

fn random_multilabel(r: &mut ChaCha8Rng) -> MultiLabelBatch {
    let (n, k) = (r.gen_range(1..20), r.gen_range(1..20));
    let (pp, pt) = (r.gen_range(0.05..0.95), r.gen_range(0.05..0.95));
    let p = Array2::from_shape_fn((n, k), |_| r.gen_bool(pp));
    let t = Array2::from_shape_fn((n, k), |_| r.gen_bool(pt));
    MultiLabelBatch::new(p, t).expect("matching shapes")
}

fn random_masks(r: &mut ChaCha8Rng) -> MaskBatch {
    let (n, h, w, k) = (r.gen_range(1..5), r.gen_range(1..17), r.gen_range(1..17), r.gen_range(1..11));
    let cell = |r: &mut ChaCha8Rng| if r.gen_bool(0.1) { IGNORE } else { r.gen_range(0..k as u8) };
    let p = Array3::from_shape_fn((n, h, w), |_| cell(r));
    let t = Array3::from_shape_fn((n, h, w), |_| cell(r));
    MaskBatch::new(p, t, k).expect("valid classes")
}

fn random_regression(r: &mut ChaCha8Rng) -> RegressionBatch {
    let (n, p) = (r.gen_range(2..20), r.gen_range(1..7));
    let scale: Vec<f64> = (0..p).map(|_| 10f64.powf(r.gen_range(-2.0..3.0))).collect();
    let t = Array2::from_shape_fn((n, p), |(_, j)| r.gen_range(-1.0..1.0) * scale[j]);
    let pr = Array2::from_shape_fn((n, p), |(i, j)| t[(i, j)] + r.gen_range(-0.5..0.5) * scale[j]);
    let means = Array1::from_shape_fn(p, |j| r.gen_range(-0.3..0.3) * scale[j]);
    RegressionBatch::new(pr, t, means).expect("finite values")
}

fn metric_oracle() -> Check {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let b = random_multilabel(&mut r);
        let naive = naive_f1(&b);
        let d = (f1_multilabel(&b, F1Mode::Micro).score - naive.micro).abs().max((f1_multilabel(&b, F1Mode::Macro).score - naive.macro_f1).abs());
        ensure(d <= 1e-9, || format!("F1 batch {i}: |delta| {d:e}"))?;
        worst = worst.max(d);

        let m = random_masks(&mut r);
        let d = (miou(&m, IoUMode::Pooled).miou - naive_miou(&m)).abs();
        ensure(d <= 1e-9, || format!("mIoU batch {i}: |delta| {d:e}"))?;
        worst = worst.max(d);

        let g = random_regression(&mut r);
        let (sum, pct) = naive_normalized_mse(&g).ok_or_else(|| format!("regression batch {i}: zero baseline"))?;
        let rep = normalized_mse(&g).map_err(|e| e.to_string())?;
        let d = ((rep.sum - sum).abs() / sum.max(1.0)).max((rep.percent - pct).abs() / pct.max(1.0));
        ensure(d <= 1e-9, || format!("normalized MSE batch {i}: relative |delta| {d:e}"))?;
        worst = worst.max(d);
    }

    let t = arr2(&[[1.0, 2.0, 3.0, 4.0], [3.0, 6.0, 5.0, 0.0]]);
    let means = Array1::from(vec![2.0, 4.0, 4.0, 2.0]);
    let base = Array2::from_shape_fn((2, 4), |(_, j)| means[j]);
    let rep = normalized_mse(&RegressionBatch::new(base, t, means).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(rep.percent == 100.0 && rep.sum == 4.0, || format!("base predictor: percent {}, sum {}", rep.percent, rep.sum))?;

    let masks = MaskBatch::new(
        Array3::from_shape_vec((1, 2, 2), vec![0, 0, 1, 1]).expect("2x2"),
        Array3::from_shape_vec((1, 2, 2), vec![0, 1, 1, 1]).expect("2x2"),
        2,
    )
    .map_err(|e| e.to_string())?;
    let m = miou(&masks, IoUMode::Pooled).miou;
    ensure(m == 7.0 / 12.0, || format!("2x2 mIoU {m}"))?;

    let ml = MultiLabelBatch::new(arr2(&[[true, true, false]]), arr2(&[[false, true, true]])).map_err(|e| e.to_string())?;
    let f = f1_multilabel(&ml, F1Mode::Micro).score;
    ensure(f == 0.5, || format!("micro-F1 {f}"))?;
    Ok(format!("3 x 1,000 batches, max |delta| {worst:.1e}; fixed examples exact"))
}

fn label_consistency() -> Check {
    let agg = corine();
    let mut r = rng(7);
    let mut labeled = 0;
    for i in 0..500 {
        let (labels, window) = label_scenario(&mut r, &agg);
        let seg = segmentation_mask(&window, &labels, &agg, Resampling::Nearest).map_err(|e| e.to_string())?;
        let seg_classes: BTreeSet<u8> = seg.mask.iter().copied().filter(|&v| v != IGNORE).collect();
        let ml = multilabel_from_raster(&window, &labels, &agg, 0.0).map_err(|e| e.to_string())?;
        labeled += usize::from(ml.is_some());
        let ml_classes = ml.map(|t| t.classes).unwrap_or_default();
        ensure(ml_classes == seg_classes, || format!("window {i}: multi-label {ml_classes:?} vs mask {seg_classes:?}"))?;
    }
    Ok(format!("500 windows ({labeled} labeled), 0 discrepancies"))
}

fn round_trips() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut r = rng(8);
    for i in 0..100 {
        let cube = random_cube(&mut r);
        let (a, b) = (dir.path().join("a.hsrc"), dir.path().join("b.hsrc"));
        write_patch(&cube, &a).map_err(|e| e.to_string())?;
        let back = read_patch(&a).map_err(|e| e.to_string())?;
        ensure(back.header == cube.header && back.values == cube.values, || format!("cube {i} changed"))?;
        write_patch(&back, &b).map_err(|e| e.to_string())?;
        let same = std::fs::read(&a).map_err(|e| e.to_string())? == std::fs::read(&b).map_err(|e| e.to_string())?;
        ensure(same, || format!("cube {i}: rewritten file differs"))?;
    }
    for i in 0..1000 {
        let rec = random_record(&mut r);
        let line = format_record(&rec);
        let back = parse_record(&line).map_err(|e| format!("record {i}: {e}"))?;
        ensure(back == rec && format_record(&back) == line, || format!("record {i}: {line}"))?;
    }
    Ok("100 cubes bit-identical, 1,000 records round-trip".into())
}

/// Curates 1,000 tiles of 128 bands at 512 x 512 px, then extracts every
/// member cube through the file path. Tile rasters are written, read and
/// deleted one at a time to bound disk use.
fn throughput() -> Check {
    let start = Instant::now();
    let p = LayoutParams {
        n_tiles: 1000,
        region_m: 400_000.0,
        tile_px: (512, 512),
        max_rotation: 0.0,
        bands: 128,
        ..Default::default()
    };
    let mut tiles = layout(50_000, p);
    let m = curate(&tiles, &cfg(8, 128)).map_err(|e| e.to_string())?;
    let curate_s = start.elapsed().as_secs_f64();
    let stats = DatasetStats::from_manifest(&m);
    stats.check().map_err(|e| e.to_string())?;

    let mut by_tile: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, rec) in m.records.iter().enumerate() {
        for mem in &rec.members {
            by_tile.entry(mem.tile_id.as_str()).or_default().push(i);
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mask = BandMask::identity(128);
    let mut r = rng(9);
    let mut written = 0usize;
    let mut bytes = 0u64;
    let (mut t_tile, mut t_read, mut t_write) = (Duration::ZERO, Duration::ZERO, Duration::ZERO);
    for tile in tiles.iter_mut() {
        let Some(records) = by_tile.get(tile.tile_id.as_str()) else { continue };
        let raster = dir.path().join("tile.hsrc");
        let t = Instant::now();
        write_tile_raster(&mut r, tile, &raster).map_err(|e| e.to_string())?;
        t_tile += t.elapsed();
        for &i in records {
            let t = Instant::now();
            let cube = read_window(tile, &m.records[i].window, &mask).map_err(|e| format!("{}: {e}", m.records[i].location_id()))?;
            t_read += t.elapsed();
            let t = Instant::now();
            let out = dir.path().join("patch.hsrc");
            write_patch(&cube, &out).map_err(|e| e.to_string())?;
            bytes += std::fs::metadata(&out).map_err(|e| e.to_string())?.len();
            t_write += t.elapsed();
            written += 1;
        }
        std::fs::remove_file(&raster).map_err(|e| e.to_string())?;
    }
    ensure(written == stats.n_patches, || format!("{written} cubes for {} patches", stats.n_patches))?;
    let total = start.elapsed();
    let detail = format!(
        "{} locations, {} cubes ({:.1} GB) in {:.1}s (curation {:.1}s, tile rasters {:.1}s, cube reads {:.1}s, cube writes {:.1}s) on {} cores",
        stats.n_locations,
        written,
        bytes as f64 / 1e9,
        total.as_secs_f64(),
        curate_s,
        t_tile.as_secs_f64(),
        t_read.as_secs_f64(),
        t_write.as_secs_f64(),
        std::thread::available_parallelism().map_or(1, |n| n.get())
    );
    within(total, 600).map_err(|e| format!("{e}; {detail}"))?;
    Ok(detail)
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("1 combination oracle equivalence", combination_oracle),
        ("2 non-overlap certification", non_overlap),
        ("3 determinism and parallel equivalence", determinism),
        ("4 stats identities", stats_identities),
        ("5 band masking", band_masking),
        ("6 metric oracle equivalence", metric_oracle),
        ("7 cross-operation label consistency", label_consistency),
        ("8 format round-trips", round_trips),
        ("9 desk-scale throughput", throughput),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, f) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.split(' ').next() == Some(o.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{secs:>6.1}s] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{secs:>6.1}s] {name}: {detail}");
            }
        }
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
