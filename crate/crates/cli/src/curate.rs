use std::path::Path;
use std::time::Instant;

use hypercurate_core::curation::curate as run_curation;
use hypercurate_core::oracle::{naive_containment_check, naive_overlap_check};
use hypercurate_core::patch_index::{read_manifest, write_manifest, PatchManifest};
use hypercurate_core::raster_io::{export_patches, filter_by_cloud, read_catalog, BandMask};
use hypercurate_core::stats::DatasetStats;
use hypercurate_core::{Error, Result};
use serde_json::json;

use crate::config::RunConfig;
use crate::out::{ensure_dir, print_json, write_json, write_text};
use crate::Reporter;

pub fn curate(catalog: &Path, cfg: &RunConfig, export: bool, out: &Path, rep: Reporter) -> Result<()> {
    let all = read_catalog(catalog)?;
    let tiles = filter_by_cloud(&all, cfg.curation.cloud_max);
    if tiles.len() < all.len() {
        rep.note(format!("curate: {} tiles above cloud_max {} skipped", all.len() - tiles.len(), cfg.curation.cloud_max));
    }
    let start = Instant::now();
    let manifest = run_curation(&tiles, &cfg.curation)?;
    rep.note(format!("curate: {} tiles -> {} locations in {:.1}s", tiles.len(), manifest.records.len(), start.elapsed().as_secs_f64()));
    ensure_dir(out)?;
    write_manifest(&manifest, &out.join("manifest.tsv"))?;
    write_stats(&manifest, out, rep)?;
    write_json(out, "curate_config.json", &json!({ "catalog": catalog, "config": cfg }))?;
    if export {
        let mask = match &cfg.curation.band_mask_ref {
            Some(p) => BandMask::load(p)?,
            None => BandMask::identity(tiles.first().map_or(1, |t| t.band_count as usize)),
        };
        let summary = export_patches(&manifest, &tiles, &mask, &out.join("patches"))?;
        rep.note(format!(
            "export: {} cubes with {} bands, {} rejected for no-data",
            summary.written,
            mask.kept_count(),
            summary.nodata_rejected.len()
        ));
        write_json(out, "export_summary.json", &summary)?;
    }
    Ok(())
}

fn write_stats(manifest: &PatchManifest, out: &Path, rep: Reporter) -> Result<DatasetStats> {
    let stats = DatasetStats::from_manifest(manifest);
    stats.check()?;
    write_json(out, "stats.json", &stats)?;
    write_text(out, "timestamps_histogram.csv", &stats.histogram_csv())?;
    write_text(out, "monthly_patches.csv", &stats.monthly_csv())?;
    rep.note(format!(
        "stats: {} locations, {} patches, {} multi-temporal ({:.1}%)",
        stats.n_locations,
        stats.n_patches,
        stats.n_multitemporal,
        100.0 * stats.multitemporal_fraction
    ));
    Ok(stats)
}

pub fn stats(manifest: &Path, out: &Path, rep: Reporter) -> Result<()> {
    let m = read_manifest(manifest)?;
    let s = write_stats(&m, out, rep)?;
    print_json(&s);
    Ok(())
}

pub fn verify(manifest: &Path, catalog: Option<&Path>, out: &Path, rep: Reporter) -> Result<()> {
    let m = read_manifest(manifest)?;
    let mut reports = vec![naive_overlap_check(&m)];
    if let Some(c) = catalog {
        reports.push(naive_containment_check(&m, &read_catalog(c)?));
    }
    write_json(out, "verify_report.json", &reports)?;
    print_json(&reports);
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    for r in &reports {
        rep.note(format!("verify: {} over {} items: {}", r.checked_property, r.checked, if r.pass { "pass" } else { "FAIL" }));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        let n: usize = failed.iter().map(|r| r.violations.len()).sum();
        Err(Error::Invariant(format!("{n} violations in {}", manifest.display())))
    }
}
