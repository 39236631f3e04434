use std::path::Path;

use hypercurate_core::raster_io::{ingest, read_tile_manifest, write_catalog, IngestOptions};
use hypercurate_core::Result;

use crate::config::RunConfig;
use crate::out::{ensure_dir, write_json};
use crate::Reporter;

pub fn run(manifest: &Path, cfg: &RunConfig, out: &Path, rep: Reporter) -> Result<()> {
    let entries = read_tile_manifest(manifest)?;
    let opts = IngestOptions { cloud_max: cfg.curation.cloud_max, crs: cfg.crs, check_rasters: cfg.check_rasters };
    let report = ingest(&entries, &opts, manifest.parent());
    ensure_dir(out)?;
    write_catalog(&report.accepted, &out.join("catalog.jsonl"))?;
    write_json(out, "ingest_report.json", &report)?;
    for r in &report.rejected {
        rep.note(format!("line {}: {} rejected ({}): {}", r.line, r.tile_id, r.reason.as_str(), r.message));
    }
    rep.note(format!("ingest: {} of {} tiles accepted", report.n_accepted, report.n_entries));
    Ok(())
}
