use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use hypercurate_core::benchmark::{
    build_multilabel, build_segmentation, filter_season, make_split, mask_class_histogram, multilabel_class_histogram,
    rebalance, write_class_histogram_csv, write_mask_dir, write_multilabel_jsonl, AggregationMap, LabelRaster,
};
use hypercurate_core::patch_index::{read_manifest, PatchWindow};
use hypercurate_core::{Error, Result};
use serde_json::json;

use crate::config::{RunConfig, SplitBy};
use crate::out::{ensure_dir, write_json, write_text};
use crate::{PairTask, Reporter};

fn grid_key(w: &PatchWindow, block: u32) -> String {
    let b = i64::from(block);
    format!("{}:{}:{}:{}", w.crs, w.gsd, w.lattice_x.div_euclid(b), w.lattice_y.div_euclid(b))
}

fn keep<T>(items: Vec<T>, selected: &[usize]) -> Vec<T> {
    let mut idx = selected.to_vec();
    idx.sort_unstable();
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    idx.into_iter().filter_map(|i| slots[i].take()).collect()
}

pub fn run(manifest: &Path, labels: &Path, task: PairTask, cfg: &RunConfig, out: &Path, rep: Reporter) -> Result<()> {
    let p = &cfg.pair;
    let classes = p
        .classes
        .as_deref()
        .ok_or_else(|| Error::Validation("pair needs a class table: pass --classes or set `classes` in the config".into()))?;
    let agg = AggregationMap::load(classes)?;
    let k = agg.class_count();
    let raster = LabelRaster::load(labels)?;
    let mut records = read_manifest(manifest)?.records;
    let n_in = records.len();
    if let Some(season) = &p.season {
        records = filter_season(&records, season);
        rep.note(format!("pair: {} of {n_in} locations have in-season acquisitions", records.len()));
    }
    let blocks: BTreeMap<String, String> = records
        .iter()
        .map(|r| {
            let key = match p.split_by {
                SplitBy::Tile => r.members[0].tile_id.clone(),
                SplitBy::Grid => grid_key(&r.window, p.split_block),
            };
            (r.location_id(), key)
        })
        .collect();
    ensure_dir(out)?;

    let (ids, counts, rebalance_report) = match task {
        PairTask::Multilabel => {
            let mut targets = build_multilabel(&records, &raster, &agg, p.min_fraction)?;
            let mut report = None;
            if let Some(n) = p.rebalance_count {
                let hists: Vec<Vec<u64>> =
                    targets.iter().map(|t| (0..k as u8).map(|c| u64::from(t.classes.contains(&c))).collect()).collect();
                let r = rebalance(&hists, n, p.cap_fraction, cfg.seed)?;
                targets = keep(targets, &r.selected);
                report = Some(r);
            }
            write_multilabel_jsonl(&targets, &out.join("targets.jsonl"))?;
            let counts = multilabel_class_histogram(&targets, k);
            (targets.into_iter().map(|t| t.location_id).collect::<Vec<_>>(), counts, report)
        }
        PairTask::Segmentation => {
            let mut pairs = build_segmentation(&records, &raster, &agg, p.resampling)?;
            let mut report = None;
            if let Some(n) = p.rebalance_count {
                let hists: Vec<Vec<u64>> = pairs.iter().map(|s| s.histogram(k)).collect();
                let r = rebalance(&hists, n, p.cap_fraction, cfg.seed)?;
                pairs = keep(pairs, &r.selected);
                report = Some(r);
            }
            write_mask_dir(&pairs, &out.join("masks"))?;
            let counts = mask_class_histogram(&pairs, k);
            (pairs.into_iter().map(|s| s.location_id).collect(), counts, report)
        }
    };
    write_class_histogram_csv(&agg, &counts, &out.join("class_histogram.csv"))?;
    if let Some(r) = &rebalance_report {
        if !r.cap_satisfied {
            rep.note(format!("pair: cap {} not reachable, max class share {:.3}", r.cap_fraction, r.max_share));
        }
    }

    let mut split_counts = BTreeMap::new();
    if let Some(ratios) = p.split {
        let keys: Vec<String> = ids.iter().map(|id| blocks[id].clone()).collect();
        let assignment = make_split(&keys, ratios, cfg.seed)?;
        let mut csv = String::from("location_id,split\n");
        for (id, key) in ids.iter().zip(&keys) {
            let s = assignment[key].as_str();
            *split_counts.entry(s).or_insert(0usize) += 1;
            let _ = writeln!(csv, "{id},{s}");
        }
        write_text(out, "splits.csv", &csv)?;
    }

    rep.note(format!("pair: {} {} samples over {k} classes", ids.len(), if task == PairTask::Multilabel { "multi-label" } else { "segmentation" }));
    write_json(
        out,
        "pair_report.json",
        &json!({
            "task": format!("{task:?}").to_lowercase(),
            "classes": agg.name,
            "locations_in": n_in,
            "locations_in_season": records.len(),
            "samples": ids.len(),
            "class_counts": counts,
            "rebalance": rebalance_report,
            "splits": split_counts,
            "config": p,
        }),
    )?;
    Ok(())
}
