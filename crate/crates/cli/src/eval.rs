use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use hypercurate_core::benchmark::{read_mask_dir, read_multilabel_jsonl, AggregationMap};
use hypercurate_core::metrics::{f1_multilabel, miou, normalized_mse, MaskBatch, MultiLabelBatch, RegressionBatch};
use hypercurate_core::{Error, Result};
use ndarray::{Array1, Array2, Array3};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::out::{print_json, write_json};
use crate::{EvalTask, Reporter};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegressionRow {
    location_id: String,
    values: Vec<f64>,
}

fn read_regression_jsonl(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: RegressionRow = serde_json::from_str(line)
            .map_err(|e| Error::Parse { path: path.to_path_buf(), line: i + 1, reason: e.to_string() })?;
        rows.push((row.location_id, row.values));
    }
    Ok(rows)
}

/// Pairs predictions with targets by location id, in id order. Both sides
/// must list the same ids exactly once.
fn join<T>(preds: Vec<(String, T)>, targets: Vec<(String, T)>) -> Result<Vec<(String, T, T)>> {
    let index = |rows: Vec<(String, T)>, side: &str| -> Result<BTreeMap<String, T>> {
        let mut m = BTreeMap::new();
        for (id, v) in rows {
            if m.insert(id.clone(), v).is_some() {
                return Err(Error::Validation(format!("{side} list {id} more than once")));
            }
        }
        Ok(m)
    };
    let mut p = index(preds, "predictions")?;
    let t = index(targets, "targets")?;
    if let Some(extra) = p.keys().find(|id| !t.contains_key(*id)) {
        return Err(Error::Validation(format!("prediction for {extra} has no target")));
    }
    t.into_iter()
        .map(|(id, tv)| {
            let pv = p.remove(&id).ok_or_else(|| Error::Validation(format!("no prediction for {id}")))?;
            Ok((id, pv, tv))
        })
        .collect()
}

fn class_count(n_classes: Option<usize>, cfg: &RunConfig) -> Result<usize> {
    match (n_classes, &cfg.pair.classes) {
        (Some(k), _) => Ok(k),
        (None, Some(p)) => Ok(AggregationMap::load(p)?.class_count()),
        (None, None) => Err(Error::Validation("the class count is unknown: pass --classes or --n-classes".into())),
    }
}

fn indicator(classes: &BTreeSet<u8>, k: usize) -> Vec<bool> {
    (0..k).map(|c| classes.contains(&(c as u8))).collect()
}

pub fn run(
    task: EvalTask,
    predictions: &Path,
    targets: &Path,
    n_classes: Option<usize>,
    cfg: &RunConfig,
    out: &Path,
    rep: Reporter,
) -> Result<()> {
    let (n, report, config): (usize, Value, Value) = match task {
        EvalTask::Multilabel => {
            let k = class_count(n_classes, cfg)?;
            let rows = |p: &Path| -> Result<Vec<(String, BTreeSet<u8>)>> {
                Ok(read_multilabel_jsonl(p, k)?.into_iter().map(|t| (t.location_id, t.classes)).collect())
            };
            let joined = join(rows(predictions)?, rows(targets)?)?;
            let flat = |pick: fn(&(String, BTreeSet<u8>, BTreeSet<u8>)) -> &BTreeSet<u8>| {
                let v: Vec<bool> = joined.iter().flat_map(|r| indicator(pick(r), k)).collect();
                Array2::from_shape_vec((joined.len(), k), v).expect("consistent shape")
            };
            let batch = MultiLabelBatch::new(flat(|r| &r.1), flat(|r| &r.2))?;
            let r = f1_multilabel(&batch, cfg.eval.f1_mode);
            (joined.len(), json!(r), json!({ "n_classes": k, "f1_mode": cfg.eval.f1_mode }))
        }
        EvalTask::Segmentation => {
            let k = class_count(n_classes, cfg)?;
            let joined = join(read_mask_dir(predictions)?.into_iter().collect(), read_mask_dir(targets)?.into_iter().collect())?;
            let Some(first) = joined.first() else {
                return Err(Error::Validation(format!("{} holds no masks", targets.display())));
            };
            let (h, w) = first.2.dim();
            let mut p = Array3::zeros((joined.len(), h, w));
            let mut t = Array3::zeros((joined.len(), h, w));
            for (i, (id, pm, tm)) in joined.iter().enumerate() {
                if pm.dim() != (h, w) || tm.dim() != (h, w) {
                    return Err(Error::Shape(format!("{id}: masks must all be {h}x{w}, got {:?} and {:?}", pm.dim(), tm.dim())));
                }
                p.index_axis_mut(ndarray::Axis(0), i).assign(pm);
                t.index_axis_mut(ndarray::Axis(0), i).assign(tm);
            }
            let r = miou(&MaskBatch::new(p, t, k)?, cfg.eval.miou_mode);
            (joined.len(), json!(r), json!({ "n_classes": k, "miou_mode": cfg.eval.miou_mode }))
        }
        EvalTask::Regression => {
            let means = cfg.eval.baseline_means.clone().ok_or_else(|| {
                Error::Validation("regression needs training-set means: pass --baseline-means or set baseline_means".into())
            })?;
            let joined = join(read_regression_jsonl(predictions)?, read_regression_jsonl(targets)?)?;
            let np = means.len();
            for (id, pv, tv) in &joined {
                if pv.len() != np || tv.len() != np {
                    return Err(Error::Shape(format!("{id}: expected {np} values, got {} and {}", pv.len(), tv.len())));
                }
            }
            let flat = |pick: fn(&(String, Vec<f64>, Vec<f64>)) -> &Vec<f64>| {
                Array2::from_shape_vec((joined.len(), np), joined.iter().flat_map(|r| pick(r).clone()).collect()).expect("consistent shape")
            };
            let r = normalized_mse(&RegressionBatch::new(flat(|r| &r.1), flat(|r| &r.2), Array1::from(means.clone()))?)?;
            (joined.len(), json!(r), json!({ "baseline_means": means }))
        }
    };
    let doc = json!({
        "task": format!("{task:?}").to_lowercase(),
        "n_samples": n,
        "predictions": predictions,
        "targets": targets,
        "config": config,
        "report": report,
    });
    write_json(out, "metrics.json", &doc)?;
    print_json(&doc);
    rep.note(format!("eval: {n} samples scored"));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_checks_ids() {
        let rows = |ids: &[&str]| ids.iter().map(|i| (i.to_string(), 0)).collect::<Vec<_>>();
        assert_eq!(join(rows(&["b", "a"]), rows(&["a", "b"])).unwrap().len(), 2);
        assert!(join(rows(&["a"]), rows(&["a", "b"])).unwrap_err().to_string().contains("no prediction for b"));
        assert!(join(rows(&["a", "c"]), rows(&["a"])).unwrap_err().to_string().contains("c has no target"));
        assert!(join(rows(&["a", "a"]), rows(&["a"])).is_err());
    }
}
