use ndarray::{Array3, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const IGNORE: u8 = 255;

/// `N x H x W` class-index masks. A pixel is ignored when either side is
/// [`IGNORE`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaskBatch {
    pub predictions: Array3<u8>,
    pub targets: Array3<u8>,
    pub n_classes: usize,
}

impl MaskBatch {
    pub fn new(predictions: Array3<u8>, targets: Array3<u8>, n_classes: usize) -> Result<Self> {
        if predictions.dim() != targets.dim() {
            return Err(Error::Shape(format!("predictions {:?} vs targets {:?}", predictions.dim(), targets.dim())));
        }
        if n_classes == 0 || n_classes >= usize::from(IGNORE) {
            return Err(Error::Validation(format!("n_classes must be in 1..255, got {n_classes}")));
        }
        let bad = predictions.iter().chain(targets.iter()).find(|&&v| v != IGNORE && usize::from(v) >= n_classes);
        if let Some(v) = bad {
            return Err(Error::Validation(format!("class index {v} out of range for {n_classes} classes")));
        }
        Ok(MaskBatch { predictions, targets, n_classes })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IoUMode {
    /// One confusion matrix over every pixel of the batch.
    #[default]
    Pooled,
    /// Mean of per-image mIoU over images with at least one labeled class.
    PerImage,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassIoU {
    pub class: usize,
    pub intersection: u64,
    pub union: u64,
    /// `None` when the class is absent from both sides.
    pub iou: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiouReport {
    pub mode: IoUMode,
    pub miou: f64,
    pub per_class: Vec<ClassIoU>,
    pub labeled_pixels: u64,
    pub ignored_pixels: u64,
}

fn counts<'a>(pred: impl IntoIterator<Item = &'a u8>, tgt: impl IntoIterator<Item = &'a u8>, k: usize) -> (Vec<ClassIoU>, u64, u64) {
    let mut inter = vec![0u64; k];
    let mut p = vec![0u64; k];
    let mut t = vec![0u64; k];
    let (mut labeled, mut ignored) = (0, 0);
    for (&a, &b) in pred.into_iter().zip(tgt) {
        if a == IGNORE || b == IGNORE {
            ignored += 1;
            continue;
        }
        labeled += 1;
        p[usize::from(a)] += 1;
        t[usize::from(b)] += 1;
        if a == b {
            inter[usize::from(a)] += 1;
        }
    }
    let table = (0..k)
        .map(|c| {
            let union = p[c] + t[c] - inter[c];
            ClassIoU { class: c, intersection: inter[c], union, iou: (union > 0).then(|| inter[c] as f64 / union as f64) }
        })
        .collect();
    (table, labeled, ignored)
}

fn mean_present(table: &[ClassIoU]) -> Option<f64> {
    super::mean_of_ratios(table.iter().filter(|c| c.union > 0).map(|c| (c.intersection, c.union)))
}

/// A batch without any labeled pixel scores 1.
pub fn miou(batch: &MaskBatch, mode: IoUMode) -> MiouReport {
    let k = batch.n_classes;
    let (per_class, labeled_pixels, ignored_pixels) = counts(batch.predictions.iter(), batch.targets.iter(), k);
    let miou = match mode {
        IoUMode::Pooled => mean_present(&per_class).unwrap_or(1.0),
        IoUMode::PerImage => {
            let mut scores = Vec::new();
            Zip::from(batch.predictions.axis_iter(Axis(0))).and(batch.targets.axis_iter(Axis(0))).for_each(|p, t| {
                if let Some(s) = mean_present(&counts(p.iter(), t.iter(), k).0) {
                    scores.push(s);
                }
            });
            if scores.is_empty() {
                1.0
            } else {
                scores.iter().sum::<f64>() / scores.len() as f64
            }
        }
    };
    MiouReport { mode, miou, per_class, labeled_pixels, ignored_pixels }
}
