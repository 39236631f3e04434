use ndarray::{Array2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `N x K` predicted and reference label indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelBatch {
    pub predictions: Array2<bool>,
    pub targets: Array2<bool>,
}

impl MultiLabelBatch {
    pub fn new(predictions: Array2<bool>, targets: Array2<bool>) -> Result<Self> {
        if predictions.dim() != targets.dim() {
            return Err(Error::Shape(format!("predictions {:?} vs targets {:?}", predictions.dim(), targets.dim())));
        }
        if predictions.ncols() == 0 {
            return Err(Error::Shape("at least one class is required".into()));
        }
        Ok(MultiLabelBatch { predictions, targets })
    }

    pub fn n_classes(&self) -> usize {
        self.targets.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Mode {
    Micro,
    #[default]
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassF1 {
    pub class: usize,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// `None` when the class appears in neither predictions nor targets.
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1Report {
    pub mode: F1Mode,
    pub score: f64,
    pub micro: f64,
    pub macro_f1: f64,
    pub n_samples: usize,
    pub per_class: Vec<ClassF1>,
}

fn f1(tp: u64, fp: u64, fn_: u64) -> Option<f64> {
    let d = 2 * tp + fp + fn_;
    (d > 0).then(|| 2.0 * tp as f64 / d as f64)
}

/// A batch with no positive labels anywhere scores 1.
pub fn f1_multilabel(batch: &MultiLabelBatch, mode: F1Mode) -> F1Report {
    let per_class: Vec<ClassF1> = batch
        .predictions
        .axis_iter(Axis(1))
        .zip(batch.targets.axis_iter(Axis(1)))
        .enumerate()
        .map(|(class, (p, t))| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            Zip::from(&p).and(&t).for_each(|&p, &t| match (p, t) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            });
            ClassF1 { class, tp, fp, fn_, f1: f1(tp, fp, fn_) }
        })
        .collect();
    let sum = |f: fn(&ClassF1) -> u64| per_class.iter().map(f).sum::<u64>();
    let micro = f1(sum(|c| c.tp), sum(|c| c.fp), sum(|c| c.fn_)).unwrap_or(1.0);
    let present = per_class.iter().map(|c| (2 * c.tp, 2 * c.tp + c.fp + c.fn_)).filter(|&(_, d)| d > 0);
    let macro_f1 = super::mean_of_ratios(present).unwrap_or(1.0);
    let score = match mode {
        F1Mode::Micro => micro,
        F1Mode::Macro => macro_f1,
    };
    F1Report { mode, score, micro, macro_f1, n_samples: batch.targets.nrows(), per_class }
}
