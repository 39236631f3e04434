//! Evaluation metrics: multi-label F1, mean IoU and normalized MSE.

mod classification;
mod regression;
mod segmentation;

pub use classification::{f1_multilabel, ClassF1, F1Mode, F1Report, MultiLabelBatch};
pub use regression::{normalized_mse, NormalizedMseReport, RegressionBatch};
pub use segmentation::{miou, ClassIoU, IoUMode, MaskBatch, MiouReport};

/// Mean of the ratios `num / den` (each `den > 0`), accumulated in
/// double-double so the result is the correctly rounded mean.
pub(crate) fn mean_of_ratios(ratios: impl IntoIterator<Item = (u64, u64)>) -> Option<f64> {
    let (mut hi, mut lo, mut n) = (0.0f64, 0.0f64, 0u64);
    for (num, den) in ratios {
        let (a, b) = (num as f64, den as f64);
        let q = a / b;
        lo += (-q).mul_add(b, a) / b;
        let s = hi + q;
        let v = s - hi;
        lo += (hi - (s - v)) + (q - v);
        hi = s;
        n += 1;
    }
    (n > 0).then(|| {
        let k = n as f64;
        let m = hi / k;
        m + ((-m).mul_add(k, hi) + lo) / k
    })
}
