use crate::metrics::{MaskBatch, MultiLabelBatch, RegressionBatch};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveF1 {
    pub micro: f64,
    pub macro_f1: f64,
}

pub fn naive_f1(batch: &MultiLabelBatch) -> NaiveF1 {
    let (n, k) = batch.targets.dim();
    let mut total = [0u64; 3];
    let mut per_class = Vec::new();
    for c in 0..k {
        let mut cnt = [0u64; 3];
        for i in 0..n {
            let p = batch.predictions[[i, c]];
            let t = batch.targets[[i, c]];
            if p && t {
                cnt[0] += 1;
            } else if p {
                cnt[1] += 1;
            } else if t {
                cnt[2] += 1;
            }
        }
        for j in 0..3 {
            total[j] += cnt[j];
        }
        if cnt.iter().any(|&v| v > 0) {
            let prec_den = cnt[0] + cnt[1];
            let rec_den = cnt[0] + cnt[2];
            let precision = if prec_den == 0 { 0.0 } else { cnt[0] as f64 / prec_den as f64 };
            let recall = if rec_den == 0 { 0.0 } else { cnt[0] as f64 / rec_den as f64 };
            per_class.push(if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) });
        }
    }
    let micro = if total.iter().all(|&v| v == 0) {
        1.0
    } else {
        let p = if total[0] + total[1] == 0 { 0.0 } else { total[0] as f64 / (total[0] + total[1]) as f64 };
        let r = if total[0] + total[2] == 0 { 0.0 } else { total[0] as f64 / (total[0] + total[2]) as f64 };
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    };
    let macro_f1 = if per_class.is_empty() { 1.0 } else { per_class.iter().sum::<f64>() / per_class.len() as f64 };
    NaiveF1 { micro, macro_f1 }
}

/// Pooled mIoU over classes present on either side.
pub fn naive_miou(batch: &MaskBatch) -> f64 {
    let (n, h, w) = batch.targets.dim();
    let mut sum = 0.0;
    let mut present = 0;
    for c in 0..batch.n_classes as u8 {
        let (mut inter, mut union) = (0u64, 0u64);
        for i in 0..n {
            for r in 0..h {
                for col in 0..w {
                    let p = batch.predictions[[i, r, col]];
                    let t = batch.targets[[i, r, col]];
                    if p == 255 || t == 255 {
                        continue;
                    }
                    if p == c && t == c {
                        inter += 1;
                    }
                    if p == c || t == c {
                        union += 1;
                    }
                }
            }
        }
        if union > 0 {
            sum += inter as f64 / union as f64;
            present += 1;
        }
    }
    if present == 0 {
        1.0
    } else {
        sum / present as f64
    }
}

/// `(sum of ratios, percent)`, or `None` when a baseline MSE is zero.
pub fn naive_normalized_mse(batch: &RegressionBatch) -> Option<(f64, f64)> {
    let (n, p) = batch.targets.dim();
    let mut sum = 0.0;
    for j in 0..p {
        let mut mse = 0.0;
        let mut base = 0.0;
        for i in 0..n {
            let t = batch.targets[[i, j]];
            mse += (batch.predictions[[i, j]] - t).powi(2);
            base += (batch.baseline_means[j] - t).powi(2);
        }
        if base == 0.0 {
            return None;
        }
        sum += (mse / n as f64) / (base / n as f64);
    }
    Some((sum, 100.0 * sum / p as f64))
}
