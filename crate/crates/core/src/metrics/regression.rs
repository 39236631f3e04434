use ndarray::{Array1, Array2, Axis};
use serde::Serialize;

use crate::error::{Error, Result};

/// `N x P` predictions and targets plus per-parameter means taken from the
/// training split.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionBatch {
    pub predictions: Array2<f64>,
    pub targets: Array2<f64>,
    pub baseline_means: Array1<f64>,
}

impl RegressionBatch {
    pub fn new(predictions: Array2<f64>, targets: Array2<f64>, baseline_means: Array1<f64>) -> Result<Self> {
        if predictions.dim() != targets.dim() || targets.ncols() != baseline_means.len() {
            return Err(Error::Shape(format!(
                "predictions {:?}, targets {:?}, baseline {}",
                predictions.dim(),
                targets.dim(),
                baseline_means.len()
            )));
        }
        if targets.nrows() == 0 || targets.ncols() == 0 {
            return Err(Error::Shape("empty regression batch".into()));
        }
        if baseline_means.iter().chain(predictions.iter()).chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite value in regression batch".into()));
        }
        Ok(RegressionBatch { predictions, targets, baseline_means })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedMseReport {
    /// Sum of per-parameter MSE ratios.
    pub sum: f64,
    /// `100 * sum / P`.
    pub percent: f64,
    pub ratios: Vec<f64>,
    pub mse: Vec<f64>,
    pub baseline_mse: Vec<f64>,
}

pub fn normalized_mse(batch: &RegressionBatch) -> Result<NormalizedMseReport> {
    let sq_err = |pred: &Array2<f64>| (pred - &batch.targets).mapv(|d| d * d).mean_axis(Axis(0)).expect("non-empty");
    let mse = sq_err(&batch.predictions);
    let base = batch.baseline_means.broadcast(batch.targets.dim()).expect("shape checked").to_owned();
    let baseline_mse = sq_err(&base);
    if let Some(i) = baseline_mse.iter().position(|&b| b <= 0.0) {
        return Err(Error::Validation(format!("baseline MSE of parameter {i} is zero; targets equal the baseline mean")));
    }
    let ratios: Vec<f64> = mse.iter().zip(&baseline_mse).map(|(m, b)| m / b).collect();
    let sum: f64 = ratios.iter().sum();
    Ok(NormalizedMseReport {
        sum,
        percent: 100.0 * sum / ratios.len() as f64,
        ratios,
        mse: mse.to_vec(),
        baseline_mse: baseline_mse.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn targets() -> Array2<f64> {
        array![[1.0, 10.0, 100.0, 6.0], [2.0, 30.0, 120.0, 7.0], [4.0, 20.0, 90.0, 6.5]]
    }

    #[test]
    fn fixed_points() {
        let means = array![2.0, 15.0, 110.0, 6.4];
        let perfect = normalized_mse(&RegressionBatch::new(targets(), targets(), means.clone()).unwrap()).unwrap();
        assert_eq!((perfect.sum, perfect.percent), (0.0, 0.0));
        let base = means.broadcast((3, 4)).unwrap().to_owned();
        let r = normalized_mse(&RegressionBatch::new(base, targets(), means).unwrap()).unwrap();
        assert_eq!(r.ratios, vec![1.0; 4]);
        assert_eq!((r.sum, r.percent), (4.0, 100.0));
    }

    #[test]
    fn zero_baseline_error() {
        let t = array![[1.0], [1.0]];
        assert!(normalized_mse(&RegressionBatch::new(t.clone(), t, array![1.0]).unwrap()).is_err());
        assert!(RegressionBatch::new(array![[1.0]], array![[1.0, 2.0]], array![1.0]).is_err());
    }
}
