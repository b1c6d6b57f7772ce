use ndarray::{Array2, ArrayView1};

use crate::dataset::{Dataset, PredictionMatrix};
use crate::error::{Error, Result};

use super::Model;

pub(crate) fn check_dims(train: &Dataset, test_inputs: &Array2<f64>) -> Result<()> {
    if test_inputs.ncols() != train.n_features() {
        return Err(Error::Validation(format!(
            "test inputs have {} features, training data has {}",
            test_inputs.ncols(),
            train.n_features()
        )));
    }
    if test_inputs.nrows() == 0 {
        return Err(Error::Validation("no test inputs".into()));
    }
    Ok(())
}

pub(crate) fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest training row for every test row (Euclidean; ties to
/// the lowest index).
pub fn nearest_rows(train_features: &Array2<f64>, test_inputs: &Array2<f64>) -> Vec<usize> {
    test_inputs
        .outer_iter()
        .map(|x| {
            let mut best = (0, f64::INFINITY);
            for (i, t) in train_features.outer_iter().enumerate() {
                let d = squared_distance(x, t);
                if d < best.1 {
                    best = (i, d);
                }
            }
            best.0
        })
        .collect()
}

/// Probability 1 on the class of the nearest training row.
pub fn predict_1nn(train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
    check_dims(train, test_inputs)?;
    let classes: Vec<usize> = nearest_rows(train.features(), test_inputs)
        .into_iter()
        .map(|i| train.labels()[i])
        .collect();
    Ok(PredictionMatrix::one_hot(&classes, train.n_classes()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NearestNeighbor;

impl Model for NearestNeighbor {
    fn name(&self) -> String {
        "1nn".into()
    }

    fn predict(&self, train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
        predict_1nn(train, test_inputs)
    }
}
