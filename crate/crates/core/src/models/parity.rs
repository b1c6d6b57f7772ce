use ndarray::Array2;

use crate::dataset::{Dataset, PredictionMatrix};
use crate::error::{Error, Result};

use super::Model;

/// Probability 1 on the XOR of each row's bits.
pub fn predict_parity_oracle(test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
    let mut classes = Vec::with_capacity(test_inputs.nrows());
    for (r, row) in test_inputs.outer_iter().enumerate() {
        let mut bit = 0usize;
        for (c, &v) in row.iter().enumerate() {
            if v == 1.0 {
                bit ^= 1;
            } else if v != 0.0 {
                return Err(Error::Validation(format!("non-binary entry {v} at row {r}, column {c}")));
            }
        }
        classes.push(bit);
    }
    Ok(PredictionMatrix::one_hot(&classes, 2))
}

/// Ignores the training set entirely.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParityOracle;

impl Model for ParityOracle {
    fn name(&self) -> String {
        "parity-oracle".into()
    }

    fn predict(&self, train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
        if train.n_classes() != 2 {
            return Err(Error::Validation("parity oracle is binary".into()));
        }
        predict_parity_oracle(test_inputs)
    }
}
