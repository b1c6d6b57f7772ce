//! Softmax over transformed distances to every training row.

use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, PredictionMatrix};
use crate::error::{Error, Result};

use super::nn::{check_dims, squared_distance};
use super::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    /// `d^(-1/2)`
    InverseSqrt,
    /// `-d`
    NegLinear,
    /// `-d^2`
    NegSquared,
    /// `-sqrt(d)`
    NegSqrt,
}

impl KernelShape {
    pub const ALL: [KernelShape; 4] = [
        KernelShape::InverseSqrt,
        KernelShape::NegLinear,
        KernelShape::NegSquared,
        KernelShape::NegSqrt,
    ];

    pub fn score(self, d: f64) -> f64 {
        match self {
            KernelShape::InverseSqrt => d.sqrt().recip(),
            KernelShape::NegLinear => -d,
            KernelShape::NegSquared => -d * d,
            KernelShape::NegSqrt => -d.sqrt(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KernelShape::InverseSqrt => "inverse_sqrt",
            KernelShape::NegLinear => "neg_linear",
            KernelShape::NegSquared => "neg_squared",
            KernelShape::NegSqrt => "neg_sqrt",
        }
    }
}

impl FromStr for KernelShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelShape::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown kernel shape {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub shape: KernelShape,
    pub temperature: f64,
    /// Distances are floored at this value before scoring.
    pub epsilon: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            shape: KernelShape::InverseSqrt,
            temperature: 1.0,
            epsilon: 1e-12,
        }
    }
}

impl KernelSpec {
    pub fn new(shape: KernelShape, temperature: f64, epsilon: f64) -> Result<Self> {
        let spec = KernelSpec {
            shape,
            temperature,
            epsilon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Validation(format!("temperature {} must be positive", self.temperature)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Validation(format!("epsilon {} must be positive", self.epsilon)));
        }
        Ok(())
    }
}

/// `p(c | x) = sum_{i: y_i = c} exp(s_i) / sum_j exp(s_j)` with
/// `s_i = shape(max(|x - x_i|, epsilon)) / temperature`, max-shifted.
pub fn predict_distance_softmax(train: &Dataset, test_inputs: &Array2<f64>, spec: KernelSpec) -> Result<PredictionMatrix> {
    check_dims(train, test_inputs)?;
    spec.validate()?;
    let k = train.n_classes();
    let labels = train.labels();
    let mut probs = Array2::zeros((test_inputs.nrows(), k));
    let mut scores = vec![0.0; train.n_rows()];
    for (r, x) in test_inputs.outer_iter().enumerate() {
        for (s, t) in scores.iter_mut().zip(train.features().outer_iter()) {
            let d = squared_distance(x, t).sqrt().max(spec.epsilon);
            *s = spec.shape.score(d) / spec.temperature;
        }
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut mass = vec![0.0; k];
        for (&s, &y) in scores.iter().zip(labels) {
            mass[y] += (s - max).exp();
        }
        let total: f64 = mass.iter().sum();
        for (c, m) in mass.into_iter().enumerate() {
            probs[[r, c]] = m / total;
        }
    }
    PredictionMatrix::new(probs)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DistanceSoftmax {
    pub spec: KernelSpec,
}

impl Model for DistanceSoftmax {
    fn name(&self) -> String {
        "distance-softmax".into()
    }

    fn predict(&self, train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
        predict_distance_softmax(train, test_inputs, self.spec)
    }
}
