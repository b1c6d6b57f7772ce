//! In-process reference classifiers and the [`Model`] abstraction they share
//! with external models.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::dataset::{Dataset, PredictionMatrix};
use crate::error::{Error, Result};

pub mod ensemble;
pub mod kernel;
pub mod logreg;
pub mod nn;
pub mod parity;

pub use ensemble::{ensemble_predict, power_transform_column, Ensemble, EnsembleConfig};
pub use kernel::{predict_distance_softmax, DistanceSoftmax, KernelShape, KernelSpec};
pub use logreg::{fit_logreg, logreg_loss_and_grad, LogRegConfig, LogRegModel, LogisticRegression};
pub use nn::{nearest_rows, predict_1nn, NearestNeighbor};
pub use parity::{predict_parity_oracle, ParityOracle};

/// A fitted-on-demand classifier: training set and test inputs in,
/// class probabilities out.
pub trait Model: Send + Sync {
    fn name(&self) -> String;

    fn predict(&self, train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix>;
}

impl<M: Model + ?Sized> Model for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn predict(&self, train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
        (**self).predict(train, test_inputs)
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["1nn", "distance-softmax", "logreg", "parity-oracle"];

fn parse_param<T: std::str::FromStr>(params: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("parameter {key}={v:?} is not valid"))),
    }
}

const ENSEMBLE_KEYS: [&str; 5] = ["n_ensembles", "permute_features", "permute_labels", "power_transform", "seed"];

/// Instantiates a built-in model by name.
///
/// Recognised parameters: `shape`, `temperature`, `epsilon` for
/// `distance-softmax`; `l2_strength`, `learning_rate`, `max_iters`,
/// `tolerance` for `logreg`. Any model accepts `n_ensembles` (> 1 wraps it in
/// an [`Ensemble`]) with `permute_features`, `permute_labels`,
/// `power_transform` (all default `true`) and `seed`.
pub fn builtin(name: &str, params: &BTreeMap<String, String>) -> Result<Box<dyn Model>> {
    let allowed: &[&str] = match name {
        "1nn" | "parity-oracle" => &[],
        "distance-softmax" => &["shape", "temperature", "epsilon"],
        "logreg" => &["l2_strength", "learning_rate", "max_iters", "tolerance"],
        other => {
            return Err(Error::Config(format!(
                "unknown built-in model {other:?}; expected one of {BUILTIN_NAMES:?}"
            )))
        }
    };
    if let Some(k) = params
        .keys()
        .find(|k| !allowed.contains(&k.as_str()) && !ENSEMBLE_KEYS.contains(&k.as_str()))
    {
        return Err(Error::Config(format!("model {name} does not take parameter {k:?}")));
    }
    let base: Box<dyn Model> = match name {
        "1nn" => Box::new(NearestNeighbor),
        "parity-oracle" => Box::new(ParityOracle),
        "distance-softmax" => {
            let d = KernelSpec::default();
            let spec = KernelSpec::new(
                parse_param(params, "shape", d.shape.as_str().to_string())?.parse()?,
                parse_param(params, "temperature", d.temperature)?,
                parse_param(params, "epsilon", d.epsilon)?,
            )
            .map_err(|e| Error::Config(e.to_string()))?;
            Box::new(DistanceSoftmax { spec })
        }
        _ => {
            let d = LogRegConfig::default();
            let config = LogRegConfig {
                l2_strength: parse_param(params, "l2_strength", d.l2_strength)?,
                learning_rate: parse_param(params, "learning_rate", d.learning_rate)?,
                max_iters: parse_param(params, "max_iters", d.max_iters)?,
                tolerance: parse_param(params, "tolerance", d.tolerance)?,
            };
            config.validate().map_err(|e| Error::Config(e.to_string()))?;
            Box::new(LogisticRegression { config })
        }
    };
    let n_members: usize = parse_param(params, "n_ensembles", 1)?;
    if n_members == 0 {
        return Err(Error::Config("n_ensembles must be at least 1".into()));
    }
    if n_members == 1 {
        return Ok(base);
    }
    Ok(Box::new(Ensemble {
        base,
        config: EnsembleConfig {
            n_members,
            permute_features: parse_param(params, "permute_features", true)?,
            permute_labels: parse_param(params, "permute_labels", true)?,
            power_transform: parse_param(params, "power_transform", true)?,
            seed: parse_param(params, "seed", 0)?,
        },
    }))
}
