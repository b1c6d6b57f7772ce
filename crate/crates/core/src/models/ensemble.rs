//! Permutation / power-transform ensembling around any [`Model`].
//!
//! Member `m` draws from the stream `derive_seed(config.seed, m)`, in this
//! order: a feature permutation, a class-label permutation, then one coin
//! per (permuted) feature column deciding whether that column gets the
//! signed square root. Disabled steps consume no randomness. Member outputs
//! are mapped back to the original class order and averaged in member order,
//! so the result does not depend on how members are scheduled.

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, PredictionMatrix};
use crate::error::{Error, Result};
use crate::rng;

use super::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_members: usize,
    pub permute_features: bool,
    pub permute_labels: bool,
    pub power_transform: bool,
    pub seed: u64,
}

impl EnsembleConfig {
    /// All perturbations enabled.
    pub fn full(n_members: usize, seed: u64) -> Self {
        EnsembleConfig {
            n_members,
            permute_features: true,
            permute_labels: true,
            power_transform: true,
            seed,
        }
    }
}

/// `sign(v) * sqrt(|v|)`, elementwise.
pub fn power_transform_column(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| signed_sqrt(v)).collect()
}

fn signed_sqrt(v: f64) -> f64 {
    if v < 0.0 {
        -(-v).sqrt()
    } else {
        v.sqrt()
    }
}

/// Perturbation drawn for one member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberPlan {
    /// New column `j` is original column `feature_order[j]`.
    pub feature_order: Vec<usize>,
    /// Original class `c` is presented to the base model as `label_map[c]`.
    pub label_map: Vec<usize>,
    /// Columns (after permutation) that receive the power transform.
    pub transformed: Vec<bool>,
}

pub fn member_plan(config: &EnsembleConfig, member: usize, n_features: usize, n_classes: usize) -> MemberPlan {
    let mut r = rng::stream_rng(config.seed, member as u64);
    let mut feature_order: Vec<usize> = (0..n_features).collect();
    if config.permute_features {
        rng::shuffle(&mut feature_order, &mut r);
    }
    let mut label_map: Vec<usize> = (0..n_classes).collect();
    if config.permute_labels {
        rng::shuffle(&mut label_map, &mut r);
    }
    let transformed = if config.power_transform {
        (0..n_features).map(|_| rng::coin(&mut r)).collect()
    } else {
        vec![false; n_features]
    };
    MemberPlan {
        feature_order,
        label_map,
        transformed,
    }
}

fn transform_features(x: &Array2<f64>, plan: &MemberPlan) -> Array2<f64> {
    let mut out = x.select(Axis(1), &plan.feature_order);
    for (j, &t) in plan.transformed.iter().enumerate() {
        if t {
            out.column_mut(j).mapv_inplace(signed_sqrt);
        }
    }
    out
}

/// Runs one member and returns probabilities in the original class order.
pub fn run_member(
    base: &dyn Model,
    train: &Dataset,
    test_inputs: &Array2<f64>,
    plan: &MemberPlan,
) -> Result<Array2<f64>> {
    let train_x = transform_features(train.features(), plan);
    let test_x = transform_features(test_inputs, plan);
    let labels: Vec<usize> = train.labels().iter().map(|&y| plan.label_map[y]).collect();
    // class names would be permuted too; members see anonymous classes
    let member_train = Dataset::new(train_x, labels, None, None)?.with_n_classes(train.n_classes())?;
    let probs = base.predict(&member_train, &test_x)?;
    if probs.n_classes() != train.n_classes() || probs.n_rows() != test_inputs.nrows() {
        return Err(Error::Shape(format!(
            "member returned {}x{} probabilities",
            probs.n_rows(),
            probs.n_classes()
        )));
    }
    Ok(probs.probs().select(Axis(1), &plan.label_map))
}

pub fn ensemble_predict(
    base: &dyn Model,
    train: &Dataset,
    test_inputs: &Array2<f64>,
    config: &EnsembleConfig,
) -> Result<PredictionMatrix> {
    if config.n_members == 0 {
        return Err(Error::Validation("ensemble needs at least one member".into()));
    }
    let members: Vec<Result<Array2<f64>>> = (0..config.n_members)
        .into_par_iter()
        .map(|m| {
            let plan = member_plan(config, m, train.n_features(), train.n_classes());
            run_member(base, train, test_inputs, &plan).map_err(|e| Error::Ensemble {
                member: m,
                source: Box::new(e),
            })
        })
        .collect();
    let mut acc = Array2::<f64>::zeros((test_inputs.nrows(), train.n_classes()));
    for member in members {
        acc += &member?;
    }
    acc /= config.n_members as f64;
    PredictionMatrix::new(acc)
}

/// A model wrapped in ensembling.
pub struct Ensemble {
    pub base: Box<dyn Model>,
    pub config: EnsembleConfig,
}

impl Model for Ensemble {
    fn name(&self) -> String {
        format!("{}-ens{}", self.base.name(), self.config.n_members)
    }

    fn predict(&self, train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
        ensemble_predict(self.base.as_ref(), train, test_inputs, &self.config)
    }
}
