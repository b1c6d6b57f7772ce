//! Multinomial logistic regression fitted by full-batch gradient descent.
//!
//! Objective: mean cross-entropy over training rows plus
//! `(l2_strength / 2) * ||W||_F^2`. The bias is not penalised. Parameters
//! start at zero. The first iteration tries a step of `learning_rate`, later
//! ones the Barzilai-Borwein step from the previous move; a step that would
//! raise the objective is halved and retried, so the recorded loss trace
//! never increases. Fitting stops at `tolerance` on the gradient norm, after
//! `max_iters`, or when no step lowers the objective any more.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, PredictionMatrix};
use crate::error::{Error, Result};

use super::nn::check_dims;
use super::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub l2_strength: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            l2_strength: 1.0,
            learning_rate: 0.1,
            max_iters: 5000,
            tolerance: 1e-6,
        }
    }
}

impl LogRegConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.l2_strength >= 0.0
            && self.l2_strength.is_finite()
            && self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.max_iters > 0
            && self.tolerance > 0.0;
        if !ok {
            return Err(Error::Validation(format!("invalid logistic regression config {self:?}")));
        }
        Ok(())
    }
}

/// Weights `K x d` and bias `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LogRegGrad {
    pub fn norm(&self) -> f64 {
        (self.weights.iter().chain(self.bias.iter()).map(|g| g * g).sum::<f64>()).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: LogRegModel,
    pub converged: bool,
    pub iterations: usize,
    /// Objective at the start and after every accepted step.
    pub loss_trace: Vec<f64>,
    pub final_grad_norm: f64,
}

impl LogRegModel {
    pub fn zeros(n_classes: usize, n_features: usize) -> Self {
        LogRegModel {
            weights: Array2::zeros((n_classes, n_features)),
            bias: Array1::zeros(n_classes),
        }
    }

    fn logits(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.weights.t()) + self.bias.view().insert_axis(Axis(0))
    }

    pub fn predict_proba(&self, x: &Array2<f64>) -> Result<PredictionMatrix> {
        let mut z = self.logits(x);
        softmax_rows(&mut z);
        PredictionMatrix::renormalized(z)
    }
}

fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.outer_iter_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

/// Objective value and its exact gradient at `model`.
pub fn logreg_loss_and_grad(model: &LogRegModel, train: &Dataset, l2_strength: f64) -> Result<(f64, LogRegGrad)> {
    let x = train.features();
    let (k, d) = model.weights.dim();
    if d != train.n_features() || k != train.n_classes() || model.bias.len() != k {
        return Err(Error::Validation(format!(
            "model shape {k}x{d} does not match data with {} features and {} classes",
            train.n_features(),
            train.n_classes()
        )));
    }
    let n = x.nrows() as f64;
    let mut z = model.logits(x);
    let mut loss = 0.0;
    for (mut row, &y) in z.outer_iter_mut().zip(train.labels()) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[y];
        row.mapv_inplace(|v| (v - lse).exp());
        row[y] -= 1.0;
    }
    // z now holds (P - Y)
    loss = loss / n + 0.5 * l2_strength * model.weights.iter().map(|w| w * w).sum::<f64>();
    let grad_w = z.t().dot(x) / n + &(&model.weights * l2_strength);
    let grad_b = z.sum_axis(Axis(0)) / n;
    Ok((loss, LogRegGrad { weights: grad_w, bias: grad_b }))
}

fn dot_params(a_w: &Array2<f64>, a_b: &Array1<f64>, b_w: &Array2<f64>, b_b: &Array1<f64>) -> f64 {
    a_w.iter().zip(b_w).map(|(x, y)| x * y).sum::<f64>() + a_b.iter().zip(b_b).map(|(x, y)| x * y).sum::<f64>()
}

/// Halvings tried before an iteration gives up; `learning_rate * 2^-40` is
/// far below any step that can still change the objective.
const MAX_HALVINGS: usize = 40;

pub fn fit_logreg(train: &Dataset, config: LogRegConfig) -> Result<FitOutcome> {
    config.validate()?;
    let mut model = LogRegModel::zeros(train.n_classes(), train.n_features());
    let (mut loss, mut grad) = logreg_loss_and_grad(&model, train, config.l2_strength)?;
    let mut trace = vec![loss];
    let mut iterations = 0;
    let mut step0 = config.learning_rate;
    while iterations < config.max_iters && grad.norm() >= config.tolerance {
        iterations += 1;
        let mut accepted = None;
        let mut step = step0;
        for _ in 0..=MAX_HALVINGS {
            let candidate = LogRegModel {
                weights: &model.weights - &(&grad.weights * step),
                bias: &model.bias - &(&grad.bias * step),
            };
            let (l, g) = logreg_loss_and_grad(&candidate, train, config.l2_strength)?;
            if l <= loss {
                accepted = Some((candidate, l, g));
                break;
            }
            step *= 0.5;
        }
        // no step lowered the objective: at the optimum up to rounding
        let Some((next, l, g)) = accepted else { break };
        if l == loss && next == model {
            break;
        }
        // Barzilai-Borwein step for the next iteration
        let (sw, sb) = (&next.weights - &model.weights, &next.bias - &model.bias);
        let (yw, yb) = (&g.weights - &grad.weights, &g.bias - &grad.bias);
        let sy = dot_params(&sw, &sb, &yw, &yb);
        let ss = dot_params(&sw, &sb, &sw, &sb);
        step0 = if sy > 0.0 && (ss / sy).is_finite() { ss / sy } else { config.learning_rate };
        model = next;
        loss = l;
        grad = g;
        trace.push(loss);
    }
    let final_grad_norm = grad.norm();
    Ok(FitOutcome {
        model,
        converged: final_grad_norm < config.tolerance,
        iterations,
        loss_trace: trace,
        final_grad_norm,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LogisticRegression {
    pub config: LogRegConfig,
}

impl Model for LogisticRegression {
    fn name(&self) -> String {
        "logreg".into()
    }

    fn predict(&self, train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
        check_dims(train, test_inputs)?;
        fit_logreg(train, self.config)?.model.predict_proba(test_inputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{repeat_samples, two_point_1d, Grid1D};
    use ndarray::array;

    #[test]
    fn uniform_loss_at_zero() {
        let s = two_point_1d(Grid1D::default()).unwrap();
        let (loss, _) = logreg_loss_and_grad(&LogRegModel::zeros(2, 1), &s.train, 1.0).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn l2_term_adds_half_squared_norm() {
        let s = two_point_1d(Grid1D::default()).unwrap();
        let m = LogRegModel {
            weights: array![[0.3], [-0.4]],
            bias: array![0.1, 0.0],
        };
        let (a, _) = logreg_loss_and_grad(&m, &s.train, 0.0).unwrap();
        let (b, _) = logreg_loss_and_grad(&m, &s.train, 2.0).unwrap();
        assert!((b - a - 0.25).abs() < 1e-15);
    }

    #[test]
    fn symmetric_boundary_between_points() {
        let s = two_point_1d(Grid1D::default()).unwrap();
        let cfg = LogRegConfig {
            tolerance: 1e-10,
            ..LogRegConfig::default()
        };
        let fit = fit_logreg(&s.train, cfg).unwrap();
        assert!(fit.converged, "{} after {}", fit.final_grad_norm, fit.iterations);
        assert!(fit.final_grad_norm < cfg.tolerance);
        let p = fit.model.predict_proba(&array![[-1.0], [0.0], [1.0]]).unwrap();
        assert!(p.probs()[[0, 1]] < 0.5 && p.probs()[[2, 1]] > 0.5);
        assert!((p.probs()[[1, 1]] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn strong_ridge_gives_priors() {
        let s = repeat_samples(&two_point_1d(Grid1D::default()).unwrap(), 3, Some(0)).unwrap();
        let cfg = LogRegConfig {
            l2_strength: 1e3,
            learning_rate: 1e-3,
            max_iters: 100_000,
            tolerance: 1e-9,
        };
        let fit = fit_logreg(&s.train, cfg).unwrap();
        assert!(fit.model.weights.iter().all(|w| w.abs() < 1e-2));
        // training mean is at -0.5
        let p = fit.model.predict_proba(&array![[-0.5]]).unwrap();
        assert!((p.probs()[[0, 0]] - 0.75).abs() < 1e-3, "{:?}", p.probs());
    }

    #[test]
    fn trace_never_increases() {
        let s = repeat_samples(&two_point_1d(Grid1D::default()).unwrap(), 2, Some(1)).unwrap();
        let cfg = LogRegConfig {
            learning_rate: 50.0,
            ..LogRegConfig::default()
        };
        let fit = fit_logreg(&s.train, cfg).unwrap();
        assert!(fit.loss_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
