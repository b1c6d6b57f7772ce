//! Confusion matrices, accuracy, macro-F1 and aggregation over splits.

use serde::{Deserialize, Serialize};

use crate::dataset::PredictionMatrix;
use crate::error::{Error, Result};

/// K x K counts, rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if counts.iter().any(|r| r.len() != k) {
            return Err(Error::Metric("confusion matrix must be square".into()));
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    /// `trace / total`; errors on an empty matrix.
    pub fn accuracy(&self) -> Result<f64> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Metric("accuracy of an empty confusion matrix".into()));
        }
        Ok(self.trace() as f64 / total as f64)
    }

    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.n_classes() != self.n_classes() {
            return Err(Error::Metric(format!(
                "cannot add {}-class and {}-class confusion matrices",
                self.n_classes(),
                other.n_classes()
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }
}

pub fn confusion_matrix(predicted: &[usize], truth: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::Metric(format!(
            "{} predictions for {} truth labels",
            predicted.len(),
            truth.len()
        )));
    }
    let mut cm = ConfusionMatrix::zeros(k);
    for (&p, &t) in predicted.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(Error::Metric(format!("label pair ({t}, {p}) outside {k} classes")));
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

/// Unweighted mean of per-class F1. A class with no true positives and
/// therefore zero precision and recall contributes 0.
pub fn macro_f1(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::Metric("macro-F1 of an empty confusion matrix".into()));
    }
    let k = cm.n_classes();
    let mut sum = 0.0;
    for c in 0..k {
        let tp = cm.get(c, c) as f64;
        let predicted: u64 = (0..k).map(|t| cm.get(t, c)).sum();
        let actual: u64 = cm.rows()[c].iter().sum();
        // 2 tp / (predicted + actual) equals 2PR/(P+R) whenever it is defined
        let f1 = if tp == 0.0 {
            0.0
        } else {
            2.0 * tp / (predicted + actual) as f64
        };
        sum += f1;
    }
    Ok(sum / k as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub split_tag: String,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub error_rate: f64,
    pub confusion: ConfusionMatrix,
}

pub fn evaluate(split_tag: &str, preds: &PredictionMatrix, truth: &[usize]) -> Result<EvalRecord> {
    let predicted = preds.argmax_labels();
    let cm = confusion_matrix(&predicted, truth, preds.n_classes())?;
    record_from_confusion(split_tag, cm)
}

pub fn record_from_confusion(split_tag: &str, confusion: ConfusionMatrix) -> Result<EvalRecord> {
    let accuracy = confusion.accuracy()?;
    Ok(EvalRecord {
        split_tag: split_tag.to_string(),
        accuracy,
        macro_f1: macro_f1(&confusion)?,
        error_rate: 1.0 - accuracy,
        confusion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> MeanStd {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let std = if n > 1.0 {
        (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanStd { mean, std }
}

/// Mean and sample standard deviation of each metric plus the summed confusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_records: usize,
    pub accuracy: MeanStd,
    pub macro_f1: MeanStd,
    pub error_rate: MeanStd,
    pub confusion: ConfusionMatrix,
}

pub fn aggregate(records: &[EvalRecord]) -> Result<Summary> {
    let first = records
        .first()
        .ok_or_else(|| Error::Metric("cannot aggregate zero records".into()))?;
    let mut confusion = ConfusionMatrix::zeros(first.confusion.n_classes());
    for r in records {
        confusion.add(&r.confusion)?;
    }
    let accuracy = mean_std(records.iter().map(|r| r.accuracy));
    let error_std = mean_std(records.iter().map(|r| r.error_rate)).std;
    Ok(Summary {
        n_records: records.len(),
        accuracy,
        macro_f1: mean_std(records.iter().map(|r| r.macro_f1)),
        error_rate: MeanStd {
            mean: 1.0 - accuracy.mean,
            std: error_std,
        },
        confusion,
    })
}

/// Per-split CSV: `split_tag,n_test,accuracy,macro_f1,error_rate`, six decimals.
pub fn records_to_csv(records: &[EvalRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["split_tag", "n_test", "accuracy", "macro_f1", "error_rate"])
        .expect("in-memory write");
    for r in records {
        w.write_record([
            r.split_tag.clone(),
            r.confusion.total().to_string(),
            format!("{:.6}", r.accuracy),
            format!("{:.6}", r.macro_f1),
            format!("{:.6}", r.error_rate),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Confusion matrix as CSV with a header of class names.
pub fn confusion_to_csv(cm: &ConfusionMatrix, class_names: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(class_names.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (t, row) in cm.rows().iter().enumerate() {
        let mut rec = vec![class_names.get(t).cloned().unwrap_or_else(|| t.to_string())];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_identity() {
        let cm = confusion_matrix(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        for t in 0..3 {
            for p in 0..3 {
                assert_eq!(cm.get(t, p), u64::from(t == p));
            }
        }
        assert_eq!(macro_f1(&cm).unwrap(), 1.0);
    }

    #[test]
    fn direct_count() {
        let cm = confusion_matrix(&[0, 0, 1, 1, 1, 1], &[0, 0, 0, 1, 1, 1], 2).unwrap();
        assert_eq!(cm.rows(), &[vec![2, 1], vec![0, 3]]);
    }

    #[test]
    fn empty_lists_give_zero_matrix() {
        let cm = confusion_matrix(&[], &[], 3).unwrap();
        assert_eq!(cm.total(), 0);
        assert!(matches!(macro_f1(&cm), Err(Error::Metric(_))));
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(confusion_matrix(&[0], &[0, 1], 2), Err(Error::Metric(_))));
    }

    #[test]
    fn hand_derived_macro_f1() {
        // class 0: P = 2/2, R = 2/3 -> 0.8; class 1: P = 3/4, R = 1 -> 6/7
        let cm = ConfusionMatrix::from_counts(vec![vec![2, 1], vec![0, 3]]).unwrap();
        assert!((macro_f1(&cm).unwrap() - 0.828_571_428_571_428_5).abs() < 1e-12);
    }

    #[test]
    fn never_predicted_class_scores_zero() {
        // class 2 never true and never predicted
        let cm = ConfusionMatrix::from_counts(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 0]]).unwrap();
        assert!((macro_f1(&cm).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_single_and_pair() {
        let a = record_from_confusion("a", ConfusionMatrix::from_counts(vec![vec![1, 1], vec![0, 0]]).unwrap()).unwrap();
        let b = record_from_confusion("b", ConfusionMatrix::from_counts(vec![vec![1, 0], vec![0, 1]]).unwrap()).unwrap();
        let s = aggregate(std::slice::from_ref(&a)).unwrap();
        assert_eq!(s.accuracy.mean, a.accuracy);
        assert_eq!(s.accuracy.std, 0.0);
        let s = aggregate(&[a.clone(), b.clone()]).unwrap();
        assert!((s.accuracy.mean - 0.75).abs() < 1e-15);
        assert!((s.error_rate.mean - 0.25).abs() < 1e-15);
        assert_eq!(s.confusion.total(), a.confusion.total() + b.confusion.total());
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn records_csv_layout() {
        let r = record_from_confusion("fold-0", ConfusionMatrix::from_counts(vec![vec![1, 0], vec![0, 1]]).unwrap()).unwrap();
        let text = records_to_csv(&[r]);
        assert_eq!(text, "split_tag,n_test,accuracy,macro_f1,error_rate\nfold-0,2,1.000000,1.000000,0.000000\n");
    }
}
