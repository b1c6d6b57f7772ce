use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

/// Feature matrix with integer class labels and optional measurement groups.
///
/// Rows are samples, columns are features. `n_classes` is fixed at
/// construction and survives sub-setting, so a training subset may lack some
/// classes while still describing the full label space.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    class_names: Option<Vec<String>>,
    group_labels: Option<Vec<usize>>,
    group_names: Option<Vec<String>>,
}

pub(crate) fn check_finite(m: &Array2<f64>, what: &str) -> Result<()> {
    for ((r, c), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::Validation(format!(
                "{what} contains non-finite value {v} at row {r}, column {c}"
            )));
        }
    }
    Ok(())
}

/// Builds a dense matrix from nested rows, rejecting ragged input.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut flat = Vec::with_capacity(rows.len() * cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Validation(format!(
                "row {i} has {} columns, expected {cols}",
                row.len()
            )));
        }
        flat.extend_from_slice(row);
    }
    Array2::from_shape_vec((rows.len(), cols), flat).map_err(|e| Error::Validation(e.to_string()))
}

impl Dataset {
    /// Validates and assembles a dataset.
    ///
    /// The class count is `class_names.len()` when names are given, otherwise
    /// `1 + max(label)`.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        class_names: Option<Vec<String>>,
        group_labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 || d == 0 {
            return Err(Error::Validation(format!("dataset must be non-empty, got {n}x{d}")));
        }
        if labels.len() != n {
            return Err(Error::Validation(format!(
                "{} labels for {n} feature rows",
                labels.len()
            )));
        }
        check_finite(&features, "feature matrix")?;
        let max_label = labels.iter().copied().max().unwrap_or(0);
        let n_classes = match &class_names {
            Some(names) => {
                if let Some(pos) = labels.iter().position(|&l| l >= names.len()) {
                    return Err(Error::Validation(format!(
                        "label {} at row {pos} out of range for {} class names",
                        labels[pos],
                        names.len()
                    )));
                }
                names.len()
            }
            None => max_label + 1,
        };
        if n_classes < 2 {
            return Err(Error::Validation(format!(
                "at least 2 classes required, found {n_classes}"
            )));
        }
        if let Some(groups) = &group_labels {
            if groups.len() != n {
                return Err(Error::Validation(format!(
                    "{} group labels for {n} rows",
                    groups.len()
                )));
            }
        }
        Ok(Dataset {
            features,
            labels,
            n_classes,
            class_names,
            group_labels,
            group_names: None,
        })
    }

    /// Same as [`Dataset::new`] but starting from nested rows.
    pub fn from_rows(
        rows: &[Vec<f64>],
        labels: Vec<usize>,
        class_names: Option<Vec<String>>,
        group_labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?, labels, class_names, group_labels)
    }

    /// Forces the class count, e.g. to keep `K` fixed across subsets.
    pub fn with_n_classes(mut self, k: usize) -> Result<Self> {
        if k < 2 || self.labels.iter().any(|&l| l >= k) {
            return Err(Error::Validation(format!("cannot set class count to {k}")));
        }
        if let Some(names) = &self.class_names {
            if names.len() != k {
                return Err(Error::Validation(format!(
                    "class count {k} disagrees with {} class names",
                    names.len()
                )));
            }
        }
        self.n_classes = k;
        Ok(self)
    }

    pub fn with_group_names(mut self, names: Vec<String>) -> Result<Self> {
        match &self.group_labels {
            Some(g) if g.iter().all(|&v| v < names.len()) => {
                self.group_names = Some(names);
                Ok(self)
            }
            _ => Err(Error::Validation("group names need matching group labels".into())),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn group_labels(&self) -> Option<&[usize]> {
        self.group_labels.as_deref()
    }

    pub fn group_names(&self) -> Option<&[String]> {
        self.group_names.as_deref()
    }

    /// Display name of a class, falling back to its id.
    pub fn class_name(&self, class: usize) -> String {
        self.class_names
            .as_ref()
            .and_then(|n| n.get(class).cloned())
            .unwrap_or_else(|| class.to_string())
    }

    pub fn group_name(&self, group: usize) -> String {
        self.group_names
            .as_ref()
            .and_then(|n| n.get(group).cloned())
            .unwrap_or_else(|| group.to_string())
    }

    /// Rows selected by `idx`, keeping class count, names and groups.
    pub fn subset(&self, idx: &[usize]) -> Result<Dataset> {
        if idx.is_empty() {
            return Err(Error::Validation("empty subset".into()));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.n_rows()) {
            return Err(Error::Validation(format!(
                "row index {bad} out of bounds for {} rows",
                self.n_rows()
            )));
        }
        Ok(Dataset {
            features: self.features.select(Axis(0), idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            class_names: self.class_names.clone(),
            group_labels: self
                .group_labels
                .as_ref()
                .map(|g| idx.iter().map(|&i| g[i]).collect()),
            group_names: self.group_names.clone(),
        })
    }

    /// Feature rows selected by `idx`.
    pub fn select_features(&self, idx: &[usize]) -> Array2<f64> {
        self.features.select(Axis(0), idx)
    }

    /// Replaces the feature matrix, keeping labels and metadata.
    pub fn with_features(&self, features: Array2<f64>) -> Result<Dataset> {
        if features.nrows() != self.n_rows() || features.ncols() == 0 {
            return Err(Error::Validation(format!(
                "replacement features {:?} incompatible with {} rows",
                features.dim(),
                self.n_rows()
            )));
        }
        check_finite(&features, "feature matrix")?;
        Ok(Dataset {
            features,
            ..self.clone()
        })
    }

    /// Replaces the labels, keeping features and metadata.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset> {
        if labels.len() != self.n_rows() || labels.iter().any(|&l| l >= self.n_classes) {
            return Err(Error::Validation("replacement labels incompatible with dataset".into()));
        }
        Ok(Dataset {
            labels,
            ..self.clone()
        })
    }

    /// Number of rows carrying each class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Row-stochastic matrix of class probabilities, one row per test input.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    probs: Array2<f64>,
}

pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

impl PredictionMatrix {
    pub fn new(probs: Array2<f64>) -> Result<Self> {
        if probs.ncols() == 0 {
            return Err(Error::Validation("prediction matrix has no class columns".into()));
        }
        for (r, row) in probs.outer_iter().enumerate() {
            let mut sum = 0.0;
            for (c, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Validation(format!(
                        "probability {p} at row {r}, class {c} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Validation(format!("row {r} sums to {sum}")));
            }
        }
        Ok(PredictionMatrix { probs })
    }

    /// One-hot rows for the given classes.
    pub fn one_hot(classes: &[usize], n_classes: usize) -> Self {
        let mut probs = Array2::zeros((classes.len(), n_classes));
        for (r, &c) in classes.iter().enumerate() {
            probs[[r, c]] = 1.0;
        }
        PredictionMatrix { probs }
    }

    /// Divides every row by its sum. Rows must be non-negative with positive mass.
    pub fn renormalized(mut probs: Array2<f64>) -> Result<Self> {
        for (r, mut row) in probs.outer_iter_mut().enumerate() {
            let sum: f64 = row.sum();
            if !(sum > 0.0 && sum.is_finite()) {
                return Err(Error::Validation(format!("row {r} has no probability mass")));
            }
            row.mapv_inplace(|p| p / sum);
        }
        Self::new(probs)
    }

    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.probs
    }

    pub fn n_rows(&self) -> usize {
        self.probs.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.probs.ncols()
    }

    /// Most probable class per row; ties go to the lowest class index.
    pub fn argmax_labels(&self) -> Vec<usize> {
        self.probs
            .outer_iter()
            .map(|row| {
                let mut best = 0;
                for (c, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}

/// Free-function form of [`PredictionMatrix::argmax_labels`].
pub fn argmax_labels(preds: &PredictionMatrix) -> Vec<usize> {
    preds.argmax_labels()
}
