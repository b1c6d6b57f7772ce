//! Train/test splits and fold enumeration.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, stream_rng};

/// Disjoint train and test index lists over a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub seed: u64,
    pub tag: String,
}

impl Split {
    /// Checks non-emptiness, disjointness and index bounds against `n` rows.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.train_idx.is_empty() || self.test_idx.is_empty() {
            return Err(Error::Split(format!("{}: empty train or test side", self.tag)));
        }
        let mut seen = vec![0u8; n];
        for (side, idx) in [(1u8, &self.train_idx), (2u8, &self.test_idx)] {
            for &i in idx {
                if i >= n {
                    return Err(Error::Split(format!("{}: index {i} out of bounds ({n})", self.tag)));
                }
                if seen[i] != 0 {
                    return Err(Error::Split(format!("{}: index {i} appears twice", self.tag)));
                }
                seen[i] = side;
            }
        }
        Ok(())
    }
}

/// Seeded uniform split with `round(train_fraction * n)` training rows.
pub fn random_split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<Split> {
    let n = dataset.n_rows();
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Split(format!("train fraction {train_fraction} not in (0, 1)")));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Split(format!(
            "fraction {train_fraction} of {n} rows leaves an empty side"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut order, &mut rng::rng_from_seed(seed));
    let mut train_idx = order[..n_train].to_vec();
    let mut test_idx = order[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(Split {
        train_idx,
        test_idx,
        seed,
        tag: format!("random-{seed}"),
    })
}

/// `k` random splits, the i-th seeded with `derive_seed(base_seed, i)`.
pub fn random_splits(dataset: &Dataset, k: usize, train_fraction: f64, base_seed: u64) -> Result<Vec<Split>> {
    (0..k)
        .map(|i| {
            let mut s = random_split(dataset, train_fraction, rng::derive_seed(base_seed, i as u64))?;
            s.tag = format!("random-{i}");
            Ok(s)
        })
        .collect()
}

/// Holds out every row of one group.
pub fn group_split(dataset: &Dataset, held_out_group: usize) -> Result<Split> {
    let groups = dataset
        .group_labels()
        .ok_or_else(|| Error::Split("dataset has no group labels".into()))?;
    let (test_idx, train_idx): (Vec<usize>, Vec<usize>) =
        (0..groups.len()).partition(|&i| groups[i] == held_out_group);
    if test_idx.is_empty() {
        return Err(Error::Split(format!("group {held_out_group} does not occur")));
    }
    if train_idx.is_empty() {
        return Err(Error::Split(format!(
            "holding out group {held_out_group} leaves no training rows"
        )));
    }
    Ok(Split {
        train_idx,
        test_idx,
        seed: 0,
        tag: format!("group-{}", dataset.group_name(held_out_group)),
    })
}

/// One split per distinct group, in ascending group id order.
pub fn group_splits(dataset: &Dataset) -> Result<Vec<Split>> {
    let groups = dataset
        .group_labels()
        .ok_or_else(|| Error::Split("dataset has no group labels".into()))?;
    let mut ids = groups.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter().map(|g| group_split(dataset, g)).collect()
}

/// Draws `train_size` training rows uniformly from the rows outside `test_idx`.
pub fn subsample_train_split(
    dataset: &Dataset,
    train_size: usize,
    test_idx: &[usize],
    seed: u64,
) -> Result<Split> {
    let n = dataset.n_rows();
    let mut is_test = vec![false; n];
    for &i in test_idx {
        if i >= n {
            return Err(Error::Split(format!("test index {i} out of bounds ({n})")));
        }
        if is_test[i] {
            return Err(Error::Split(format!("test index {i} repeated")));
        }
        is_test[i] = true;
    }
    let pool: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
    if train_size == 0 || train_size > pool.len() {
        return Err(Error::Split(format!(
            "train size {train_size} not in 1..={} available rows",
            pool.len()
        )));
    }
    let train_idx = rng::sample_sorted(&pool, train_size, &mut rng::rng_from_seed(seed));
    let split = Split {
        train_idx,
        test_idx: test_idx.to_vec(),
        seed,
        tag: format!("subsample-{train_size}-{seed}"),
    };
    split.validate(n)?;
    Ok(split)
}

/// All single-row test folds: fold `i` tests row `i` and trains on the rest.
pub fn enumerate_exhaustive_folds(n: usize) -> Result<Vec<Split>> {
    if n < 2 {
        return Err(Error::Split(format!("need at least 2 rows for folds, got {n}")));
    }
    Ok((0..n)
        .map(|i| Split {
            train_idx: (0..n).filter(|&j| j != i).collect(),
            test_idx: vec![i],
            seed: 0,
            tag: format!("fold-{i}"),
        })
        .collect())
}

/// How much of each fold's non-test rows to train on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "size")]
pub enum ParityRegime {
    All,
    Half,
    Quarter,
    Constant(usize),
}

impl ParityRegime {
    /// Training-set size for a fold with `available` non-test rows.
    pub fn train_size(self, available: usize) -> usize {
        match self {
            ParityRegime::All => available,
            ParityRegime::Half => available / 2,
            ParityRegime::Quarter => available / 4,
            ParityRegime::Constant(c) => c,
        }
    }

    pub fn slug(self) -> String {
        match self {
            ParityRegime::All => "all".into(),
            ParityRegime::Half => "half".into(),
            ParityRegime::Quarter => "quarter".into(),
            ParityRegime::Constant(c) => format!("constant-{c}"),
        }
    }
}

impl std::str::FromStr for ParityRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(ParityRegime::All),
            "half" => Ok(ParityRegime::Half),
            "quarter" => Ok(ParityRegime::Quarter),
            other => {
                let size = other
                    .strip_prefix("constant:")
                    .or_else(|| other.strip_prefix("constant-"))
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Regime(format!("unknown regime {other:?}")))?;
                Ok(ParityRegime::Constant(size))
            }
        }
    }
}

impl std::fmt::Display for ParityRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.slug())
    }
}

/// Replaces each fold's training rows by a seeded subsample sized by `regime`.
///
/// Fold `i` draws from the stream `derive_seed(seed, i)`.
pub fn apply_parity_regime(folds: &[Split], regime: ParityRegime, seed: u64) -> Result<Vec<Split>> {
    folds
        .iter()
        .enumerate()
        .map(|(i, fold)| {
            let available = fold.train_idx.len();
            let size = regime.train_size(available);
            if size > available {
                return Err(Error::Regime(format!(
                    "{regime} needs {size} training rows but fold {} has {available}",
                    fold.tag
                )));
            }
            if size == 0 {
                return Err(Error::Regime(format!("{regime} leaves fold {} without training rows", fold.tag)));
            }
            let fold_seed = crate::rng::derive_seed(seed, i as u64);
            let train_idx = if size == available {
                fold.train_idx.clone()
            } else {
                rng::sample_sorted(&fold.train_idx, size, &mut stream_rng(seed, i as u64))
            };
            Ok(Split {
                train_idx,
                test_idx: fold.test_idx.clone(),
                seed: fold_seed,
                tag: fold.tag.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn toy(n: usize, groups: Option<Vec<usize>>) -> Dataset {
        let features = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
        let labels = (0..n).map(|i| i % 2).collect();
        Dataset::new(features, labels, None, groups).unwrap()
    }

    #[test]
    fn seventy_five_twenty_five_of_57() {
        let s = random_split(&toy(57, None), 0.75, 0).unwrap();
        assert_eq!((s.train_idx.len(), s.test_idx.len()), (43, 14));
        s.validate(57).unwrap();
    }

    #[test]
    fn half_split_of_four() {
        let s = random_split(&toy(4, None), 0.5, 7).unwrap();
        assert_eq!((s.train_idx.len(), s.test_idx.len()), (2, 2));
        s.validate(4).unwrap();
        assert_eq!(s, random_split(&toy(4, None), 0.5, 7).unwrap());
    }

    #[test]
    fn degenerate_fractions_fail() {
        assert!(matches!(random_split(&toy(3, None), 0.1, 0), Err(Error::Split(_))));
        assert!(random_split(&toy(3, None), 1.0, 0).is_err());
    }

    #[test]
    fn group_partition_arithmetic() {
        let mut g = vec![0; 10];
        g.extend(vec![1; 20]);
        g.extend(vec![2; 27]);
        let ds = toy(57, Some(g));
        let s = group_split(&ds, 0).unwrap();
        assert_eq!((s.test_idx.len(), s.train_idx.len()), (10, 47));
        assert_eq!(group_splits(&ds).unwrap().len(), 3);
        assert!(group_split(&ds, 9).is_err());
    }

    #[test]
    fn single_group_fails() {
        let ds = toy(5, Some(vec![3; 5]));
        assert!(matches!(group_split(&ds, 3), Err(Error::Split(_))));
        assert!(group_split(&toy(5, None), 0).is_err());
    }

    #[test]
    fn subsample_saturates_and_reseeds() {
        let ds = toy(20, None);
        let test: Vec<usize> = (15..20).collect();
        let full = subsample_train_split(&ds, 15, &test, 1).unwrap();
        assert_eq!(full.train_idx, (0..15).collect::<Vec<_>>());
        let a = subsample_train_split(&ds, 6, &test, 1).unwrap();
        let b = subsample_train_split(&ds, 6, &test, 2).unwrap();
        assert_eq!(a.train_idx.len(), b.train_idx.len());
        assert_ne!(a.train_idx, b.train_idx);
        assert!(subsample_train_split(&ds, 16, &test, 1).is_err());
    }

    #[test]
    fn smallest_fold_enumeration() {
        let folds = enumerate_exhaustive_folds(2).unwrap();
        assert_eq!(folds[0].train_idx, vec![1]);
        assert_eq!(folds[0].test_idx, vec![0]);
        assert_eq!(folds[1].train_idx, vec![0]);
        assert_eq!(folds[1].tag, "fold-1");
        assert!(enumerate_exhaustive_folds(1).is_err());
    }

    #[test]
    fn regime_sizes() {
        let folds = enumerate_exhaustive_folds(8).unwrap();
        let half = apply_parity_regime(&folds, ParityRegime::Half, 0).unwrap();
        assert!(half.iter().all(|f| f.train_idx.len() == 3));
        let folds = enumerate_exhaustive_folds(128).unwrap();
        let c = apply_parity_regime(&folds, ParityRegime::Constant(127), 0).unwrap();
        let all = apply_parity_regime(&folds, ParityRegime::All, 0).unwrap();
        for (a, b) in c.iter().zip(&all) {
            assert_eq!(a.train_idx, b.train_idx);
        }
        let folds = enumerate_exhaustive_folds(64).unwrap();
        assert!(matches!(
            apply_parity_regime(&folds, ParityRegime::Constant(127), 0),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn regime_parsing() {
        assert_eq!("constant:127".parse::<ParityRegime>().unwrap(), ParityRegime::Constant(127));
        assert_eq!("half".parse::<ParityRegime>().unwrap(), ParityRegime::Half);
        assert!("third".parse::<ParityRegime>().is_err());
    }
}
