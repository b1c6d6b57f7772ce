use std::collections::BTreeSet;

use ndarray::Array2;
use proptest::prelude::*;

use probekit::bridge::slug;
use probekit::ingest::{read_csv, write_csv, Column, CsvSchema};
use probekit::metrics::{confusion_matrix, macro_f1, ConfusionMatrix};
use probekit::models::{ensemble_predict, predict_distance_softmax, EnsembleConfig, KernelShape, KernelSpec, NearestNeighbor};
use probekit::scenario::{random_points_2d, scenario_from_json, scenario_to_json, Grid2D};
use probekit::split::{apply_parity_regime, enumerate_exhaustive_folds, group_splits, random_splits, ParityRegime};
use probekit::Dataset;

fn dataset(n: usize, k: usize, groups: Option<usize>) -> Dataset {
    let x = Array2::from_shape_fn((n, 2), |(i, j)| (i * 3 + j) as f64 * 0.5);
    let labels = (0..n).map(|i| i % k).collect();
    let g = groups.map(|g| (0..n).map(|i| (i / 2) % g).collect());
    Dataset::new(x, labels, None, g).unwrap().with_n_classes(k).unwrap()
}

fn is_partition(train: &[usize], test: &[usize], n: usize) -> bool {
    let a: BTreeSet<usize> = train.iter().copied().collect();
    let b: BTreeSet<usize> = test.iter().copied().collect();
    a.len() == train.len() && b.len() == test.len() && a.is_disjoint(&b) && a.len() + b.len() == n && a.union(&b).all(|&i| i < n)
}

proptest! {
    #[test]
    fn random_splits_partition_and_repeat(n in 4usize..80, k in 1usize..6, frac in 0.2f64..0.8, seed in any::<u64>()) {
        let ds = dataset(n, 2, None);
        let a = random_splits(&ds, k, frac, seed).unwrap();
        prop_assert_eq!(a.len(), k);
        for s in &a {
            prop_assert!(is_partition(&s.train_idx, &s.test_idx, n));
            prop_assert_eq!(s.train_idx.len(), ((frac * n as f64).round() as usize).clamp(1, n - 1));
        }
        prop_assert_eq!(a, random_splits(&ds, k, frac, seed).unwrap());
    }

    #[test]
    fn group_splits_hold_out_each_group(n in 6usize..60, g in 2usize..5) {
        let ds = dataset(n, 2, Some(g));
        let groups = ds.group_labels().unwrap().to_vec();
        let present: BTreeSet<usize> = groups.iter().copied().collect();
        let splits = group_splits(&ds).unwrap();
        prop_assert_eq!(splits.len(), present.len());
        let mut tested = Vec::new();
        for s in &splits {
            prop_assert!(is_partition(&s.train_idx, &s.test_idx, n));
            let held: BTreeSet<usize> = s.test_idx.iter().map(|&i| groups[i]).collect();
            prop_assert_eq!(held.len(), 1);
            prop_assert!(s.train_idx.iter().all(|&i| !held.contains(&groups[i])));
            tested.extend(s.test_idx.iter().copied());
        }
        tested.sort();
        prop_assert_eq!(tested, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn parity_regimes_subsample_within_fold(d in 3usize..8, seed in any::<u64>()) {
        let n = 1usize << d;
        let folds = enumerate_exhaustive_folds(n).unwrap();
        for regime in [ParityRegime::Half, ParityRegime::Quarter] {
            let applied = apply_parity_regime(&folds, regime, seed).unwrap();
            for (orig, f) in folds.iter().zip(&applied) {
                prop_assert_eq!(&f.test_idx, &orig.test_idx);
                prop_assert!(f.train_idx.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(f.train_idx.iter().all(|i| orig.train_idx.contains(i)));
                prop_assert_eq!(f.train_idx.len(), regime.train_size(n - 1));
            }
            prop_assert_eq!(&applied, &apply_parity_regime(&folds, regime, seed).unwrap());
        }
    }

    #[test]
    fn macro_f1_survives_relabelling(
        k in 2usize..6,
        pairs in proptest::collection::vec((0usize..6, 0usize..6), 1..60),
        perm_seed in any::<u64>(),
    ) {
        let truth: Vec<usize> = pairs.iter().map(|p| p.0 % k).collect();
        let pred: Vec<usize> = pairs.iter().map(|p| p.1 % k).collect();
        let mut perm: Vec<usize> = (0..k).collect();
        probekit::rng::shuffle(&mut perm, &mut probekit::rng::rng_from_seed(perm_seed));
        let a = macro_f1(&confusion_matrix(&pred, &truth, k).unwrap()).unwrap();
        let pt: Vec<usize> = truth.iter().map(|&y| perm[y]).collect();
        let pp: Vec<usize> = pred.iter().map(|&y| perm[y]).collect();
        let b = macro_f1(&confusion_matrix(&pp, &pt, k).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn accuracy_is_trace_over_total(counts in proptest::collection::vec(proptest::collection::vec(0u64..20, 3), 3)) {
        let total: u64 = counts.iter().flatten().sum();
        prop_assume!(total > 0);
        let trace = counts[0][0] + counts[1][1] + counts[2][2];
        let cm = ConfusionMatrix::from_counts(counts).unwrap();
        prop_assert_eq!(cm.accuracy().unwrap(), trace as f64 / total as f64);
    }

    #[test]
    fn softmax_rows_are_distributions(
        pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 0usize..3), 2..12),
        shape in 0usize..4,
        t in 0.05f64..20.0,
    ) {
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0, p.1]).collect();
        let labels: Vec<usize> = pts.iter().enumerate().map(|(i, p)| if i < 2 { i } else { p.2 }).collect();
        let ds = Dataset::from_rows(&rows, labels, None, None).unwrap().with_n_classes(3).unwrap();
        let test = Array2::from_shape_fn((25, 2), |(i, j)| if j == 0 { (i % 5) as f64 - 2.0 } else { (i / 5) as f64 - 2.0 });
        let spec = KernelSpec::new(KernelShape::ALL[shape], t, 1e-12).unwrap();
        let p = predict_distance_softmax(&ds, &test, spec).unwrap();
        for row in p.probs().outer_iter() {
            prop_assert!((row.sum() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn ensembles_are_seeded(seed in any::<u64>(), members in 1usize..6) {
        let s = random_points_2d(5, seed, Grid2D::default().with_resolution(9)).unwrap();
        let cfg = EnsembleConfig::full(members, seed);
        let a = ensemble_predict(&NearestNeighbor, &s.train, &s.test_inputs, &cfg).unwrap();
        prop_assert_eq!(&a, &ensemble_predict(&NearestNeighbor, &s.train, &s.test_inputs, &cfg).unwrap());
        for row in a.probs().outer_iter() {
            prop_assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn scenario_json_round_trips(seed in any::<u64>(), n in 2usize..12) {
        let s = random_points_2d(n, seed, Grid2D::default().with_resolution(5)).unwrap();
        prop_assert_eq!(scenario_from_json(&scenario_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn csv_round_trips(
        values in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 6..30),
        k in 2usize..4,
    ) {
        let n = values.len() / 3;
        let x = Array2::from_shape_vec((n, 3), values[..n * 3].to_vec()).unwrap();
        let labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        let ds = Dataset::new(x, labels, None, None).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back = read_csv(&buf[..], &CsvSchema::new(Column::Name("label".into())), std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back.features(), ds.features());
        prop_assert_eq!(back.labels(), ds.labels());
    }

    #[test]
    fn slugs_are_stable(s in "[ -~]{0,30}") {
        let once = slug(&s);
        prop_assert_eq!(slug(&once), once.clone());
        prop_assert!(once.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_'));
        prop_assert!(!once.starts_with('-') && !once.ends_with('-') && !once.contains("--"));
    }
}
