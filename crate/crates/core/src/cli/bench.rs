use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bridge::slug;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ingest::{idx_dataset, load_csv, load_idx_images, load_idx_labels, Column, CsvSchema};
use crate::metrics::{aggregate, confusion_to_csv, evaluate, records_to_csv, EvalRecord, Summary};
use crate::models::Model;
use crate::report::{emit_metric_table, MetricRow, TableFormat};
use crate::rng;
use crate::split::{group_splits, random_split, random_splits, subsample_train_split, Split};

use super::{finish, with_pool, Common, CommonArgs, Output};

const DEFAULT_MODELS: [&str; 3] = ["1nn", "distance-softmax", "logreg"];
pub const SCHEMES: [&str; 3] = ["random", "group", "subsample"];
pub const DEFAULT_SPLITS: usize = 10;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.75;
pub const DEFAULT_SIZES: [usize; 4] = [30, 100, 300, 1000];

#[derive(Debug, Clone, Default, Args)]
pub struct BenchArgs {
    /// Labeled CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Label column, by header name or zero-based index [default: label].
    #[arg(long)]
    pub label_column: Option<String>,
    /// Group column (required by the group scheme).
    #[arg(long)]
    pub group_column: Option<String>,
    /// CSV field separator [default: ,].
    #[arg(long)]
    pub delimiter: Option<char>,
    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// IDX image file for the training pool.
    #[arg(long)]
    pub idx_train_images: Option<PathBuf>,
    /// IDX label file matching the training images.
    #[arg(long)]
    pub idx_train_labels: Option<PathBuf>,
    /// Fixed test set for the subsample scheme.
    #[arg(long)]
    pub idx_test_images: Option<PathBuf>,
    /// IDX label file matching the test images.
    #[arg(long)]
    pub idx_test_labels: Option<PathBuf>,
    /// random | group | subsample [default: random].
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SCHEMES))]
    pub scheme: Option<String>,
    /// Number of random splits, or seeds per subsample size.
    #[arg(long)]
    pub splits: Option<usize>,
    /// Share of rows used for training in random splits [default: 0.75].
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Training-set sizes for the subsample scheme.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
}

struct Loaded {
    ds: Dataset,
    /// Rows of the external test set, if one was given.
    fixed_test: Option<Vec<usize>>,
    source: Value,
}

fn concat(train: Dataset, test: Dataset) -> Result<(Dataset, Vec<usize>)> {
    let n_train = train.n_rows();
    let features = ndarray::concatenate(ndarray::Axis(0), &[train.features().view(), test.features().view()])
        .map_err(|e| Error::Validation(format!("train and test images differ in width: {e}")))?;
    let labels: Vec<usize> = train.labels().iter().chain(test.labels()).copied().collect();
    let n = labels.len();
    Ok((idx_dataset(features, labels)?, (n_train..n).collect()))
}

fn load(common: &Common, a: &BenchArgs) -> Result<Loaded> {
    let f = &common.file.bench;
    let csv = a.csv.clone().or(f.csv.clone());
    let train_images = a.idx_train_images.clone().or(f.idx_train_images.clone());
    match (csv, train_images) {
        (Some(_), Some(_)) => Err(Error::Config("give either --csv or --idx-train-images, not both".into())),
        (None, None) => Err(Error::Config("no dataset: pass --csv or --idx-train-images".into())),
        (Some(path), None) => {
            let schema = CsvSchema {
                label_column: a
                    .label_column
                    .clone()
                    .or(f.label_column.clone())
                    .unwrap_or_else(|| "label".into())
                    .parse::<Column>()
                    .expect("infallible"),
                group_column: a
                    .group_column
                    .clone()
                    .or(f.group_column.clone())
                    .map(|g| g.parse::<Column>().expect("infallible")),
                delimiter: {
                    let d = a.delimiter.or(f.delimiter).unwrap_or(',');
                    u8::try_from(d).map_err(|_| Error::Config(format!("delimiter {d:?} is not a single byte")))?
                },
                has_header: !(a.no_header || f.no_header.unwrap_or(false)),
            };
            let ds = load_csv(&path, &schema)?;
            Ok(Loaded {
                ds,
                fixed_test: None,
                source: json!({"csv": path, "label_column": schema.label_column, "group_column": schema.group_column}),
            })
        }
        (None, Some(images)) => {
            let labels = a
                .idx_train_labels
                .clone()
                .or(f.idx_train_labels.clone())
                .ok_or_else(|| Error::Config("--idx-train-images needs --idx-train-labels".into()))?;
            let train = idx_dataset(load_idx_images(&images)?, load_idx_labels(&labels)?)?;
            let test_images = a.idx_test_images.clone().or(f.idx_test_images.clone());
            let test_labels = a.idx_test_labels.clone().or(f.idx_test_labels.clone());
            let mut source = json!({"idx_train_images": images, "idx_train_labels": labels});
            match (test_images, test_labels) {
                (Some(ti), Some(tl)) => {
                    let test = idx_dataset(load_idx_images(&ti)?, load_idx_labels(&tl)?)?;
                    let (ds, fixed) = concat(train, test)?;
                    source["idx_test_images"] = json!(ti);
                    source["idx_test_labels"] = json!(tl);
                    Ok(Loaded {
                        ds,
                        fixed_test: Some(fixed),
                        source,
                    })
                }
                (None, None) => Ok(Loaded {
                    ds: train,
                    fixed_test: None,
                    source,
                }),
                _ => Err(Error::Config("give both --idx-test-images and --idx-test-labels".into())),
            }
        }
    }
}

/// Splits grouped by the scheme name used in the summary table.
fn build_splits(
    loaded: &Loaded,
    scheme: &str,
    splits: usize,
    fraction: f64,
    sizes: &[usize],
    seed: u64,
) -> Result<Vec<(String, Vec<Split>)>> {
    let ds = &loaded.ds;
    let cfg = |e: Error| Error::Config(e.to_string());
    match scheme {
        "random" => {
            let s = random_splits(ds, splits, fraction, seed).map_err(cfg)?;
            Ok(vec![(format!("random-{fraction}x{splits}"), s)])
        }
        "group" => {
            if ds.group_labels().is_none() {
                return Err(Error::Config("the group scheme needs a group column".into()));
            }
            let s = group_splits(ds).map_err(cfg)?;
            Ok(vec![("group".into(), s)])
        }
        _ => {
            let test_idx = match &loaded.fixed_test {
                Some(t) => t.clone(),
                None => random_split(ds, fraction, seed).map_err(cfg)?.test_idx,
            };
            let mut out = Vec::new();
            for &size in sizes {
                let mut group = Vec::new();
                for j in 0..splits {
                    let mut s = subsample_train_split(ds, size, &test_idx, rng::derive_seed(rng::derive_seed(seed, size as u64), j as u64))
                        .map_err(cfg)?;
                    s.tag = format!("subsample-{size}-{j}");
                    group.push(s);
                }
                out.push((format!("subsample-{size}"), group));
            }
            Ok(out)
        }
    }
}

fn run_split(model: &dyn Model, ds: &Dataset, split: &Split) -> Result<EvalRecord> {
    let train = ds.subset(&split.train_idx)?;
    let test_x = ds.features().select(ndarray::Axis(0), &split.test_idx);
    let truth: Vec<usize> = split.test_idx.iter().map(|&i| ds.labels()[i]).collect();
    let preds = model.predict(&train, &test_x)?;
    evaluate(&split.tag, &preds, &truth)
}

#[derive(Serialize)]
struct ModelReport {
    model: String,
    summaries: Vec<(String, Summary)>,
    records: Vec<EvalRecord>,
}

pub fn run(args: &CommonArgs, a: &BenchArgs) -> Result<i32> {
    let common = Common::resolve(args, &DEFAULT_MODELS)?;
    let f = &common.file.bench;
    let scheme = a.scheme.clone().or(f.scheme.clone()).unwrap_or_else(|| "random".into());
    if !SCHEMES.contains(&scheme.as_str()) {
        return Err(Error::Config(format!("unknown scheme {scheme:?}; expected one of {SCHEMES:?}")));
    }
    let splits = a.splits.or(f.splits).unwrap_or(DEFAULT_SPLITS);
    let fraction = a.train_fraction.or(f.train_fraction).unwrap_or(DEFAULT_TRAIN_FRACTION);
    let sizes = if !a.sizes.is_empty() {
        a.sizes.clone()
    } else {
        f.sizes.clone().unwrap_or_else(|| DEFAULT_SIZES.to_vec())
    };
    if splits == 0 {
        return Err(Error::Config("--splits must be at least 1".into()));
    }
    let has_group_column = a.group_column.is_some() || f.group_column.is_some();
    if scheme == "group" && !has_group_column {
        return Err(Error::Config("the group scheme needs --group-column (IDX sources have no groups)".into()));
    }
    let loaded = load(&common, a)?;
    let groups = build_splits(&loaded, &scheme, splits, fraction, &sizes, common.seed)?;
    let ds = &loaded.ds;
    let class_names: Vec<String> = (0..ds.n_classes()).map(|c| ds.class_name(c)).collect();

    let out = Output::create(&common.out)?;
    let mut table = Vec::new();
    let mut reports = Vec::new();
    with_pool(common.jobs, || -> Result<()> {
        for spec in &common.models {
            let label = &spec.label;
            let model = match spec.instantiate() {
                Ok(m) => m,
                Err(e) => {
                    out.fail(label, "instantiate", &e);
                    continue;
                }
            };
            let mut records = Vec::new();
            let mut summaries = Vec::new();
            let mut failed = false;
            for (scheme_name, group) in &groups {
                let results: Vec<Result<EvalRecord>> = group.par_iter().map(|s| run_split(model.as_ref(), ds, s)).collect();
                let recs: Result<Vec<EvalRecord>> = results.into_iter().collect();
                match recs.and_then(|r| aggregate(&r).map(|s| (r, s))) {
                    Ok((recs, summary)) => {
                        table.push(MetricRow {
                            method: label.clone(),
                            scheme: scheme_name.clone(),
                            summary: summary.clone(),
                        });
                        summaries.push((scheme_name.clone(), summary));
                        records.extend(recs);
                    }
                    Err(e) => {
                        out.fail(label, scheme_name, &e);
                        failed = true;
                        break;
                    }
                }
            }
            if failed && records.is_empty() {
                continue;
            }
            out.write(&format!("bench-{label}-splits.csv"), records_to_csv(&records))?;
            for r in &records {
                out.write(
                    &format!("bench-{label}-{}-confusion.csv", slug(&r.split_tag)),
                    confusion_to_csv(&r.confusion, &class_names),
                )?;
            }
            let mut total = crate::metrics::ConfusionMatrix::zeros(ds.n_classes());
            for r in &records {
                total.add(&r.confusion)?;
            }
            out.write(&format!("bench-{label}-confusion.csv"), confusion_to_csv(&total, &class_names))?;
            reports.push(ModelReport {
                model: label.clone(),
                summaries,
                records,
            });
        }
        Ok(())
    })??;
    out.write("bench-summary.csv", emit_metric_table(&table, TableFormat::Csv))?;
    out.write("bench-summary.md", emit_metric_table(&table, TableFormat::Markdown))?;
    let report = json!({
        "dataset": {
            "n_rows": ds.n_rows(),
            "n_features": ds.n_features(),
            "n_classes": ds.n_classes(),
            "class_names": class_names,
            "group_names": ds.group_names(),
            "fixed_test_rows": loaded.fixed_test.as_ref().map(Vec::len),
        },
        "scheme": scheme,
        "models": reports,
    });
    out.write("bench-report.json", serde_json::to_string_pretty(&report).expect("report serializes") + "\n")?;
    let mut json = common.base_json();
    json.insert("source".into(), loaded.source.clone());
    json.insert("scheme".into(), Value::from(scheme));
    json.insert("splits".into(), Value::from(splits));
    json.insert("train_fraction".into(), Value::from(fraction));
    json.insert("sizes".into(), Value::from(sizes));
    finish(&out, "bench", json)
}
