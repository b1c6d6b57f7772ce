use clap::Args;
use rayon::prelude::*;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::models::Model;
use crate::report::{render_error_curve, ErrorSeries};
use crate::rng;
use crate::scenario::{parity_table, MAX_PARITY_DIM};
use crate::split::{apply_parity_regime, enumerate_exhaustive_folds, ParityRegime, Split};

use super::{csv_text, finish, with_pool, Common, CommonArgs, Output};

const DEFAULT_MODELS: [&str; 4] = ["parity-oracle", "1nn", "distance-softmax", "logreg"];
pub const DEFAULT_REGIMES: [ParityRegime; 3] = [ParityRegime::All, ParityRegime::Half, ParityRegime::Quarter];

#[derive(Debug, Clone, Default, Args)]
pub struct ParityArgs {
    /// Smallest number of bits [default: 3].
    #[arg(long)]
    pub min_dim: Option<usize>,
    /// Largest number of bits [default: 10].
    #[arg(long)]
    pub max_dim: Option<usize>,
    /// all | half | quarter | constant:N. Repeatable.
    #[arg(long = "regime")]
    pub regimes: Vec<String>,
    /// Evaluate a seeded subsample of this many folds per dimension.
    #[arg(long)]
    pub max_folds: Option<usize>,
}

/// Smallest dimension whose folds have at least `size` non-test rows.
fn min_dim_for(size: usize) -> usize {
    (1..=MAX_PARITY_DIM).find(|&d| (1usize << d) > size).unwrap_or(MAX_PARITY_DIM + 1)
}

/// Rejects regimes that cannot be applied at every dimension in range.
pub fn check_regimes(regimes: &[ParityRegime], min_dim: usize, max_dim: usize) -> Result<()> {
    for &r in regimes {
        for d in min_dim..=max_dim {
            let available = (1usize << d) - 1;
            let size = r.train_size(available);
            if size == 0 || size > available {
                let need = match r {
                    ParityRegime::Constant(c) => format!("{r} requires D >= {}", min_dim_for(c.max(1))),
                    _ => format!("{r} requires D >= {}", (min_dim..=MAX_PARITY_DIM).find(|&e| r.train_size((1 << e) - 1) > 0).unwrap_or(MAX_PARITY_DIM)),
                };
                return Err(Error::Regime(format!(
                    "{r} needs {size} training rows but D={d} leaves only {available}; {need}"
                )));
            }
        }
    }
    Ok(())
}

/// Fold results for one (dimension, regime): `(evaluated, total, errors, train_size)`.
pub fn evaluate_parity(
    model: &dyn Model,
    dim: usize,
    regime: ParityRegime,
    max_folds: Option<usize>,
    seed: u64,
) -> Result<(usize, usize, usize, usize)> {
    let s = parity_table(dim)?;
    let ds = &s.train;
    let dim_seed = rng::derive_seed(seed, dim as u64);
    let folds = apply_parity_regime(&enumerate_exhaustive_folds(ds.n_rows())?, regime, dim_seed)?;
    let total = folds.len();
    let chosen: Vec<&Split> = match max_folds {
        Some(k) if k < total => {
            let all: Vec<usize> = (0..total).collect();
            rng::sample_sorted(&all, k, &mut rng::rng_from_seed(dim_seed))
                .into_iter()
                .map(|i| &folds[i])
                .collect()
        }
        _ => folds.iter().collect(),
    };
    let train_size = chosen[0].train_idx.len();
    let wrong: Vec<Result<bool>> = chosen
        .par_iter()
        .map(|f| {
            let train = ds.subset(&f.train_idx)?;
            let test = s.test_inputs.select(ndarray::Axis(0), &f.test_idx);
            let pred = model.predict(&train, &test)?.argmax_labels();
            Ok(pred[0] != ds.labels()[f.test_idx[0]])
        })
        .collect();
    let mut errors = 0;
    for w in wrong {
        errors += w? as usize;
    }
    Ok((chosen.len(), total, errors, train_size))
}

pub fn run(args: &CommonArgs, p: &ParityArgs) -> Result<i32> {
    let common = Common::resolve(args, &DEFAULT_MODELS)?;
    let f = &common.file.parity;
    let min_dim = p.min_dim.or(f.min_dim).unwrap_or(3);
    let max_dim = p.max_dim.or(f.max_dim).unwrap_or(10);
    if min_dim < 1 || min_dim > max_dim || max_dim > MAX_PARITY_DIM {
        return Err(Error::Config(format!(
            "dimension range {min_dim}..={max_dim} must lie within 1..={MAX_PARITY_DIM}"
        )));
    }
    let regime_strings: Vec<String> = if !p.regimes.is_empty() {
        p.regimes.clone()
    } else if let Some(r) = &f.regimes {
        r.clone()
    } else {
        DEFAULT_REGIMES.iter().map(|r| r.to_string()).collect()
    };
    let regimes: Vec<ParityRegime> = regime_strings.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    check_regimes(&regimes, min_dim, max_dim)?;
    let max_folds = p.max_folds.or(f.max_folds);
    if max_folds == Some(0) {
        return Err(Error::Config("--max-folds must be at least 1".into()));
    }

    let out = Output::create(&common.out)?;
    let mut rows = Vec::new();
    let mut curves: Vec<(ParityRegime, Vec<ErrorSeries>)> = regimes.iter().map(|&r| (r, Vec::new())).collect();
    with_pool(common.jobs, || {
        for spec in &common.models {
            let model = match spec.instantiate() {
                Ok(m) => m,
                Err(e) => {
                    out.fail(&spec.label, "instantiate", &e);
                    continue;
                }
            };
            for (regime, series) in curves.iter_mut() {
                let mut points = Vec::new();
                for dim in min_dim..=max_dim {
                    match evaluate_parity(model.as_ref(), dim, *regime, max_folds, common.seed) {
                        Ok((n, total, errors, train_size)) => {
                            let rate = errors as f64 / n as f64;
                            points.push((dim as f64, rate));
                            rows.push(vec![
                                dim.to_string(),
                                regime.to_string(),
                                spec.label.clone(),
                                train_size.to_string(),
                                n.to_string(),
                                total.to_string(),
                                errors.to_string(),
                                format!("{rate:.6}"),
                            ]);
                        }
                        Err(e) => out.fail(&spec.label, &format!("D={dim} {regime}"), &e),
                    }
                }
                if !points.is_empty() {
                    series.push(ErrorSeries {
                        label: spec.label.clone(),
                        points,
                    });
                }
            }
        }
    })?;
    let header: Vec<String> = [
        "dim", "regime", "model", "train_size", "n_folds", "n_folds_total", "errors", "error_rate",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    out.write("parity-errors.csv", csv_text(&header, &rows))?;
    for (regime, series) in &curves {
        if series.is_empty() {
            continue;
        }
        let mut title = format!("parity, regime {regime}");
        if let Some(k) = max_folds {
            title.push_str(&format!(", at most {k} folds per D"));
        }
        out.write(&format!("parity-{}.svg", regime.slug()), render_error_curve(series, &title, true)?)?;
    }
    let mut json = common.base_json();
    json.insert("min_dim".into(), Value::from(min_dim));
    json.insert("max_dim".into(), Value::from(max_dim));
    json.insert("regimes".into(), Value::from(regimes.iter().map(|r| r.to_string()).collect::<Vec<_>>()));
    json.insert("max_folds".into(), max_folds.map(Value::from).unwrap_or(Value::Null));
    finish(&out, "parity", json)
}
