use clap::Args;
use serde_json::Value;

use crate::bridge::ModelSpec;
use crate::error::{Error, Result};
use crate::report::{nearest_site_per_cell, render_decision_map, DecisionMap, TrainPoint};
use crate::scenario::{grid_points_2d, random_points_2d, Grid2D, ProbeScenario};

use super::{csv_text, finish, with_pool, Common, CommonArgs, Output};

const DEFAULT_MODELS: [&str; 3] = ["1nn", "distance-softmax", "logreg"];
pub const DEFAULT_POINTS: usize = 10;
pub const DEFAULT_MEMBERS: usize = 32;

#[derive(Debug, Clone, Default, Args)]
pub struct Probe2dArgs {
    /// Grid points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Number of random training points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Members of the ensembled variant.
    #[arg(long)]
    pub ensemble_members: Option<usize>,
}

fn oracle_classes(s: &ProbeScenario, grid: &Grid2D) -> Vec<usize> {
    let sites: Vec<(f64, f64)> = s.train.features().outer_iter().map(|r| (r[0], r[1])).collect();
    nearest_site_per_cell(grid, &sites)
        .into_iter()
        .map(|i| s.train.labels()[i])
        .collect()
}

fn run_one(
    out: &Output,
    s: &ProbeScenario,
    grid: &Grid2D,
    oracle: &[usize],
    spec: &ModelSpec,
    variant: &str,
) -> Result<f64> {
    let model = spec.instantiate()?;
    let predicted = model.predict(&s.train, &s.test_inputs)?.argmax_labels();
    let agree = predicted.iter().zip(oracle).filter(|(a, b)| a == b).count();
    let pct = 100.0 * agree as f64 / oracle.len() as f64;
    let map = DecisionMap {
        grid: *grid,
        predicted_class: predicted.clone(),
        train_points: s
            .train
            .features()
            .outer_iter()
            .zip(s.train.labels())
            .map(|(r, &class)| TrainPoint { x: r[0], y: r[1], class })
            .collect(),
        boundary_overlay: true,
    };
    let stem = format!("{}-{}-{variant}", s.name, spec.label);
    let title = format!("{}: {} {variant} ({pct:.2}% agree with 1-NN)", s.name, spec.label);
    out.write(&format!("{stem}.svg"), render_decision_map(&map, &title)?)?;
    let (xs, ys) = (grid.xs(), grid.ys());
    let res = grid.resolution;
    let rows: Vec<Vec<String>> = predicted
        .iter()
        .enumerate()
        .map(|(i, c)| vec![format!("{}", xs[i % res]), format!("{}", ys[i / res]), c.to_string()])
        .collect();
    out.write(
        &format!("{stem}.csv"),
        csv_text(&["x".into(), "y".into(), "predicted".into()], &rows),
    )?;
    Ok(pct)
}

pub fn run(args: &CommonArgs, p: &Probe2dArgs) -> Result<i32> {
    let common = Common::resolve(args, &DEFAULT_MODELS)?;
    let f = &common.file.probe2d;
    let resolution = p.resolution.or(f.resolution).unwrap_or(Grid2D::default().resolution);
    let points = p.points.or(f.points).unwrap_or(DEFAULT_POINTS);
    let members = p.ensemble_members.or(f.ensemble_members).unwrap_or(DEFAULT_MEMBERS);
    let grid = Grid2D::default().with_resolution(resolution);
    grid.validate().map_err(|e| Error::Config(e.to_string()))?;
    if members < 2 {
        return Err(Error::Config("ensemble members must be at least 2".into()));
    }
    let scenarios = vec![
        random_points_2d(points, common.seed, grid).map_err(|e| Error::Config(e.to_string()))?,
        grid_points_2d(3, 3, grid)?,
    ];
    let out = Output::create(&common.out)?;
    let mut agreement = Vec::new();
    with_pool(common.jobs, || -> Result<()> {
        for s in &scenarios {
            let oracle = oracle_classes(s, &grid);
            for spec in &common.models {
                let ens = spec
                    .clone()
                    .with_option("n_ensembles", Value::from(members))
                    .with_option("seed", Value::from(common.seed));
                for (variant, spec_v) in [("plain".to_string(), spec.clone()), (format!("ens{members}"), ens)] {
                    match run_one(&out, s, &grid, &oracle, &spec_v, &variant) {
                        Ok(pct) => agreement.push(vec![
                            s.name.clone(),
                            spec.label.clone(),
                            variant,
                            oracle.len().to_string(),
                            format!("{pct:.4}"),
                        ]),
                        Err(e) => out.fail(&spec.label, &format!("{} {variant}", s.name), &e),
                    }
                }
            }
        }
        Ok(())
    })??;
    let header: Vec<String> = ["scenario", "model", "variant", "n_cells", "agreement_pct"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    out.write("probe2d-agreement.csv", csv_text(&header, &agreement))?;
    let mut json = common.base_json();
    json.insert("resolution".into(), Value::from(resolution));
    json.insert("points".into(), Value::from(points));
    json.insert("ensemble_members".into(), Value::from(members));
    finish(&out, "probe2d", json)
}
