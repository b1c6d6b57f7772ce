use clap::Args;
use serde_json::Value;

use crate::bridge::ModelSpec;
use crate::error::{Error, Result};
use crate::models::{DistanceSoftmax, Model};
use crate::report::{class_color, render_curves, CurveSeries, Style, PALETTE};
use crate::scenario::{periodic_presets, repeat_features, repeat_samples, two_point_1d, Grid1D, ProbeScenario, RED};

use super::{csv_text, finish, fmt_prob, with_pool, Common, CommonArgs, Output};

pub const VARIANTS: [&str; 6] = [
    "plain",
    "repeat-features",
    "repeat-samples",
    "repeat-single-class",
    "periodic",
    "ensembles",
];

pub const DEFAULT_COPIES: [usize; 4] = [1, 4, 16, 64];
pub const DEFAULT_ENSEMBLES: [usize; 4] = [1, 4, 16, 32];
const DEFAULT_MODELS: [&str; 3] = ["1nn", "distance-softmax", "logreg"];

const BASELINE_COLORS: [&str; 2] = ["#ff7f0e", "#32cd32"];

#[derive(Debug, Clone, Default, Args)]
pub struct Probe1dArgs {
    /// Variants to run [default: all]. Repeatable.
    #[arg(long = "variant", value_parser = clap::builder::PossibleValuesParser::new(VARIANTS))]
    pub variants: Vec<String>,
    /// Copy counts for the repetition variants.
    #[arg(long, value_delimiter = ',')]
    pub copies: Vec<usize>,
    /// Ensemble sizes for the ensembles variant.
    #[arg(long, value_delimiter = ',')]
    pub ensembles: Vec<usize>,
    /// Left end of the probe grid [default: -5].
    #[arg(long, allow_hyphen_values = true)]
    pub grid_lo: Option<f64>,
    /// Right end of the probe grid [default: 5].
    #[arg(long, allow_hyphen_values = true)]
    pub grid_hi: Option<f64>,
    /// Grid points, ends included [default: 401].
    #[arg(long)]
    pub grid_count: Option<usize>,
}

#[derive(Debug, Clone)]
struct Settings {
    variants: Vec<String>,
    copies: Vec<usize>,
    ensembles: Vec<usize>,
    grid: Grid1D,
}

fn pick<T: Clone>(flag: &[T], file: &Option<Vec<T>>, default: &[T]) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(f) = file {
        f.clone()
    } else {
        default.to_vec()
    }
}

impl Settings {
    fn resolve(common: &Common, args: &Probe1dArgs) -> Result<Self> {
        let f = &common.file.probe1d;
        let all: Vec<String> = VARIANTS.iter().map(|s| s.to_string()).collect();
        let variants = pick(&args.variants, &f.variants, &all);
        if let Some(v) = variants.iter().find(|v| !VARIANTS.contains(&v.as_str())) {
            return Err(Error::Config(format!("unknown variant {v:?}; expected one of {VARIANTS:?}")));
        }
        let copies = pick(&args.copies, &f.copies, &DEFAULT_COPIES);
        let ensembles = pick(&args.ensembles, &f.ensembles, &DEFAULT_ENSEMBLES);
        if copies.contains(&0) || ensembles.contains(&0) {
            return Err(Error::Config("copy counts and ensemble sizes must be at least 1".into()));
        }
        let d = Grid1D::default();
        let grid = Grid1D::new(
            args.grid_lo.or(f.grid_lo).unwrap_or(d.lo),
            args.grid_hi.or(f.grid_hi).unwrap_or(d.hi),
            args.grid_count.or(f.grid_count).unwrap_or(d.count),
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Settings {
            variants,
            copies,
            ensembles,
            grid,
        })
    }
}

fn class_label(s: &ProbeScenario, c: usize) -> String {
    s.train.class_name(c)
}

fn marks(s: &ProbeScenario) -> Vec<(f64, usize)> {
    s.train
        .features()
        .outer_iter()
        .zip(s.train.labels())
        .map(|(r, &c)| (r[0], c))
        .collect()
}

/// Long-format probability table: one row per (setting, grid point).
fn prob_table(s: &ProbeScenario, rows: &[(String, Vec<Vec<f64>>)]) -> String {
    let mut header = vec!["setting".to_string(), "x".to_string()];
    header.extend((0..s.train.n_classes()).map(|c| format!("p_{}", class_label(s, c))));
    let xs = s.test_axis();
    let mut out = Vec::new();
    for (setting, probs) in rows {
        for (x, p) in xs.iter().zip(probs) {
            let mut r = vec![setting.clone(), format!("{x}")];
            r.extend(p.iter().map(|&v| fmt_prob(v)));
            out.push(r);
        }
    }
    csv_text(&header, &out)
}

fn probs_rows(m: &crate::PredictionMatrix) -> Vec<Vec<f64>> {
    m.probs().outer_iter().map(|r| r.to_vec()).collect()
}

fn class_curves(s: &ProbeScenario, label: &str, probs: &[Vec<f64>], baseline: bool) -> Result<Vec<CurveSeries>> {
    let xs = s.test_axis();
    (0..s.train.n_classes())
        .map(|c| {
            let style = if baseline {
                Style::dashed(BASELINE_COLORS.get(c).copied().unwrap_or(PALETTE[c % PALETTE.len()]))
            } else {
                Style::solid(class_color(c)?)
            };
            Ok(CurveSeries {
                label: format!("{label} p({})", class_label(s, c)),
                xs: xs.clone(),
                ys: probs.iter().map(|p| p[c]).collect(),
                style,
            })
        })
        .collect()
}

fn is_default_baseline(spec: &ModelSpec) -> bool {
    spec.label == "distance-softmax"
}

/// Probability curves for both classes, with the inverse-sqrt baseline.
fn single(out: &Output, spec: &ModelSpec, model: &dyn Model, s: &ProbeScenario, variant: &str) -> Result<()> {
    let probs = probs_rows(&model.predict(&s.train, &s.test_inputs)?);
    let mut series = class_curves(s, &spec.label, &probs, false)?;
    let mut rows = vec![(spec.label.clone(), probs)];
    if !is_default_baseline(spec) {
        let base = probs_rows(&DistanceSoftmax::default().predict(&s.train, &s.test_inputs)?);
        series.extend(class_curves(s, "inverse-sqrt baseline", &base, true)?);
        rows.push(("inverse-sqrt-baseline".into(), base));
    }
    let stem = format!("{}-{}-{variant}", s.name, spec.label);
    let svg = render_curves(&series, &format!("{}: {}", s.name, spec.label), "x", &marks(s))?;
    out.write(&format!("{stem}.svg"), svg)?;
    out.write(&format!("{stem}.csv"), prob_table(s, &rows))
}

/// One p(green) curve per setting.
fn sweep(
    out: &Output,
    spec: &ModelSpec,
    variant: &str,
    title: &str,
    settings: Vec<(String, Box<dyn Model>, ProbeScenario)>,
) -> Result<()> {
    let first = settings.first().map(|s| s.2.clone()).expect("at least one setting");
    let shown = 1.min(first.train.n_classes() - 1);
    let mut series = Vec::new();
    let mut rows = Vec::new();
    for (i, (name, model, s)) in settings.iter().enumerate() {
        let probs = probs_rows(&model.predict(&s.train, &s.test_inputs)?);
        series.push(CurveSeries {
            label: name.clone(),
            xs: s.test_axis(),
            ys: probs.iter().map(|p| p[shown]).collect(),
            style: Style::solid(PALETTE[(i + 2) % PALETTE.len()]),
        });
        rows.push((name.clone(), probs));
    }
    let stem = format!("{}-{}-{variant}", first.name, spec.label);
    let svg = render_curves(
        &series,
        &format!("{}: {} {title}, p({})", first.name, spec.label, class_label(&first, shown)),
        "x",
        &marks(&first),
    )?;
    out.write(&format!("{stem}.svg"), svg)?;
    out.write(&format!("{stem}.csv"), prob_table(&first, &rows))
}

fn run_variant(out: &Output, common: &Common, cfg: &Settings, spec: &ModelSpec, variant: &str) -> Result<()> {
    let base = two_point_1d(cfg.grid)?;
    let model = || spec.instantiate();
    match variant {
        "plain" => single(out, spec, model()?.as_ref(), &base, "plain"),
        "repeat-features" => {
            let mut settings = Vec::new();
            for &k in &cfg.copies {
                settings.push((format!("copies={k}"), model()?, repeat_features(&base, k)?));
            }
            sweep(out, spec, variant, "repeated features", settings)
        }
        "repeat-samples" | "repeat-single-class" => {
            let only = (variant == "repeat-single-class").then_some(RED);
            let mut settings = Vec::new();
            for &k in &cfg.copies {
                settings.push((format!("copies={k}"), model()?, repeat_samples(&base, k, only)?));
            }
            let title = if only.is_some() { "repeated red samples" } else { "repeated samples" };
            sweep(out, spec, variant, title, settings)
        }
        "periodic" => {
            for s in periodic_presets(cfg.grid)? {
                single(out, spec, model()?.as_ref(), &s, "periodic")?;
            }
            Ok(())
        }
        "ensembles" => {
            let mut settings = Vec::new();
            for &n in &cfg.ensembles {
                let m = spec
                    .clone()
                    .with_option("n_ensembles", Value::from(n))
                    .with_option("seed", Value::from(common.seed))
                    .instantiate()?;
                settings.push((format!("n_ensembles={n}"), m, base.clone()));
            }
            sweep(out, spec, variant, "ensembles", settings)
        }
        other => Err(Error::Config(format!("unknown variant {other:?}"))),
    }
}

pub fn run(args: &CommonArgs, p: &Probe1dArgs) -> Result<i32> {
    let common = Common::resolve(args, &DEFAULT_MODELS)?;
    let cfg = Settings::resolve(&common, p)?;
    let out = Output::create(&common.out)?;
    with_pool(common.jobs, || {
        for spec in &common.models {
            for v in &cfg.variants {
                if let Err(e) = run_variant(&out, &common, &cfg, spec, v) {
                    out.fail(&spec.label, v, &e);
                }
            }
        }
    })?;
    let mut json = common.base_json();
    json.insert("variants".into(), Value::from(cfg.variants.clone()));
    json.insert("copies".into(), Value::from(cfg.copies.clone()));
    json.insert("ensembles".into(), Value::from(cfg.ensembles.clone()));
    json.insert("grid".into(), serde_json::to_value(cfg.grid).expect("grid serializes"));
    finish(&out, "probe1d", json)
}
