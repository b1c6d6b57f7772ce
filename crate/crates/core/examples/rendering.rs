//! Probability curves and a log-scale error plot written as SVG.

use probekit::models::{DistanceSoftmax, KernelShape, KernelSpec, Model};
use probekit::report::{render_curves, render_error_curve, CurveSeries, ErrorSeries, Style};
use probekit::scenario::{two_point_1d, Grid1D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = two_point_1d(Grid1D::default())?;
    let colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];
    let mut series = Vec::new();
    for (shape, color) in KernelShape::ALL.into_iter().zip(colors) {
        let model = DistanceSoftmax {
            spec: KernelSpec::new(shape, 1.0, 1e-12)?,
        };
        let p = model.predict(&s.train, &s.test_inputs)?;
        series.push(CurveSeries {
            label: format!("{shape:?}"),
            xs: s.test_axis(),
            ys: p.probs().column(1).to_vec(),
            style: Style::solid(color),
        });
    }
    let curves = render_curves(&series, "p(green) by kernel shape", "x", &[(-1.0, 0), (1.0, 1)])?;
    let errors = render_error_curve(
        &[ErrorSeries {
            label: "example".into(),
            points: (3..=10).map(|d| (d as f64, 1.0 / (1u64 << d) as f64)).chain([(11.0, 0.0)]).collect(),
        }],
        "error against dimension",
        true,
    )?;
    let dir = std::env::temp_dir();
    std::fs::write(dir.join("probekit-curves.svg"), curves)?;
    std::fs::write(dir.join("probekit-errors.svg"), errors)?;
    println!("wrote {0}/probekit-curves.svg and {0}/probekit-errors.svg", dir.display());
    Ok(())
}
