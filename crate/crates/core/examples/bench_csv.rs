//! Loads a labelled CSV with a batch column, runs random and leave-one-group-out
//! splits and prints the aggregate table.

use std::io::Write;

use probekit::ingest::{load_csv, Column, CsvSchema};
use probekit::metrics::{aggregate, evaluate};
use probekit::models::{DistanceSoftmax, LogisticRegression, Model, NearestNeighbor};
use probekit::report::{emit_metric_table, MetricRow, TableFormat};
use probekit::split::{group_splits, random_splits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("probekit-bench-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("samples.csv");
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "f0,f1,outcome,batch")?;
    for i in 0..60 {
        let y = i % 3;
        let jitter = ((i * 37) % 11) as f64 / 20.0;
        writeln!(f, "{},{},c{y},b{}", y as f64 + jitter, 2.0 - y as f64 + jitter, i % 4)?;
    }
    drop(f);

    let schema = CsvSchema::new(Column::Name("outcome".into())).with_group(Column::Name("batch".into()));
    let ds = load_csv(&path, &schema)?;
    let schemes = [("random-0.75x10", random_splits(&ds, 10, 0.75, 0)?), ("group", group_splits(&ds)?)];
    let models: Vec<Box<dyn Model>> =
        vec![Box::new(NearestNeighbor), Box::new(DistanceSoftmax::default()), Box::new(LogisticRegression::default())];

    let mut rows = Vec::new();
    for m in &models {
        for (scheme, splits) in &schemes {
            let mut records = Vec::new();
            for s in splits {
                let train = ds.subset(&s.train_idx)?;
                let test = ds.subset(&s.test_idx)?;
                let p = m.predict(&train, test.features())?;
                records.push(evaluate(&s.tag, &p, test.labels())?);
            }
            rows.push(MetricRow {
                method: m.name(),
                scheme: scheme.to_string(),
                summary: aggregate(&records)?,
            });
        }
    }
    print!("{}", emit_metric_table(&rows, TableFormat::Markdown));
    Ok(())
}
