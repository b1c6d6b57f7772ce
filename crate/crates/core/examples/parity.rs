//! Leave-one-out error on D-bit parity tables for 1-NN and logistic
//! regression, with the full and half training regimes.

use probekit::cli::evaluate_parity;
use probekit::models::{LogisticRegression, Model, NearestNeighbor};
use probekit::split::ParityRegime;

fn main() -> probekit::Result<()> {
    let models: Vec<Box<dyn Model>> = vec![Box::new(NearestNeighbor), Box::new(LogisticRegression::default())];
    println!("dim  regime  model   train  error_rate");
    for dim in 3..=7 {
        for regime in [ParityRegime::All, ParityRegime::Half] {
            for m in &models {
                let (evaluated, _total, errors, train) = evaluate_parity(m.as_ref(), dim, regime, None, 0)?;
                println!("{dim:>3}  {:>6}  {:>6}  {train:>5}  {:>10.4}", regime.slug(), m.name(), errors as f64 / evaluated as f64);
            }
        }
    }
    Ok(())
}
