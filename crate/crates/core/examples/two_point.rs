//! Class-1 probability of each built-in model along the two-point line.

use probekit::models::{DistanceSoftmax, LogisticRegression, Model, NearestNeighbor};
use probekit::scenario::{two_point_1d, Grid1D};

fn main() -> probekit::Result<()> {
    let s = two_point_1d(Grid1D::new(-3.0, 3.0, 13)?)?;
    let models: Vec<Box<dyn Model>> = vec![
        Box::new(NearestNeighbor),
        Box::new(DistanceSoftmax::default()),
        Box::new(LogisticRegression::default()),
    ];
    print!("{:>6}", "x");
    for m in &models {
        print!(" {:>17}", m.name());
    }
    println!();
    let preds: Vec<_> = models.iter().map(|m| m.predict(&s.train, &s.test_inputs)).collect::<Result<_, _>>()?;
    for (i, x) in s.test_axis().iter().enumerate() {
        print!("{x:>6.2}");
        for p in &preds {
            print!(" {:>17.6}", p.probs()[[i, 1]]);
        }
        println!();
    }
    Ok(())
}
