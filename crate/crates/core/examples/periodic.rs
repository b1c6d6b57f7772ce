//! Alternating labels on a line; 1-NN tiles the axis, the softmax blurs it.

use probekit::models::{DistanceSoftmax, Model, NearestNeighbor};
use probekit::scenario::{periodic_presets, Grid1D};

fn main() -> probekit::Result<()> {
    for s in periodic_presets(Grid1D::new(-9.0, 9.0, 37)?)? {
        let nn = NearestNeighbor.predict(&s.train, &s.test_inputs)?;
        let soft = DistanceSoftmax::default().predict(&s.train, &s.test_inputs)?;
        println!("{} ({} training points)", s.name, s.train.n_rows());
        let strip = |p: &probekit::PredictionMatrix| -> String {
            p.probs().column(1).iter().map(|&v| if v > 0.5 { 'G' } else if v < 0.5 { 'r' } else { '.' }).collect()
        };
        println!("  1nn     {}", strip(&nn));
        println!("  softmax {}", strip(&soft));
    }
    Ok(())
}
