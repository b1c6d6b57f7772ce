//! Averaging 1-NN over feature and label permutations plus power transforms
//! softens its hard Voronoi decisions.

use probekit::models::{ensemble_predict, EnsembleConfig, Model, NearestNeighbor};
use probekit::scenario::{random_points_2d, Grid2D};

fn main() -> probekit::Result<()> {
    let s = random_points_2d(10, 0, Grid2D::default().with_resolution(41))?;
    let plain = NearestNeighbor.predict(&s.train, &s.test_inputs)?;
    for members in [1, 4, 16, 32] {
        let ens = ensemble_predict(&NearestNeighbor, &s.train, &s.test_inputs, &EnsembleConfig::full(members, 7))?;
        let agree = ens.argmax_labels().iter().zip(plain.argmax_labels()).filter(|(a, b)| **a == *b).count();
        let max_p: f64 = ens.probs().outer_iter().map(|r| r.fold(0.0f64, |m, &v| m.max(v))).sum::<f64>() / s.test_inputs.nrows() as f64;
        println!(
            "{members:>2} members: {:.1}% agreement with plain 1-NN, mean top probability {max_p:.3}",
            100.0 * agree as f64 / s.test_inputs.nrows() as f64
        );
    }
    Ok(())
}
