//! Copying the input column changes nothing for 1-NN but sharpens the
//! distance softmax, because distances grow by sqrt(copies).

use probekit::models::{DistanceSoftmax, Model, NearestNeighbor};
use probekit::scenario::{repeat_features, two_point_1d, Grid1D};

fn main() -> probekit::Result<()> {
    let base = two_point_1d(Grid1D::default())?;
    println!("copies  1nn p(green|x=0.5)  softmax p(green|x=0.5)");
    for copies in [1, 2, 4, 8, 16] {
        let s = repeat_features(&base, copies)?;
        let x = ndarray::Array2::from_elem((1, copies), 0.5);
        let nn = NearestNeighbor.predict(&s.train, &x)?;
        let soft = DistanceSoftmax::default().predict(&s.train, &x)?;
        println!("{copies:>6}  {:>18.6}  {:>22.6}", nn.probs()[[0, 1]], soft.probs()[[0, 1]]);
    }
    Ok(())
}
