//! Duplicating training rows: both classes at once leaves the softmax unchanged,
//! duplicating only red pulls the softmax towards red.

use ndarray::array;
use probekit::models::{DistanceSoftmax, Model};
use probekit::scenario::{repeat_samples, two_point_1d, Grid1D};

fn main() -> probekit::Result<()> {
    let base = two_point_1d(Grid1D::default())?;
    let probe = array![[-0.5], [0.0], [0.5]];
    let model = DistanceSoftmax::default();
    println!("copies  only_red  p(red|-0.5)  p(red|0)  p(red|0.5)");
    for copies in [1, 2, 4, 8] {
        for only_red in [false, true] {
            let s = repeat_samples(&base, copies, only_red.then_some(0))?;
            let p = model.predict(&s.train, &probe)?;
            let col = p.probs().column(0).to_vec();
            println!("{copies:>6}  {only_red:>8}  {:>11.6}  {:>8.6}  {:>10.6}", col[0], col[1], col[2]);
        }
    }
    Ok(())
}
