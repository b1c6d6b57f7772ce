//! Fitting the regularised softmax regression directly and reading the
//! loss trace.

use probekit::models::{fit_logreg, LogRegConfig};
use probekit::scenario::{random_points_2d, Grid2D};

fn main() -> probekit::Result<()> {
    let s = random_points_2d(10, 3, Grid2D::default().with_resolution(5))?;
    for l2 in [0.01, 0.1, 1.0] {
        let fit = fit_logreg(
            &s.train,
            LogRegConfig {
                l2_strength: l2,
                ..LogRegConfig::default()
            },
        )?;
        let trace = &fit.loss_trace;
        println!(
            "l2={l2:<5} converged={} iters={} loss {:.5} -> {:.5}, |grad|={:.2e}",
            fit.converged,
            fit.iterations,
            trace[0],
            trace[trace.len() - 1],
            fit.final_grad_norm
        );
    }
    Ok(())
}
