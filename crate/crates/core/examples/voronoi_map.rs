//! Decision map of 1-NN on ten random points with the Voronoi overlay,
//! written as an SVG file.

use probekit::models::{Model, NearestNeighbor};
use probekit::report::{render_decision_map, DecisionMap, TrainPoint};
use probekit::scenario::{random_points_2d, Grid2D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = random_points_2d(10, 0, Grid2D::default().with_resolution(121))?;
    let p = NearestNeighbor.predict(&s.train, &s.test_inputs)?;
    let x = s.train.features();
    let map = DecisionMap {
        grid: Grid2D::default().with_resolution(121),
        predicted_class: p.argmax_labels(),
        train_points: (0..x.nrows())
            .map(|i| TrainPoint {
                x: x[[i, 0]],
                y: x[[i, 1]],
                class: s.train.labels()[i],
            })
            .collect(),
        boundary_overlay: true,
    };
    let svg = render_decision_map(&map, "1-NN, ten random points")?;
    let path = std::env::temp_dir().join("probekit-voronoi.svg");
    std::fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
