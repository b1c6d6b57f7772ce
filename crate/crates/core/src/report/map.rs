use std::fmt::Write;

use crate::error::{Error, Result};
use crate::scenario::Grid2D;

use super::svg::{escape, px, Frame, SvgDoc};
use super::class_color;

const VORONOI_COLOR: &str = "#ffd400";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainPoint {
    pub x: f64,
    pub y: f64,
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMap {
    pub grid: Grid2D,
    /// One class per grid point, row-major with y as the slow axis.
    pub predicted_class: Vec<usize>,
    pub train_points: Vec<TrainPoint>,
    pub boundary_overlay: bool,
}

/// The shared side of two adjacent grid cells, `a < b` as row-major indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

/// Edges between horizontally or vertically adjacent cells whose labels differ.
pub fn class_boundary_edges(resolution: usize, labels: &[usize]) -> Vec<Edge> {
    let mut edges = Vec::new();
    for iy in 0..resolution {
        for ix in 0..resolution {
            let a = iy * resolution + ix;
            if ix + 1 < resolution && labels[a] != labels[a + 1] {
                edges.push(Edge { a, b: a + 1 });
            }
            if iy + 1 < resolution && labels[a] != labels[a + resolution] {
                edges.push(Edge { a, b: a + resolution });
            }
        }
    }
    edges
}

/// Index of the nearest site for every grid point, ties to the lower index.
pub fn nearest_site_per_cell(grid: &Grid2D, sites: &[(f64, f64)]) -> Vec<usize> {
    let (xs, ys) = (grid.xs(), grid.ys());
    let mut out = Vec::with_capacity(grid.n_cells());
    for &y in &ys {
        for &x in &xs {
            let mut best = (f64::INFINITY, 0);
            for (i, &(sx, sy)) in sites.iter().enumerate() {
                let d = (x - sx).powi(2) + (y - sy).powi(2);
                if d < best.0 {
                    best = (d, i);
                }
            }
            out.push(best.1);
        }
    }
    out
}

/// Grid approximation of the Voronoi diagram of `sites`: every edge whose
/// two cells have different nearest sites.
pub fn voronoi_edges(grid: &Grid2D, sites: &[(f64, f64)]) -> Vec<Edge> {
    class_boundary_edges(grid.resolution, &nearest_site_per_cell(grid, sites))
}

struct Layout {
    frame: Frame,
    res: usize,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Layout {
    fn new(grid: &Grid2D) -> Self {
        let res = grid.resolution;
        let dx = (grid.x_hi - grid.x_lo) / (res - 1) as f64;
        let dy = (grid.y_hi - grid.y_lo) / (res - 1) as f64;
        Layout {
            frame: Frame {
                left: 60.0,
                top: 40.0,
                width: 400.0,
                height: 400.0,
            },
            res,
            x_lo: grid.x_lo - dx / 2.0,
            x_hi: grid.x_hi + dx / 2.0,
            y_lo: grid.y_lo - dy / 2.0,
            y_hi: grid.y_hi + dy / 2.0,
        }
    }

    fn cell(&self) -> (f64, f64) {
        (self.frame.width / self.res as f64, self.frame.height / self.res as f64)
    }

    fn col_x(&self, ix: usize) -> f64 {
        self.frame.left + ix as f64 * self.cell().0
    }

    fn row_y(&self, iy: usize) -> f64 {
        // rows count upwards from the bottom edge
        self.frame.bottom() - iy as f64 * self.cell().1
    }

    fn x(&self, v: f64) -> f64 {
        self.frame.left + (v - self.x_lo) / (self.x_hi - self.x_lo) * self.frame.width
    }

    fn y(&self, v: f64) -> f64 {
        self.frame.bottom() - (v - self.y_lo) / (self.y_hi - self.y_lo) * self.frame.height
    }
}

/// Filled class regions, training points as crosses and, if requested, the
/// Voronoi diagram of the training points as a yellow overlay.
pub fn render_decision_map(map: &DecisionMap, title: &str) -> Result<String> {
    map.grid.validate()?;
    let res = map.grid.resolution;
    if map.predicted_class.len() != map.grid.n_cells() {
        return Err(Error::Render(format!(
            "{} predictions for a {res}x{res} grid",
            map.predicted_class.len()
        )));
    }
    let mut seen = [false; super::PALETTE.len()];
    for &c in map.predicted_class.iter().chain(map.train_points.iter().map(|p| &p.class)) {
        class_color(c)?;
        seen[c] = true;
    }
    let layout = Layout::new(&map.grid);
    let frame = layout.frame;
    let (cw, ch) = layout.cell();
    let mut doc = SvgDoc::new(frame.right() + 120.0, frame.bottom() + 50.0);
    doc.text(frame.left + frame.width / 2.0, 22.0, "middle", title);

    // one rect per run of equal predictions within a row
    let mut cells = String::new();
    for iy in 0..res {
        let row = &map.predicted_class[iy * res..(iy + 1) * res];
        let mut start = 0;
        while start < res {
            let class = row[start];
            let mut end = start + 1;
            while end < res && row[end] == class {
                end += 1;
            }
            let _ = writeln!(
                cells,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                px(layout.col_x(start)),
                px(layout.row_y(iy + 1)),
                px((end - start) as f64 * cw),
                px(ch),
                class_color(class)?
            );
            start = end;
        }
    }
    doc.raw(r#"<g fill-opacity="0.45" shape-rendering="crispEdges">"#);
    doc.raw(cells.trim_end());
    doc.raw("</g>");

    if map.boundary_overlay && !map.train_points.is_empty() {
        let sites: Vec<(f64, f64)> = map.train_points.iter().map(|p| (p.x, p.y)).collect();
        let mut d = String::new();
        for e in voronoi_edges(&map.grid, &sites) {
            let (ix, iy) = (e.a % res, e.a / res);
            if e.b == e.a + 1 {
                let x = px(layout.col_x(ix + 1));
                let _ = write!(d, "M{x} {}V{}", px(layout.row_y(iy)), px(layout.row_y(iy + 1)));
            } else {
                let y = px(layout.row_y(iy + 1));
                let _ = write!(d, "M{} {y}H{}", px(layout.col_x(ix)), px(layout.col_x(ix + 1)));
            }
        }
        if !d.is_empty() {
            doc.raw(&format!(
                r#"<path d="{d}" fill="none" stroke="{VORONOI_COLOR}" stroke-width="1.5" stroke-linecap="square"/>"#
            ));
        }
    }

    doc.raw(&format!(
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        px(frame.left),
        px(frame.top),
        px(frame.width),
        px(frame.height)
    ));
    for p in &map.train_points {
        let (cx, cy) = (layout.x(p.x), layout.y(p.y));
        let color = class_color(p.class)?;
        for (stroke, width) in [("black", 4.0), (color, 2.0)] {
            doc.line(cx - 5.0, cy - 5.0, cx + 5.0, cy + 5.0, stroke, width, None);
            doc.line(cx - 5.0, cy + 5.0, cx + 5.0, cy - 5.0, stroke, width, None);
        }
    }
    for (v, anchor_x) in [(map.grid.x_lo, true), (map.grid.x_hi, true), (map.grid.y_lo, false), (map.grid.y_hi, false)] {
        let label = format!("{v}");
        if anchor_x {
            doc.text(layout.x(v), frame.bottom() + 18.0, "middle", &label);
        } else {
            doc.text(frame.left - 8.0, layout.y(v) + 4.0, "end", &label);
        }
    }
    let mut row = 0;
    for (class, present) in seen.iter().enumerate() {
        if !present {
            continue;
        }
        let y = frame.top + 10.0 + 18.0 * row as f64;
        doc.raw(&format!(
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{}"/>"#,
            px(frame.right() + 15.0),
            px(y - 6.0),
            class_color(class)?
        ));
        doc.text(frame.right() + 33.0, y + 4.0, "start", &format!("class {}", escape(&class.to_string())));
        row += 1;
    }
    Ok(doc.finish())
}
