//! Static figures (SVG) and metric tables.
//!
//! Output is a pure function of the input: coordinates are printed with a
//! fixed number of decimals, there are no timestamps or ids, and iteration
//! order is always the input order.

mod map;
mod plots;
mod svg;
mod table;

pub use map::{class_boundary_edges, nearest_site_per_cell, render_decision_map, voronoi_edges, DecisionMap, Edge, TrainPoint};
pub use plots::{render_curves, render_error_curve, CurveSeries, ErrorSeries, Style, ERROR_FLOOR};
pub use table::{emit_metric_table, MetricRow, TableFormat};

/// Class colours, indexed by class id. Class 0 is red and class 1 green.
pub const PALETTE: [&str; 10] = [
    "#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Colour for a class id, or a render error past the end of the palette.
pub fn class_color(class: usize) -> crate::Result<&'static str> {
    PALETTE
        .get(class)
        .copied()
        .ok_or_else(|| crate::Error::Render(format!("no colour for class {class}; the palette has {} entries", PALETTE.len())))
}
