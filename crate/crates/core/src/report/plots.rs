use std::fmt::Write;

use crate::error::{Error, Result};

use super::svg::{escape, nice_ticks, px, Frame, SvgDoc, HEIGHT, WIDTH};
use super::PALETTE;

/// Error rates below this are drawn at this value on log-scale plots.
pub const ERROR_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Style {
    pub color: String,
    /// SVG dash pattern such as `"6 4"`.
    pub dash: Option<String>,
}

impl Style {
    pub fn solid(color: &str) -> Self {
        Style {
            color: color.into(),
            dash: None,
        }
    }

    pub fn dashed(color: &str) -> Self {
        Style {
            color: color.into(),
            dash: Some("6 4".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub style: Style,
}

impl CurveSeries {
    pub fn validate(&self) -> Result<()> {
        if self.xs.len() != self.ys.len() {
            return Err(Error::Render(format!(
                "series {:?}: {} xs but {} ys",
                self.label,
                self.xs.len(),
                self.ys.len()
            )));
        }
        if self.xs.is_empty() {
            return Err(Error::Render(format!("series {:?} is empty", self.label)));
        }
        if self.xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Render(format!("series {:?} has a non-finite x", self.label)));
        }
        if let Some(y) = self.ys.iter().find(|y| !(0.0..=1.0).contains(*y)) {
            return Err(Error::Render(format!("series {:?}: y value {y} outside [0, 1]", self.label)));
        }
        Ok(())
    }
}

struct Scale {
    lo: f64,
    hi: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        if self.hi == self.lo {
            return (self.p0 + self.p1) / 2.0;
        }
        self.p0 + (v - self.lo) / (self.hi - self.lo) * (self.p1 - self.p0)
    }
}

fn axes(doc: &mut SvgDoc, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    doc.raw(&format!(
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        px(frame.left),
        px(frame.top),
        px(frame.width),
        px(frame.height)
    ));
    doc.text(frame.left + frame.width / 2.0, 22.0, "middle", title);
    doc.text(frame.left + frame.width / 2.0, frame.bottom() + 40.0, "middle", x_label);
    let cy = frame.top + frame.height / 2.0;
    doc.raw(&format!(
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        px(cy),
        px(cy),
        escape(y_label)
    ));
}

fn x_ticks(doc: &mut SvgDoc, frame: &Frame, scale: &Scale, ticks: &[(f64, String)]) {
    for (v, label) in ticks {
        let x = scale.map(*v);
        doc.line(x, frame.bottom(), x, frame.bottom() + 5.0, "black", 1.0, None);
        doc.text(x, frame.bottom() + 18.0, "middle", label);
    }
}

fn y_tick(doc: &mut SvgDoc, frame: &Frame, y: f64, label: &str) {
    doc.line(frame.left - 5.0, y, frame.left, y, "black", 1.0, None);
    doc.line(frame.left, y, frame.right(), y, "#e0e0e0", 0.5, None);
    doc.text(frame.left - 8.0, y + 4.0, "end", label);
}

fn legend(doc: &mut SvgDoc, frame: &Frame, entries: &[(&str, &Style)]) {
    let x = frame.right() + 15.0;
    for (i, (label, style)) in entries.iter().enumerate() {
        let y = frame.top + 10.0 + 18.0 * i as f64;
        doc.line(x, y, x + 24.0, y, &style.color, 2.0, style.dash.as_deref());
        doc.text(x + 30.0, y + 4.0, "start", label);
    }
}

fn polyline(points: impl Iterator<Item = (f64, f64)>, style: &Style) -> String {
    let mut pts = String::new();
    for (i, (x, y)) in points.enumerate() {
        if i > 0 {
            pts.push(' ');
        }
        let _ = write!(pts, "{},{}", px(x), px(y));
    }
    let dash = style
        .dash
        .as_ref()
        .map(|d| format!(r#" stroke-dasharray="{d}""#))
        .unwrap_or_default();
    format!(
        r#"<polyline points="{pts}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
        style.color
    )
}

/// Line plot of probability curves over a shared x axis, y fixed to [0, 1].
///
/// `marks` are drawn as crosses on the x axis, coloured by class; used for
/// the training inputs of 1d probes.
pub fn render_curves(series: &[CurveSeries], title: &str, x_label: &str, marks: &[(f64, usize)]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Render("no series to plot".into()));
    }
    for s in series {
        s.validate()?;
    }
    let frame = Frame::standard();
    let all_x = series.iter().flat_map(|s| s.xs.iter().copied());
    let lo = all_x.clone().fold(f64::INFINITY, f64::min);
    let hi = all_x.fold(f64::NEG_INFINITY, f64::max);
    let sx = Scale {
        lo,
        hi,
        p0: frame.left,
        p1: frame.right(),
    };
    let sy = Scale {
        lo: 0.0,
        hi: 1.0,
        p0: frame.bottom(),
        p1: frame.top,
    };
    let mut doc = SvgDoc::new(WIDTH, HEIGHT);
    for (v, label) in nice_ticks(0.0, 1.0) {
        y_tick(&mut doc, &frame, sy.map(v), &label);
    }
    x_ticks(&mut doc, &frame, &sx, &nice_ticks(lo, hi));
    axes(&mut doc, &frame, title, x_label, "predicted probability");
    for s in series {
        doc.raw(&polyline(
            s.xs.iter().zip(&s.ys).map(|(&x, &y)| (sx.map(x), sy.map(y))),
            &s.style,
        ));
    }
    for &(x, class) in marks {
        if x < lo || x > hi {
            continue;
        }
        let color = super::class_color(class)?;
        let (cx, cy) = (sx.map(x), frame.bottom() - 6.0);
        doc.line(cx - 4.0, cy - 4.0, cx + 4.0, cy + 4.0, color, 2.0, None);
        doc.line(cx - 4.0, cy + 4.0, cx + 4.0, cy - 4.0, color, 2.0, None);
    }
    let entries: Vec<(&str, &Style)> = series.iter().map(|s| (s.label.as_str(), &s.style)).collect();
    legend(&mut doc, &frame, &entries);
    Ok(doc.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub label: String,
    /// `(dimension, error rate)` pairs.
    pub points: Vec<(f64, f64)>,
}

/// Error rate against input dimension, one line per method.
///
/// With `log_scale` the y axis spans `[ERROR_FLOOR, 1]`; points with error
/// below the floor (in particular exactly 0) are drawn on the floor as open
/// circles instead of filled dots.
pub fn render_error_curve(series: &[ErrorSeries], title: &str, log_scale: bool) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Render("no points to plot".into()));
    }
    for s in series {
        if let Some(&(d, e)) = s.points.iter().find(|(d, e)| !d.is_finite() || !(0.0..=1.0).contains(e)) {
            return Err(Error::Render(format!("series {:?}: bad point ({d}, {e})", s.label)));
        }
    }
    let frame = Frame::standard();
    let ds = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let lo = ds.clone().fold(f64::INFINITY, f64::min) - 0.5;
    let hi = ds.fold(f64::NEG_INFINITY, f64::max) + 0.5;
    let sx = Scale {
        lo,
        hi,
        p0: frame.left,
        p1: frame.right(),
    };
    let floor_exp = ERROR_FLOOR.log10();
    let y_of = |e: f64| -> f64 {
        if log_scale {
            let t = (e.max(ERROR_FLOOR).log10() - floor_exp) / -floor_exp;
            frame.bottom() - t * frame.height
        } else {
            frame.bottom() - e * frame.height
        }
    };
    let mut doc = SvgDoc::new(WIDTH, HEIGHT);
    if log_scale {
        for k in (floor_exp as i32)..=0 {
            let label = if k == 0 { "1".to_string() } else { format!("1e{k}") };
            y_tick(&mut doc, &frame, y_of(10f64.powi(k)), &label);
        }
    } else {
        for (v, label) in nice_ticks(0.0, 1.0) {
            y_tick(&mut doc, &frame, y_of(v), &label);
        }
    }
    let d_ticks: Vec<(f64, String)> = nice_ticks(lo, hi).into_iter().filter(|(v, _)| v.fract() == 0.0).collect();
    x_ticks(&mut doc, &frame, &sx, &d_ticks);
    let y_label = if log_scale { "test error rate (log scale)" } else { "test error rate" };
    axes(&mut doc, &frame, title, "input dimension D", y_label);

    let styles: Vec<Style> = (0..series.len()).map(|i| Style::solid(PALETTE[(i + 2) % PALETTE.len()])).collect();
    for (s, style) in series.iter().zip(&styles) {
        doc.raw(&polyline(s.points.iter().map(|&(d, e)| (sx.map(d), y_of(e))), style));
        for &(d, e) in &s.points {
            let clipped = log_scale && e < ERROR_FLOOR;
            let fill = if clipped { "white" } else { style.color.as_str() };
            doc.raw(&format!(
                r#"<circle cx="{}" cy="{}" r="4" fill="{fill}" stroke="{}" stroke-width="1.5"/>"#,
                px(sx.map(d)),
                px(y_of(e)),
                style.color
            ));
        }
    }
    let entries: Vec<(&str, &Style)> = series.iter().zip(&styles).map(|(s, st)| (s.label.as_str(), st)).collect();
    legend(&mut doc, &frame, &entries);
    if log_scale {
        doc.text(
            frame.right() + 15.0,
            frame.bottom(),
            "start",
            "open marker: below 1e-4",
        );
    }
    Ok(doc.finish())
}
