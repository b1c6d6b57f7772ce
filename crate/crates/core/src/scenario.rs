//! Synthetic probe scenarios: tiny training sets paired with dense test grids.

use std::path::Path;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::{matrix_from_rows, Dataset};
use crate::error::{Error, Result};
use crate::rng;

pub const RED: usize = 0;
pub const GREEN: usize = 1;

/// Evenly spaced points on `[lo, hi]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for Grid1D {
    fn default() -> Self {
        Grid1D {
            lo: -5.0,
            hi: 5.0,
            count: 401,
        }
    }
}

/// `lo + (hi - lo) * i / (count - 1)`; written this way so that grid points
/// landing on round numbers (integers, half-integers) are exact.
fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count).map(|i| lo + (hi - lo) * i as f64 / last).collect()
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        let g = Grid1D { lo, hi, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() || self.count < 2 {
            return Err(Error::Validation(format!("invalid 1d grid {self:?}")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.count)
    }

    pub fn as_matrix(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.count, 1), self.points()).expect("column shape")
    }
}

/// Square-resolution lattice over an axis-aligned rectangle.
///
/// Points are ordered row-major with `y` as the slow axis: index
/// `iy * resolution + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub resolution: usize,
}

impl Default for Grid2D {
    fn default() -> Self {
        Grid2D {
            x_lo: -0.1,
            x_hi: 1.1,
            y_lo: -0.1,
            y_hi: 1.1,
            resolution: 201,
        }
    }
}

impl Grid2D {
    pub fn validate(&self) -> Result<()> {
        let ok = self.x_lo < self.x_hi
            && self.y_lo < self.y_hi
            && [self.x_lo, self.x_hi, self.y_lo, self.y_hi].iter().all(|v| v.is_finite())
            && self.resolution >= 2;
        if !ok {
            return Err(Error::Validation(format!("invalid 2d grid {self:?}")));
        }
        Ok(())
    }

    pub fn with_resolution(self, resolution: usize) -> Self {
        Grid2D { resolution, ..self }
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_lo, self.x_hi, self.resolution)
    }

    pub fn ys(&self) -> Vec<f64> {
        linspace(self.y_lo, self.y_hi, self.resolution)
    }

    pub fn n_cells(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn as_matrix(&self) -> Array2<f64> {
        let (xs, ys) = (self.xs(), self.ys());
        let r = self.resolution;
        Array2::from_shape_fn((r * r, 2), |(i, c)| if c == 0 { xs[i % r] } else { ys[i / r] })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    NearestNeighbor,
    Parity,
    None,
}

/// Grid a scenario's test inputs were generated from, recorded for rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridSpec {
    #[serde(rename = "1d")]
    OneD(Grid1D),
    #[serde(rename = "2d")]
    TwoD(Grid2D),
    /// Test inputs are the training rows themselves (parity tables).
    TrainRows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeScenario {
    pub name: String,
    pub train: Dataset,
    pub test_inputs: Array2<f64>,
    pub oracle: OracleKind,
    pub grid: GridSpec,
    /// How many copies of each original feature column the inputs carry.
    pub feature_copies: usize,
}

impl ProbeScenario {
    pub fn new(
        name: impl Into<String>,
        train: Dataset,
        test_inputs: Array2<f64>,
        oracle: OracleKind,
        grid: GridSpec,
    ) -> Result<Self> {
        if test_inputs.nrows() == 0 || test_inputs.ncols() != train.n_features() {
            return Err(Error::Validation(format!(
                "test inputs {:?} incompatible with {} training features",
                test_inputs.dim(),
                train.n_features()
            )));
        }
        crate::dataset::check_finite(&test_inputs, "test inputs")?;
        Ok(ProbeScenario {
            name: name.into(),
            train,
            test_inputs,
            oracle,
            grid,
            feature_copies: 1,
        })
    }

    /// First column of the test inputs; the x-axis of 1d probes.
    pub fn test_axis(&self) -> Vec<f64> {
        self.test_inputs.column(0).to_vec()
    }
}

fn red_green() -> Option<Vec<String>> {
    Some(vec!["red".to_string(), "green".to_string()])
}

/// Red sample at -1, green sample at +1.
pub fn two_point_1d(grid: Grid1D) -> Result<ProbeScenario> {
    grid.validate()?;
    let train = Dataset::from_rows(&[vec![-1.0], vec![1.0]], vec![RED, GREEN], red_green(), None)?;
    ProbeScenario::new("two-point", train, grid.as_matrix(), OracleKind::None, GridSpec::OneD(grid))
}

fn tile_columns(m: &Array2<f64>, copies: usize) -> Array2<f64> {
    let views: Vec<_> = std::iter::repeat_n(m.view(), copies).collect();
    ndarray::concatenate(Axis(1), &views).expect("equal row counts")
}

/// Tiles every feature column to `copies` total copies in train and test inputs.
pub fn repeat_features(scenario: &ProbeScenario, copies: usize) -> Result<ProbeScenario> {
    if copies < 1 {
        return Err(Error::Validation("feature copies must be at least 1".into()));
    }
    let train = scenario.train.with_features(tile_columns(scenario.train.features(), copies))?;
    Ok(ProbeScenario {
        train,
        test_inputs: tile_columns(&scenario.test_inputs, copies),
        feature_copies: scenario.feature_copies * copies,
        ..scenario.clone()
    })
}

/// Replicates matching training rows in place to `copies` total copies each.
pub fn repeat_samples(scenario: &ProbeScenario, copies: usize, only_class: Option<usize>) -> Result<ProbeScenario> {
    if copies < 1 {
        return Err(Error::Validation("sample copies must be at least 1".into()));
    }
    let labels = scenario.train.labels();
    if let Some(c) = only_class {
        if !labels.contains(&c) {
            return Err(Error::Validation(format!("class {c} absent from training rows")));
        }
    }
    let idx: Vec<usize> = (0..labels.len())
        .flat_map(|i| {
            let reps = if only_class.is_none_or(|c| labels[i] == c) { copies } else { 1 };
            std::iter::repeat_n(i, reps)
        })
        .collect();
    Ok(ProbeScenario {
        train: scenario.train.subset(&idx)?,
        ..scenario.clone()
    })
}

/// Alternating red/green points at spacing `spacing`, symmetric about 0.
///
/// Point `i` of `2 * n_cycles` sits at `(i - (2 n_cycles - 1) / 2) * spacing`
/// with label `i mod 2`.
pub fn periodic_1d(n_cycles: usize, spacing: f64, grid: Grid1D) -> Result<ProbeScenario> {
    if n_cycles < 1 || !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Validation(format!(
            "periodic scenario needs n_cycles >= 1 and spacing > 0, got {n_cycles}, {spacing}"
        )));
    }
    grid.validate()?;
    let n = 2 * n_cycles;
    let center = (n as f64 - 1.0) / 2.0;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 - center) * spacing]).collect();
    let labels = (0..n).map(|i| i % 2).collect();
    let train = Dataset::from_rows(&rows, labels, red_green(), None)?;
    ProbeScenario::new(
        format!("periodic-{n_cycles}"),
        train,
        grid.as_matrix(),
        OracleKind::None,
        GridSpec::OneD(grid),
    )
}

pub const PERIODIC_PRESETS: [usize; 3] = [2, 4, 8];

pub fn periodic_presets(grid: Grid1D) -> Result<Vec<ProbeScenario>> {
    PERIODIC_PRESETS.iter().map(|&c| periodic_1d(c, 1.0, grid)).collect()
}

/// `n_points` uniform points in the unit square, one class each.
pub fn random_points_2d(n_points: usize, seed: u64, grid: Grid2D) -> Result<ProbeScenario> {
    if n_points < 2 {
        return Err(Error::Validation("need at least 2 random points".into()));
    }
    grid.validate()?;
    let mut r = rng::rng_from_seed(seed);
    let rows: Vec<Vec<f64>> = (0..n_points)
        .map(|_| {
            let x = rng::unit(&mut r);
            let y = rng::unit(&mut r);
            vec![x, y]
        })
        .collect();
    let train = Dataset::from_rows(&rows, (0..n_points).collect(), None, None)?;
    ProbeScenario::new(
        format!("random-{n_points}"),
        train,
        grid.as_matrix(),
        OracleKind::NearestNeighbor,
        GridSpec::TwoD(grid),
    )
}

/// `rows x cols` lattice at cell centres of the unit square, one class each.
pub fn grid_points_2d(rows: usize, cols: usize, grid: Grid2D) -> Result<ProbeScenario> {
    if rows < 1 || cols < 1 || rows * cols < 2 {
        return Err(Error::Validation(format!("lattice {rows}x{cols} needs at least 2 points")));
    }
    grid.validate()?;
    let pts: Vec<Vec<f64>> = (0..rows)
        .flat_map(|r| {
            (0..cols).map(move |c| vec![(c as f64 + 0.5) / cols as f64, (r as f64 + 0.5) / rows as f64])
        })
        .collect();
    let train = Dataset::from_rows(&pts, (0..rows * cols).collect(), None, None)?;
    ProbeScenario::new(
        format!("grid-{rows}x{cols}"),
        train,
        grid.as_matrix(),
        OracleKind::NearestNeighbor,
        GridSpec::TwoD(grid),
    )
}

pub const MAX_PARITY_DIM: usize = 20;

/// Full truth table of the `dims`-bit parity function, rows in counting
/// order with the most significant bit in column 0.
pub fn parity_table(dims: usize) -> Result<ProbeScenario> {
    if !(1..=MAX_PARITY_DIM).contains(&dims) {
        return Err(Error::Validation(format!(
            "parity dimension {dims} outside 1..={MAX_PARITY_DIM}"
        )));
    }
    let n = 1usize << dims;
    let features = Array2::from_shape_fn((n, dims), |(i, j)| ((i >> (dims - 1 - j)) & 1) as f64);
    let labels = (0..n).map(|i| (i.count_ones() % 2) as usize).collect();
    let train = Dataset::new(features.clone(), labels, None, None)?.with_n_classes(2)?;
    ProbeScenario::new(format!("parity-{dims}"), train, features, OracleKind::Parity, GridSpec::TrainRows)
}

/// On-disk form of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    pub n_classes: usize,
    pub class_names: Option<Vec<String>>,
    pub oracle: OracleKind,
    pub grid: GridSpec,
    pub feature_copies: usize,
    pub train_features: Vec<Vec<f64>>,
    pub train_labels: Vec<usize>,
    pub test_inputs: Vec<Vec<f64>>,
}

fn rows_of(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

impl From<&ProbeScenario> for ScenarioFile {
    fn from(s: &ProbeScenario) -> Self {
        ScenarioFile {
            name: s.name.clone(),
            n_classes: s.train.n_classes(),
            class_names: s.train.class_names().map(<[String]>::to_vec),
            oracle: s.oracle,
            grid: s.grid,
            feature_copies: s.feature_copies,
            train_features: rows_of(s.train.features()),
            train_labels: s.train.labels().to_vec(),
            test_inputs: rows_of(&s.test_inputs),
        }
    }
}

impl TryFrom<ScenarioFile> for ProbeScenario {
    type Error = Error;

    fn try_from(f: ScenarioFile) -> Result<Self> {
        let train =
            Dataset::from_rows(&f.train_features, f.train_labels, f.class_names, None)?.with_n_classes(f.n_classes)?;
        let mut s = ProbeScenario::new(f.name, train, matrix_from_rows(&f.test_inputs)?, f.oracle, f.grid)?;
        s.feature_copies = f.feature_copies;
        Ok(s)
    }
}

pub fn scenario_to_json(s: &ProbeScenario) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from(s)).expect("scenario serializes")
}

pub fn scenario_from_json(text: &str) -> Result<ProbeScenario> {
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("scenario JSON: {e}")))?;
    file.try_into()
}

pub fn write_scenario(s: &ProbeScenario, path: &Path) -> Result<()> {
    std::fs::write(path, scenario_to_json(s)).map_err(|e| Error::io(path, e))
}

pub fn read_scenario(path: &Path) -> Result<ProbeScenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    scenario_from_json(&text)
}
