use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// A column reference: a header name or a zero-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    /// Digits are an index, anything else a name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Column::Index(i) => write!(f, "#{i}"),
            Column::Name(n) => write!(f, "{n:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: Column,
    pub group_column: Option<Column>,
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            label_column: Column::Name("label".into()),
            group_column: None,
            delimiter: b',',
            has_header: true,
        }
    }
}

impl CsvSchema {
    pub fn new(label_column: Column) -> Self {
        CsvSchema {
            label_column,
            ..Default::default()
        }
    }

    pub fn with_group(mut self, group_column: Column) -> Self {
        self.group_column = Some(group_column);
        self
    }
}

fn resolve(col: &Column, header: Option<&[String]>, width: usize, role: &str) -> Result<usize> {
    let idx = match col {
        Column::Index(i) => *i,
        Column::Name(name) => {
            let header = header.ok_or_else(|| {
                Error::Schema(format!("{role} column {name:?} given by name but the file has no header"))
            })?;
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("no {role} column named {name:?}")))?
        }
    };
    if idx >= width {
        return Err(Error::Schema(format!("{role} column {col} is out of range for {width} columns")));
    }
    Ok(idx)
}

fn dense_id(map: &mut HashMap<String, usize>, names: &mut Vec<String>, value: &str) -> usize {
    if let Some(&id) = map.get(value) {
        return id;
    }
    let id = names.len();
    map.insert(value.to_string(), id);
    names.push(value.to_string());
    id
}

/// Parses CSV text. `path` is only used in error messages.
pub fn read_csv<R: Read>(source: R, schema: &CsvSchema, path: &Path) -> Result<Dataset> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = ::csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();

    let mut header: Option<Vec<String>> = None;
    let mut first: Option<(u64, ::csv::StringRecord)> = None;
    let next_record = |records: &mut ::csv::StringRecordsIter<R>| -> Result<Option<(u64, ::csv::StringRecord)>> {
        match records.next() {
            None => Ok(None),
            Some(Ok(rec)) => {
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                Ok(Some((line, rec)))
            }
            Some(Err(e)) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Err(parse_err(line, e.to_string()))
            }
        }
    };
    if schema.has_header {
        match next_record(&mut records)? {
            Some((_, rec)) => header = Some(rec.iter().map(|s| s.trim().to_string()).collect()),
            None => return Err(parse_err(1, "empty file".into())),
        }
    }
    if let Some(r) = next_record(&mut records)? {
        first = Some(r);
    }
    let Some((first_line, first_rec)) = first else {
        return Err(parse_err(if schema.has_header { 2 } else { 1 }, "no data rows".into()));
    };
    let width = header.as_ref().map(Vec::len).unwrap_or(first_rec.len());

    let label_col = resolve(&schema.label_column, header.as_deref(), width, "label")?;
    let group_col = match &schema.group_column {
        Some(c) => {
            let g = resolve(c, header.as_deref(), width, "group")?;
            if g == label_col {
                return Err(Error::Schema("label and group columns must differ".into()));
            }
            Some(g)
        }
        None => None,
    };
    let feature_cols: Vec<usize> = (0..width).filter(|&c| c != label_col && Some(c) != group_col).collect();
    if feature_cols.is_empty() {
        return Err(Error::Schema("no feature columns".into()));
    }

    let mut flat = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    let (mut class_map, mut class_names) = (HashMap::new(), Vec::new());
    let (mut group_map, mut group_names) = (HashMap::new(), Vec::new());

    let mut current = Some((first_line, first_rec));
    while let Some((line, rec)) = current {
        if rec.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", rec.len())));
        }
        for &c in &feature_cols {
            let cell = rec[c].trim();
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("column {}: {cell:?} is not a number", c + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column {}: non-finite value {cell:?}", c + 1)));
            }
            flat.push(v);
        }
        let label = rec[label_col].trim();
        if label.is_empty() {
            return Err(parse_err(line, "empty label".into()));
        }
        labels.push(dense_id(&mut class_map, &mut class_names, label));
        if let Some(g) = group_col {
            groups.push(dense_id(&mut group_map, &mut group_names, rec[g].trim()));
        }
        current = next_record(&mut records)?;
    }

    let features = Array2::from_shape_vec((labels.len(), feature_cols.len()), flat)
        .map_err(|e| Error::Validation(e.to_string()))?;
    let ds = Dataset::new(features, labels, Some(class_names), group_col.map(|_| groups))?;
    if group_col.is_some() {
        ds.with_group_names(group_names)
    } else {
        Ok(ds)
    }
}

/// Loads a labeled CSV file.
///
/// Features are all columns other than the label and group columns, in file
/// order. Class and group names are mapped to dense ids in order of first
/// appearance; the names are kept on the dataset.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), schema, path)
}

/// Writes `ds` as a headed CSV: `x0..x{d-1}`, `label`, then `group` if present.
///
/// Values use the shortest representation that parses back to the same
/// `f64`, so loading the file with the default schema (plus
/// `group_column = "group"`) reproduces the dataset when its class ids are
/// in order of first appearance, as [`load_csv`] produces them.
pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(out);
    let csv_err = |e: ::csv::Error| Error::Validation(format!("csv write failed: {e}"));
    let mut header: Vec<String> = (0..ds.n_features()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    if ds.group_labels().is_some() {
        header.push("group".into());
    }
    w.write_record(&header).map_err(csv_err)?;
    for (i, row) in ds.features().outer_iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(ds.class_name(ds.labels()[i]));
        if let Some(g) = ds.group_labels() {
            rec.push(ds.group_name(g[i]));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Validation(format!("csv write failed: {e}")))?;
    Ok(())
}
