use std::path::Path;

use ndarray::Array2;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Header of an unsigned-byte IDX file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: [u8; 4],
    pub dims: Vec<u32>,
}

impl IdxHeader {
    pub fn n_elements(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Splits raw IDX bytes into header and payload.
///
/// Only unsigned-byte data (type code 0x08) with 1 or 3 dimensions is
/// accepted, and the payload must be exactly as long as the header says.
pub fn parse_idx<'a>(bytes: &'a [u8], path: &Path) -> Result<(IdxHeader, &'a [u8])> {
    if bytes.len() < 4 {
        return Err(format_err(path, "file shorter than the 4-byte magic number"));
    }
    let magic = [bytes[0], bytes[1], bytes[2], bytes[3]];
    if magic[0] != 0 || magic[1] != 0 {
        return Err(format_err(path, format!("bad magic {:02x?}", magic)));
    }
    if magic[2] != 0x08 {
        return Err(format_err(path, format!("unsupported data type 0x{:02x}, expected unsigned bytes (0x08)", magic[2])));
    }
    let ndims = magic[3] as usize;
    if ndims != 1 && ndims != 3 {
        return Err(format_err(path, format!("unsupported dimension count {ndims}")));
    }
    let header_len = 4 + 4 * ndims;
    if bytes.len() < header_len {
        return Err(format_err(path, "truncated header"));
    }
    let dims: Vec<u32> = bytes[4..header_len]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let header = IdxHeader { magic, dims };
    let payload = &bytes[header_len..];
    let expected = header.n_elements();
    if payload.len() < expected {
        return Err(format_err(path, format!("truncated payload: header declares {expected} bytes, found {}", payload.len())));
    }
    if payload.len() > expected {
        return Err(format_err(path, format!("{} trailing bytes after the declared {expected}", payload.len() - expected)));
    }
    Ok((header, payload))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads a 3-dimensional image file as an `n x (rows*cols)` matrix.
///
/// Pixels are flattened row-major and scaled by 1/255.
pub fn load_idx_images(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let (header, payload) = parse_idx(&bytes, path)?;
    if header.magic != [0, 0, 0x08, 0x03] {
        return Err(format_err(path, format!("expected image magic 0x00000803, found {:02x?}", header.magic)));
    }
    let n = header.dims[0] as usize;
    let width = header.dims[1] as usize * header.dims[2] as usize;
    let values: Vec<f64> = payload.iter().map(|&b| b as f64 / 255.0).collect();
    Array2::from_shape_vec((n, width), values).map_err(|e| format_err(path, e.to_string()))
}

/// Loads a 1-dimensional label file.
pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let (header, payload) = parse_idx(&bytes, path)?;
    if header.magic != [0, 0, 0x08, 0x01] {
        return Err(format_err(path, format!("expected label magic 0x00000801, found {:02x?}", header.magic)));
    }
    Ok(payload.iter().map(|&b| b as usize).collect())
}

/// Pairs images with labels. Classes are named by their digit value.
pub fn idx_dataset(images: Array2<f64>, labels: Vec<usize>) -> Result<Dataset> {
    if images.nrows() != labels.len() {
        return Err(Error::Validation(format!(
            "{} images but {} labels",
            images.nrows(),
            labels.len()
        )));
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1).max(2);
    let names = (0..k).map(|c| c.to_string()).collect();
    Dataset::new(images, labels, Some(names), None)
}
