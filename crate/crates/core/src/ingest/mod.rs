//! Loaders for labeled CSV exports and IDX binaries (the MNIST format).

mod csv;
mod idx;

pub use self::csv::{load_csv, read_csv, write_csv, Column, CsvSchema};
pub use self::idx::{idx_dataset, load_idx_images, load_idx_labels, parse_idx, IdxHeader};
