//! Behavioral probing harness for in-context tabular classifiers.
//!
//! A [`Model`](models::Model) maps a training set and test inputs to class
//! probabilities; nothing else about it is assumed. The crate builds probe
//! scenarios, runs built-in reference classifiers or external models over a
//! line-delimited JSON protocol, evaluates them on seeded splits and renders
//! the results as SVG figures and CSV/markdown tables.

pub mod bridge;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod models;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod split;

pub use dataset::{argmax_labels, Dataset, PredictionMatrix};
pub use error::{Error, Result};
pub use split::Split;
