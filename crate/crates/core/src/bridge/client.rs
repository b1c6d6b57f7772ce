use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

use ndarray::Array2;
use serde_json::Value;

use crate::dataset::{Dataset, PredictionMatrix};
use crate::error::{Error, Result};
use crate::models::Model;

use super::protocol::{
    decode_handshake_response, decode_response, encode_handshake_request, encode_request_with, Capabilities,
    MatrixEncoding, Options, PredictRequest, PROTOCOL_VERSION,
};
use super::transport::{Connection, Transport};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

/// Connection settings for one external model.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSpec {
    pub transport: Transport,
    pub options: Options,
    pub timeout: Duration,
    pub encoding: MatrixEncoding,
}

impl ExternalSpec {
    pub fn new(transport: Transport) -> Self {
        ExternalSpec {
            transport,
            options: Options::new(),
            timeout: DEFAULT_TIMEOUT,
            encoding: MatrixEncoding::Nested,
        }
    }
}

fn open_and_handshake(spec: &ExternalSpec) -> Result<(Connection, Capabilities)> {
    let mut conn = Connection::open(&spec.transport)?;
    let line = conn.roundtrip(&encode_handshake_request(), spec.timeout)?;
    let caps = decode_handshake_response(&line)?;
    Ok((conn, caps))
}

/// Connects, exchanges handshakes and returns the server's capability record.
pub fn handshake(spec: &ExternalSpec) -> Result<Capabilities> {
    open_and_handshake(spec).map(|(_, caps)| caps)
}

fn option_is_true(options: &Options, key: &str) -> bool {
    matches!(options.get(key), Some(Value::Bool(true)))
        || matches!(options.get(key), Some(Value::String(s)) if s == "true")
}

/// Rejects requests the server said it cannot take.
pub fn check_capabilities(caps: &Capabilities, n_train: usize, n_features: usize, options: &Options) -> Result<()> {
    if let Some(max) = caps.max_features {
        if n_features as u64 > max && !option_is_true(options, "subsample_features") {
            return Err(Error::Capability(format!(
                "{} accepts at most {max} features, request has {n_features} (set subsample_features to let the server subsample)",
                caps.model
            )));
        }
    }
    if let Some(max) = caps.max_rows {
        if n_train as u64 > max {
            return Err(Error::Capability(format!(
                "{} accepts at most {max} training rows, request has {n_train}",
                caps.model
            )));
        }
    }
    Ok(())
}

/// A model living in another process.
///
/// Connections are opened lazily and pooled: each concurrent caller gets its
/// own connection, with one request in flight per connection. A connection
/// that produced any error is dropped (and its child process killed).
pub struct ExternalModel {
    label: String,
    spec: ExternalSpec,
    pool: Mutex<Vec<Connection>>,
    caps: OnceLock<Capabilities>,
    next_id: AtomicU64,
}

impl ExternalModel {
    pub fn new(label: impl Into<String>, spec: ExternalSpec) -> Self {
        ExternalModel {
            label: label.into(),
            spec,
            pool: Mutex::new(Vec::new()),
            caps: OnceLock::new(),
            next_id: AtomicU64::new(0),
        }
    }

    pub fn spec(&self) -> &ExternalSpec {
        &self.spec
    }

    fn checkout(&self) -> Result<(Connection, Capabilities)> {
        if let Some(conn) = self.pool.lock().expect("pool lock").pop() {
            let caps = self.caps.get().cloned().expect("pooled connections have handshaken");
            return Ok((conn, caps));
        }
        let (conn, caps) = open_and_handshake(&self.spec)?;
        let caps = self.caps.get_or_init(|| caps).clone();
        Ok((conn, caps))
    }

    /// Capability record, connecting if necessary.
    pub fn capabilities(&self) -> Result<Capabilities> {
        let (conn, caps) = self.checkout()?;
        self.pool.lock().expect("pool lock").push(conn);
        Ok(caps)
    }

    pub fn predict_external(&self, train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
        let (mut conn, caps) = self.checkout()?;
        let checked = check_capabilities(&caps, train.n_rows(), train.n_features(), &self.spec.options);
        if let Err(e) = checked {
            self.pool.lock().expect("pool lock").push(conn);
            return Err(e);
        }
        let request = PredictRequest {
            protocol_version: PROTOCOL_VERSION,
            request_id: format!("req-{}", self.next_id.fetch_add(1, Ordering::Relaxed)),
            train_features: train.features().clone(),
            train_labels: train.labels().to_vec(),
            test_features: test_inputs.clone(),
            n_classes: train.n_classes(),
            options: self.spec.options.clone(),
        };
        let line = encode_request_with(&request, self.spec.encoding)?;
        let reply = conn.roundtrip(&line, self.spec.timeout)?;
        let preds = decode_response(&reply)?.into_predictions(&request)?;
        self.pool.lock().expect("pool lock").push(conn);
        Ok(preds)
    }
}

impl Model for ExternalModel {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn predict(&self, train: &Dataset, test_inputs: &Array2<f64>) -> Result<PredictionMatrix> {
        self.predict_external(train, test_inputs)
    }
}
