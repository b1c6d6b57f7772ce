//! Message types and the line-delimited JSON encoding (see `docs/protocol.md`).

use std::collections::BTreeMap;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dataset::PredictionMatrix;
use crate::error::{Error, Result};

pub const PROTOCOL_VERSION: u32 = 1;

/// Row sums outside `1 ± WIRE_ROW_TOLERANCE` are rejected before renormalising.
pub const WIRE_ROW_TOLERANCE: f64 = 1e-4;

pub type Options = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixEncoding {
    #[default]
    Nested,
    DenseF32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictRequest {
    pub protocol_version: u32,
    pub request_id: String,
    pub train_features: Array2<f64>,
    pub train_labels: Vec<usize>,
    pub test_features: Array2<f64>,
    pub n_classes: usize,
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResponseBody {
    Probs(Array2<f64>),
    Error { code: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictResponse {
    pub request_id: String,
    pub body: ResponseBody,
}

/// What a server reports about itself in the handshake.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub protocol_version: u32,
    pub model: String,
    /// `None` means no limit.
    pub max_rows: Option<u64>,
    pub max_features: Option<u64>,
}

// ---- matrices on the wire ------------------------------------------------

fn check_matrix_finite(m: &Array2<f64>, what: &str) -> Result<()> {
    match m.indexed_iter().find(|(_, v)| !v.is_finite()) {
        Some(((r, c), v)) => Err(Error::Encode(format!("{what} has non-finite value {v} at ({r}, {c})"))),
        None => Ok(()),
    }
}

fn matrix_to_value(m: &Array2<f64>, encoding: MatrixEncoding) -> Value {
    match encoding {
        MatrixEncoding::Nested => Value::Array(
            m.outer_iter()
                .map(|row| Value::Array(row.iter().map(|&v| Value::from(v)).collect()))
                .collect(),
        ),
        MatrixEncoding::DenseF32 => {
            let mut bytes = Vec::with_capacity(m.len() * 4);
            for &v in m.iter() {
                bytes.extend_from_slice(&(v as f32).to_le_bytes());
            }
            serde_json::json!({
                "dense_f32": B64.encode(bytes),
                "shape": [m.nrows(), m.ncols()],
            })
        }
    }
}

fn value_to_matrix(v: &Value, field: &str) -> Result<Array2<f64>> {
    let bad = |msg: &str| Error::Protocol(format!("field {field:?}: {msg}"));
    match v {
        Value::Array(rows) => {
            let cols = match rows.first() {
                Some(Value::Array(r)) => r.len(),
                Some(_) => return Err(bad("rows must be arrays")),
                None => 0,
            };
            let mut flat = Vec::with_capacity(rows.len() * cols);
            for row in rows {
                let row = row.as_array().ok_or_else(|| bad("rows must be arrays"))?;
                if row.len() != cols {
                    return Err(bad("ragged rows"));
                }
                for x in row {
                    flat.push(x.as_f64().ok_or_else(|| bad("entries must be numbers"))?);
                }
            }
            Array2::from_shape_vec((rows.len(), cols), flat).map_err(|e| bad(&e.to_string()))
        }
        Value::Object(obj) => {
            let data = obj
                .get("dense_f32")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("object matrices need a dense_f32 string"))?;
            let shape: Vec<usize> = obj
                .get("shape")
                .and_then(Value::as_array)
                .map(|s| s.iter().filter_map(Value::as_u64).map(|v| v as usize).collect())
                .ok_or_else(|| bad("dense_f32 needs a shape"))?;
            if shape.len() != 2 {
                return Err(bad("shape must have two entries"));
            }
            let bytes = B64.decode(data).map_err(|e| bad(&format!("base64: {e}")))?;
            if bytes.len() != shape[0] * shape[1] * 4 {
                return Err(bad("dense_f32 byte count does not match shape"));
            }
            let flat = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            Array2::from_shape_vec((shape[0], shape[1]), flat).map_err(|e| bad(&e.to_string()))
        }
        _ => Err(bad("expected a matrix")),
    }
}

fn to_line(value: &Value) -> Vec<u8> {
    let mut line = serde_json::to_vec(value).expect("json values serialize");
    line.push(b'\n');
    line
}

fn parse_object(line: &[u8]) -> Result<Map<String, Value>> {
    let text = std::str::from_utf8(line).map_err(|_| Error::Protocol("message is not UTF-8".into()))?;
    let text = text.strip_suffix('\n').unwrap_or(text);
    let text = text.strip_suffix('\r').unwrap_or(text);
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(obj)) => Ok(obj),
        Ok(_) => Err(Error::Protocol("message is not a JSON object".into())),
        Err(e) => Err(Error::Protocol(format!("malformed JSON: {e}"))),
    }
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Protocol(format!("missing field {key:?}")))
}

fn get_str(obj: &Map<String, Value>, key: &str) -> Result<String> {
    get(obj, key)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::Protocol(format!("field {key:?} must be a string")))
}

fn get_u64(obj: &Map<String, Value>, key: &str) -> Result<u64> {
    get(obj, key)?
        .as_u64()
        .ok_or_else(|| Error::Protocol(format!("field {key:?} must be a non-negative integer")))
}

fn expect_type(obj: &Map<String, Value>, ty: &str) -> Result<()> {
    match obj.get("type").and_then(Value::as_str) {
        Some(t) if t == ty => Ok(()),
        Some(t) => Err(Error::Protocol(format!("expected a {ty:?} message, got {t:?}"))),
        None => Err(Error::Protocol("missing field \"type\"".into())),
    }
}

// ---- requests --------------------------------------------------------------

impl PredictRequest {
    fn check(&self) -> Result<()> {
        if self.test_features.nrows() == 0 {
            return Err(Error::Encode("test matrix is empty".into()));
        }
        if self.train_features.nrows() == 0 || self.train_features.ncols() == 0 {
            return Err(Error::Encode("train matrix is empty".into()));
        }
        if self.train_features.ncols() != self.test_features.ncols() {
            return Err(Error::Encode(format!(
                "train has {} features, test has {}",
                self.train_features.ncols(),
                self.test_features.ncols()
            )));
        }
        if self.train_labels.len() != self.train_features.nrows() {
            return Err(Error::Encode("train labels do not match train rows".into()));
        }
        if self.n_classes < 2 || self.train_labels.iter().any(|&y| y >= self.n_classes) {
            return Err(Error::Encode(format!("labels inconsistent with n_classes = {}", self.n_classes)));
        }
        check_matrix_finite(&self.train_features, "train_features")?;
        check_matrix_finite(&self.test_features, "test_features")?;
        if let Some((k, _)) = self.options.iter().find(|(_, v)| contains_non_finite(v)) {
            return Err(Error::Encode(format!("option {k:?} is not finite")));
        }
        Ok(())
    }
}

fn contains_non_finite(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_some_and(|f| !f.is_finite()),
        Value::Array(a) => a.iter().any(contains_non_finite),
        Value::Object(o) => o.values().any(contains_non_finite),
        _ => false,
    }
}

pub fn encode_request(req: &PredictRequest) -> Result<Vec<u8>> {
    encode_request_with(req, MatrixEncoding::Nested)
}

pub fn encode_request_with(req: &PredictRequest, encoding: MatrixEncoding) -> Result<Vec<u8>> {
    req.check()?;
    let value = serde_json::json!({
        "type": "predict",
        "protocol_version": req.protocol_version,
        "request_id": req.request_id,
        "n_classes": req.n_classes,
        "train_features": matrix_to_value(&req.train_features, encoding),
        "train_labels": req.train_labels,
        "test_features": matrix_to_value(&req.test_features, encoding),
        "options": req.options,
    });
    Ok(to_line(&value))
}

pub fn decode_request(line: &[u8]) -> Result<PredictRequest> {
    let obj = parse_object(line)?;
    expect_type(&obj, "predict")?;
    let labels = get(&obj, "train_labels")?
        .as_array()
        .ok_or_else(|| Error::Protocol("train_labels must be an array".into()))?
        .iter()
        .map(|v| v.as_u64().map(|u| u as usize))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Protocol("train_labels must be non-negative integers".into()))?;
    let options = match obj.get("options") {
        None | Some(Value::Null) => Options::new(),
        Some(Value::Object(o)) => o.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        Some(_) => return Err(Error::Protocol("options must be an object".into())),
    };
    let req = PredictRequest {
        protocol_version: get_u64(&obj, "protocol_version")? as u32,
        request_id: get_str(&obj, "request_id")?,
        train_features: value_to_matrix(get(&obj, "train_features")?, "train_features")?,
        train_labels: labels,
        test_features: value_to_matrix(get(&obj, "test_features")?, "test_features")?,
        n_classes: get_u64(&obj, "n_classes")? as usize,
        options,
    };
    req.check().map_err(|e| match e {
        Error::Encode(m) => Error::Shape(m),
        other => other,
    })?;
    Ok(req)
}

// ---- responses ---------------------------------------------------------------

pub fn encode_response(resp: &PredictResponse) -> Result<Vec<u8>> {
    encode_response_with(resp, MatrixEncoding::Nested)
}

pub fn encode_response_with(resp: &PredictResponse, encoding: MatrixEncoding) -> Result<Vec<u8>> {
    let value = match &resp.body {
        ResponseBody::Probs(p) => {
            check_matrix_finite(p, "probs")?;
            serde_json::json!({
                "type": "predict",
                "request_id": resp.request_id,
                "probs": matrix_to_value(p, encoding),
            })
        }
        ResponseBody::Error { code, message } => serde_json::json!({
            "type": "error",
            "request_id": resp.request_id,
            "error": { "code": code, "message": message },
        }),
    };
    Ok(to_line(&value))
}

/// Parses a response line. Only syntax is checked here; see
/// [`PredictResponse::into_predictions`] for validation against the request.
pub fn decode_response(line: &[u8]) -> Result<PredictResponse> {
    let obj = parse_object(line)?;
    let request_id = get_str(&obj, "request_id")?;
    let body = match (obj.get("probs"), obj.get("error")) {
        (Some(p), None) => ResponseBody::Probs(value_to_matrix(p, "probs")?),
        (None, Some(Value::Object(e))) => ResponseBody::Error {
            code: get_str(e, "code")?,
            message: e.get("message").and_then(Value::as_str).unwrap_or_default().to_string(),
        },
        (None, Some(_)) => return Err(Error::Protocol("error must be an object".into())),
        (Some(_), Some(_)) => return Err(Error::Protocol("response carries both probs and error".into())),
        (None, None) => return Err(Error::Protocol("response carries neither probs nor error".into())),
    };
    Ok(PredictResponse { request_id, body })
}

impl PredictResponse {
    /// Checks the response against its request and renormalises rows to sum to 1.
    pub fn into_predictions(self, req: &PredictRequest) -> Result<PredictionMatrix> {
        if self.request_id != req.request_id {
            return Err(Error::Protocol(format!(
                "response id {:?} does not answer request {:?}",
                self.request_id, req.request_id
            )));
        }
        let probs = match self.body {
            ResponseBody::Error { code, message } => return Err(Error::RemoteModel { code, message }),
            ResponseBody::Probs(p) => p,
        };
        let expected = (req.test_features.nrows(), req.n_classes);
        if probs.dim() != expected {
            return Err(Error::Shape(format!("expected {expected:?} probabilities, got {:?}", probs.dim())));
        }
        for (r, row) in probs.outer_iter().enumerate() {
            if let Some(p) = row.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                return Err(Error::Shape(format!("row {r} has invalid probability {p}")));
            }
            let sum = row.sum();
            if (sum - 1.0).abs() > WIRE_ROW_TOLERANCE {
                return Err(Error::Shape(format!("row {r} sums to {sum}")));
            }
        }
        PredictionMatrix::renormalized(probs).map_err(|e| Error::Shape(e.to_string()))
    }
}

// ---- handshake ----------------------------------------------------------------

pub fn encode_handshake_request() -> Vec<u8> {
    to_line(&serde_json::json!({ "type": "handshake", "protocol_version": PROTOCOL_VERSION }))
}

/// Returns the client's protocol version.
pub fn decode_handshake_request(line: &[u8]) -> Result<u32> {
    let obj = parse_object(line)?;
    expect_type(&obj, "handshake")?;
    Ok(get_u64(&obj, "protocol_version")? as u32)
}

pub fn encode_handshake_response(caps: &Capabilities) -> Vec<u8> {
    to_line(&serde_json::json!({
        "type": "handshake",
        "protocol_version": caps.protocol_version,
        "model": caps.model,
        "max_rows": caps.max_rows,
        "max_features": caps.max_features,
    }))
}

/// All four capability fields must be present; limits may be `null`.
pub fn decode_handshake_response(line: &[u8]) -> Result<Capabilities> {
    let obj = parse_object(line)?;
    if let Some(Value::Object(e)) = obj.get("error") {
        return Err(Error::RemoteModel {
            code: get_str(e, "code")?,
            message: e.get("message").and_then(Value::as_str).unwrap_or_default().to_string(),
        });
    }
    expect_type(&obj, "handshake")?;
    let limit = |key: &str| -> Result<Option<u64>> {
        match get(&obj, key)? {
            Value::Null => Ok(None),
            v => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| Error::Protocol(format!("field {key:?} must be an integer or null"))),
        }
    };
    let caps = Capabilities {
        protocol_version: get_u64(&obj, "protocol_version")? as u32,
        model: get_str(&obj, "model")?,
        max_rows: limit("max_rows")?,
        max_features: limit("max_features")?,
    };
    if caps.protocol_version != PROTOCOL_VERSION {
        return Err(Error::Protocol(format!(
            "server speaks protocol version {}, client speaks {PROTOCOL_VERSION}",
            caps.protocol_version
        )));
    }
    Ok(caps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn minimal() -> PredictRequest {
        PredictRequest {
            protocol_version: PROTOCOL_VERSION,
            request_id: "r-0".into(),
            train_features: array![[-1.0], [1.0]],
            train_labels: vec![0, 1],
            test_features: array![[0.25]],
            n_classes: 2,
            options: Options::new(),
        }
    }

    #[test]
    fn minimal_request_is_one_line() {
        let line = encode_request(&minimal()).unwrap();
        assert_eq!(line.iter().filter(|&&b| b == b'\n').count(), 1);
        assert_eq!(*line.last().unwrap(), b'\n');
        assert_eq!(decode_request(&line).unwrap(), minimal());
    }

    #[test]
    fn options_preserved() {
        let mut req = minimal();
        req.options.insert("n_ensembles".into(), Value::from(32));
        let line = encode_request(&req).unwrap();
        assert!(std::str::from_utf8(&line).unwrap().contains(r#""options":{"n_ensembles":32}"#));
        assert_eq!(decode_request(&line).unwrap().options["n_ensembles"], Value::from(32));
    }

    #[test]
    fn empty_test_matrix_rejected() {
        let mut req = minimal();
        req.test_features = Array2::zeros((0, 1));
        assert!(matches!(encode_request(&req), Err(Error::Encode(_))));
    }

    #[test]
    fn non_finite_rejected() {
        let mut req = minimal();
        req.train_features[[0, 0]] = f64::INFINITY;
        assert!(matches!(encode_request(&req), Err(Error::Encode(_))));
    }

    #[test]
    fn dense_f32_round_trip() {
        let mut req = minimal();
        req.test_features = array![[0.5], [-2.25]];
        let line = encode_request_with(&req, MatrixEncoding::DenseF32).unwrap();
        assert!(std::str::from_utf8(&line).unwrap().contains("dense_f32"));
        assert_eq!(decode_request(&line).unwrap(), req);
    }

    #[test]
    fn well_formed_response() {
        let resp = decode_response(br#"{"type":"predict","request_id":"r-0","probs":[[0.25,0.75]]}"#).unwrap();
        let p = resp.into_predictions(&minimal()).unwrap();
        assert_eq!(p.probs(), &array![[0.25, 0.75]]);
    }

    #[test]
    fn truncated_line() {
        assert!(matches!(
            decode_response(br#"{"type":"predict","request_id":"r-0","probs":[[0.2"#),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn low_mass_row() {
        let resp = decode_response(br#"{"request_id":"r-0","probs":[[0.4,0.4]]}"#).unwrap();
        assert!(matches!(resp.into_predictions(&minimal()), Err(Error::Shape(_))));
    }

    #[test]
    fn wrong_width() {
        let resp = decode_response(br#"{"request_id":"r-0","probs":[[0.2,0.3,0.5]]}"#).unwrap();
        assert!(matches!(resp.into_predictions(&minimal()), Err(Error::Shape(_))));
    }

    #[test]
    fn remote_error_payload() {
        let resp = decode_response(br#"{"type":"error","request_id":"r-0","error":{"code":"REMOTE","message":"boom"}}"#)
            .unwrap();
        match resp.into_predictions(&minimal()) {
            Err(Error::RemoteModel { code, message }) => assert_eq!((code.as_str(), message.as_str()), ("REMOTE", "boom")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mismatched_id() {
        let resp = decode_response(br#"{"request_id":"r-9","probs":[[0.5,0.5]]}"#).unwrap();
        assert!(matches!(resp.into_predictions(&minimal()), Err(Error::Protocol(_))));
    }

    #[test]
    fn both_or_neither() {
        assert!(decode_response(br#"{"request_id":"r","probs":[[1.0]],"error":{"code":"X"}}"#).is_err());
        assert!(decode_response(br#"{"request_id":"r"}"#).is_err());
        assert!(decode_response(b"[1,2]").is_err());
    }

    #[test]
    fn small_float_drift_is_renormalised() {
        let resp = decode_response(br#"{"request_id":"r-0","probs":[[0.25003,0.75]]}"#).unwrap();
        let p = resp.into_predictions(&minimal()).unwrap();
        assert!((p.probs().row(0).sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn handshake_round_trip_and_failures() {
        let caps = Capabilities {
            protocol_version: PROTOCOL_VERSION,
            model: "mock".into(),
            max_rows: None,
            max_features: Some(100),
        };
        assert_eq!(decode_handshake_response(&encode_handshake_response(&caps)).unwrap(), caps);
        assert!(matches!(
            decode_handshake_response(br#"{"type":"handshake","protocol_version":2,"model":"m","max_rows":null,"max_features":null}"#),
            Err(Error::Protocol(_))
        ));
        assert!(matches!(
            decode_handshake_response(br#"{"type":"handshake","protocol_version":1,"model":"m"}"#),
            Err(Error::Protocol(_))
        ));
        assert_eq!(decode_handshake_request(&encode_handshake_request()).unwrap(), PROTOCOL_VERSION);
    }
}
