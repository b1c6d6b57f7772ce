//! Serves any [`Model`] over the line protocol.
//!
//! Used to expose the built-in models to other tools and as a stand-in
//! server for testing the client side.

use std::io::{BufRead, Write};
use std::net::TcpListener;
use std::sync::Arc;

use serde_json::Value;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::models::{ensemble_predict, EnsembleConfig, Model};

use super::protocol::{
    decode_handshake_request, decode_request, encode_handshake_response, encode_response, Capabilities,
    PredictResponse, ResponseBody, PROTOCOL_VERSION,
};

fn error_line(request_id: &str, err: &Error) -> Vec<u8> {
    encode_response(&PredictResponse {
        request_id: request_id.to_string(),
        body: ResponseBody::Error {
            code: err.wire_code().to_string(),
            message: err.to_string(),
        },
    })
    .expect("error responses always encode")
}

fn request_id_of(line: &[u8]) -> String {
    serde_json::from_slice::<Value>(line)
        .ok()
        .and_then(|v| v.get("request_id").and_then(Value::as_str).map(str::to_string))
        .unwrap_or_default()
}

fn option_u64(options: &super::protocol::Options, key: &str) -> Option<u64> {
    options.get(key).and_then(Value::as_u64)
}

/// Answers one message line.
pub fn handle_line(model: &dyn Model, caps: &Capabilities, line: &[u8]) -> Vec<u8> {
    let ty = serde_json::from_slice::<Value>(line)
        .ok()
        .and_then(|v| v.get("type").and_then(Value::as_str).map(str::to_string));
    if ty.as_deref() == Some("handshake") {
        return match decode_handshake_request(line) {
            Ok(v) if v == PROTOCOL_VERSION => encode_handshake_response(caps),
            Ok(v) => error_line("", &Error::Protocol(format!("unsupported protocol version {v}"))),
            Err(e) => error_line("", &e),
        };
    }
    let req = match decode_request(line) {
        Ok(r) => r,
        Err(e) => return error_line(&request_id_of(line), &e),
    };
    let outcome = (|| {
        if req.protocol_version != PROTOCOL_VERSION {
            return Err(Error::Protocol(format!("unsupported protocol version {}", req.protocol_version)));
        }
        super::client::check_capabilities(caps, req.train_features.nrows(), req.train_features.ncols(), &req.options)?;
        let train = Dataset::new(req.train_features.clone(), req.train_labels.clone(), None, None)
            .and_then(|d| d.with_n_classes(req.n_classes))?;
        let members = option_u64(&req.options, "n_ensembles").unwrap_or(1);
        if members > 1 {
            let cfg = EnsembleConfig::full(members as usize, option_u64(&req.options, "seed").unwrap_or(0));
            ensemble_predict(model, &train, &req.test_features, &cfg)
        } else {
            model.predict(&train, &req.test_features)
        }
    })();
    match outcome {
        Ok(p) => encode_response(&PredictResponse {
            request_id: req.request_id,
            body: ResponseBody::Probs(p.into_inner()),
        })
        .unwrap_or_else(|e| error_line("", &e)),
        Err(e) => error_line(&req.request_id, &e),
    }
}

/// Serves requests from `reader` until it is exhausted.
pub fn serve_lines<R: BufRead, W: Write>(model: &dyn Model, caps: &Capabilities, mut reader: R, mut writer: W) -> Result<()> {
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::Transport(e.to_string()))?;
        if n == 0 {
            return Ok(());
        }
        if buf.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let reply = handle_line(model, caps, &buf);
        writer
            .write_all(&reply)
            .and_then(|_| writer.flush())
            .map_err(|e| Error::Transport(e.to_string()))?;
    }
}

/// Accepts connections forever, one thread per connection.
pub fn serve_tcp(model: Arc<dyn Model>, caps: Capabilities, listener: TcpListener) -> Result<()> {
    for stream in listener.incoming() {
        let stream = stream.map_err(|e| Error::Transport(e.to_string()))?;
        let model = Arc::clone(&model);
        let caps = caps.clone();
        std::thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(s) => std::io::BufReader::new(s),
                Err(_) => return,
            };
            let _ = serve_lines(model.as_ref(), &caps, reader, stream);
        });
    }
    Ok(())
}

pub fn builtin_capabilities(model_name: &str) -> Capabilities {
    Capabilities {
        protocol_version: PROTOCOL_VERSION,
        model: model_name.to_string(),
        max_rows: None,
        max_features: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::protocol::{decode_handshake_response, decode_response, encode_handshake_request, encode_request, PredictRequest};
    use crate::models::NearestNeighbor;
    use ndarray::array;

    #[test]
    fn serves_handshake_and_predict() {
        let req = PredictRequest {
            protocol_version: PROTOCOL_VERSION,
            request_id: "a".into(),
            train_features: array![[-1.0], [1.0]],
            train_labels: vec![0, 1],
            test_features: array![[-0.2], [3.0]],
            n_classes: 2,
            options: Default::default(),
        };
        let mut input = encode_handshake_request();
        input.extend(encode_request(&req).unwrap());
        input.extend(b"not json\n");
        let mut out = Vec::new();
        serve_lines(&NearestNeighbor, &builtin_capabilities("1nn"), &input[..], &mut out).unwrap();
        let lines: Vec<&[u8]> = out.split_inclusive(|&b| b == b'\n').collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(decode_handshake_response(lines[0]).unwrap().model, "1nn");
        let p = decode_response(lines[1]).unwrap().into_predictions(&req).unwrap();
        assert_eq!(p.argmax_labels(), vec![0, 1]);
        match decode_response(lines[2]).unwrap().body {
            ResponseBody::Error { code, .. } => assert_eq!(code, "PROTOCOL"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_requests_get_shape_and_capability_codes() {
        let code = |line: &[u8], caps: &Capabilities| match decode_response(&handle_line(&NearestNeighbor, caps, line)).unwrap().body {
            ResponseBody::Error { code, .. } => code,
            other => panic!("{other:?}"),
        };
        let caps = builtin_capabilities("1nn");
        let bad_label = br#"{"type":"predict","protocol_version":1,"request_id":"x","n_classes":2,"train_features":[[0],[1]],"train_labels":[0,2],"test_features":[[0]],"options":{}}"#;
        assert_eq!(code(bad_label, &caps), "SHAPE");
        let ragged = br#"{"type":"predict","protocol_version":1,"request_id":"x","n_classes":2,"train_features":[[0],[1]],"train_labels":[0,1],"test_features":[[0,1]],"options":{}}"#;
        assert_eq!(code(ragged, &caps), "SHAPE");
        let v9 = br#"{"type":"predict","protocol_version":9,"request_id":"x","n_classes":2,"train_features":[[0],[1]],"train_labels":[0,1],"test_features":[[0]],"options":{}}"#;
        assert_eq!(code(v9, &caps), "PROTOCOL");
        let small = Capabilities { max_rows: Some(1), ..caps };
        let ok = br#"{"type":"predict","protocol_version":1,"request_id":"x","n_classes":2,"train_features":[[0],[1]],"train_labels":[0,1],"test_features":[[0]],"options":{}}"#;
        assert_eq!(code(ok, &small), "CAPABILITY");
    }
}
