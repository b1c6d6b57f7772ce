mod common;

use std::io::{BufRead, BufReader};
use std::net::TcpListener;
use std::process::{Child, Command, Stdio};
use std::time::Duration;

use ndarray::{array, Array2};
use serde_json::Value;

use probekit::bridge::{handshake, ExternalModel, ExternalSpec, MatrixEncoding, Transport};
use probekit::models::{DistanceSoftmax, Model, NearestNeighbor};
use probekit::scenario::{random_points_2d, two_point_1d, Grid1D, Grid2D};
use probekit::{Dataset, Error};

use common::{bin, probekit};

fn served(model: &str, extra: &str) -> ExternalSpec {
    ExternalSpec::new(Transport::Subprocess(format!("{} serve --model {model} {extra}", bin())))
}

fn script(body: &str) -> ExternalSpec {
    let mut spec = ExternalSpec::new(Transport::Subprocess(format!("sh -c '{body}'")));
    spec.timeout = Duration::from_secs(5);
    spec
}

const HANDSHAKE_OK: &str =
    r#"{"type":"handshake","protocol_version":1,"model":"mock","max_rows":null,"max_features":null}"#;

fn max_diff(a: &probekit::PredictionMatrix, b: &probekit::PredictionMatrix) -> f64 {
    assert_eq!(a.probs().dim(), b.probs().dim());
    (a.probs() - b.probs()).iter().fold(0.0f64, |m, d| m.max(d.abs()))
}

fn two_point_train() -> Dataset {
    Dataset::from_rows(&[vec![-1.0], vec![1.0]], vec![0, 1], None, None).unwrap()
}

#[test]
fn subprocess_matches_in_process_1nn() {
    let s = random_points_2d(10, 4, Grid2D::default().with_resolution(41)).unwrap();
    let ext = ExternalModel::new("ext", served("1nn", ""));
    let remote = ext.predict(&s.train, &s.test_inputs).unwrap();
    let local = NearestNeighbor.predict(&s.train, &s.test_inputs).unwrap();
    assert_eq!(remote, local);
}

#[test]
fn dense_f32_requests_are_accepted() {
    let s = two_point_1d(Grid1D::default()).unwrap();
    let mut spec = served("distance-softmax", "");
    spec.encoding = MatrixEncoding::DenseF32;
    let remote = ExternalModel::new("ext", spec).predict(&s.train, &s.test_inputs).unwrap();
    let local = DistanceSoftmax::default().predict(&s.train, &s.test_inputs).unwrap();
    // grid values are exact in f32 except for rounding of the non-dyadic steps
    let diff = max_diff(&remote, &local);
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn ensemble_option_reaches_the_server() {
    let s = two_point_1d(Grid1D::new(-2.0, 2.0, 41).unwrap()).unwrap();
    let mut spec = served("distance-softmax", "");
    spec.options.insert("n_ensembles".into(), Value::from(8));
    spec.options.insert("seed".into(), Value::from(3));
    let remote = ExternalModel::new("ext", spec).predict(&s.train, &s.test_inputs).unwrap();
    let local = probekit::models::ensemble_predict(
        &DistanceSoftmax::default(),
        &s.train,
        &s.test_inputs,
        &probekit::models::EnsembleConfig::full(8, 3),
    )
    .unwrap();
    // the client renormalises rows, which may move the last bit
    assert!(max_diff(&remote, &local) < 1e-12);
}

#[test]
fn connections_are_pooled_across_threads() {
    let s = random_points_2d(6, 1, Grid2D::default().with_resolution(21)).unwrap();
    let ext = ExternalModel::new("ext", served("1nn", ""));
    let expected = NearestNeighbor.predict(&s.train, &s.test_inputs).unwrap();
    std::thread::scope(|scope| {
        for _ in 0..4 {
            scope.spawn(|| {
                for _ in 0..3 {
                    assert_eq!(ext.predict(&s.train, &s.test_inputs).unwrap(), expected);
                }
            });
        }
    });
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn tcp_server(model: &str) -> (Server, u16) {
    let mut child = Command::new(bin())
        .args(["serve", "--model", model, "--tcp", "0"])
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let port = line.trim().rsplit(':').next().unwrap().parse().unwrap();
    (Server(child), port)
}

#[test]
fn tcp_round_trip() {
    let (_server, port) = tcp_server("distance-softmax");
    let spec = ExternalSpec::new(Transport::Tcp {
        host: "127.0.0.1".into(),
        port,
    });
    let caps = handshake(&spec).unwrap();
    assert_eq!(caps.model, "distance-softmax");
    assert_eq!(caps.max_features, None);
    let s = two_point_1d(Grid1D::default()).unwrap();
    let ext = ExternalModel::new("tcp", spec);
    let local = DistanceSoftmax::default().predict(&s.train, &s.test_inputs).unwrap();
    for _ in 0..2 {
        assert!(max_diff(&ext.predict(&s.train, &s.test_inputs).unwrap(), &local) < 1e-12);
    }
}

#[test]
fn connect_failure_is_a_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let spec = ExternalSpec::new(Transport::Tcp {
        host: "127.0.0.1".into(),
        port,
    });
    assert!(matches!(handshake(&spec), Err(Error::Transport(_))));
    let missing = ExternalSpec::new(Transport::Subprocess("/nonexistent/server".into()));
    assert!(matches!(handshake(&missing), Err(Error::Transport(_))));
}

#[test]
fn silent_server_times_out() {
    let mut spec = script("sleep 10");
    spec.timeout = Duration::from_millis(200);
    let start = std::time::Instant::now();
    assert!(matches!(handshake(&spec), Err(Error::Timeout(_))));
    assert!(start.elapsed() < Duration::from_secs(5));
}

#[test]
fn version_mismatch_is_a_protocol_error() {
    let spec = script(
        r#"read l; echo "{\"type\":\"handshake\",\"protocol_version\":2,\"model\":\"m\",\"max_rows\":null,\"max_features\":null}"; cat >/dev/null"#,
    );
    match handshake(&spec) {
        Err(Error::Protocol(m)) => assert!(m.contains("version 2"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_capability_fields_are_a_protocol_error() {
    let spec = script(r#"read l; echo "{\"type\":\"handshake\",\"protocol_version\":1,\"model\":\"m\"}"; cat >/dev/null"#);
    assert!(matches!(handshake(&spec), Err(Error::Protocol(_))));
}

#[test]
fn server_dying_mid_request_is_a_transport_error() {
    let spec = script(&format!("read l; echo {:?}; read l; exit 0", HANDSHAKE_OK));
    let ext = ExternalModel::new("dying", spec);
    let err = ext.predict(&two_point_train(), &array![[0.0]]).unwrap_err();
    assert!(matches!(err, Error::Transport(_)), "{err:?}");
}

#[test]
fn garbage_reply_is_a_protocol_error() {
    let spec = script(&format!("read l; echo {:?}; read l; echo not-json; cat >/dev/null", HANDSHAKE_OK));
    let err = ExternalModel::new("garbage", spec).predict(&two_point_train(), &array![[0.0]]).unwrap_err();
    assert!(matches!(err, Error::Protocol(_)), "{err:?}");
}

#[test]
fn stale_request_id_is_a_protocol_error() {
    let reply = r#"{"type":"predict","request_id":"other","probs":[[0.5,0.5]]}"#;
    let spec = script(&format!("read l; echo {:?}; read l; echo {:?}; cat >/dev/null", HANDSHAKE_OK, reply));
    let err = ExternalModel::new("stale", spec).predict(&two_point_train(), &array![[0.0]]).unwrap_err();
    assert!(matches!(err, Error::Protocol(_)), "{err:?}");
}

#[test]
fn remote_errors_carry_code_and_message() {
    let reply = r#"{"type":"error","request_id":"req-0","error":{"code":"REMOTE","message":"checkpoint exploded"}}"#;
    let spec = script(&format!("read l; echo {:?}; read l; echo {:?}; cat >/dev/null", HANDSHAKE_OK, reply));
    match ExternalModel::new("remote", spec).predict(&two_point_train(), &array![[0.0]]) {
        Err(Error::RemoteModel { code, message }) => {
            assert_eq!(code, "REMOTE");
            assert_eq!(message, "checkpoint exploded");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn inconsistent_requests_never_leave_the_client() {
    let ext = ExternalModel::new("ext", served("1nn", ""));
    let wide = Dataset::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], vec![0, 1], None, None).unwrap();
    let err = ext.predict(&wide, &array![[0.0]]).unwrap_err();
    assert!(matches!(err, Error::Encode(_)), "{err:?}");
    assert!(ext.predict(&two_point_train(), &array![[0.5]]).is_ok());
}

#[test]
fn feature_limit_fails_fast_unless_subsampling_requested() {
    let train = Dataset::from_rows(&[vec![0.0; 5], vec![1.0; 5]], vec![0, 1], None, None).unwrap();
    let test = Array2::from_elem((1, 5), 0.2);
    let limited = ExternalModel::new("limited", served("1nn", "--max-features 3"));
    assert_eq!(limited.capabilities().unwrap().max_features, Some(3));
    assert!(matches!(limited.predict(&train, &test), Err(Error::Capability(_))));
    let mut spec = served("1nn", "--max-features 3");
    spec.options.insert("subsample_features".into(), Value::Bool(true));
    let p = ExternalModel::new("subsampling", spec).predict(&train, &test).unwrap();
    assert_eq!(p.argmax_labels(), vec![0]);
}

#[test]
fn serve_check_exit_codes() {
    let healthy = probekit(&["serve-check", "--model", &format!("cmd:{} serve --model 1nn", bin())]);
    assert_eq!(healthy.status.code(), Some(0), "{}", String::from_utf8_lossy(&healthy.stderr));
    let stdout = String::from_utf8_lossy(&healthy.stdout);
    assert!(stdout.contains("\"model\": \"1nn\""), "{stdout}");
    assert!(stdout.contains("smoke predict ok"));

    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let refused = probekit(&["serve-check", "--model", &format!("tcp:127.0.0.1:{port}")]);
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("transport error"));

    let v2 = r#"cmd:sh -c 'read l; echo "{\"type\":\"handshake\",\"protocol_version\":2,\"model\":\"m\",\"max_rows\":null,\"max_features\":null}"'"#;
    let mismatch = probekit(&["serve-check", "--model", v2]);
    assert_eq!(mismatch.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("protocol error"));

    let builtin = probekit(&["serve-check", "--model", "1nn"]);
    assert_eq!(builtin.status.code(), Some(2));
}
