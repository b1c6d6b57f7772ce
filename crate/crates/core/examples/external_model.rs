//! Serves a built-in model over TCP on a local port and probes it through
//! the wire protocol, as an external model such as a TabPFN server would be.

use std::net::TcpListener;
use std::sync::Arc;

use probekit::bridge::server::{builtin_capabilities, serve_tcp};
use probekit::bridge::{handshake, ExternalModel, ExternalSpec, Transport};
use probekit::models::{DistanceSoftmax, Model};
use probekit::scenario::{two_point_1d, Grid1D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let port = listener.local_addr()?.port();
    let caps = builtin_capabilities("distance-softmax");
    std::thread::spawn(move || serve_tcp(Arc::new(DistanceSoftmax::default()), caps, listener));

    let spec = ExternalSpec::new(Transport::Tcp {
        host: "127.0.0.1".into(),
        port,
    });
    println!("handshake: {:?}", handshake(&spec)?);
    let s = two_point_1d(Grid1D::new(-2.0, 2.0, 9)?)?;
    let remote = ExternalModel::new("remote-softmax", spec).predict(&s.train, &s.test_inputs)?;
    let local = DistanceSoftmax::default().predict(&s.train, &s.test_inputs)?;
    for (i, x) in s.test_axis().iter().enumerate() {
        println!("x={x:>5.2}  remote {:.6}  local {:.6}", remote.probs()[[i, 1]], local.probs()[[i, 1]]);
    }
    Ok(())
}
