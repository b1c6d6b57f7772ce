use std::net::TcpListener;
use std::sync::Arc;

use clap::Args;
use ndarray::array;

use crate::bridge::server::{builtin_capabilities, serve_lines, serve_tcp};
use crate::bridge::{handshake, ExternalModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::models::Model;

use super::{Common, CommonArgs, EXIT_OK};

#[derive(Debug, Clone, Default, Args)]
pub struct ServeArgs {
    /// Listen on this TCP port instead of stdin/stdout (0 picks a free port).
    #[arg(long)]
    pub tcp: Option<u16>,
    /// Address to listen on with --tcp.
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    /// Advertised training-row limit.
    #[arg(long)]
    pub max_rows: Option<u64>,
    /// Advertised feature limit.
    #[arg(long)]
    pub max_features: Option<u64>,
}

/// Handshake, then a two-row predict on the two-point scenario.
pub fn run_check(args: &CommonArgs) -> Result<i32> {
    let common = Common::resolve(args, &[])?;
    let [spec] = common.models.as_slice() else {
        return Err(Error::Config("serve-check takes exactly one --model".into()));
    };
    let ext = spec
        .external_spec()
        .ok_or_else(|| Error::Config(format!("{} is a built-in model; serve-check needs cmd: or tcp:", spec.label)))?;
    let caps = handshake(ext)?;
    println!("{}", serde_json::to_string_pretty(&caps).expect("capabilities serialize"));
    let model = ExternalModel::new(spec.label.clone(), ext.clone());
    let train = Dataset::from_rows(&[vec![-1.0], vec![1.0]], vec![0, 1], None, None)?;
    let p = model.predict(&train, &array![[-1.0], [1.0]])?;
    println!("smoke predict ok: {:?}", p.probs().outer_iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    Ok(EXIT_OK)
}

pub fn run_serve(args: &CommonArgs, a: &ServeArgs) -> Result<i32> {
    let common = Common::resolve(args, &[])?;
    let [spec] = common.models.as_slice() else {
        return Err(Error::Config("serve takes exactly one --model".into()));
    };
    if spec.is_external() {
        return Err(Error::Config("serve only serves built-in models".into()));
    }
    let model: Arc<dyn Model> = Arc::from(spec.instantiate()?);
    let mut caps = builtin_capabilities(&model.name());
    caps.max_rows = a.max_rows;
    caps.max_features = a.max_features;
    match a.tcp {
        Some(port) => {
            let listener = TcpListener::bind((a.bind.as_str(), port)).map_err(|e| Error::Transport(format!("bind: {e}")))?;
            let addr = listener.local_addr().map_err(|e| Error::Transport(e.to_string()))?;
            // announce the bound port so callers can use --tcp 0
            eprintln!("probekit serve: listening on {addr}");
            serve_tcp(model, caps, listener)?;
        }
        None => {
            let stdin = std::io::stdin();
            serve_lines(model.as_ref(), &caps, stdin.lock(), std::io::stdout().lock())?;
        }
    }
    Ok(EXIT_OK)
}
