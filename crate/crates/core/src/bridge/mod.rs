//! Uniform access to built-in and external models.
//!
//! External models speak a line-delimited JSON protocol over a child
//! process's standard streams or a TCP connection; the full grammar is in
//! `docs/protocol.md`.

use std::collections::BTreeMap;
use std::time::Duration;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::models::{self, Model};

pub mod client;
pub mod protocol;
pub mod server;
pub mod transport;

pub use client::{handshake, ExternalModel, ExternalSpec};
pub use protocol::{
    decode_response, encode_request, Capabilities, MatrixEncoding, Options, PredictRequest, PredictResponse,
    ResponseBody, PROTOCOL_VERSION,
};
pub use transport::Transport;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Builtin {
        name: String,
        params: BTreeMap<String, String>,
    },
    External(ExternalSpec),
}

/// A model reference as it appears on the command line or in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    /// Used in output file names and reports.
    pub label: String,
    pub kind: ModelKind,
}

/// Lower-case ASCII alphanumerics plus `-` and `_`; everything else becomes `-`.
pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        let c = if ch.is_ascii_alphanumeric() || ch == '_' || ch == '-' {
            ch.to_ascii_lowercase()
        } else {
            '-'
        };
        if !(c == '-' && out.ends_with('-')) {
            out.push(c);
        }
    }
    out.trim_matches('-').to_string()
}

pub fn parse_transport(s: &str) -> Result<Option<Transport>> {
    if let Some(cmd) = s.strip_prefix("cmd:") {
        if cmd.trim().is_empty() {
            return Err(Error::Config("empty command in model spec".into()));
        }
        return Ok(Some(Transport::Subprocess(cmd.to_string())));
    }
    if let Some(addr) = s.strip_prefix("tcp:") {
        let (host, port) = addr
            .rsplit_once(':')
            .ok_or_else(|| Error::Config(format!("expected tcp:HOST:PORT, got {s:?}")))?;
        let port = port
            .parse()
            .map_err(|_| Error::Config(format!("bad port in {s:?}")))?;
        return Ok(Some(Transport::Tcp {
            host: host.to_string(),
            port,
        }));
    }
    Ok(None)
}

impl ModelSpec {
    /// Parses `NAME[,key=value...]`, `cmd:COMMAND LINE` or `tcp:HOST:PORT`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(transport) = parse_transport(s)? {
            return Ok(ModelSpec {
                label: slug(s),
                kind: ModelKind::External(ExternalSpec::new(transport)),
            });
        }
        let mut parts = s.split(',');
        let name = parts.next().unwrap_or_default().trim().to_string();
        let mut params = BTreeMap::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in model spec, got {p:?}")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        let spec = ModelSpec {
            label: slug(s),
            kind: ModelKind::Builtin { name, params },
        };
        // fail early on unknown names and parameters
        spec.instantiate()?;
        Ok(spec)
    }

    pub fn builtin(name: &str) -> Self {
        ModelSpec {
            label: slug(name),
            kind: ModelKind::Builtin {
                name: name.to_string(),
                params: BTreeMap::new(),
            },
        }
    }

    pub fn external(label: &str, spec: ExternalSpec) -> Self {
        ModelSpec {
            label: slug(label),
            kind: ModelKind::External(spec),
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self.kind, ModelKind::External(_))
    }

    /// Sets a parameter (built-in) or request option (external).
    pub fn with_option(mut self, key: &str, value: Value) -> Self {
        match &mut self.kind {
            ModelKind::Builtin { params, .. } => {
                let text = match &value {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                params.insert(key.to_string(), text);
            }
            ModelKind::External(ext) => {
                ext.options.insert(key.to_string(), value);
            }
        }
        self
    }

    pub fn instantiate(&self) -> Result<Box<dyn Model>> {
        match &self.kind {
            ModelKind::Builtin { name, params } => models::builtin(name, params),
            ModelKind::External(ext) => Ok(Box::new(ExternalModel::new(self.label.clone(), ext.clone()))),
        }
    }

    pub fn external_spec(&self) -> Option<&ExternalSpec> {
        match &self.kind {
            ModelKind::External(e) => Some(e),
            ModelKind::Builtin { .. } => None,
        }
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        if let ModelKind::External(e) = &mut self.kind {
            e.timeout = timeout;
        }
    }
}
