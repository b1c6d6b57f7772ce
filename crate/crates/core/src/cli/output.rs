use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const MANIFEST: &str = "MANIFEST.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub model: String,
    pub stage: String,
    pub error: String,
}

/// Output directory plus the bookkeeping that ends up in `MANIFEST.json`.
pub struct Output {
    dir: PathBuf,
    files: Mutex<BTreeSet<String>>,
    failures: Mutex<Vec<Failure>>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    created_unix: u64,
    config: &'a Value,
    files: Vec<String>,
    failures: Vec<Failure>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Mutex::new(BTreeSet::new()),
            failures: Mutex::new(Vec::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.lock().expect("files lock").insert(name.to_string());
        Ok(())
    }

    pub fn fail(&self, model: &str, stage: &str, err: &Error) {
        eprintln!("probekit: {model}: {stage}: {err}");
        self.failures.lock().expect("failures lock").push(Failure {
            model: model.to_string(),
            stage: stage.to_string(),
            error: err.to_string(),
        });
    }

    pub fn n_failures(&self) -> usize {
        self.failures.lock().expect("failures lock").len()
    }

    /// Writes the manifest. Failures appear in the order they were recorded.
    pub fn finish(&self, command: &str, config: &Value) -> Result<()> {
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let manifest = Manifest {
            command,
            created_unix,
            config,
            files: self.files.lock().expect("files lock").iter().cloned().collect(),
            failures: self.failures.lock().expect("failures lock").clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.dir.join(MANIFEST);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
