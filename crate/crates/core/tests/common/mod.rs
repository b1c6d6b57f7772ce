#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_probekit")
}

pub fn probekit(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("PROBEKIT_OUT")
        .output()
        .expect("probekit runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Every file under `dir`, keyed by relative path. The manifest's
/// timestamp line is blanked.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable output dir") {
            let p: PathBuf = entry.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
                continue;
            }
            let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
            let mut bytes = std::fs::read(&p).expect("readable output file");
            if rel == "MANIFEST.json" {
                let text = String::from_utf8(bytes).expect("utf-8 manifest");
                bytes = text
                    .lines()
                    .filter(|l| !l.trim_start().starts_with("\"created_unix\""))
                    .collect::<Vec<_>>()
                    .join("\n")
                    .into_bytes();
            }
            out.insert(rel, bytes);
        }
    }
    out
}

/// Small three-class, three-group CSV with well separated classes.
pub fn toy_csv(rows_per_class: usize) -> String {
    let mut s = String::from("f0,f1,label,batch\n");
    for i in 0..rows_per_class {
        for (c, name) in ["cancer", "biopsy", "normal"].iter().enumerate() {
            let x = c as f64 * 3.0 + (i % 5) as f64 * 0.1;
            let y = (c as f64 - 1.0) * 2.0 - (i % 3) as f64 * 0.2;
            s.push_str(&format!("{x},{y},{name},b{}\n", i % 3));
        }
    }
    s
}
