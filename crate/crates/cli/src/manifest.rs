//! `manifest.json`: what a run read, how it was configured, what it wrote.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use leakaudit::report::render_json;
use leakaudit::sha256_hex;
use serde_json::{json, Value};

/// Hash of a file, or of a directory's sorted (name, content hash) listing.
pub fn hash_path(path: &Path) -> Result<String> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.sort();
        let mut listing = String::new();
        for e in entries {
            let name = e.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            listing.push_str(&format!("{name}\t{}\n", hash_path(&e)?));
        }
        Ok(sha256_hex(listing.as_bytes()))
    } else {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(sha256_hex(&bytes))
    }
}

pub struct Manifest {
    command: String,
    config: Value,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, config: Value) -> Self {
        Manifest {
            command: command.to_owned(),
            config,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let h = hash_path(path)?;
        self.inputs.insert(role.to_owned(), h);
        Ok(())
    }

    /// Writes `bytes` to `dir/name` and records its hash.
    pub fn write(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.insert(name.to_owned(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn record_output(&mut self, dir: &Path, name: &str) -> Result<()> {
        let h = hash_path(&dir.join(name))?;
        self.outputs.insert(name.to_owned(), h);
        Ok(())
    }

    pub fn finish(self, dir: &Path) -> Result<()> {
        let config_hash = sha256_hex(render_json(&self.config)?.as_bytes());
        let v = json!({
            "tool": "leakaudit",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "config_hash": config_hash,
            "inputs": self.inputs,
            "outputs": self.outputs,
        });
        let path = dir.join("manifest.json");
        fs::write(&path, render_json(&v)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
