use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One JSON line describing a run: seed, a hash of the effective
/// configuration, counts, and a digest of every output file.
pub struct Manifest {
    command: &'static str,
    seed: u64,
    config: String,
    counts: Map<String, Value>,
    outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &'static str, seed: u64, config: String) -> Self {
        Manifest {
            command,
            seed,
            config,
            counts: Map::new(),
            outputs: Vec::new(),
        }
    }

    pub fn count(&mut self, key: &str, value: impl Into<Value>) {
        self.counts.insert(key.to_string(), value.into());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Appends the record to `<dir>/manifest.jsonl`.
    pub fn append(&self, dir: &Path) -> std::io::Result<()> {
        let mut outputs = Vec::new();
        for p in &self.outputs {
            let bytes = std::fs::read(p)?;
            outputs.push(json!({
                "path": p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
                "sha256": sha256_hex(&bytes),
                "bytes": bytes.len(),
            }));
        }
        let record = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "config_sha256": sha256_hex(self.config.as_bytes()),
            "counts": Value::Object(self.counts.clone()),
            "outputs": outputs,
        });
        let mut f = OpenOptions::new().create(true).append(true).open(dir.join("manifest.jsonl"))?;
        writeln!(f, "{record}")
    }
}
