use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Reproduction record for one command run: resolved config, input
/// digests, counts and output digests. No timestamps, so identical runs
/// produce identical manifests.
#[derive(Debug, Clone)]
pub struct Manifest {
    command: String,
    config: BTreeMap<String, String>,
    inputs: Vec<(String, PathBuf, String)>,
    counts: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    out_dir: PathBuf,
}

impl Manifest {
    pub fn start(command: &str, config: &RunConfig) -> Result<Manifest> {
        let mut inputs = Vec::new();
        for (key, path) in config.input_paths() {
            inputs.push((key.to_string(), path.to_path_buf(), file_digest(path)?));
        }
        std::fs::create_dir_all(&config.out_dir)
            .with_context(|| format!("creating output directory {}", config.out_dir.display()))?;
        Ok(Manifest {
            command: command.to_string(),
            config: config.to_pairs(),
            inputs,
            counts: BTreeMap::new(),
            outputs: BTreeMap::new(),
            out_dir: config.out_dir.clone(),
        })
    }

    pub fn count(&mut self, name: &str, value: impl ToString) {
        self.counts.insert(name.to_string(), value.to_string());
    }

    /// Writes a data file into the output directory and records its digest.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// Records the digest of a file some other writer put in the output directory.
    pub fn record(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        self.outputs.insert(name.to_string(), file_digest(&path)?);
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// Adds an input that is not a config key, such as a stage output read back.
    pub fn input(&mut self, key: &str, path: &Path) -> Result<()> {
        self.inputs
            .push((key.to_string(), path.to_path_buf(), file_digest(path)?));
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "run.command={}", self.command);
        let _ = writeln!(s, "run.version={}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.config {
            let _ = writeln!(s, "config.{k}={v}");
        }
        for (k, p, d) in &self.inputs {
            let _ = writeln!(s, "input.{k}.path={}", p.display());
            let _ = writeln!(s, "input.{k}.sha256={d}");
        }
        for (k, v) in &self.counts {
            let _ = writeln!(s, "count.{k}={v}");
        }
        for (k, d) in &self.outputs {
            let _ = writeln!(s, "output.{k}.sha256={d}");
        }
        s
    }

    /// Writes `<command>.manifest` and returns its path.
    pub fn finish(self) -> Result<PathBuf> {
        let path = self.out_dir.join(format!("{}.manifest", self.command));
        std::fs::write(&path, self.render()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
