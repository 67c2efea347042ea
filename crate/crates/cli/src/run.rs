//! Run directories: every output file plus `manifest.json` and
//! `config.resolved`.
//!
//! The manifest records the SHA-256 of every input and output file. Paths
//! are stored as given on the command line and nothing time-dependent is
//! written, so equal inputs give byte-identical run directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ontorep::digest::{file_sha256, sha256_hex};
use serde::Serialize;

pub const MANIFEST: &str = "manifest.json";
pub const RESOLVED_CONFIG: &str = "config.resolved";

#[derive(Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    inputs: &'a BTreeMap<String, InputRecord>,
    outputs: &'a BTreeMap<String, String>,
    config_sha256: String,
}

pub struct Run {
    command: &'static str,
    dir: PathBuf,
    inputs: BTreeMap<String, InputRecord>,
    outputs: BTreeMap<String, String>,
}

impl Run {
    pub fn create(command: &'static str, dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Run {
            command,
            dir: dir.to_owned(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        })
    }

    /// Record an input file's digest under `role`.
    pub fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let sha256 = file_sha256(path).with_context(|| format!("hashing {}", path.display()))?;
        self.inputs.insert(
            role.to_owned(),
            InputRecord {
                path: path.display().to_string(),
                sha256,
            },
        );
        Ok(())
    }

    pub fn output(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.insert(name.to_owned(), sha256_hex(bytes));
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// Write the resolved config and the manifest.
    pub fn finish(self, resolved: &str) -> Result<()> {
        fs::write(self.dir.join(RESOLVED_CONFIG), resolved)?;
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            inputs: &self.inputs,
            outputs: &self.outputs,
            config_sha256: sha256_hex(resolved.as_bytes()),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.dir.join(MANIFEST), text)?;
        Ok(())
    }
}
