//! Run manifests: what was run, on which inputs, producing which files.
//!
//! Manifests hold no timestamps, host names or worker counts so that
//! identical runs produce identical manifests.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::format::KvDoc;
use crate::FormatError;

/// File name of the manifest inside an output directory.
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Description of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    /// Subcommand and its mode, e.g. `calibrate np`.
    pub subcommand: String,
    /// Config file as given on the command line.
    pub config: Option<String>,
    /// Input files as given, with their contents' SHA-256.
    pub inputs: Vec<(String, String)>,
    /// Extra settings that change the outputs (targets, sizes).
    pub settings: Vec<(String, String)>,
    /// Output files relative to the output directory, with their SHA-256.
    pub outputs: Vec<(String, String)>,
    /// Seed, when the run is random.
    pub seed: Option<u64>,
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    /// New manifest for a subcommand.
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.into(),
            ..Self::default()
        }
    }

    /// Records an input file and hashes its current content.
    pub fn add_input(&mut self, path: &Path) -> Result<(), FormatError> {
        let bytes = fs::read(path)?;
        self.inputs.push((path.display().to_string(), sha256_hex(&bytes)));
        Ok(())
    }

    /// Records a setting.
    pub fn setting(&mut self, key: &str, value: impl ToString) {
        self.settings.push((key.into(), value.to_string()));
    }

    /// Records an output file already written under `dir`.
    pub fn add_output(&mut self, dir: &Path, name: &str) -> Result<(), FormatError> {
        let bytes = fs::read(dir.join(name))?;
        self.outputs.push((name.into(), sha256_hex(&bytes)));
        Ok(())
    }

    /// Hash over the subcommand, settings, seed and input contents.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.subcommand.as_bytes());
        h.update([0]);
        for (_, digest) in &self.inputs {
            h.update(digest.as_bytes());
            h.update([0]);
        }
        for (k, v) in &self.settings {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update([0]);
        }
        if let Some(s) = self.seed {
            h.update(s.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Document form.
    pub fn to_doc(&self) -> KvDoc {
        let mut doc = KvDoc::new("manifest");
        doc.set("subcommand", self.subcommand.as_str())
            .set("toolkit_version", env!("CARGO_PKG_VERSION"));
        if let Some(c) = &self.config {
            doc.set("config", c.as_str());
        }
        if let Some(s) = self.seed {
            doc.set("seed", s.to_string());
        }
        for (k, v) in &self.settings {
            doc.set(&format!("setting.{k}"), v.as_str());
        }
        for (i, (p, h)) in self.inputs.iter().enumerate() {
            doc.set(&format!("input.{}.path", i + 1), p.as_str());
            doc.set(&format!("input.{}.sha256", i + 1), h.as_str());
        }
        for (p, h) in &self.outputs {
            doc.set(&format!("output.{p}"), h.as_str());
        }
        doc.set("content_hash", self.content_hash());
        doc
    }

    /// Writes `manifest.txt` into `dir`, replacing any previous one.
    pub fn write(&self, dir: &Path) -> Result<(), FormatError> {
        fs::write(dir.join(MANIFEST_FILE), self.to_doc().render())?;
        Ok(())
    }
}
