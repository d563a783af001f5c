use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::InputError;

/// Provenance block written at the top of every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Arguments after the program name, verbatim.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub config: Option<serde_json::Value>,
    /// SHA-256 of every input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, seed: Option<u64>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            args,
            seed,
            config: None,
            inputs: BTreeMap::new(),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path)
            .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    pub fn set_config<T: Serialize>(&mut self, cfg: &T) -> Result<()> {
        self.config = Some(serde_json::to_value(cfg).context("serializing config")?);
        Ok(())
    }

    fn json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    /// One `#` comment line ahead of CSV rows.
    pub fn write_csv_comment<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# manifest: {}", self.json())
    }

    /// A fenced JSON block closing a Markdown report.
    pub fn write_markdown_block<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let pretty = serde_json::to_string_pretty(self).expect("manifest serializes");
        writeln!(w, "\n## Run manifest\n\n```json\n{pretty}\n```")
    }
}
