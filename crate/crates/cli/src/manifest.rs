//! Run manifests and output bookkeeping.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use projgrowth_core::report::Table;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects everything a run reads and writes, then writes
/// `<command>.manifest` next to the outputs.
pub struct Run {
    command: String,
    dir: PathBuf,
    started: Instant,
    params: Vec<(String, String)>,
    seeds: Vec<(String, String)>,
    inputs: Vec<(PathBuf, String)>,
    outputs: Vec<(String, String)>,
    notes: Vec<String>,
}

impl Run {
    pub fn start(command: &str, dir: &Path, params: Vec<(String, String)>) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            command: command.to_string(),
            dir: dir.to_path_buf(),
            started: Instant::now(),
            params,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn seed(&mut self, key: &str, value: impl ToString) {
        self.seeds.push((key.to_string(), value.to_string()));
    }

    /// Reads an input file, recording its digest.
    pub fn read_input(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push((path.to_path_buf(), sha256_hex(&bytes)));
        Ok(bytes)
    }

    pub fn note(&mut self, text: impl Into<String>) {
        let text = text.into();
        eprintln!("note: {text}");
        self.notes.push(text);
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> CliResult<()> {
        self.write_bytes(name, table.to_string_lossy().as_bytes())
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push((name.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    pub fn finish(self, status: &str) -> CliResult<()> {
        let path = self.dir.join(format!("{}.manifest", self.command));
        let mut out = Vec::new();
        let mut kv = |k: &str, v: &str| writeln!(out, "{k}: {v}").expect("write to Vec");
        kv("command", &self.command);
        kv("version", env!("CARGO_PKG_VERSION"));
        kv("status", status);
        for (k, v) in &self.params {
            kv(&format!("param.{k}"), v);
        }
        for (k, v) in &self.seeds {
            kv(&format!("seed.{k}"), v);
        }
        for (p, d) in &self.inputs {
            kv(&format!("input.{}", p.display()), &format!("sha256:{d}"));
        }
        for (n, d) in &self.outputs {
            kv(&format!("output.{n}"), &format!("sha256:{d}"));
        }
        for n in &self.notes {
            kv("note", n);
        }
        kv("wall_clock_seconds", &format!("{:.3}", self.started.elapsed().as_secs_f64()));
        fs::write(&path, out).map_err(|e| CliError::io(&path, e))
    }
}
