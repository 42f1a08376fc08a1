//! Output directory bookkeeping: data files, digests and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use sramlab_core::engine::Waveform;

use crate::error::CliError;

/// Fixed scientific notation with nine significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Record of one invocation, written as `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<OutputFile>,
    pub notes: Vec<String>,
    pub duration_s: f64,
}

pub struct Output {
    dir: PathBuf,
    started: Instant,
    inputs: BTreeMap<String, String>,
    outputs: Vec<OutputFile>,
    notes: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(CliError::io(&path))?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_csv<R, S>(&mut self, name: &str, header: &[&str], rows: R) -> Result<(), CliError>
    where
        R: IntoIterator<Item = Vec<S>>,
        S: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        let out = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(header).map_err(out)?;
        for row in rows {
            w.write_record(&row).map_err(out)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// One row per sample: `time` then every stored signal.
    pub fn write_waveform(&mut self, name: &str, w: &Waveform) -> Result<(), CliError> {
        let mut header = vec!["time"];
        header.extend(w.names().iter().map(String::as_str));
        let columns: Vec<&[f64]> = w.names().iter().filter_map(|n| w.signal(n)).collect();
        let rows = (0..w.len()).map(|k| {
            let mut row = vec![num(w.time(k))];
            row.extend(columns.iter().map(|c| num(c[k])));
            row
        });
        self.write_csv(name, &header, rows)
    }

    pub fn finish(mut self, config: serde_json::Value) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            command: std::env::args().skip(1).collect(),
            config,
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
            notes: std::mem::take(&mut self.notes),
            duration_s: self.started.elapsed().as_secs_f64(),
        };
        let bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, bytes).map_err(CliError::io(&path))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_nine_significant_digits() {
        assert_eq!(num(3.24e-15), "3.24000000e-15");
        assert_eq!(num(1.8), "1.80000000e0");
        assert_eq!(num(-0.5), "-5.00000000e-1");
    }

    #[test]
    fn outputs_are_listed_with_digests() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::create(dir.path()).unwrap();
        out.write_csv("t.csv", &["a", "b"], vec![vec![num(1.0), num(2.0)]])
            .unwrap();
        let m = out.finish(serde_json::Value::Null).unwrap();
        let bytes = fs::read(dir.path().join("t.csv")).unwrap();
        assert_eq!(
            String::from_utf8(bytes.clone()).unwrap(),
            "a,b\n1.00000000e0,2.00000000e0\n"
        );
        assert_eq!(m.outputs[0].sha256, sha256_hex(&bytes));
        assert!(dir.path().join("manifest.json").exists());
    }
}
