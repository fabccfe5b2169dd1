//! Artifact writer: summary, CSV tables, plot data and the run manifest.
//!
//! The manifest is rewritten after every artifact, so an interrupted run
//! leaves `manifest.json` with `complete = false` and every file written so
//! far listed with its checksum.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::GraphFunction;

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// The run record: config hash, artifact manifest and wall-clock times.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub name: String,
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub output_dir: String,
    pub complete: bool,
    /// Exit status the run maps to, once known.
    pub status: Option<i32>,
    pub artifacts: Vec<Artifact>,
    /// `(phase, seconds)`; excluded from the summary on purpose.
    pub timings: Vec<(String, f64)>,
    pub error: Option<String>,
}

pub struct OutputDir {
    root: PathBuf,
    record: RunRecord,
    started: Instant,
}

impl OutputDir {
    /// Creates the directory and an initial, incomplete manifest.
    pub fn create(root: &Path, name: &str, kind: &str, config_hash: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(root)?;
        let out = Self {
            root: root.to_path_buf(),
            record: RunRecord {
                name: name.into(),
                kind: kind.into(),
                config_hash: config_hash.into(),
                seed,
                output_dir: root.display().to_string(),
                complete: false,
                status: None,
                artifacts: Vec::new(),
                timings: Vec::new(),
                error: None,
            },
            started: Instant::now(),
        };
        out.write_manifest()?;
        Ok(out)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn time(&mut self, phase: &str, since: Instant) {
        self.record.timings.push((phase.into(), since.elapsed().as_secs_f64()));
    }

    fn write_manifest(&self) -> Result<()> {
        atomic_write(&self.root.join(MANIFEST), &serde_json::to_vec_pretty(&self.record)?)
    }

    /// Writes `bytes` to `file` and records it.
    pub fn write(&mut self, file: &str, bytes: &[u8]) -> Result<()> {
        if file.contains(['/', '\\']) {
            return Err(Error::InvalidInput(format!("artifact name `{file}` must be a plain file name")));
        }
        atomic_write(&self.root.join(file), bytes)?;
        self.record.artifacts.retain(|a| a.file != file);
        self.record.artifacts.push(Artifact {
            file: file.into(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        self.write_manifest()
    }

    pub fn json(&mut self, file: &str, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(file, &bytes)
    }

    /// `solution_<tag>.csv` with columns `node_index, x1[, x2], value`.
    pub fn solution(&mut self, tag: &str, w: &GraphFunction) -> Result<()> {
        let file = format!("solution_{tag}.csv");
        let tmp = self.root.join(format!(".{file}.tmp"));
        w.write_csv(&tmp)?;
        let bytes = fs::read(&tmp)?;
        fs::remove_file(&tmp)?;
        self.write(&file, &bytes)
    }

    /// `<prefix>_<tag>.csv` with columns `radius_or_R, value`, plus the
    /// matching two-column `plot_<prefix>_<tag>.dat`.
    pub fn table(&mut self, prefix: &str, tag: &str, x: &[f64], y: &[f64]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["radius_or_R", "value"])?;
        for (a, b) in x.iter().zip(y) {
            wtr.write_record([format!("{a:.17e}"), format!("{b:.17e}")])?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.write(&format!("{prefix}_{tag}.csv"), &bytes)?;
        self.plot(&format!("{prefix}_{tag}"), x, y)
    }

    /// `plot_<tag>.dat`: two whitespace-separated columns.
    pub fn plot(&mut self, tag: &str, x: &[f64], y: &[f64]) -> Result<()> {
        let mut text = format!("# {tag}\n");
        for (a, b) in x.iter().zip(y) {
            text.push_str(&format!("{a:.17e} {b:.17e}\n"));
        }
        self.write(&format!("plot_{tag}.dat"), text.as_bytes())
    }

    /// Marks the run finished with the given exit status.
    pub fn finish(mut self, status: i32, error: Option<String>) -> Result<RunRecord> {
        self.record.timings.push(("total".into(), self.started.elapsed().as_secs_f64()));
        self.record.status = Some(status);
        self.record.complete = error.is_none();
        self.record.error = error;
        self.write_manifest()?;
        Ok(self.record)
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = path.with_file_name(format!(".{name}.partial"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_tracks_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), "t", "solve", "abc", 0).unwrap();
        out.table("series", "x", &[1.0, 0.5], &[2.0, 1.0]).unwrap();
        let partial: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(partial["complete"], false);
        assert_eq!(partial["artifacts"].as_array().unwrap().len(), 2);
        let rec = out.finish(0, None).unwrap();
        assert!(rec.complete);
        let csv = fs::read_to_string(dir.path().join("series_x.csv")).unwrap();
        assert!(csv.starts_with("radius_or_R,value\n"));
        let dat = fs::read_to_string(dir.path().join("plot_series_x.dat")).unwrap();
        assert_eq!(dat.lines().nth(1).unwrap().split_whitespace().count(), 2);
    }
}
