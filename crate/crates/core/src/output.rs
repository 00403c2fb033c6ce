//! CSV tables and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::channel::SystemConfig;
use crate::config::render_config;
use crate::error::{FamaError, Result};

/// Header of every threshold-indexed table.
pub const CURVE_HEADER: &str = "gamma,gamma_db,value,ci_low,ci_high,curve_id";

/// Header of the port-pair correlation tables.
pub const PAIR_HEADER: &str = "port_k,port_l,d_k,d_l,value,ci_low,ci_high,curve_id";

pub const MANIFEST_NAME: &str = "manifest.txt";

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

/// A named CSV document held in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvFile {
    pub name: String,
    pub contents: String,
}

/// Rows of `gamma, gamma_db, value, ci_low, ci_high, curve_id`.
#[derive(Debug, Clone, Default)]
pub struct CurveTable {
    body: String,
}

impl CurveTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, gamma: f64, value: f64, ci_low: f64, ci_high: f64, curve_id: &str) {
        let _ = writeln!(
            self.body,
            "{},{},{},{},{},{}",
            fmt_num(gamma),
            fmt_num(10.0 * gamma.log10()),
            fmt_num(value),
            fmt_num(ci_low),
            fmt_num(ci_high),
            curve_id
        );
    }

    /// A curve without sampling error: the interval collapses onto the value.
    pub fn push_exact(&mut self, gamma: f64, value: f64, curve_id: &str) {
        self.push(gamma, value, value, value, curve_id);
    }

    pub fn finish(self, name: impl Into<String>) -> CsvFile {
        CsvFile {
            name: name.into(),
            contents: format!("{CURVE_HEADER}\n{}", self.body),
        }
    }
}

/// Rows of `port_k, port_l, d_k, d_l, value, ci_low, ci_high, curve_id`.
/// Ports are numbered from 1, with the reference location as port 1.
#[derive(Debug, Clone, Default)]
pub struct PairTable {
    body: String,
}

impl PairTable {
    pub fn new() -> Self {
        Self::default()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(&mut self, k: usize, l: usize, d_k: f64, d_l: f64, value: f64, ci_low: f64, ci_high: f64, curve_id: &str) {
        let _ = writeln!(
            self.body,
            "{k},{l},{},{},{},{},{},{curve_id}",
            fmt_num(d_k),
            fmt_num(d_l),
            fmt_num(value),
            fmt_num(ci_low),
            fmt_num(ci_high),
        );
    }

    pub fn finish(self, name: impl Into<String>) -> CsvFile {
        CsvFile {
            name: name.into(),
            contents: format!("{PAIR_HEADER}\n{}", self.body),
        }
    }
}

/// Sample counts and counters of one experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentRecord {
    pub name: String,
    pub samples: u64,
    pub resampled_singular: u64,
    pub infinite: u64,
    pub note: String,
}

/// Everything needed to regenerate a run's CSVs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config: SystemConfig,
    pub workers: usize,
    pub chunk_size: u64,
    pub experiments: Vec<ExperimentRecord>,
    pub files: Vec<String>,
    pub wall_clock: Duration,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# fama-lab run manifest");
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "seed = {}", self.config.seed);
        let _ = writeln!(s, "chunk_size = {}", self.chunk_size);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "wall_clock_seconds = {:.3}", self.wall_clock.as_secs_f64());
        let _ = writeln!(s, "\n[config]");
        s.push_str(&render_config(&self.config));
        let _ = writeln!(s, "\n[experiments]");
        for e in &self.experiments {
            let _ = writeln!(
                s,
                "{}: samples = {}, resampled_singular = {}, infinite_sir = {}{}",
                e.name,
                e.samples,
                e.resampled_singular,
                e.infinite,
                if e.note.is_empty() { String::new() } else { format!(", note = {}", e.note) }
            );
        }
        let _ = writeln!(s, "\n[files]");
        for f in &self.files {
            let _ = writeln!(s, "{f}");
        }
        s
    }
}

/// Writes every CSV plus `manifest.txt` into `dir`.
///
/// On failure the files written so far are removed.
pub fn write_outputs(files: &[CsvFile], manifest: &RunManifest, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| FamaError::io(dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let docs = files
        .iter()
        .map(|f| (f.name.as_str(), f.contents.clone()))
        .chain(std::iter::once((MANIFEST_NAME, manifest.render())));
    for (name, contents) in docs {
        let path = dir.join(name);
        if let Err(e) = std::fs::write(&path, contents) {
            remove_files(&written);
            return Err(FamaError::io(path, e));
        }
        written.push(path);
    }
    Ok(written)
}

/// Best-effort removal of `paths`.
pub fn remove_files(paths: &[PathBuf]) {
    for p in paths {
        let _ = std::fs::remove_file(p);
    }
}
