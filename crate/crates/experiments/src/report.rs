//! Study reports and their on-disk form.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use sgula_core::metrics::DensityEstimate;
use sgula_core::SampleSet64;

use crate::config::{ExperimentKind, ExperimentSpec};

/// Metrics of one run (a sampler, a swept value or a replication).
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub index: usize,
    pub label: String,
    pub seed: u64,
    pub metrics: BTreeMap<String, Value>,
}

impl RunRecord {
    pub fn new(index: usize, label: impl Into<String>, seed: u64) -> Self {
        Self {
            index,
            label: label.into(),
            seed,
            metrics: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.to_string(), v.into());
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(Value::as_f64)
    }
}

/// Data files attached to a report.
#[derive(Debug, Clone)]
pub enum Artifact {
    Samples { name: String, set: SampleSet64 },
    Density { name: String, est: DensityEstimate<f64> },
    Table { name: String, header: Vec<String>, rows: Vec<Vec<f64>> },
    Plot { name: String, svg: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub kind: ExperimentKind,
    pub spec: ExperimentSpec,
    pub seed: u64,
    pub version: String,
    pub runs: Vec<RunRecord>,
    pub summary: BTreeMap<String, Value>,
    /// Named pass/fail outcomes of the study's built-in thresholds.
    pub thresholds: BTreeMap<String, bool>,
    /// Wall-clock seconds per stage. Written to `timing.json`, outside the hashed files.
    #[serde(skip)]
    pub timing: BTreeMap<String, f64>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl StudyReport {
    pub fn new(spec: &ExperimentSpec) -> Self {
        Self {
            kind: spec.experiment.kind,
            spec: spec.clone(),
            seed: spec.experiment.seed,
            version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            runs: Vec::new(),
            summary: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            timing: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn run(&self, label: &str) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.label == label)
    }

    pub fn summary_num(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    pub fn all_thresholds_pass(&self) -> bool {
        self.thresholds.values().all(|&v| v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

/// Files written by [`emit_report`], in write order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

/// Writes `report.json`, one file per artifact (`samples_*.csv`, `density_*.csv`,
/// `table_*.csv`, `*.svg`) and `manifest.json` listing those files with their SHA-256.
/// Wall-clock timings go to `timing.json`, which the manifest does not list, so
/// reruns with the same spec and seed reproduce every listed hash.
pub fn emit_report(report: &StudyReport, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    let json = serde_json::to_vec_pretty(report)?;
    files.push(write_atomic(dir, "report.json", |w| Ok(w.write_all(&json)?))?);
    for a in &report.artifacts {
        let entry = match a {
            Artifact::Samples { name, set } => {
                write_atomic(dir, &format!("samples_{name}.csv"), |w| Ok(set.write_csv(w)?))?
            }
            Artifact::Density { name, est } => {
                write_atomic(dir, &format!("density_{name}.csv"), |w| Ok(est.write_csv(w)?))?
            }
            Artifact::Table { name, header, rows } => write_atomic(dir, &format!("table_{name}.csv"), |w| {
                writeln!(w, "{}", header.join(","))?;
                for r in rows {
                    let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
                Ok(())
            })?,
            Artifact::Plot { name, svg } => write_atomic(dir, &format!("{name}.svg"), |w| Ok(w.write_all(svg.as_bytes())?))?,
        };
        files.push(entry);
    }
    let manifest = Manifest { files };
    let text = serde_json::to_vec_pretty(&manifest)?;
    write_atomic(dir, "manifest.json", |w| Ok(w.write_all(&text)?))?;
    let timing = serde_json::to_vec_pretty(&report.timing)?;
    write_atomic(dir, "timing.json", |w| Ok(w.write_all(&timing)?))?;
    Ok(manifest)
}

/// Writes through a temporary file in `dir` and renames it into place.
fn write_atomic(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<&mut tempfile::NamedTempFile>) -> Result<()>,
) -> Result<ManifestEntry> {
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    {
        let mut w = BufWriter::new(&mut tmp);
        body(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(&path).with_context(|| format!("renaming into {}", path.display()))?;
    let bytes = fs::read(&path).with_context(|| format!("reading back {}", path.display()))?;
    Ok(ManifestEntry {
        path: PathBuf::from(name),
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len() as u64,
    })
}
