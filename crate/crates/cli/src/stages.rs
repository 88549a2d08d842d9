//! Stage files inside the work directory and JSON helpers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const RECORDS: &str = "records.json";
pub const INGEST_REJECTS: &str = "ingest_rejects.json";
pub const INGEST_SUMMARY: &str = "ingest_summary.json";
pub const LINKS: &str = "links.json";
pub const ENTITIES: &str = "entities.json";
pub const QUARANTINE: &str = "quarantine.json";
pub const HARVEST_REPORT: &str = "harvest_report.json";
pub const AFFINITY_SCORES: &str = "affinity_scores.json";
pub const AFFINITY_PARTITION: &str = "affinity_partition.json";
pub const DATASET: &str = "dataset.json";
pub const PERIODS: &str = "periods.json";
pub const SEGMENT_REJECTS: &str = "segment_rejects.json";
pub const IN_TEXT: &str = "in_text.json";
pub const ANNOTATIONS: &str = "annotations.jsonl";
pub const CORPUS: &str = "corpus.json";
pub const MODEL: &str = "model.json";
pub const COHERENCE: &str = "coherence.json";
pub const TOPICS_EXPORT: &str = "topics_export.json";
pub const REPORT: &str = "report.json";
pub const BUNDLE: &str = "bundle";

#[derive(Debug, Clone)]
pub struct Workdir(pub PathBuf);

impl Workdir {
    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn ensure(&self) -> Result<()> {
        fs::create_dir_all(&self.0).with_context(|| format!("creating {}", self.0.display()))
    }

    /// `explicit` when given, otherwise the stage file `name`.
    pub fn input(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.path(name))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Pretty JSON with a trailing newline, written via a temporary sibling so a
/// failed run never leaves a truncated stage file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let name = path.file_name().map_or_else(|| "out".into(), |n| n.to_string_lossy().into_owned());
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}
