//! One module per pipeline stage. Each command reads its inputs from the
//! work directory (or explicit paths) and writes its outputs back there.

pub mod affinity;
pub mod annotate;
pub mod corpus;
pub mod harvest;
pub mod ingest;
pub mod report;
pub mod segment;
pub mod topics;

use std::collections::BTreeSet;
use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use retrace_core::harvest::{CitingEntity, LookupTables};
use retrace_core::humanities::{HumanitiesVocabulary, DEFAULT_HUMANITIES_LABELS};
use retrace_core::ingest::RetractedPublication;

use crate::config::PipelineConfig;
use crate::stages::{self, Workdir};

pub struct Ctx {
    pub cfg: PipelineConfig,
    pub wd: Workdir,
}

impl Ctx {
    pub fn new(cfg: PipelineConfig) -> Ctx {
        let wd = Workdir(cfg.workdir.clone());
        Ctx { cfg, wd }
    }

    pub fn vocabulary(&self) -> Result<HumanitiesVocabulary> {
        let mut labels: Vec<String> = DEFAULT_HUMANITIES_LABELS.iter().map(|s| s.to_string()).collect();
        if let Some(p) = &self.cfg.ingest.humanities_labels {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            labels.extend(
                text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from),
            );
        }
        Ok(HumanitiesVocabulary::new(labels))
    }

    pub fn lookup_tables(&self) -> Result<LookupTables> {
        let mut t = LookupTables::default();
        let h = &self.cfg.harvest;
        if let Some(p) = &h.journals {
            t.load_journals(open(p)?).with_context(|| format!("loading {}", p.display()))?;
        }
        if let Some(p) = &h.books {
            t.load_books(open(p)?).with_context(|| format!("loading {}", p.display()))?;
        }
        if let Some(p) = &h.lcc_rules {
            t.load_lcc_rules(open(p)?).with_context(|| format!("loading {}", p.display()))?;
        }
        Ok(t)
    }

    /// Records that survived exclusion.
    pub fn selected_records(&self, explicit: &Option<std::path::PathBuf>) -> Result<Vec<RetractedPublication>> {
        let all: Vec<RetractedPublication> = stages::read_json(&self.wd.input(explicit, stages::RECORDS))?;
        Ok(all.into_iter().filter(|r| !r.excluded).collect())
    }

    /// The affinity-filtered dataset when present, otherwise all merged entities.
    pub fn current_entities(&self) -> Result<Vec<CitingEntity>> {
        let dataset = self.wd.path(stages::DATASET);
        if dataset.exists() {
            stages::read_json(&dataset)
        } else {
            stages::read_json(&self.wd.path(stages::ENTITIES))
        }
    }

    /// Ids kept by the affinity filter, if it has run.
    pub fn kept_items(&self) -> Result<Option<BTreeSet<String>>> {
        let p = self.wd.path(stages::AFFINITY_PARTITION);
        if !p.exists() {
            return Ok(None);
        }
        let partition: retrace_core::affinity::AffinityPartition = stages::read_json(&p)?;
        Ok(Some(partition.kept_ids()))
    }
}

pub fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}
