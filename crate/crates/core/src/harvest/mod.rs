//! Harvesting citation links from open citation indexes, merging them across
//! sources and enriching the citing entities.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doi::Doi;

mod cache;
mod merge;
mod metadata;
mod rate;
mod source;
mod venue;

pub use cache::DiskCache;
pub use merge::{merge_entities, merge_sources, normalize_title, AmbiguousMatch, MergeOutcome, YearConflict};
pub use metadata::{
    resolve_metadata, FixtureMetadataSource, MetadataRecord, MetadataSource, QuarantineEntry, QuarantineReason,
    Resolution, ValidityPolicy, DEFAULT_INVALID_TYPES,
};
pub use rate::{RetryPolicy, TokenBucket};
pub use source::{
    fetch_all, fetch_citations, parse_payload, CitationSource, FixtureSource, HttpSource, PayloadFormat,
};
pub use venue::{
    classify_venue, normalize_isbn, normalize_issn, ClassificationMethod, LookupTables, TableError,
    VenueClassification, DEFAULT_LCC_RULES, SCIMAGO_AREAS,
};

#[derive(Debug, Error)]
pub enum HarvestError {
    /// Transport failure or 5xx after exhausting the retry budget.
    #[error("source `{source_name}` unavailable for {doi} after {attempts} attempts: {message}")]
    Retryable {
        source_name: String,
        doi: String,
        attempts: u32,
        message: String,
    },
    #[error("source `{source_name}` returned a malformed payload for {doi}: {message}")]
    Malformed {
        source_name: String,
        doi: String,
        message: String,
        raw: Vec<u8>,
    },
    #[error("cache error: {0}")]
    Cache(#[from] std::io::Error),
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error("http client error: {0}")]
    Client(String),
}

impl HarvestError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, HarvestError::Retryable { .. })
    }
}

/// A retracted item to harvest citations for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedItem {
    pub id: String,
    pub doi: Doi,
}

/// One citing → cited link reported by a source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CitationLink {
    /// Normalized DOI of the citing work, or `<source>:<local id>` without one.
    pub citing_id: String,
    #[serde(default)]
    pub citing_doi: Option<Doi>,
    /// Id of the retracted item.
    pub cited_id: String,
    pub source: String,
    #[serde(default)]
    pub creation_year: Option<i32>,
    #[serde(default)]
    pub citing_title: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitingEntity {
    pub id: String,
    #[serde(default)]
    pub doi: Option<Doi>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub venue_title: Option<String>,
    #[serde(default)]
    pub venue_ids: Vec<String>,
    #[serde(default)]
    pub subject_areas: Vec<String>,
    #[serde(default)]
    pub subject_categories: Vec<String>,
    #[serde(default, rename = "abstract")]
    pub abstract_text: Option<String>,
    #[serde(default = "default_true")]
    pub full_text_available: bool,
    #[serde(default)]
    pub is_retracted_itself: bool,
    #[serde(default)]
    pub mentions_retraction: Option<bool>,
    pub sources: BTreeSet<String>,
    pub cited_items: Vec<String>,
    #[serde(default)]
    pub item_type: Option<String>,
    #[serde(default)]
    pub classification_method: Option<ClassificationMethod>,
}

fn default_true() -> bool {
    true
}

impl CitingEntity {
    /// Bare entity carrying only what a single link knows.
    pub fn from_link(link: &CitationLink) -> CitingEntity {
        CitingEntity {
            id: link.citing_id.clone(),
            doi: link.citing_doi.clone(),
            year: link.creation_year,
            title: link.citing_title.clone(),
            venue_title: None,
            venue_ids: vec![],
            subject_areas: vec![],
            subject_categories: vec![],
            abstract_text: None,
            full_text_available: true,
            is_retracted_itself: false,
            mentions_retraction: None,
            sources: BTreeSet::from([link.source.clone()]),
            cited_items: vec![link.cited_id.clone()],
            item_type: None,
            classification_method: None,
        }
    }

    /// Applies a venue classification to the entity.
    pub fn apply_classification(&mut self, c: &VenueClassification) {
        self.subject_areas = c.areas.clone();
        self.subject_categories = c.categories.clone();
        self.classification_method = Some(c.method);
    }
}

/// Restricts entities to the given retracted ids: cited items outside the set
/// are removed and entities left citing nothing are dropped.
pub fn restrict_to_items(entities: &[CitingEntity], selected: &BTreeSet<String>) -> Vec<CitingEntity> {
    entities
        .iter()
        .filter_map(|e| {
            let cited: Vec<String> = e.cited_items.iter().filter(|c| selected.contains(*c)).cloned().collect();
            (!cited.is_empty()).then(|| CitingEntity { cited_items: cited, ..e.clone() })
        })
        .collect()
}

/// Per-source link lists, as stored between the harvest and merge steps.
pub type LinksBySource = BTreeMap<String, Vec<CitationLink>>;

/// Counts of the harvest: items with at least one link and total links.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestTally {
    pub items_with_citations: usize,
    pub links: usize,
}

/// Tallies merged entities: cited items with at least one citation and
/// distinct (citing entity, cited item) pairs.
pub fn tally_citations(entities: &[CitingEntity]) -> HarvestTally {
    let mut items: BTreeSet<&str> = BTreeSet::new();
    let mut pairs: BTreeSet<(&str, &str)> = BTreeSet::new();
    for e in entities {
        for c in &e.cited_items {
            items.insert(c);
            pairs.insert((&e.id, c));
        }
    }
    HarvestTally { items_with_citations: items.len(), links: pairs.len() }
}
