use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CitingEntity, HarvestError};
use crate::doi::Doi;

/// Item types that are not scholarly citing works.
pub const DEFAULT_INVALID_TYPES: &[&str] = &["bibliography", "retraction notice", "presentation", "data repository"];

/// Bibliographic metadata for one citing work.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetadataRecord {
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub venue_title: Option<String>,
    #[serde(default)]
    pub venue_ids: Vec<String>,
    #[serde(default, rename = "abstract")]
    pub abstract_text: Option<String>,
    /// `Some(false)` when the full text is behind a paywall.
    #[serde(default)]
    pub full_text_available: Option<bool>,
    #[serde(default)]
    pub item_type: Option<String>,
    #[serde(default)]
    pub is_retracted: Option<bool>,
}

pub trait MetadataSource {
    fn lookup(&self, id: &str) -> Option<MetadataRecord>;
}

/// Metadata read from a JSON object keyed by DOI or source-local id.
#[derive(Debug, Clone, Default)]
pub struct FixtureMetadataSource {
    records: BTreeMap<String, MetadataRecord>,
}

impl FixtureMetadataSource {
    pub fn new(records: BTreeMap<String, MetadataRecord>) -> Self {
        let records = records
            .into_iter()
            .map(|(k, v)| (Doi::parse(&k).map(|d| d.to_string()).unwrap_or(k), v))
            .collect();
        FixtureMetadataSource { records }
    }

    pub fn from_file(path: &Path) -> Result<Self, HarvestError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarvestError::Fixture(format!("{}: {e}", path.display())))?;
        let records = serde_json::from_str(&text)
            .map_err(|e| HarvestError::Fixture(format!("{}: {e}", path.display())))?;
        Ok(FixtureMetadataSource::new(records))
    }
}

impl MetadataSource for FixtureMetadataSource {
    fn lookup(&self, id: &str) -> Option<MetadataRecord> {
        let key = Doi::parse(id).map(|d| d.to_string()).unwrap_or_else(|| id.to_string());
        self.records.get(&key).cloned()
    }
}

/// Checks applied while resolving metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityPolicy {
    /// Lowercase item-type labels sent to quarantine.
    pub invalid_types: BTreeSet<String>,
    /// DOIs known to be retracted themselves.
    pub retracted_dois: BTreeSet<Doi>,
}

impl Default for ValidityPolicy {
    fn default() -> Self {
        ValidityPolicy {
            invalid_types: DEFAULT_INVALID_TYPES.iter().map(|s| s.to_string()).collect(),
            retracted_dois: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum QuarantineReason {
    UnresolvableIdentifier,
    MissingYear,
    InvalidType(String),
    Manual(String),
}

/// An entity held back for human review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarantineEntry {
    pub entity: CitingEntity,
    pub reason: QuarantineReason,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    Resolved(CitingEntity),
    Quarantined(QuarantineEntry),
}

/// Fills missing fields of `entity` from `source`.
///
/// Entities whose identifiers resolve nowhere, that end up without a year, or
/// whose item type is on the invalid list are quarantined. A paywalled entity
/// stays in the dataset with `full_text_available = false`.
pub fn resolve_metadata(entity: &CitingEntity, source: &dyn MetadataSource, policy: &ValidityPolicy) -> Resolution {
    let quarantine = |entity: CitingEntity, reason| Resolution::Quarantined(QuarantineEntry { entity, reason });
    let record = entity
        .doi
        .as_ref()
        .and_then(|d| source.lookup(d.as_str()))
        .or_else(|| source.lookup(&entity.id));
    let Some(record) = record else {
        return quarantine(entity.clone(), QuarantineReason::UnresolvableIdentifier);
    };
    let mut e = entity.clone();
    e.year = e.year.or(record.year);
    e.title = e.title.or(record.title);
    e.venue_title = e.venue_title.or(record.venue_title);
    if e.venue_ids.is_empty() {
        e.venue_ids = record.venue_ids;
    }
    e.abstract_text = e.abstract_text.or(record.abstract_text).filter(|a| !a.trim().is_empty());
    if record.full_text_available == Some(false) {
        e.full_text_available = false;
    }
    e.item_type = e.item_type.or(record.item_type);
    e.is_retracted_itself = e.is_retracted_itself
        || record.is_retracted.unwrap_or(false)
        || e.doi.as_ref().is_some_and(|d| policy.retracted_dois.contains(d));

    if let Some(t) = &e.item_type {
        let t = t.trim().to_lowercase();
        if policy.invalid_types.contains(&t) {
            return quarantine(e, QuarantineReason::InvalidType(t));
        }
    }
    if e.year.is_none() {
        return quarantine(e, QuarantineReason::MissingYear);
    }
    Resolution::Resolved(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harvest::CitationLink;

    fn entity(id: &str, year: Option<i32>) -> CitingEntity {
        CitingEntity::from_link(&CitationLink {
            citing_id: id.into(),
            citing_doi: Doi::parse(id).filter(|d| d.as_str().starts_with("10.")),
            cited_id: "r1".into(),
            source: "coci".into(),
            creation_year: year,
            citing_title: None,
        })
    }

    fn source() -> FixtureMetadataSource {
        let mut m = BTreeMap::new();
        m.insert(
            "10.1/full".to_string(),
            MetadataRecord {
                year: Some(2014),
                title: Some("A title".into()),
                venue_title: Some("Journal of X".into()),
                venue_ids: vec!["1234-5678".into()],
                abstract_text: Some("Abstract.".into()),
                ..Default::default()
            },
        );
        m.insert("10.1/paywall".to_string(), MetadataRecord { year: Some(2015), full_text_available: Some(false), ..Default::default() });
        m.insert("10.1/noyear".to_string(), MetadataRecord::default());
        m.insert("10.1/notice".to_string(), MetadataRecord { year: Some(2015), item_type: Some("Retraction Notice".into()), ..Default::default() });
        FixtureMetadataSource::new(m)
    }

    #[test]
    fn fills_fields() {
        let Resolution::Resolved(e) = resolve_metadata(&entity("10.1/full", None), &source(), &ValidityPolicy::default()) else {
            panic!("expected resolved");
        };
        assert_eq!(e.year, Some(2014));
        assert_eq!(e.title.as_deref(), Some("A title"));
        assert_eq!(e.venue_ids, vec!["1234-5678"]);
        assert!(e.full_text_available);
    }

    #[test]
    fn paywalled_entity_is_retained() {
        match resolve_metadata(&entity("10.1/paywall", None), &source(), &ValidityPolicy::default()) {
            Resolution::Resolved(e) => assert!(!e.full_text_available),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quarantines() {
        let policy = ValidityPolicy::default();
        let reason = |e| match resolve_metadata(&e, &source(), &policy) {
            Resolution::Quarantined(q) => q.reason,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(reason(entity("10.1/noyear", None)), QuarantineReason::MissingYear);
        assert_eq!(reason(entity("10.1/unknown", Some(2010))), QuarantineReason::UnresolvableIdentifier);
        assert_eq!(reason(entity("10.1/notice", None)), QuarantineReason::InvalidType("retraction notice".into()));
    }
}
