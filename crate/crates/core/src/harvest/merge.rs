//! Cross-source deduplication of citing entities.
//!
//! Entities join on normalized DOI. An entity without a DOI joins a DOI-bearing
//! entity only when exactly one of them has the same normalized title and the
//! same year; no-DOI entities sharing title and year are one entity.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CitingEntity, LinksBySource};
use crate::doi::Doi;

/// Same entity reported with different years; the earliest is kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearConflict {
    pub entity_id: String,
    pub years: Vec<i32>,
    pub kept: i32,
}

/// A no-DOI entity whose title and year match several DOI entities; left
/// unmerged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguousMatch {
    pub entity_id: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeOutcome {
    /// Sorted by id.
    pub entities: Vec<CitingEntity>,
    pub conflicts: Vec<YearConflict>,
    pub ambiguous: Vec<AmbiguousMatch>,
}

/// Lowercase, alphanumeric words separated by single spaces.
pub fn normalize_title(title: &str) -> String {
    title
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn title_key(e: &CitingEntity) -> Option<(String, i32)> {
    let t = normalize_title(e.title.as_deref()?);
    (!t.is_empty()).then_some((t, e.year?))
}

fn first_some<T: Clone>(members: &[&CitingEntity], f: impl Fn(&CitingEntity) -> Option<T>) -> Option<T> {
    members.iter().find_map(|m| f(m))
}

fn union_sorted(members: &[&CitingEntity], f: impl Fn(&CitingEntity) -> &Vec<String>) -> Vec<String> {
    members
        .iter()
        .flat_map(|m| f(m).iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Collapses a group of records describing one work.
fn combine(mut members: Vec<&CitingEntity>, doi: Option<Doi>, conflicts: &mut Vec<YearConflict>) -> CitingEntity {
    members.sort_by(|a, b| (&a.sources, &a.id).cmp(&(&b.sources, &b.id)));
    let id = match &doi {
        Some(d) => d.to_string(),
        None => members.iter().map(|m| m.id.clone()).min().expect("non-empty group"),
    };
    let years: BTreeSet<i32> = members.iter().filter_map(|m| m.year).collect();
    let year = years.iter().next().copied();
    if years.len() > 1 {
        let kept = year.expect("non-empty");
        log::warn!("conflicting years {years:?} for `{id}`; keeping {kept}");
        conflicts.push(YearConflict { entity_id: id.clone(), years: years.iter().copied().collect(), kept });
    }
    let title = members
        .iter()
        .filter_map(|m| m.title.clone())
        .filter(|t| !t.trim().is_empty())
        .min();
    CitingEntity {
        id,
        doi,
        year,
        title,
        venue_title: first_some(&members, |m| m.venue_title.clone()),
        venue_ids: union_sorted(&members, |m| &m.venue_ids),
        subject_areas: union_sorted(&members, |m| &m.subject_areas),
        subject_categories: union_sorted(&members, |m| &m.subject_categories),
        abstract_text: first_some(&members, |m| m.abstract_text.clone()),
        full_text_available: members.iter().all(|m| m.full_text_available),
        is_retracted_itself: members.iter().any(|m| m.is_retracted_itself),
        mentions_retraction: first_some(&members, |m| m.mentions_retraction),
        sources: members.iter().flat_map(|m| m.sources.iter().cloned()).collect(),
        cited_items: union_sorted(&members, |m| &m.cited_items),
        item_type: first_some(&members, |m| m.item_type.clone()),
        classification_method: first_some(&members, |m| m.classification_method),
    }
}

/// Merges entity lists (one per source, or any partition) into one entity per
/// distinct work. Commutative in its inputs and idempotent on its output.
pub fn merge_entities(groups: &[Vec<CitingEntity>]) -> MergeOutcome {
    let mut by_doi: BTreeMap<Doi, Vec<&CitingEntity>> = BTreeMap::new();
    let mut by_title: BTreeMap<(String, i32), Vec<&CitingEntity>> = BTreeMap::new();
    let mut by_id: BTreeMap<String, Vec<&CitingEntity>> = BTreeMap::new();
    for e in groups.iter().flatten() {
        if let Some(d) = &e.doi {
            by_doi.entry(d.clone()).or_default().push(e);
        } else if let Some(k) = title_key(e) {
            by_title.entry(k).or_default().push(e);
        } else {
            by_id.entry(e.id.clone()).or_default().push(e);
        }
    }

    let mut conflicts = Vec::new();
    let mut doi_entities: BTreeMap<Doi, (Vec<&CitingEntity>, CitingEntity)> = BTreeMap::new();
    let mut doi_index: BTreeMap<(String, i32), Vec<Doi>> = BTreeMap::new();
    for (doi, members) in by_doi {
        let mut scratch = Vec::new();
        let merged = combine(members.clone(), Some(doi.clone()), &mut scratch);
        if let Some(k) = title_key(&merged) {
            doi_index.entry(k).or_default().push(doi.clone());
        }
        doi_entities.insert(doi, (members, merged));
    }

    let mut ambiguous = Vec::new();
    let mut standalone: Vec<Vec<&CitingEntity>> = by_id.into_values().collect();
    for (key, members) in by_title {
        match doi_index.get(&key).map(Vec::as_slice) {
            Some([doi]) => doi_entities.get_mut(doi).expect("indexed").0.extend(members),
            Some(candidates) => {
                let id = members.iter().map(|m| m.id.clone()).min().expect("non-empty");
                ambiguous.push(AmbiguousMatch {
                    entity_id: id,
                    candidates: candidates.iter().map(|d| d.to_string()).collect(),
                });
                standalone.push(members);
            }
            None => standalone.push(members),
        }
    }

    let mut entities = Vec::with_capacity(doi_entities.len() + standalone.len());
    for (doi, (members, _)) in doi_entities {
        entities.push(combine(members, Some(doi), &mut conflicts));
    }
    for members in standalone {
        entities.push(combine(members, None, &mut conflicts));
    }
    entities.sort_by(|a, b| a.id.cmp(&b.id));
    conflicts.sort_by(|a, b| a.entity_id.cmp(&b.entity_id));
    MergeOutcome { entities, conflicts, ambiguous }
}

/// Turns per-source link lists into deduplicated citing entities.
pub fn merge_sources(links: &LinksBySource) -> MergeOutcome {
    let groups: Vec<Vec<CitingEntity>> = links
        .values()
        .map(|ls| ls.iter().map(CitingEntity::from_link).collect())
        .collect();
    merge_entities(&groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harvest::CitationLink;

    fn link(source: &str, citing: &str, doi: bool, title: Option<&str>, year: Option<i32>, cited: &str) -> CitationLink {
        CitationLink {
            citing_id: if doi { citing.to_string() } else { format!("{source}:{citing}") },
            citing_doi: if doi { Doi::parse(citing) } else { None },
            cited_id: cited.into(),
            source: source.into(),
            creation_year: year,
            citing_title: title.map(str::to_string),
        }
    }

    #[test]
    fn doi_overlap_is_counted_once() {
        let mut links = LinksBySource::new();
        links.insert("a".into(), vec![link("a", "10.1/x", true, None, Some(2010), "r1"), link("a", "10.1/y", true, None, Some(2011), "r1")]);
        links.insert("b".into(), vec![link("b", "10.1/X", true, None, Some(2010), "r2")]);
        let out = merge_sources(&links);
        assert_eq!(out.entities.len(), 2);
        let x = &out.entities[0];
        assert_eq!(x.sources, BTreeSet::from(["a".to_string(), "b".to_string()]));
        assert_eq!(x.cited_items, vec!["r1", "r2"]);
    }

    #[test]
    fn no_doi_record_joins_on_title_and_year() {
        let mut links = LinksBySource::new();
        links.insert("coci".into(), vec![link("coci", "10.1/x", true, Some("The Nature of Things"), Some(2010), "r1")]);
        links.insert(
            "mag".into(),
            vec![
                link("mag", "1", false, Some("the nature of things."), Some(2010), "r1"),
                link("mag", "2", false, Some("The Nature of Things"), Some(2012), "r1"),
            ],
        );
        let out = merge_sources(&links);
        assert_eq!(out.entities.len(), 2);
        assert_eq!(out.entities[0].id, "10.1/x");
        assert_eq!(out.entities[0].sources.len(), 2);
        assert_eq!(out.entities[1].id, "mag:2");
    }

    #[test]
    fn conflicting_years_keep_earliest() {
        let mut links = LinksBySource::new();
        links.insert("a".into(), vec![link("a", "10.1/x", true, None, Some(2012), "r1")]);
        links.insert("b".into(), vec![link("b", "10.1/x", true, None, Some(2010), "r1")]);
        let out = merge_sources(&links);
        assert_eq!(out.entities[0].year, Some(2010));
        assert_eq!(out.conflicts, vec![YearConflict { entity_id: "10.1/x".into(), years: vec![2010, 2012], kept: 2010 }]);
    }

    #[test]
    fn empty_second_source_is_identity() {
        let a = vec![CitingEntity::from_link(&link("a", "10.1/x", true, None, Some(2010), "r1"))];
        let out = merge_entities(&[a.clone(), vec![]]);
        assert_eq!(out.entities, a);
    }
}
