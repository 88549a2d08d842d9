//! Subject tags and the configurable set of labels that count as humanities.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Where a subject tag came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubjectSource {
    RetractionDb,
    VenueLookup,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubjectTag {
    pub label: String,
    pub is_humanities: bool,
    pub source: SubjectSource,
}

/// Retraction-database macro category marking humanities subjects.
pub const HUM_PREFIX: &str = "(HUM)";

/// Labels treated as humanities when they carry no `(HUM)` marker.
///
/// Covers the humanities disciplines of retraction-database exports plus the
/// Scimago "Arts and Humanities" area and its categories.
pub const DEFAULT_HUMANITIES_LABELS: &[&str] = &[
    // retraction database disciplines
    "architecture",
    "arts",
    "history",
    "journalism",
    "philosophy",
    "religion",
    "literature",
    "linguistics",
    "music",
    // scimago area and categories
    "arts and humanities",
    "archeology",
    "archeology (arts and humanities)",
    "arts and humanities (miscellaneous)",
    "classics",
    "conservation",
    "history and philosophy of science",
    "language and linguistics",
    "literature and literary theory",
    "museology",
    "religious studies",
    "visual arts and performing arts",
];

/// The humanities tag universe used for filtering and affinity scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanitiesVocabulary {
    labels: BTreeSet<String>,
}

impl Default for HumanitiesVocabulary {
    fn default() -> Self {
        HumanitiesVocabulary::new(DEFAULT_HUMANITIES_LABELS.iter().copied())
    }
}

impl HumanitiesVocabulary {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        HumanitiesVocabulary {
            labels: labels
                .into_iter()
                .map(|l| l.as_ref().trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        }
    }

    /// Reads one label per line; blank lines and `#` comments are skipped.
    pub fn from_lines(text: &str) -> Self {
        HumanitiesVocabulary::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    /// True for `(HUM)`-marked labels and for configured labels. A label like
    /// "History - Europe" matches through its discipline head "history".
    pub fn is_humanities(&self, label: &str) -> bool {
        let trimmed = label.trim();
        if trimmed.starts_with(HUM_PREFIX) {
            return true;
        }
        let (_, body) = split_marker(trimmed);
        let lower = body.to_lowercase();
        self.labels.contains(&lower) || self.labels.contains(&discipline_head(&lower))
    }

    pub fn tag(&self, label: &str, source: SubjectSource) -> SubjectTag {
        SubjectTag {
            label: label.trim().to_string(),
            is_humanities: self.is_humanities(label),
            source,
        }
    }
}

/// Splits a leading `(XXX)` marker off a subject label.
pub fn split_marker(label: &str) -> (Option<&str>, &str) {
    let t = label.trim();
    if t.starts_with('(') {
        if let Some(end) = t.find(')') {
            return (Some(&t[1..end]), t[end + 1..].trim());
        }
    }
    (None, t)
}

/// "History - Europe" → "history"; "Arts" → "arts".
pub fn discipline_head(label: &str) -> String {
    let (_, body) = split_marker(label);
    body.split(" - ").next().unwrap_or("").trim().to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hum_marker_and_configured_labels() {
        let v = HumanitiesVocabulary::default();
        assert!(v.is_humanities("(HUM) Journalism"));
        assert!(v.is_humanities("Arts and Humanities"));
        assert!(v.is_humanities("History - Europe"));
        assert!(!v.is_humanities("(HSC) Medicine - Anesthesiology"));
        assert!(!v.is_humanities("Medicine"));
    }

    #[test]
    fn discipline_heads() {
        assert_eq!(discipline_head("(HUM) History - Europe"), "history");
        assert_eq!(discipline_head("(HUM) Arts"), "arts");
        assert_eq!(split_marker("(HUM) Arts"), (Some("HUM"), "Arts"));
    }
}
