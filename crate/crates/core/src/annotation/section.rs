use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SectionLabel;

/// Rhetorical section labels and the title phrases that select them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SectionSynonyms(pub BTreeMap<SectionLabel, Vec<String>>);

impl Default for SectionSynonyms {
    fn default() -> Self {
        let table: [(SectionLabel, &[&str]); 7] = [
            (SectionLabel::Introduction, &["introduction", "intro", "introductory remarks", "preliminary remarks"]),
            (
                SectionLabel::Method,
                &[
                    "method", "methods", "methodology", "methodologies", "materials and methods", "data and methods",
                    "research design", "experimental design", "procedure", "procedures", "approach",
                ],
            ),
            (SectionLabel::Abstract, &["abstract"]),
            (SectionLabel::Results, &["results", "result", "findings", "empirical results"]),
            (
                SectionLabel::Conclusions,
                &["conclusion", "conclusions", "concluding remarks", "final remarks", "closing remarks", "concluding thoughts"],
            ),
            (
                SectionLabel::Background,
                &[
                    "background", "literature review", "review of the literature", "related work", "related literature",
                    "previous work", "prior work", "state of the art", "theoretical framework", "historical context",
                ],
            ),
            (SectionLabel::Discussion, &["discussion", "discussions", "general discussion"]),
        ];
        SectionSynonyms(
            table.into_iter().map(|(l, words)| (l, words.iter().map(|w| w.to_string()).collect())).collect(),
        )
    }
}

impl SectionSynonyms {
    /// Adds phrases from `other` to this table.
    pub fn extend(&mut self, other: SectionSynonyms) {
        for (label, words) in other.0 {
            let entry = self.0.entry(label).or_default();
            for w in words {
                if !entry.contains(&w) {
                    entry.push(w);
                }
            }
        }
    }
}

fn words(s: &str) -> Vec<String> {
    s.to_lowercase().split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty()).map(String::from).collect()
}

/// Keyword match on the section title; the phrase that starts earliest wins
/// (longer phrase on ties). Without a match the label is positional: first
/// third, middle, final third.
pub fn classify_section(section_title: &str, relative_position: f64, synonyms: &SectionSynonyms) -> SectionLabel {
    let title = words(section_title);
    let mut best: Option<(usize, std::cmp::Reverse<usize>, SectionLabel)> = None;
    for (&label, phrases) in &synonyms.0 {
        for phrase in phrases {
            let p = words(phrase);
            if p.is_empty() || p.len() > title.len() {
                continue;
            }
            if let Some(pos) = title.windows(p.len()).position(|w| w == &p[..]) {
                let cand = (pos, std::cmp::Reverse(p.len()), label);
                if best.as_ref().map_or(true, |b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
    }
    match best {
        Some((_, _, label)) => label,
        None if relative_position < 1.0 / 3.0 => SectionLabel::FirstSection,
        None if relative_position > 2.0 / 3.0 => SectionLabel::FinalSection,
        None => SectionLabel::MiddleSection,
    }
}
