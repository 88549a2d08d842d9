//! In-text citations: context extraction, section labels, the CiTO decision
//! tree and the append-only annotation store.

mod context;
mod section;
mod store;
mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use context::{extract_context, segment_document, split_sentences, ContextWarning, FullText, Pointer, TextSection};
pub use section::{classify_section, SectionSynonyms};
pub use store::{
    export_csv, import_csv, read_citations, read_log, replay, AnnotationEvent, AnnotationInput, AnnotationState,
    AnnotationStore, FieldError, StoreLock,
};
pub use tree::{traverse_decision_tree, CitoDecisionTree, MacroCategory, TreeColumn, TreeOption, TreeRow, TreeStep};

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("anchor index {index} out of range for {len} sentence(s)")]
    AnchorOutOfRange { index: usize, len: usize },
    #[error("invalid selection `{selection}` at {level}; valid options: {}", options.join(", "))]
    Navigation { level: String, selection: String, options: Vec<String> },
    #[error("decision tree config invalid: {0}")]
    TreeConfig(String),
    #[error("unknown citation `{0}`")]
    UnknownCitation(String),
    #[error("invalid annotation: {}", .0.iter().map(|e| format!("{}: {}", e.field, e.message)).collect::<Vec<_>>().join("; "))]
    Validation(Vec<FieldError>),
    #[error("annotation store is locked by another writer ({0})")]
    Locked(String),
    #[error("corrupt annotation log at line {line}: {message}")]
    CorruptLog { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive];

    pub fn parse(s: &str) -> Option<Sentiment> {
        match s.trim().to_lowercase().as_str() {
            "positive" => Some(Sentiment::Positive),
            "negative" => Some(Sentiment::Negative),
            "neutral" => Some(Sentiment::Neutral),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionLabel {
    Introduction,
    Method,
    Abstract,
    Results,
    Conclusions,
    Background,
    Discussion,
    FirstSection,
    MiddleSection,
    FinalSection,
}

impl SectionLabel {
    pub const ALL: [SectionLabel; 10] = [
        SectionLabel::Introduction,
        SectionLabel::Method,
        SectionLabel::Abstract,
        SectionLabel::Results,
        SectionLabel::Conclusions,
        SectionLabel::Background,
        SectionLabel::Discussion,
        SectionLabel::FirstSection,
        SectionLabel::MiddleSection,
        SectionLabel::FinalSection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SectionLabel::Introduction => "introduction",
            SectionLabel::Method => "method",
            SectionLabel::Abstract => "abstract",
            SectionLabel::Results => "results",
            SectionLabel::Conclusions => "conclusions",
            SectionLabel::Background => "background",
            SectionLabel::Discussion => "discussion",
            SectionLabel::FirstSection => "first_section",
            SectionLabel::MiddleSection => "middle_section",
            SectionLabel::FinalSection => "final_section",
        }
    }

    pub fn parse(s: &str) -> Option<SectionLabel> {
        SectionLabel::ALL.into_iter().find(|l| l.as_str() == s.trim())
    }
}

impl fmt::Display for SectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A CiTO function identifier such as `obtains_background_from`. Validity is
/// checked against a [`CitoDecisionTree`] vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CitoFunction(pub String);

impl CitoFunction {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `obtains_background_from` → `obtains background from`.
    pub fn display_name(&self) -> String {
        self.0.replace('_', " ")
    }
}

impl fmt::Display for CitoFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationContext {
    pub preceding: Option<String>,
    pub anchor: String,
    pub following: Option<String>,
}

impl CitationContext {
    pub fn sentence_count(&self) -> usize {
        1 + self.preceding.is_some() as usize + self.following.is_some() as usize
    }

    pub fn text(&self) -> String {
        [self.preceding.as_deref(), Some(self.anchor.as_str()), self.following.as_deref()]
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// An in-text citation. Annotated fields stay `None` until a human sets them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InTextCitation {
    pub id: String,
    pub citing_entity_id: String,
    pub cited_item_id: String,
    pub pointer_text: String,
    pub section: SectionLabel,
    #[serde(default)]
    pub section_title: Option<String>,
    pub context: CitationContext,
    #[serde(default)]
    pub sentiment: Option<Sentiment>,
    #[serde(default)]
    pub intent: Option<CitoFunction>,
    #[serde(default)]
    pub mentions_retraction: Option<bool>,
    #[serde(default)]
    pub annotator: Option<String>,
    #[serde(default)]
    pub annotated_at: Option<String>,
}

impl InTextCitation {
    pub fn is_annotated(&self) -> bool {
        self.sentiment.is_some()
    }

    /// Copy with the annotated fields taken from `event`.
    pub fn with_annotation(&self, event: Option<&AnnotationEvent>) -> InTextCitation {
        let mut c = self.clone();
        if let Some(e) = event {
            c.sentiment = Some(e.sentiment);
            c.intent = Some(e.intent.clone());
            c.mentions_retraction = Some(e.mentions_retraction);
            c.annotator = Some(e.annotator.clone());
            c.annotated_at = Some(e.timestamp.clone());
        }
        c
    }
}
