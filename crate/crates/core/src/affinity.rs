//! The humanities affinity score of a retracted item.
//!
//! Every item starts at 1. One point when both the retraction-database
//! subjects and the venue subjects contain a humanities subject, one when
//! every retraction-database subject is humanities, one for a title judged
//! clearly humanities, and a judged -1/0/+1 from the abstract. Totals run
//! from 0 to 5; items below the threshold (default 2) are dropped.
//!
//! The venue check accepts *any* humanities subject in each list; the two
//! need not name the same discipline.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::humanities::SubjectTag;

pub const DEFAULT_THRESHOLD: i32 = 2;

#[derive(Debug, Error, PartialEq)]
pub enum AffinityError {
    #[error("item `{0}` has no affinity score")]
    Unscored(String),
    #[error("abstract judgment must be -1, 0 or 1, got {0}")]
    AbstractJudgment(i32),
    #[error("title bonus must be 0 or 1, got {0}")]
    TitleBonus(i32),
    #[error("judgment sidecar: {0}")]
    Sidecar(String),
}

/// Human judgment of an abstract's humanities affinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum AbstractJudgment {
    Against,
    Neutral,
    For,
}

impl AbstractJudgment {
    pub fn value(self) -> i32 {
        match self {
            AbstractJudgment::Against => -1,
            AbstractJudgment::Neutral => 0,
            AbstractJudgment::For => 1,
        }
    }
}

impl TryFrom<i32> for AbstractJudgment {
    type Error = AffinityError;

    fn try_from(v: i32) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(AbstractJudgment::Against),
            0 => Ok(AbstractJudgment::Neutral),
            1 => Ok(AbstractJudgment::For),
            other => Err(AffinityError::AbstractJudgment(other)),
        }
    }
}

impl From<AbstractJudgment> for i32 {
    fn from(j: AbstractJudgment) -> i32 {
        j.value()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityInputs {
    pub retraction_db_subjects: Vec<SubjectTag>,
    pub venue_subjects: Vec<SubjectTag>,
    pub title_is_clearly_humanities: bool,
    pub abstract_judgment: AbstractJudgment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinityScore {
    pub base: i32,
    pub venue_bonus: i32,
    pub all_subjects_bonus: i32,
    pub title_bonus: i32,
    pub abstract_adjustment: i32,
    pub total: i32,
}

pub fn score_affinity(inputs: &AffinityInputs) -> AffinityScore {
    let any_hum = |tags: &[SubjectTag]| tags.iter().any(|t| t.is_humanities);
    let venue_bonus = i32::from(any_hum(&inputs.retraction_db_subjects) && any_hum(&inputs.venue_subjects));
    // an empty subject list never earns the "all humanities" point
    let all_subjects_bonus = i32::from(
        !inputs.retraction_db_subjects.is_empty() && inputs.retraction_db_subjects.iter().all(|t| t.is_humanities),
    );
    let title_bonus = i32::from(inputs.title_is_clearly_humanities);
    let abstract_adjustment = inputs.abstract_judgment.value();
    AffinityScore {
        base: 1,
        venue_bonus,
        all_subjects_bonus,
        title_bonus,
        abstract_adjustment,
        total: 1 + venue_bonus + all_subjects_bonus + title_bonus + abstract_adjustment,
    }
}

/// One row of the human-judgment sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanJudgment {
    pub item_id: String,
    pub title_bonus: bool,
    pub abstract_adjustment: AbstractJudgment,
    #[serde(default)]
    pub note: String,
}

/// Reads the `item_id,title_bonus,abstract_adjustment,note` sidecar CSV.
pub fn read_judgments<R: Read>(input: R) -> Result<BTreeMap<String, HumanJudgment>, AffinityError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let err = |e: csv::Error| AffinityError::Sidecar(e.to_string());
    let headers = reader.headers().map_err(err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| AffinityError::Sidecar(format!("missing column `{name}`")))
    };
    let (id_c, title_c, abs_c) = (col("item_id")?, col("title_bonus")?, col("abstract_adjustment")?);
    let note_c = headers.iter().position(|h| h == "note");
    let mut out = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(err)?;
        let get = |c: usize| row.get(c).unwrap_or("");
        let line = i + 2;
        let title: i32 = get(title_c)
            .parse()
            .map_err(|_| AffinityError::Sidecar(format!("line {line}: bad title_bonus `{}`", get(title_c))))?;
        if !(0..=1).contains(&title) {
            return Err(AffinityError::TitleBonus(title));
        }
        // tolerate the unicode minus sign
        let abs_raw = get(abs_c).replace('\u{2212}', "-");
        let abs: i32 = abs_raw
            .parse()
            .map_err(|_| AffinityError::Sidecar(format!("line {line}: bad abstract_adjustment `{abs_raw}`")))?;
        let judgment = HumanJudgment {
            item_id: get(id_c).to_string(),
            title_bonus: title == 1,
            abstract_adjustment: AbstractJudgment::try_from(abs)?,
            note: note_c.map(|c| get(c).to_string()).unwrap_or_default(),
        };
        out.insert(judgment.item_id.clone(), judgment);
    }
    Ok(out)
}

/// Audit entry: one item with its score breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub item_id: String,
    pub score: Option<AffinityScore>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AffinityPartition {
    pub kept: Vec<ScoredItem>,
    pub dropped: Vec<ScoredItem>,
}

impl AffinityPartition {
    pub fn kept_ids(&self) -> BTreeSet<String> {
        self.kept.iter().map(|i| i.item_id.clone()).collect()
    }
}

/// Splits items at `threshold` (kept when `total >= threshold`). Fails on the
/// first unscored item.
pub fn filter_by_affinity(items: &[ScoredItem], threshold: i32) -> Result<AffinityPartition, AffinityError> {
    let mut out = AffinityPartition::default();
    for item in items {
        let score = item.score.ok_or_else(|| AffinityError::Unscored(item.item_id.clone()))?;
        if score.total >= threshold {
            out.kept.push(item.clone());
        } else {
            out.dropped.push(item.clone());
        }
    }
    Ok(out)
}
