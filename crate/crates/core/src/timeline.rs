//! Citation timelines around the retraction year.
//!
//! A citation falls before (`PPre`), in (`PRet`) or after (`PPost`) the
//! retraction year of the item it cites. Pre and post citations also get a
//! position on [-1, 1] across their period, rounded to two decimals and binned
//! into fifths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harvest::CitingEntity;
use crate::ingest::RetractedPublication;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TimelineError {
    #[error("citation year {citing} predates publication year {published}")]
    CitationBeforePublication { citing: i32, published: i32 },
    #[error("publication year {published} is after retraction year {retracted}")]
    PublicationAfterRetraction { published: i32, retracted: i32 },
    #[error("last citation year {last} precedes citation year {citing}")]
    LastCitationBeforeCitation { citing: i32, last: i32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Period {
    #[serde(rename = "P-Pre")]
    PPre,
    #[serde(rename = "P-Ret")]
    PRet,
    #[serde(rename = "P-Post")]
    PPost,
}

impl Period {
    pub const ALL: [Period; 3] = [Period::PPre, Period::PRet, Period::PPost];

    pub fn label(self) -> &'static str {
        match self {
            Period::PPre => "P-Pre",
            Period::PRet => "P-Ret",
            Period::PPost => "P-Post",
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Fifth {
    #[serde(rename = "[-1.00, -0.61]")]
    F1,
    #[serde(rename = "[-0.60, -0.21]")]
    F2,
    #[serde(rename = "[-0.20, 0.20]")]
    F3,
    #[serde(rename = "[0.21, 0.60]")]
    F4,
    #[serde(rename = "[0.61, 1.00]")]
    F5,
}

impl Fifth {
    pub const ALL: [Fifth; 5] = [Fifth::F1, Fifth::F2, Fifth::F3, Fifth::F4, Fifth::F5];

    pub fn label(self) -> &'static str {
        match self {
            Fifth::F1 => "[-1.00, -0.61]",
            Fifth::F2 => "[-0.60, -0.21]",
            Fifth::F3 => "[-0.20, 0.20]",
            Fifth::F4 => "[0.21, 0.60]",
            Fifth::F5 => "[0.61, 1.00]",
        }
    }

    /// Inclusive bounds in hundredths.
    pub fn bounds(self) -> (i32, i32) {
        match self {
            Fifth::F1 => (-100, -61),
            Fifth::F2 => (-60, -21),
            Fifth::F3 => (-20, 20),
            Fifth::F4 => (21, 60),
            Fifth::F5 => (61, 100),
        }
    }

    /// Bin for a position given in hundredths, `None` outside [-100, 100].
    pub fn from_hundredths(h: i32) -> Option<Fifth> {
        Fifth::ALL.into_iter().find(|f| {
            let (lo, hi) = f.bounds();
            (lo..=hi).contains(&h)
        })
    }
}

impl fmt::Display for Fifth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodAssignment {
    pub period: Period,
    /// Position in hundredths on [-100, 100]; absent for `PRet`.
    pub position_hundredths: Option<i32>,
    pub fifth: Option<Fifth>,
}

impl PeriodAssignment {
    /// Normalized position on [-1, 1], two decimals.
    pub fn normalized_position(&self) -> Option<f64> {
        self.position_hundredths.map(|h| h as f64 / 100.0)
    }
}

/// Rounds `num / den` (den > 0) to the nearest integer, ties away from zero.
fn div_round_half_away(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    let q = (2 * num.abs() + den) / (2 * den);
    if num < 0 {
        -q
    } else {
        q
    }
}

/// Position of `year` inside the inclusive span `start..=end`, mapped to
/// [-1, 1] and rounded to hundredths (ties away from zero). A single-year span
/// sits on the final border.
///
/// Exact integer arithmetic: `100 * (2 (y - s) / (e - s) - 1)`.
pub fn span_position_hundredths(year: i32, start: i32, end: i32) -> i32 {
    let len = i64::from(end - start);
    if len <= 0 {
        return 100;
    }
    let num = 200 * i64::from(year - start) - 100 * len;
    div_round_half_away(num, len) as i32
}

/// Assigns a citation made in `citing_year` to a period of the item published
/// in `pub_year` and retracted in `retraction_year`, whose last citation came
/// in `last_citation_year`.
pub fn assign_period(
    citing_year: i32,
    pub_year: i32,
    retraction_year: i32,
    last_citation_year: i32,
) -> Result<PeriodAssignment, TimelineError> {
    if pub_year > retraction_year {
        return Err(TimelineError::PublicationAfterRetraction { published: pub_year, retracted: retraction_year });
    }
    if citing_year < pub_year {
        return Err(TimelineError::CitationBeforePublication { citing: citing_year, published: pub_year });
    }
    let (period, h) = if citing_year < retraction_year {
        (Period::PPre, Some(span_position_hundredths(citing_year, pub_year, retraction_year - 1)))
    } else if citing_year == retraction_year {
        (Period::PRet, None)
    } else {
        if last_citation_year < citing_year {
            return Err(TimelineError::LastCitationBeforeCitation { citing: citing_year, last: last_citation_year });
        }
        (Period::PPost, Some(span_position_hundredths(citing_year, retraction_year + 1, last_citation_year)))
    };
    Ok(PeriodAssignment {
        period,
        position_hundredths: h,
        fifth: h.map(|h| Fifth::from_hundredths(h).expect("position within [-100, 100]")),
    })
}

/// One citation's input to the series builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub citing_year: i32,
    pub cited_id: String,
    pub pub_year: i32,
    pub retraction_year: i32,
    pub disciplines: Vec<String>,
}

/// Label of the all-disciplines aggregate series.
pub const ALL_DISCIPLINES: &str = "all";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CitationSeries {
    /// discipline → (years after retraction → count); keys are contiguous
    /// over each discipline's observed range.
    pub per_discipline: BTreeMap<String, BTreeMap<i32, u64>>,
    /// `all` aggregate: each citation counted once.
    pub aggregate: BTreeMap<i32, u64>,
    /// Mean (retraction_year - pub_year) over the distinct cited items of each
    /// discipline.
    pub avg_retraction_time: BTreeMap<String, f64>,
}

fn fill_gaps(series: &mut BTreeMap<i32, u64>) {
    let (Some(&lo), Some(&hi)) = (series.keys().next(), series.keys().next_back()) else {
        return;
    };
    for k in lo..=hi {
        series.entry(k).or_insert(0);
    }
}

/// Histograms of citations over years since retraction, per discipline of the
/// cited item. Items with several disciplines count in each of them.
pub fn build_series(entries: &[SeriesEntry]) -> CitationSeries {
    let mut out = CitationSeries::default();
    let mut items: BTreeMap<String, BTreeSet<(String, i32)>> = BTreeMap::new();
    for e in entries {
        let offset = e.citing_year - e.retraction_year;
        *out.aggregate.entry(offset).or_default() += 1;
        let disciplines: BTreeSet<&String> = e.disciplines.iter().collect();
        for d in disciplines {
            *out.per_discipline.entry(d.clone()).or_default().entry(offset).or_default() += 1;
            items
                .entry(d.clone())
                .or_default()
                .insert((e.cited_id.clone(), e.retraction_year - e.pub_year));
        }
    }
    for s in out.per_discipline.values_mut() {
        fill_gaps(s);
    }
    fill_gaps(&mut out.aggregate);
    for (d, its) in items {
        let mean = its.iter().map(|(_, t)| f64::from(*t)).sum::<f64>() / its.len() as f64;
        out.avg_retraction_time.insert(d, mean);
    }
    out
}

impl CitationSeries {
    /// `discipline,years_after_retraction,count` rows, aggregate last as `all`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["discipline", "years_after_retraction", "count"])?;
        let rows = self
            .per_discipline
            .iter()
            .map(|(d, s)| (d.as_str(), s))
            .chain(std::iter::once((ALL_DISCIPLINES, &self.aggregate)));
        for (d, s) in rows {
            for (k, c) in s {
                w.write_record([d.to_string(), k.to_string(), c.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Period of one (citing entity, cited item) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationPeriod {
    pub citing_entity_id: String,
    pub cited_item_id: String,
    pub citing_year: i32,
    pub pub_year: i32,
    pub retraction_year: i32,
    /// Latest citing year observed for the cited item.
    pub last_citation_year: i32,
    #[serde(flatten)]
    pub assignment: PeriodAssignment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentReject {
    pub citing_entity_id: String,
    pub cited_item_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentOutcome {
    pub periods: Vec<CitationPeriod>,
    pub rejects: Vec<SegmentReject>,
}

/// Assigns a period to every (entity, item) pair. The P-Post span of an item
/// ends at the latest year in which it was cited. Pairs whose entity has no
/// year, whose item is unknown or whose years are inconsistent are rejected.
pub fn segment_citations(items: &[RetractedPublication], entities: &[CitingEntity]) -> SegmentOutcome {
    let items: BTreeMap<&str, &RetractedPublication> = items.iter().map(|i| (i.id.as_str(), i)).collect();
    let mut last: BTreeMap<&str, i32> = BTreeMap::new();
    for e in entities {
        if let Some(y) = e.year {
            for c in &e.cited_items {
                let l = last.entry(c.as_str()).or_insert(y);
                *l = (*l).max(y);
            }
        }
    }
    let mut out = SegmentOutcome::default();
    for e in entities {
        for c in &e.cited_items {
            let reject = |reason: String| SegmentReject {
                citing_entity_id: e.id.clone(),
                cited_item_id: c.clone(),
                reason,
            };
            let Some(item) = items.get(c.as_str()) else {
                out.rejects.push(reject("cited item not among the retracted records".into()));
                continue;
            };
            let Some(y) = e.year else {
                out.rejects.push(reject("citing entity has no year".into()));
                continue;
            };
            let l = last[c.as_str()];
            match assign_period(y, item.pub_year, item.retraction_year, l) {
                Ok(assignment) => out.periods.push(CitationPeriod {
                    citing_entity_id: e.id.clone(),
                    cited_item_id: c.clone(),
                    citing_year: y,
                    pub_year: item.pub_year,
                    retraction_year: item.retraction_year,
                    last_citation_year: l,
                    assignment,
                }),
                Err(err) => out.rejects.push(reject(err.to_string())),
            }
        }
    }
    out.periods.sort_by(|a, b| (&a.cited_item_id, &a.citing_entity_id).cmp(&(&b.cited_item_id, &b.citing_entity_id)));
    out.periods.dedup_by(|a, b| a.cited_item_id == b.cited_item_id && a.citing_entity_id == b.citing_entity_id);
    out
}
