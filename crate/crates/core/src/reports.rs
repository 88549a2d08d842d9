//! Descriptive statistics over a dataset snapshot and the visualization bundle.
//!
//! The counting unit for period tables is the citation, i.e. one
//! (citing entity, cited item) pair. Tables whose rows are multi-valued
//! (disciplines, subject areas) use (citation, value) assignments as their
//! denominator so that each period's rows sum to 100%.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::InTextCitation;
use crate::harvest::CitingEntity;
use crate::hashing::sha256_hex;
use crate::ingest::RetractedPublication;
use crate::percent::Share;
use crate::timeline::{build_series, CitationPeriod, CitationSeries, Fifth, Period, SeriesEntry};
use crate::topics::{GroupedTopicTable, TopicBundle};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
/// Row for citing entities without any subject area.
pub const UNCLASSIFIED: &str = "Unclassified";
/// Row for cited items without a discipline.
pub const NO_DISCIPLINE: &str = "unknown";
pub const UNANNOTATED: &str = "unannotated";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("snapshot is empty: no citing entities")]
    EmptySnapshot,
    #[error("periods missing: run `segment` first")]
    PeriodsMissing,
    #[error("destination {0} is not writable: {1}")]
    Destination(String, std::io::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Who counts toward the retraction-mention rate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MentionDenominator {
    /// Every P-Ret/P-Post citing entity, including those without full text.
    #[default]
    AllEntities,
    /// Only entities whose full text was available.
    FullTextOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportOptions {
    pub mention_denominator: MentionDenominator,
}

/// Everything the report is computed from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub items: Vec<RetractedPublication>,
    pub entities: Vec<CitingEntity>,
    pub periods: Vec<CitationPeriod>,
    /// In-text citations with their latest annotations applied.
    #[serde(default)]
    pub citations: Vec<InTextCitation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodShares {
    pub period: Period,
    /// Citations in the period.
    pub citations: u64,
    /// Sum over citations of their row values; the percentage denominator.
    pub denominator: u64,
    pub rows: BTreeMap<String, Share>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodTable {
    pub denominator_unit: String,
    pub periods: Vec<PeriodShares>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentRow {
    pub share: Share,
    /// negative / neutral / positive / unannotated counts.
    pub sentiment: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InTextPeriod {
    pub period: Period,
    pub total: u64,
    pub sentiment: BTreeMap<String, Share>,
    pub by_intent: BTreeMap<String, SentimentRow>,
    pub by_section: BTreeMap<String, SentimentRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InTextReport {
    pub total: u64,
    /// In-text citations whose (entity, item) pair has no period.
    pub without_period: u64,
    pub periods: Vec<InTextPeriod>,
    pub intent_overall: BTreeMap<String, Share>,
    pub sentiment_overall: BTreeMap<String, Share>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionRate {
    pub denominator_policy: MentionDenominator,
    pub share: Share,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FifthBin {
    pub label: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FifthHistogram {
    pub period: Period,
    /// Five bins for P-Pre and P-Post, a single column for P-Ret.
    pub bins: Vec<FifthBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub retracted_items: u64,
    pub cited_items: u64,
    pub citing_entities: u64,
    pub citations: u64,
    pub in_text_citations: u64,
    pub per_period: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub totals: Totals,
    pub citing_by_period_and_discipline: PeriodTable,
    pub subject_area_distribution_per_period: PeriodTable,
    pub in_text_by_intent_section_sentiment: InTextReport,
    pub retraction_mention_rate: MentionRate,
    pub fulltext_unavailable_rate: Share,
    pub fifth_histograms: Vec<FifthHistogram>,
}

fn period_table(
    periods: &[CitationPeriod],
    unit: &str,
    values: impl Fn(&CitationPeriod) -> Vec<String>,
) -> PeriodTable {
    let periods = Period::ALL
        .into_iter()
        .map(|p| {
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            let mut citations = 0;
            for c in periods.iter().filter(|c| c.assignment.period == p) {
                citations += 1;
                for v in values(c) {
                    *counts.entry(v).or_default() += 1;
                }
            }
            let denominator = counts.values().sum();
            PeriodShares {
                period: p,
                citations,
                denominator,
                rows: counts.into_iter().map(|(k, n)| (k, Share::new(n, denominator))).collect(),
            }
        })
        .collect();
    PeriodTable { denominator_unit: unit.to_string(), periods }
}

fn distinct_or(values: &[String], fallback: &str) -> Vec<String> {
    let set: BTreeSet<&String> = values.iter().collect();
    if set.is_empty() {
        vec![fallback.to_string()]
    } else {
        set.into_iter().cloned().collect()
    }
}

fn shares(counts: BTreeMap<String, u64>, denominator: u64) -> BTreeMap<String, Share> {
    counts.into_iter().map(|(k, n)| (k, Share::new(n, denominator))).collect()
}

fn sentiment_key(c: &InTextCitation) -> String {
    c.sentiment.map_or(UNANNOTATED, |s| s.as_str()).to_string()
}

fn in_text_report(citations: &[InTextCitation], pair_period: &BTreeMap<(&str, &str), Period>) -> InTextReport {
    let mut without_period = 0;
    let mut by_period: BTreeMap<Period, Vec<&InTextCitation>> = BTreeMap::new();
    for c in citations {
        match pair_period.get(&(c.citing_entity_id.as_str(), c.cited_item_id.as_str())) {
            Some(&p) => by_period.entry(p).or_default().push(c),
            None => without_period += 1,
        }
    }
    let sentiment_rows = |cs: &[&InTextCitation], key: &dyn Fn(&InTextCitation) -> String| {
        let mut rows: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        for c in cs {
            *rows.entry(key(c)).or_default().entry(sentiment_key(c)).or_default() += 1;
        }
        rows.into_iter()
            .map(|(k, sent)| {
                let n = sent.values().sum();
                (k, SentimentRow { share: Share::new(n, cs.len() as u64), sentiment: sent })
            })
            .collect::<BTreeMap<_, _>>()
    };
    let intent_key = |c: &InTextCitation| c.intent.as_ref().map_or(UNANNOTATED.to_string(), |i| i.0.clone());
    let periods = Period::ALL
        .into_iter()
        .map(|p| {
            let cs = by_period.get(&p).map_or(&[][..], |v| &v[..]);
            let mut sent: BTreeMap<String, u64> = BTreeMap::new();
            for c in cs {
                *sent.entry(sentiment_key(c)).or_default() += 1;
            }
            InTextPeriod {
                period: p,
                total: cs.len() as u64,
                sentiment: shares(sent, cs.len() as u64),
                by_intent: sentiment_rows(cs, &intent_key),
                by_section: sentiment_rows(cs, &|c| c.section.as_str().to_string()),
            }
        })
        .collect();
    let placed: Vec<&InTextCitation> = by_period.values().flatten().copied().collect();
    let mut intents: BTreeMap<String, u64> = BTreeMap::new();
    let mut sentiments: BTreeMap<String, u64> = BTreeMap::new();
    for c in &placed {
        *intents.entry(intent_key(c)).or_default() += 1;
        *sentiments.entry(sentiment_key(c)).or_default() += 1;
    }
    InTextReport {
        total: citations.len() as u64,
        without_period,
        periods,
        intent_overall: shares(intents, placed.len() as u64),
        sentiment_overall: shares(sentiments, placed.len() as u64),
    }
}

/// Builds every report table from the snapshot.
pub fn descriptive_report(snapshot: &Snapshot, options: &ReportOptions) -> Result<Report, ReportError> {
    if snapshot.entities.is_empty() {
        return Err(ReportError::EmptySnapshot);
    }
    if snapshot.periods.is_empty() {
        return Err(ReportError::PeriodsMissing);
    }
    let items: BTreeMap<&str, &RetractedPublication> =
        snapshot.items.iter().map(|i| (i.id.as_str(), i)).collect();
    let entities: BTreeMap<&str, &CitingEntity> =
        snapshot.entities.iter().map(|e| (e.id.as_str(), e)).collect();

    let disciplines = period_table(&snapshot.periods, "(citation, discipline) assignments", |c| {
        let d = items.get(c.cited_item_id.as_str()).map_or(&[][..], |i| &i.humanities_disciplines[..]);
        distinct_or(d, NO_DISCIPLINE)
    });
    let areas = period_table(&snapshot.periods, "(citation, subject area) assignments", |c| {
        let a = entities.get(c.citing_entity_id.as_str()).map_or(&[][..], |e| &e.subject_areas[..]);
        distinct_or(a, UNCLASSIFIED)
    });

    let pair_period: BTreeMap<(&str, &str), Period> = snapshot
        .periods
        .iter()
        .map(|c| ((c.citing_entity_id.as_str(), c.cited_item_id.as_str()), c.assignment.period))
        .collect();
    let in_text = in_text_report(&snapshot.citations, &pair_period);

    let mut cited_mention: BTreeSet<&str> = BTreeSet::new();
    for c in &snapshot.citations {
        if c.mentions_retraction == Some(true) {
            cited_mention.insert(c.citing_entity_id.as_str());
        }
    }
    let post_entities: BTreeSet<&str> = snapshot
        .periods
        .iter()
        .filter(|c| c.assignment.period != Period::PPre)
        .map(|c| c.citing_entity_id.as_str())
        .filter(|id| {
            options.mention_denominator == MentionDenominator::AllEntities
                || entities.get(id).map_or(false, |e| e.full_text_available)
        })
        .collect();
    let mentioning = post_entities
        .iter()
        .filter(|id| {
            entities
                .get(*id)
                .and_then(|e| e.mentions_retraction)
                .unwrap_or_else(|| cited_mention.contains(*id))
        })
        .count();

    let unavailable = snapshot.entities.iter().filter(|e| !e.full_text_available).count();

    let fifth_histograms = Period::ALL
        .into_iter()
        .map(|p| {
            let in_p = snapshot.periods.iter().filter(|c| c.assignment.period == p);
            let bins = if p == Period::PRet {
                vec![FifthBin { label: p.label().to_string(), count: in_p.count() as u64 }]
            } else {
                let mut counts = [0u64; 5];
                for c in in_p {
                    if let Some(f) = c.assignment.fifth {
                        counts[f as usize] += 1;
                    }
                }
                Fifth::ALL.iter().map(|f| FifthBin { label: f.label().to_string(), count: counts[*f as usize] }).collect()
            };
            FifthHistogram { period: p, bins }
        })
        .collect();

    let totals = Totals {
        retracted_items: snapshot.items.len() as u64,
        cited_items: snapshot.periods.iter().map(|c| c.cited_item_id.as_str()).collect::<BTreeSet<_>>().len() as u64,
        citing_entities: snapshot.entities.len() as u64,
        citations: snapshot.periods.len() as u64,
        in_text_citations: snapshot.citations.len() as u64,
        per_period: Period::ALL
            .into_iter()
            .map(|p| {
                let n = snapshot.periods.iter().filter(|c| c.assignment.period == p).count() as u64;
                (p.label().to_string(), n)
            })
            .collect(),
    };

    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION,
        totals,
        citing_by_period_and_discipline: disciplines,
        subject_area_distribution_per_period: areas,
        in_text_by_intent_section_sentiment: in_text,
        retraction_mention_rate: MentionRate {
            denominator_policy: options.mention_denominator,
            share: Share::new(mentioning as u64, post_entities.len() as u64),
        },
        fulltext_unavailable_rate: Share::new(unavailable as u64, snapshot.entities.len() as u64),
        fifth_histograms,
    })
}

/// Years-after-retraction series over the snapshot's citations.
pub fn citation_series(snapshot: &Snapshot) -> CitationSeries {
    let items: BTreeMap<&str, &RetractedPublication> =
        snapshot.items.iter().map(|i| (i.id.as_str(), i)).collect();
    let entries: Vec<SeriesEntry> = snapshot
        .periods
        .iter()
        .map(|c| SeriesEntry {
            citing_year: c.citing_year,
            cited_id: c.cited_item_id.clone(),
            pub_year: c.pub_year,
            retraction_year: c.retraction_year,
            disciplines: items
                .get(c.cited_item_id.as_str())
                .map(|i| i.humanities_disciplines.clone())
                .filter(|d| !d.is_empty())
                .unwrap_or_else(|| vec![NO_DISCIPLINE.to_string()]),
        })
        .collect();
    build_series(&entries)
}

/// `period,fifth,count`.
pub fn fifths_csv(report: &Report) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["period", "fifth", "count"])?;
    for h in &report.fifth_histograms {
        for b in &h.bins {
            w.write_record([h.period.label(), b.label.as_str(), &b.count.to_string()])?;
        }
    }
    w.into_inner().map_err(|e| ReportError::Io(e.into_error()))
}

/// Topic outputs included in a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsExport {
    pub bundle: TopicBundle,
    pub grouped: Vec<GroupedTopicTable>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicsSection {
    pub present: bool,
    pub k: Option<usize>,
    pub model_hash: Option<String>,
    pub corpus_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub report_schema_version: u32,
    pub mention_denominator: MentionDenominator,
    pub topics: TopicsSection,
    pub artifacts: Vec<Artifact>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, ReportError> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Bundle contents as `(relative path, bytes)`, manifest last.
pub fn bundle_files(
    report: &Report,
    series: &CitationSeries,
    topics: Option<&TopicsExport>,
) -> Result<Vec<(String, Vec<u8>)>, ReportError> {
    let mut files = vec![("report.json".to_string(), json_bytes(report)?)];
    if let Some(t) = topics {
        files.push(("topics/topic_map.json".into(), json_bytes(&t.bundle)?));
        files.push(("topics/grouped_topics.json".into(), json_bytes(&t.grouped)?));
    }
    let mut series_csv = Vec::new();
    series.write_csv(&mut series_csv)?;
    files.push(("series/years_after_retraction.csv".into(), series_csv));
    files.push(("series/fifths.csv".into(), fifths_csv(report)?));
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        report_schema_version: report.schema_version,
        mention_denominator: report.retraction_mention_rate.denominator_policy,
        topics: TopicsSection {
            present: topics.is_some(),
            k: topics.map(|t| t.bundle.k),
            model_hash: topics.map(|t| t.bundle.model_hash.clone()),
            corpus_hash: topics.map(|t| t.bundle.corpus_hash.clone()),
        },
        artifacts: files
            .iter()
            .map(|(p, b)| Artifact { path: p.clone(), sha256: sha256_hex(b), bytes: b.len() as u64 })
            .collect(),
    };
    files.push((MANIFEST_FILE.into(), json_bytes(&manifest)?));
    Ok(files)
}

fn sibling(dest: &Path, tag: &str) -> PathBuf {
    let name = dest.file_name().map_or_else(|| "bundle".into(), |n| n.to_string_lossy().into_owned());
    dest.with_file_name(format!(".{name}.{tag}-{}", std::process::id()))
}

/// Writes the bundle into a temporary sibling directory and swaps it into
/// place, so `destination` is either the old bundle or the complete new one.
pub fn export_visualization(
    report: &Report,
    series: &CitationSeries,
    topics: Option<&TopicsExport>,
    destination: &Path,
) -> Result<Manifest, ReportError> {
    let files = bundle_files(report, series, topics)?;
    let tmp = sibling(destination, "tmp");
    let _ = fs::remove_dir_all(&tmp);
    fs::create_dir(&tmp).map_err(|e| ReportError::Destination(destination.display().to_string(), e))?;
    let write_all = || -> Result<(), ReportError> {
        for (rel, bytes) in &files {
            let p = tmp.join(rel);
            if let Some(parent) = p.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(p, bytes)?;
        }
        Ok(())
    };
    if let Err(e) = write_all() {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    let old = sibling(destination, "old");
    if destination.exists() {
        let _ = fs::remove_dir_all(&old);
        fs::rename(destination, &old)?;
    }
    fs::rename(&tmp, destination)?;
    let _ = fs::remove_dir_all(&old);
    let manifest = &files.last().expect("manifest present").1;
    Ok(serde_json::from_slice(manifest)?)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Minimal horizontal bar chart for headless use.
pub fn svg_bar_chart(title: &str, bars: &[(String, f64)]) -> String {
    let (w, row, left, top) = (640.0, 22.0, 220.0, 40.0);
    let max = bars.iter().map(|b| b.1).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let h = top + row * bars.len() as f64 + 20.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(title));
    for (i, (label, v)) in bars.iter().enumerate() {
        let y = top + row * i as f64;
        let bw = (w - left - 60.0) * v / max;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 6.0, y + 14.0, escape(label));
        let _ = writeln!(s, r##"<rect x="{left}" y="{}" width="{bw:.2}" height="{}" fill="#4a6fa5"/>"##, y + 3.0, row - 6.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}">{v:.2}</text>"#, left + bw + 4.0, y + 14.0);
    }
    s.push_str("</svg>\n");
    s
}

/// One SVG per period table and per fifth histogram, keyed by file name.
pub fn report_charts(report: &Report) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (name, table) in [
        ("disciplines", &report.citing_by_period_and_discipline),
        ("subject_areas", &report.subject_area_distribution_per_period),
    ] {
        for p in &table.periods {
            let bars: Vec<(String, f64)> = p.rows.iter().map(|(k, s)| (k.clone(), s.percent)).collect();
            out.push((format!("{name}_{}.svg", p.period.label()), svg_bar_chart(&format!("{name}, {} (%)", p.period), &bars)));
        }
    }
    let bars: Vec<(String, f64)> = report
        .fifth_histograms
        .iter()
        .flat_map(|h| h.bins.iter().map(move |b| (format!("{} {}", h.period, b.label), b.count as f64)))
        .collect();
    out.push(("fifths.svg".into(), svg_bar_chart("citations per fifth", &bars)));
    out
}
