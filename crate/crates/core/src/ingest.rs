//! Retraction record ingestion: tabular parsing, humanities filtering,
//! exclusion lists and summary tables.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doi::Doi;
use crate::humanities::{discipline_head, HumanitiesVocabulary, SubjectSource, SubjectTag};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("schema error: required column `{0}` not found in header")]
    MissingColumn(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid column mapping: {0}")]
    Mapping(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemType {
    Article,
    BookChapter,
    CommentaryEditorial,
    Other,
}

impl ItemType {
    /// Maps a retraction-database type label onto the four reporting buckets.
    /// Unrecognised labels (letters, case reports, ...) fall into `Other`.
    pub fn from_label(label: &str) -> ItemType {
        let l = label.trim().trim_end_matches(';').to_lowercase();
        match l.as_str() {
            "article" => return ItemType::Article,
            "book_chapter" => return ItemType::BookChapter,
            "commentary_editorial" => return ItemType::CommentaryEditorial,
            "other" => return ItemType::Other,
            _ => {}
        }
        if l.contains("research article")
            || l.contains("conference abstract")
            || l.contains("conference paper")
            || l.contains("review article")
        {
            ItemType::Article
        } else if l.contains("book chapter") || l.contains("book/chapter") || l.starts_with("book") {
            ItemType::BookChapter
        } else if l.contains("commentary") || l.contains("editorial") {
            ItemType::CommentaryEditorial
        } else {
            ItemType::Other
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ItemType::Article => "article",
            ItemType::BookChapter => "book_chapter",
            ItemType::CommentaryEditorial => "commentary_editorial",
            ItemType::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetractedPublication {
    pub id: String,
    pub doi: Option<Doi>,
    pub title: String,
    pub pub_year: i32,
    pub retraction_year: i32,
    pub subjects: Vec<SubjectTag>,
    pub humanities_disciplines: Vec<String>,
    pub reasons: Vec<String>,
    pub item_type: ItemType,
    #[serde(default)]
    pub venue: Option<String>,
    #[serde(default)]
    pub venue_ids: Vec<String>,
    #[serde(default)]
    pub excluded: bool,
    #[serde(default)]
    pub exclusion_rationale: Option<String>,
}

/// Maps canonical fields onto header names of the input table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    pub id: String,
    #[serde(default)]
    pub doi: Option<String>,
    pub title: String,
    pub pub_year: String,
    pub retraction_year: String,
    pub subjects: String,
    pub reasons: String,
    pub item_type: String,
    #[serde(default)]
    pub venue: Option<String>,
    #[serde(default)]
    pub venue_ids: Option<String>,
    /// Separator inside multi-valued cells.
    #[serde(default = "default_multi_delimiter")]
    pub multi_value_delimiter: String,
    /// Field separator; `None` picks tab for `.tsv` files and comma otherwise.
    #[serde(default)]
    pub field_delimiter: Option<char>,
}

fn default_multi_delimiter() -> String {
    ";".to_string()
}

impl ColumnMapping {
    /// The toolkit's own CSV layout, also used when writing records back out.
    pub fn canonical() -> ColumnMapping {
        ColumnMapping {
            id: "id".into(),
            doi: Some("doi".into()),
            title: "title".into(),
            pub_year: "pub_year".into(),
            retraction_year: "retraction_year".into(),
            subjects: "subjects".into(),
            reasons: "reasons".into(),
            item_type: "item_type".into(),
            venue: Some("venue".into()),
            venue_ids: Some("venue_ids".into()),
            multi_value_delimiter: ";".into(),
            field_delimiter: Some(','),
        }
    }

    /// Adapter profile for Retraction-Watch-style exports.
    pub fn retraction_watch() -> ColumnMapping {
        ColumnMapping {
            id: "Record ID".into(),
            doi: Some("OriginalPaperDOI".into()),
            title: "Title".into(),
            pub_year: "OriginalPaperDate".into(),
            retraction_year: "RetractionDate".into(),
            subjects: "Subject".into(),
            reasons: "Reason".into(),
            item_type: "ArticleType".into(),
            venue: Some("Journal".into()),
            venue_ids: None,
            multi_value_delimiter: ";".into(),
            field_delimiter: Some(','),
        }
    }

    pub fn from_json(text: &str) -> Result<ColumnMapping, IngestError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A row that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReject {
    /// 1-based data row number (header excluded).
    pub row: usize,
    pub id: Option<String>,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub records: Vec<RetractedPublication>,
    pub rejects: Vec<RowReject>,
}

struct Columns {
    id: usize,
    doi: Option<usize>,
    title: usize,
    pub_year: usize,
    retraction_year: usize,
    subjects: usize,
    reasons: usize,
    item_type: usize,
    venue: Option<usize>,
    venue_ids: Option<usize>,
}

fn locate(headers: &csv::StringRecord, mapping: &ColumnMapping) -> Result<Columns, IngestError> {
    let find = |name: &str| headers.iter().position(|h| h.trim() == name.trim());
    let required = |name: &str| find(name).ok_or_else(|| IngestError::MissingColumn(name.to_string()));
    let optional = |name: &Option<String>| -> Result<Option<usize>, IngestError> {
        match name {
            Some(n) => required(n).map(Some),
            None => Ok(None),
        }
    };
    Ok(Columns {
        id: required(&mapping.id)?,
        doi: optional(&mapping.doi)?,
        title: required(&mapping.title)?,
        pub_year: required(&mapping.pub_year)?,
        retraction_year: required(&mapping.retraction_year)?,
        subjects: required(&mapping.subjects)?,
        reasons: required(&mapping.reasons)?,
        item_type: required(&mapping.item_type)?,
        venue: optional(&mapping.venue)?,
        venue_ids: optional(&mapping.venue_ids)?,
    })
}

/// Parses a year cell: a bare integer, or the single four-digit year inside
/// a date such as `2006-05-12` or `5/12/2006 0:00`.
pub fn parse_year(cell: &str) -> Option<i32> {
    let t = cell.trim();
    if let Ok(y) = t.parse::<i32>() {
        return (1000..=9999).contains(&y).then_some(y);
    }
    let bytes = t.as_bytes();
    let mut found = None;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i - start == 4 {
                if found.is_some() {
                    return None;
                }
                found = t[start..i].parse::<i32>().ok();
            }
        } else {
            i += 1;
        }
    }
    found
}

fn split_multi(cell: &str, delimiter: &str) -> Vec<String> {
    cell.split(delimiter)
        .map(|s| s.trim().trim_start_matches('+').trim())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Builds the subject tags and humanities disciplines for one subjects cell.
pub fn subjects_from_cell(
    cell: &str,
    delimiter: &str,
    vocabulary: &HumanitiesVocabulary,
) -> (Vec<SubjectTag>, Vec<String>) {
    let mut tags: Vec<SubjectTag> = Vec::new();
    let mut disciplines: Vec<String> = Vec::new();
    for label in split_multi(cell, delimiter) {
        let tag = vocabulary.tag(&label, SubjectSource::RetractionDb);
        if tags.iter().any(|t| t.label == tag.label && t.source == tag.source) {
            continue;
        }
        if tag.is_humanities {
            let d = discipline_head(&tag.label);
            if !d.is_empty() && !disciplines.contains(&d) {
                disciplines.push(d);
            }
        }
        tags.push(tag);
    }
    (tags, disciplines)
}

/// Parses retraction rows from delimited text.
///
/// A missing required column is fatal; row-level problems (bad years, year
/// order, duplicate or empty ids) are collected in `rejects` and the row is
/// skipped.
pub fn parse_retraction_records<R: Read>(
    input: R,
    mapping: &ColumnMapping,
    vocabulary: &HumanitiesVocabulary,
) -> Result<ParseOutcome, IngestError> {
    let delimiter = mapping.field_delimiter.unwrap_or(',');
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter as u8)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let cols = locate(&headers, mapping)?;
    let multi = mapping.multi_value_delimiter.as_str();

    let mut outcome = ParseOutcome::default();
    let mut seen: HashSet<String> = HashSet::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                outcome.rejects.push(RowReject { row: row_no, id: None, error: e.to_string() });
                continue;
            }
        };
        let cell = |idx: usize| row.get(idx).unwrap_or("").to_string();
        let id = cell(cols.id).trim().to_string();
        let reject = |error: String| RowReject {
            row: row_no,
            id: (!id.is_empty()).then(|| id.clone()),
            error,
        };
        if id.is_empty() {
            outcome.rejects.push(reject("empty id".into()));
            continue;
        }
        if seen.contains(&id) {
            outcome.rejects.push(reject(format!("duplicate id `{id}`")));
            continue;
        }
        let Some(pub_year) = parse_year(&cell(cols.pub_year)) else {
            outcome.rejects.push(reject(format!("unparseable publication year `{}`", cell(cols.pub_year))));
            continue;
        };
        let Some(retraction_year) = parse_year(&cell(cols.retraction_year)) else {
            outcome.rejects.push(reject(format!(
                "unparseable retraction year `{}`",
                cell(cols.retraction_year)
            )));
            continue;
        };
        if retraction_year < pub_year {
            outcome.rejects.push(reject(format!(
                "year order: retraction year {retraction_year} precedes publication year {pub_year}"
            )));
            continue;
        }
        let (subjects, humanities_disciplines) = subjects_from_cell(&cell(cols.subjects), multi, vocabulary);
        let item_type = split_multi(&cell(cols.item_type), multi)
            .first()
            .map(|t| ItemType::from_label(t))
            .unwrap_or(ItemType::Other);
        let venue = cols.venue.map(cell).map(|v| v.trim().to_string()).filter(|v| !v.is_empty());
        let venue_ids = cols.venue_ids.map(|c| split_multi(&cell(c), multi)).unwrap_or_default();
        seen.insert(id.clone());
        outcome.records.push(RetractedPublication {
            id,
            doi: cols.doi.and_then(|c| Doi::parse(&cell(c))),
            title: cell(cols.title).trim().to_string(),
            pub_year,
            retraction_year,
            subjects,
            humanities_disciplines,
            reasons: split_multi(&cell(cols.reasons), multi),
            item_type,
            venue,
            venue_ids,
            excluded: false,
            exclusion_rationale: None,
        });
    }
    Ok(outcome)
}

/// Opens `path` and parses it, using a tab separator for `.tsv` files unless
/// the mapping says otherwise.
pub fn parse_retraction_file(
    path: &Path,
    mapping: &ColumnMapping,
    vocabulary: &HumanitiesVocabulary,
) -> Result<ParseOutcome, IngestError> {
    let mut mapping = mapping.clone();
    if mapping.field_delimiter.is_none() {
        let tsv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv"));
        mapping.field_delimiter = Some(if tsv { '\t' } else { ',' });
    }
    let file = std::fs::File::open(path)?;
    parse_retraction_records(file, &mapping, vocabulary)
}

/// Writes records in the canonical CSV layout ([`ColumnMapping::canonical`]).
pub fn write_canonical_csv<W: Write>(records: &[RetractedPublication], out: W) -> Result<(), IngestError> {
    let m = ColumnMapping::canonical();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        &m.id,
        m.doi.as_deref().unwrap(),
        &m.title,
        &m.pub_year,
        &m.retraction_year,
        &m.subjects,
        &m.reasons,
        &m.item_type,
        m.venue.as_deref().unwrap(),
        m.venue_ids.as_deref().unwrap(),
    ])?;
    for r in records {
        let subjects: Vec<&str> = r
            .subjects
            .iter()
            .filter(|s| s.source == SubjectSource::RetractionDb)
            .map(|s| s.label.as_str())
            .collect();
        w.write_record([
            r.id.clone(),
            r.doi.as_ref().map(|d| d.to_string()).unwrap_or_default(),
            r.title.clone(),
            r.pub_year.to_string(),
            r.retraction_year.to_string(),
            subjects.join(";"),
            r.reasons.join(";"),
            r.item_type.as_str().to_string(),
            r.venue.clone().unwrap_or_default(),
            r.venue_ids.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Keeps records carrying at least one humanities discipline.
pub fn filter_humanities(records: &[RetractedPublication]) -> Vec<RetractedPublication> {
    records
        .iter()
        .filter(|r| !r.humanities_disciplines.is_empty())
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionEntry {
    pub id: String,
    pub rationale: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionList {
    pub entries: Vec<ExclusionEntry>,
}

impl ExclusionList {
    pub fn new(entries: Vec<ExclusionEntry>) -> Self {
        ExclusionList { entries }
    }

    /// Reads an `id,rationale` CSV with a header row.
    pub fn from_csv<R: Read>(input: R) -> Result<ExclusionList, IngestError> {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let headers = reader.headers()?.clone();
        let id_col = headers
            .iter()
            .position(|h| h.trim() == "id")
            .ok_or_else(|| IngestError::MissingColumn("id".into()))?;
        let rationale_col = headers.iter().position(|h| h.trim() == "rationale");
        let mut entries = Vec::new();
        for row in reader.records() {
            let row = row?;
            let id = row.get(id_col).unwrap_or("").trim().to_string();
            if id.is_empty() {
                continue;
            }
            let rationale = rationale_col
                .and_then(|c| row.get(c))
                .unwrap_or("")
                .trim()
                .to_string();
            entries.push(ExclusionEntry { id, rationale });
        }
        Ok(ExclusionList { entries })
    }

    pub fn union(&self, other: &ExclusionList) -> ExclusionList {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        ExclusionList { entries }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionOutcome {
    /// All input records, excluded ones flagged with their rationale.
    pub records: Vec<RetractedPublication>,
    /// Entries naming ids that are not in the record set.
    pub warnings: Vec<String>,
}

impl ExclusionOutcome {
    pub fn selected(&self) -> impl Iterator<Item = &RetractedPublication> {
        self.records.iter().filter(|r| !r.excluded)
    }

    pub fn selected_ids(&self) -> BTreeSet<String> {
        self.selected().map(|r| r.id.clone()).collect()
    }
}

/// Flags listed records as excluded. Records are never deleted; an already
/// excluded record keeps its first rationale. Unknown ids produce warnings.
pub fn apply_exclusions(records: &[RetractedPublication], list: &ExclusionList) -> ExclusionOutcome {
    let mut records = records.to_vec();
    let mut warnings = Vec::new();
    for entry in &list.entries {
        match records.iter_mut().find(|r| r.id == entry.id) {
            Some(r) => {
                if !r.excluded {
                    r.excluded = true;
                    r.exclusion_rationale = Some(entry.rationale.clone());
                }
            }
            None => {
                let msg = format!("exclusion list names unknown id `{}`; entry ignored", entry.id);
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
    }
    ExclusionOutcome { records, warnings }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetractionSummary {
    pub total: u64,
    pub per_year: BTreeMap<i32, u64>,
    pub per_discipline: BTreeMap<String, u64>,
    pub per_reason: BTreeMap<String, u64>,
    pub per_type: BTreeMap<ItemType, u64>,
}

/// Frequency tables by retraction year, discipline, reason and item type.
/// Disciplines and reasons are multi-label: a record counts once in each of
/// its (distinct) buckets.
pub fn summarize_retractions<'a, I>(records: I) -> RetractionSummary
where
    I: IntoIterator<Item = &'a RetractedPublication>,
{
    let mut s = RetractionSummary::default();
    for r in records {
        s.total += 1;
        *s.per_year.entry(r.retraction_year).or_default() += 1;
        *s.per_type.entry(r.item_type).or_default() += 1;
        let disciplines: BTreeSet<&String> = r.humanities_disciplines.iter().collect();
        for d in disciplines {
            *s.per_discipline.entry(d.clone()).or_default() += 1;
        }
        let reasons: BTreeSet<&String> = r.reasons.iter().collect();
        for reason in reasons {
            *s.per_reason.entry(reason.clone()).or_default() += 1;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ParseOutcome {
        parse_retraction_records(
            text.as_bytes(),
            &ColumnMapping::canonical(),
            &HumanitiesVocabulary::default(),
        )
        .unwrap()
    }

    const HEADER: &str = "id,doi,title,pub_year,retraction_year,subjects,reasons,item_type,venue,venue_ids\n";

    #[test]
    fn splits_hum_subjects_into_disciplines() {
        let out = parse(&format!(
            "{HEADER}r1,https://doi.org/10.1/ABC,T,2005,2010,(HUM) History;(HUM) Arts,Plagiarism,Research Article,,\n"
        ));
        assert!(out.rejects.is_empty());
        let r = &out.records[0];
        assert_eq!(r.humanities_disciplines, vec!["history", "arts"]);
        assert_eq!(r.doi.as_ref().unwrap().as_str(), "10.1/abc");
        assert_eq!(r.item_type, ItemType::Article);
    }

    #[test]
    fn year_order_violation_is_rejected() {
        let out = parse(&format!("{HEADER}r1,,T,2005,2001,(HUM) Arts,x,article,,\n"));
        assert!(out.records.is_empty());
        assert_eq!(out.rejects.len(), 1);
        assert!(out.rejects[0].error.contains("year order"));
        assert_eq!(out.rejects[0].row, 1);
    }

    #[test]
    fn missing_column_names_the_column() {
        let err = parse_retraction_records(
            "id,title\n".as_bytes(),
            &ColumnMapping::canonical(),
            &HumanitiesVocabulary::default(),
        )
        .unwrap_err();
        match err {
            IngestError::MissingColumn(c) => assert_eq!(c, "doi"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn year_cells() {
        assert_eq!(parse_year("2006"), Some(2006));
        assert_eq!(parse_year("5/12/2006 0:00"), Some(2006));
        assert_eq!(parse_year("2006-05-12"), Some(2006));
        assert_eq!(parse_year("abc"), None);
        assert_eq!(parse_year("2006/2007"), None);
    }

    #[test]
    fn item_type_buckets() {
        assert_eq!(ItemType::from_label("Conference Abstract/Paper"), ItemType::Article);
        assert_eq!(ItemType::from_label("Book Chapter/Reference"), ItemType::BookChapter);
        assert_eq!(ItemType::from_label("Commentary/Editorial"), ItemType::CommentaryEditorial);
        assert_eq!(ItemType::from_label("Letter"), ItemType::Other);
        assert_eq!(ItemType::from_label("Case Report"), ItemType::Other);
    }

    fn rec(id: &str, year: i32, disciplines: &[&str], reasons: &[&str]) -> RetractedPublication {
        RetractedPublication {
            id: id.into(),
            doi: None,
            title: id.into(),
            pub_year: year - 1,
            retraction_year: year,
            subjects: vec![],
            humanities_disciplines: disciplines.iter().map(|s| s.to_string()).collect(),
            reasons: reasons.iter().map(|s| s.to_string()).collect(),
            item_type: ItemType::Article,
            venue: None,
            venue_ids: vec![],
            excluded: false,
            exclusion_rationale: None,
        }
    }

    #[test]
    fn humanities_filter() {
        let rs = vec![rec("a", 2010, &["history"], &[]), rec("b", 2010, &[], &[])];
        let kept = filter_humanities(&rs);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "a");
    }

    #[test]
    fn exclusions_flag_and_warn() {
        let rs = vec![rec("x", 2010, &["arts"], &[]), rec("y", 2010, &["arts"], &[])];
        let list = ExclusionList::new(vec![
            ExclusionEntry { id: "x".into(), rationale: "outlier".into() },
            ExclusionEntry { id: "zz".into(), rationale: "?".into() },
        ]);
        let out = apply_exclusions(&rs, &list);
        assert_eq!(out.selected_ids().into_iter().collect::<Vec<_>>(), vec!["y"]);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].exclusion_rationale.as_deref(), Some("outlier"));
        assert_eq!(out.warnings.len(), 1);

        let identity = apply_exclusions(&rs, &ExclusionList::default());
        assert_eq!(identity.records, rs);
    }

    #[test]
    fn summary_counts() {
        let rs = vec![
            rec("a", 2010, &["history"], &["plagiarism", "duplication"]),
            rec("b", 2010, &["history", "arts"], &["plagiarism"]),
            rec("c", 2012, &["arts"], &[]),
        ];
        let s = summarize_retractions(&rs);
        assert_eq!(s.per_year, BTreeMap::from([(2010, 2), (2012, 1)]));
        assert_eq!(s.per_reason["plagiarism"], 2);
        assert_eq!(s.per_reason["duplication"], 1);
        assert_eq!(s.per_discipline["arts"], 2);
        assert_eq!(s.per_type[&ItemType::Article], 3);
        assert_eq!(s.total, 3);
    }
}
