use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{AnnotationError, CitoFunction, InTextCitation, Sentiment};

/// One line of the append-only log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationEvent {
    pub seq: u64,
    pub citation_id: String,
    pub sentiment: Sentiment,
    pub intent: CitoFunction,
    pub mentions_retraction: bool,
    pub annotator: String,
    pub timestamp: String,
}

/// Latest event per citation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationState {
    pub latest: BTreeMap<String, AnnotationEvent>,
}

impl AnnotationState {
    pub fn apply(&mut self, event: &AnnotationEvent) {
        self.latest.insert(event.citation_id.clone(), event.clone());
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("state serializes")
    }
}

/// Folds events in log order; later events for a citation supersede earlier ones.
pub fn replay(events: &[AnnotationEvent]) -> AnnotationState {
    let mut s = AnnotationState::default();
    for e in events {
        s.apply(e);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, message: impl Into<String>) -> FieldError {
        FieldError { field: field.into(), message: message.into() }
    }
}

/// Unvalidated annotation fields as they arrive from the API or a CSV row.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationInput {
    pub sentiment: Option<String>,
    pub intent: Option<String>,
    pub mentions_retraction: Option<bool>,
    pub annotator: Option<String>,
}

pub(super) struct Valid {
    sentiment: Sentiment,
    intent: CitoFunction,
    mentions_retraction: bool,
    annotator: String,
}

impl AnnotationInput {
    /// Reads a JSON object, reporting wrongly typed fields instead of failing
    /// on the first one.
    pub fn from_value(v: &Value) -> Result<AnnotationInput, Vec<FieldError>> {
        let Some(obj) = v.as_object() else {
            return Err(vec![FieldError::new("body", "expected a JSON object")]);
        };
        let mut errors = Vec::new();
        let mut text = |name: &str| match obj.get(name) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                errors.push(FieldError::new(name, "expected a string"));
                None
            }
        };
        let sentiment = text("sentiment");
        let intent = text("intent");
        let annotator = text("annotator");
        let mentions_retraction = match obj.get("mentions_retraction") {
            None | Some(Value::Null) => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(_) => {
                errors.push(FieldError::new("mentions_retraction", "expected true or false"));
                None
            }
        };
        for key in obj.keys() {
            if !matches!(key.as_str(), "sentiment" | "intent" | "mentions_retraction" | "annotator") {
                errors.push(FieldError::new(key, "unknown field"));
            }
        }
        if errors.is_empty() {
            Ok(AnnotationInput { sentiment, intent, mentions_retraction, annotator })
        } else {
            Err(errors)
        }
    }

    pub(super) fn validate(&self, vocabulary: &BTreeSet<String>) -> Result<Valid, Vec<FieldError>> {
        let mut errors = Vec::new();
        let sentiment = match self.sentiment.as_deref().map(Sentiment::parse) {
            Some(Some(s)) => Some(s),
            Some(None) => {
                errors.push(FieldError::new("sentiment", format!(
                    "`{}` is not one of positive, negative, neutral",
                    self.sentiment.as_deref().unwrap_or_default()
                )));
                None
            }
            None => {
                errors.push(FieldError::new("sentiment", "required"));
                None
            }
        };
        let intent = match self.intent.as_deref().map(str::trim) {
            Some(i) if vocabulary.contains(i) => Some(CitoFunction(i.to_string())),
            Some(i) => {
                errors.push(FieldError::new("intent", format!("`{i}` is not a configured CiTO function")));
                None
            }
            None => {
                errors.push(FieldError::new("intent", "required"));
                None
            }
        };
        if self.mentions_retraction.is_none() {
            errors.push(FieldError::new("mentions_retraction", "required"));
        }
        let annotator = self.annotator.as_deref().map(str::trim).unwrap_or_default();
        if annotator.is_empty() {
            errors.push(FieldError::new("annotator", "required"));
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(Valid {
            sentiment: sentiment.unwrap(),
            intent: intent.unwrap(),
            mentions_retraction: self.mentions_retraction.unwrap(),
            annotator: annotator.to_string(),
        })
    }
}

/// Exclusive writer lock, released on drop.
#[derive(Debug)]
pub struct StoreLock {
    path: PathBuf,
}

impl StoreLock {
    pub fn acquire(log_path: &Path) -> Result<StoreLock, AnnotationError> {
        let mut name = log_path.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(StoreLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(AnnotationError::Locked(path.display().to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

/// Reads every event of a log; a missing file is an empty log.
pub fn read_log(path: &Path) -> Result<Vec<AnnotationEvent>, AnnotationError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(vec![]),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line)
            .map_err(|err| AnnotationError::CorruptLog { line: i + 1, message: err.to_string() })?;
        out.push(e);
    }
    Ok(out)
}

/// Reads in-text citations from a JSON array or JSON lines.
pub fn read_citations(path: &Path) -> Result<Vec<InTextCitation>, AnnotationError> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(AnnotationError::from))
        .collect()
}

/// Append-only annotation store: one writer, state rebuilt from the log on open.
pub struct AnnotationStore {
    log_path: PathBuf,
    file: File,
    _lock: StoreLock,
    citations: BTreeMap<String, InTextCitation>,
    vocabulary: BTreeSet<String>,
    events: Vec<AnnotationEvent>,
    state: AnnotationState,
}

impl AnnotationStore {
    pub fn open(
        log_path: &Path,
        citations: Vec<InTextCitation>,
        vocabulary: BTreeSet<String>,
    ) -> Result<AnnotationStore, AnnotationError> {
        let lock = StoreLock::acquire(log_path)?;
        let events = read_log(log_path)?;
        let state = replay(&events);
        let file = OpenOptions::new().create(true).append(true).open(log_path)?;
        Ok(AnnotationStore {
            log_path: log_path.to_path_buf(),
            file,
            _lock: lock,
            citations: citations.into_iter().map(|c| (c.id.clone(), c)).collect(),
            vocabulary,
            events,
            state,
        })
    }

    pub fn log_path(&self) -> &Path {
        &self.log_path
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    /// Validates and appends an annotation; `timestamp` defaults to now (UTC).
    pub fn record(
        &mut self,
        citation_id: &str,
        input: &AnnotationInput,
        timestamp: Option<String>,
    ) -> Result<AnnotationEvent, AnnotationError> {
        if !self.citations.contains_key(citation_id) {
            return Err(AnnotationError::UnknownCitation(citation_id.to_string()));
        }
        let v = input.validate(&self.vocabulary).map_err(AnnotationError::Validation)?;
        let event = AnnotationEvent {
            seq: self.events.last().map_or(1, |e| e.seq + 1),
            citation_id: citation_id.to_string(),
            sentiment: v.sentiment,
            intent: v.intent,
            mentions_retraction: v.mentions_retraction,
            annotator: v.annotator,
            timestamp: timestamp.unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)),
        };
        let mut line = serde_json::to_vec(&event)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.state.apply(&event);
        self.events.push(event.clone());
        Ok(event)
    }

    pub fn state(&self) -> &AnnotationState {
        &self.state
    }

    pub fn events(&self) -> &[AnnotationEvent] {
        &self.events
    }

    pub fn history(&self, citation_id: &str) -> Vec<&AnnotationEvent> {
        self.events.iter().filter(|e| e.citation_id == citation_id).collect()
    }

    /// The citation with its latest annotation applied.
    pub fn citation(&self, id: &str) -> Option<InTextCitation> {
        self.citations.get(id).map(|c| c.with_annotation(self.state.latest.get(id)))
    }

    pub fn citations(&self) -> Vec<InTextCitation> {
        self.citations.values().map(|c| c.with_annotation(self.state.latest.get(&c.id))).collect()
    }

    /// Citations with no annotation yet, by id.
    pub fn queue(&self) -> Vec<&InTextCitation> {
        self.citations.values().filter(|c| !self.state.latest.contains_key(&c.id) && !c.is_annotated()).collect()
    }
}

const CSV_COLUMNS: [&str; 9] = [
    "citation_id",
    "citing_entity_id",
    "cited_item_id",
    "section",
    "sentiment",
    "intent",
    "mentions_retraction",
    "annotator",
    "annotated_at",
];

/// Writes one row per citation; unannotated fields are left blank.
pub fn export_csv<W: Write>(citations: &[InTextCitation], out: W) -> Result<(), AnnotationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for c in citations {
        w.write_record([
            c.id.as_str(),
            &c.citing_entity_id,
            &c.cited_item_id,
            c.section.as_str(),
            c.sentiment.map_or("", Sentiment::as_str),
            c.intent.as_ref().map_or("", CitoFunction::as_str),
            match c.mentions_retraction {
                Some(true) => "yes",
                Some(false) => "no",
                None => "",
            },
            c.annotator.as_deref().unwrap_or(""),
            c.annotated_at.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Records every row of a CSV with a non-empty `sentiment`. `annotator`
/// fills rows whose own annotator cell is blank or absent.
pub fn import_csv<R: Read>(
    store: &mut AnnotationStore,
    input: R,
    annotator: Option<&str>,
) -> Result<usize, AnnotationError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(id_col), Some(sent_col)) = (col("citation_id"), col("sentiment")) else {
        return Err(AnnotationError::Validation(vec![FieldError::new(
            "header",
            "CSV needs citation_id and sentiment columns",
        )]));
    };
    let (intent_col, mention_col, ann_col, ts_col) =
        (col("intent"), col("mentions_retraction"), col("annotator"), col("annotated_at"));
    let mut n = 0;
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let get = |c: Option<usize>| c.and_then(|c| row.get(c)).filter(|s| !s.is_empty());
        let Some(sentiment) = get(Some(sent_col)) else { continue };
        let mentions = match get(mention_col).map(str::to_lowercase).as_deref() {
            Some("yes" | "true" | "1") => Some(true),
            Some("no" | "false" | "0") => Some(false),
            _ => None,
        };
        let input = AnnotationInput {
            sentiment: Some(sentiment.to_string()),
            intent: get(intent_col).map(String::from),
            mentions_retraction: mentions,
            annotator: get(ann_col).or(annotator).map(String::from),
        };
        let id = row.get(id_col).unwrap_or_default();
        store.record(id, &input, get(ts_col).map(String::from)).map_err(|e| match e {
            AnnotationError::Validation(mut errs) => {
                for err in &mut errs {
                    err.field = format!("row {} {}", i + 2, err.field);
                }
                AnnotationError::Validation(errs)
            }
            other => other,
        })?;
        n += 1;
    }
    Ok(n)
}
