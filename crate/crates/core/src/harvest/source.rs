//! Citation source adapters.
//!
//! Two payload shapes are understood:
//!
//! - `coci`: an array of objects with `citing`, `cited` and `creation`
//!   fields, as served by the OpenCitations COCI REST API.
//! - `generic`: an array of `{ "id", "doi"?, "title"?, "year"? }` objects for
//!   sources that identify citing works by a local id (the role MAG played).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CitationLink, CitedItem, DiskCache, HarvestError, RetryPolicy, TokenBucket};
use crate::doi::Doi;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadFormat {
    Coci,
    Generic,
}

pub trait CitationSource: Send + Sync {
    fn name(&self) -> &str;
    fn format(&self) -> PayloadFormat;
    /// Raw payload for `doi`; `None` when the source has nothing (404, empty).
    fn fetch_raw(&self, doi: &Doi) -> Result<Option<Vec<u8>>, HarvestError>;
}

/// Offline source backed by a JSON file mapping DOI → payload.
#[derive(Debug, Clone)]
pub struct FixtureSource {
    name: String,
    format: PayloadFormat,
    payloads: BTreeMap<String, Value>,
}

impl FixtureSource {
    pub fn new(name: impl Into<String>, format: PayloadFormat, payloads: BTreeMap<String, Value>) -> Self {
        let payloads = payloads
            .into_iter()
            .filter_map(|(k, v)| Doi::parse(&k).map(|d| (d.to_string(), v)))
            .collect();
        FixtureSource { name: name.into(), format, payloads }
    }

    pub fn from_file(name: impl Into<String>, format: PayloadFormat, path: &Path) -> Result<Self, HarvestError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarvestError::Fixture(format!("{}: {e}", path.display())))?;
        let payloads: BTreeMap<String, Value> =
            serde_json::from_str(&text).map_err(|e| HarvestError::Fixture(format!("{}: {e}", path.display())))?;
        Ok(FixtureSource::new(name, format, payloads))
    }
}

impl CitationSource for FixtureSource {
    fn name(&self) -> &str {
        &self.name
    }

    fn format(&self) -> PayloadFormat {
        self.format
    }

    fn fetch_raw(&self, doi: &Doi) -> Result<Option<Vec<u8>>, HarvestError> {
        Ok(self
            .payloads
            .get(doi.as_str())
            .map(|v| serde_json::to_vec(v).expect("json value serializes")))
    }
}

/// Live REST source. `url_template` contains `{doi}`, e.g.
/// `https://opencitations.net/index/coci/api/v1/citations/{doi}`.
pub struct HttpSource {
    name: String,
    format: PayloadFormat,
    url_template: String,
    client: reqwest::blocking::Client,
    limiter: Arc<TokenBucket>,
    retry: RetryPolicy,
}

impl HttpSource {
    pub fn new(
        name: impl Into<String>,
        format: PayloadFormat,
        url_template: impl Into<String>,
        limiter: Arc<TokenBucket>,
        retry: RetryPolicy,
    ) -> Result<HttpSource, HarvestError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("retrace/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| HarvestError::Client(e.to_string()))?;
        Ok(HttpSource {
            name: name.into(),
            format,
            url_template: url_template.into(),
            client,
            limiter,
            retry,
        })
    }

    pub fn url_for(&self, doi: &Doi) -> String {
        self.url_template.replace("{doi}", doi.as_str())
    }
}

impl CitationSource for HttpSource {
    fn name(&self) -> &str {
        &self.name
    }

    fn format(&self) -> PayloadFormat {
        self.format
    }

    fn fetch_raw(&self, doi: &Doi) -> Result<Option<Vec<u8>>, HarvestError> {
        let url = self.url_for(doi);
        let mut last_error = String::new();
        for attempt in 1..=self.retry.max_attempts {
            if attempt > 1 {
                std::thread::sleep(self.retry.delay(attempt - 1));
            }
            self.limiter.acquire();
            match self.client.get(&url).send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status == reqwest::StatusCode::NOT_FOUND {
                        return Ok(None);
                    }
                    if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
                        last_error = format!("HTTP {status}");
                        continue;
                    }
                    if !status.is_success() {
                        return Err(HarvestError::Malformed {
                            source_name: self.name.clone(),
                            doi: doi.to_string(),
                            message: format!("unexpected HTTP {status}"),
                            raw: resp.bytes().map(|b| b.to_vec()).unwrap_or_default(),
                        });
                    }
                    match resp.bytes() {
                        Ok(body) if body.iter().all(u8::is_ascii_whitespace) => return Ok(None),
                        Ok(body) => return Ok(Some(body.to_vec())),
                        Err(e) => last_error = e.to_string(),
                    }
                }
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(HarvestError::Retryable {
            source_name: self.name.clone(),
            doi: doi.to_string(),
            attempts: self.retry.max_attempts,
            message: last_error,
        })
    }
}

/// Picks the DOI out of a COCI id cell such as `10.1/x`,
/// `coci => 10.1/x` or `omid:br/06 doi:10.1/x`.
fn doi_in_id_cell(cell: &str) -> Option<Doi> {
    cell.split(|c: char| c.is_whitespace() || c == ';' || c == '>')
        .map(|t| t.trim().trim_start_matches("doi:"))
        .find(|t| t.starts_with("10."))
        .and_then(Doi::parse)
}

fn year_prefix(cell: &str) -> Option<i32> {
    let head: String = cell.trim().chars().take(4).collect();
    (head.len() == 4).then(|| head.parse().ok()).flatten()
}

/// Parses a raw payload into links citing `cited`.
pub fn parse_payload(
    format: PayloadFormat,
    source: &str,
    cited: &CitedItem,
    raw: &[u8],
) -> Result<Vec<CitationLink>, HarvestError> {
    let malformed = |message: String| HarvestError::Malformed {
        source_name: source.to_string(),
        doi: cited.doi.to_string(),
        message,
        raw: raw.to_vec(),
    };
    let value: Value = serde_json::from_slice(raw).map_err(|e| malformed(e.to_string()))?;
    let Value::Array(rows) = value else {
        return Err(malformed("expected a JSON array".into()));
    };
    let mut links = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let obj = row.as_object().ok_or_else(|| malformed(format!("entry {i} is not an object")))?;
        let text = |k: &str| obj.get(k).and_then(Value::as_str).map(str::trim).filter(|s| !s.is_empty());
        let link = match format {
            PayloadFormat::Coci => {
                let citing = text("citing").ok_or_else(|| malformed(format!("entry {i} lacks `citing`")))?;
                let doi = doi_in_id_cell(citing)
                    .ok_or_else(|| malformed(format!("entry {i}: no DOI in citing `{citing}`")))?;
                CitationLink {
                    citing_id: doi.to_string(),
                    citing_doi: Some(doi),
                    cited_id: cited.id.clone(),
                    source: source.to_string(),
                    creation_year: text("creation").and_then(year_prefix),
                    citing_title: None,
                }
            }
            PayloadFormat::Generic => {
                let doi = text("doi").and_then(Doi::parse);
                let local = match obj.get("id") {
                    Some(Value::String(s)) if !s.trim().is_empty() => Some(s.trim().to_string()),
                    Some(Value::Number(n)) => Some(n.to_string()),
                    _ => None,
                };
                let citing_id = match (&doi, local) {
                    (Some(d), _) => d.to_string(),
                    (None, Some(l)) => format!("{source}:{l}"),
                    (None, None) => return Err(malformed(format!("entry {i} has neither `doi` nor `id`"))),
                };
                let year = match obj.get("year") {
                    Some(Value::Number(n)) => n.as_i64().map(|y| y as i32),
                    Some(Value::String(s)) => year_prefix(s),
                    _ => None,
                };
                CitationLink {
                    citing_id,
                    citing_doi: doi,
                    cited_id: cited.id.clone(),
                    source: source.to_string(),
                    creation_year: year,
                    citing_title: text("title").map(str::to_string),
                }
            }
        };
        links.push(link);
    }
    links.sort();
    links.dedup();
    Ok(links)
}

/// Fetches (or reads from cache) and parses the links `source` reports for
/// `cited`. Empty and missing payloads yield an empty list.
pub fn fetch_citations(
    source: &dyn CitationSource,
    cache: Option<&DiskCache>,
    cited: &CitedItem,
) -> Result<Vec<CitationLink>, HarvestError> {
    let raw = match cache.map(|c| c.get(source.name(), &cited.doi)).transpose()?.flatten() {
        Some(hit) => hit,
        None => {
            let fetched = source.fetch_raw(&cited.doi)?;
            if let Some(c) = cache {
                c.put(source.name(), &cited.doi, fetched.as_deref())?;
            }
            fetched
        }
    };
    match raw {
        None => Ok(vec![]),
        Some(bytes) => parse_payload(source.format(), source.name(), cited, &bytes),
    }
}

/// Fetches many items on `workers` threads; results keep the input order.
pub fn fetch_all(
    source: &dyn CitationSource,
    cache: Option<&DiskCache>,
    items: &[CitedItem],
    workers: usize,
) -> Vec<Result<Vec<CitationLink>, HarvestError>> {
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<Vec<CitationLink>, HarvestError>>> = (0..items.len()).map(|_| None).collect();
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(items.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = fetch_citations(source, cache, &items[i]);
                results.lock().expect("result slots poisoned")[i] = Some(r);
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every item fetched")).collect()
}
