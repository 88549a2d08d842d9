//! Pipeline configuration: defaults, then a TOML/JSON file, then
//! `RETRACE_`-prefixed environment variables (`__` separates sections).

use std::path::{Path, PathBuf};

use figment::providers::{Env, Format, Json, Serialized, Toml};
use figment::Figment;
use retrace_core::harvest::PayloadFormat;
use retrace_core::reports::ReportOptions;
use retrace_core::textproc::TokenPipelineConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub workdir: PathBuf,
    pub ingest: IngestConfig,
    pub harvest: HarvestConfig,
    pub affinity: AffinityConfig,
    pub corpus: CorpusConfig,
    pub topics: TopicsConfig,
    pub report: ReportOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            workdir: PathBuf::from("retrace-work"),
            ingest: IngestConfig::default(),
            harvest: HarvestConfig::default(),
            affinity: AffinityConfig::default(),
            corpus: CorpusConfig::default(),
            topics: TopicsConfig::default(),
            report: ReportOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestConfig {
    /// `retraction_watch`, `canonical`, or a path to a JSON column mapping.
    pub mapping: String,
    pub humanities_only: bool,
    pub exclusions: Option<PathBuf>,
    /// Extra humanities labels, one per line.
    pub humanities_labels: Option<PathBuf>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig { mapping: "retraction_watch".into(), humanities_only: true, exclusions: None, humanities_labels: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub name: String,
    pub format: PayloadFormat,
    /// Offline payloads: JSON object mapping DOI to payload.
    #[serde(default)]
    pub fixture: Option<PathBuf>,
    /// URL template containing `{doi}`.
    #[serde(default)]
    pub url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarvestConfig {
    pub sources: Vec<SourceConfig>,
    /// Metadata fixture (JSON object keyed by DOI or local id).
    pub metadata: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub workers: usize,
    pub requests_per_second: f64,
    pub max_attempts: u32,
    /// `issn,title,areas,categories`
    pub journals: Option<PathBuf>,
    /// `isbn,lcc`
    pub books: Option<PathBuf>,
    /// `lcc_prefix,areas`, added on top of the shipped rules.
    pub lcc_rules: Option<PathBuf>,
    pub invalid_types: Option<Vec<String>>,
    /// DOIs of citing works known to be retracted themselves.
    pub retracted_dois: Vec<String>,
}

impl Default for HarvestConfig {
    fn default() -> Self {
        HarvestConfig {
            sources: vec![],
            metadata: None,
            cache_dir: None,
            workers: 4,
            requests_per_second: 3.0,
            max_attempts: 5,
            journals: None,
            books: None,
            lcc_rules: None,
            invalid_types: None,
            retracted_dois: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AffinityConfig {
    pub threshold: i32,
    /// `item_id,title_bonus,abstract_adjustment,note`
    pub judgments: Option<PathBuf>,
}

impl Default for AffinityConfig {
    fn default() -> Self {
        AffinityConfig { threshold: retrace_core::affinity::DEFAULT_THRESHOLD, judgments: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSource {
    Abstracts,
    Contexts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub source: CorpusSource,
    pub tokenizer: TokenPipelineConfig,
    /// Replaces the shipped stop-word list.
    pub stopwords_file: Option<PathBuf>,
    /// Added to the stop-words (e.g. author names).
    pub extra_stopwords_file: Option<PathBuf>,
    /// Tab-separated `form<TAB>lemma` lines.
    pub lemma_file: Option<PathBuf>,
    pub min_frequency: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            source: CorpusSource::Abstracts,
            tokenizer: TokenPipelineConfig::default(),
            stopwords_file: None,
            extra_stopwords_file: None,
            lemma_file: None,
            min_frequency: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopicsConfig {
    pub k: usize,
    /// Inclusive range for `select-k`, e.g. `2..10`.
    pub k_range: String,
    /// Defaults to 50 / k.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub coherence_top_n: usize,
    pub relevance_top_n: usize,
    pub lambda: f64,
    pub group_by: Vec<String>,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        TopicsConfig {
            k: 5,
            k_range: "2..10".into(),
            alpha: None,
            beta: retrace_core::topics::DEFAULT_BETA,
            iterations: retrace_core::topics::DEFAULT_ITERATIONS,
            seed: 0,
            coherence_top_n: 10,
            relevance_top_n: 30,
            lambda: retrace_core::topics::DEFAULT_LAMBDA,
            group_by: vec!["period".into(), "discipline".into()],
        }
    }
}

/// Parses `a..b` or `a..=b` (both inclusive) or a single `k`.
pub fn parse_k_range(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("invalid k range `{s}`"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty k range `{s}`"));
    }
    Ok((lo..=hi).collect())
}

#[derive(Debug)]
pub struct ConfigErrors(pub Vec<String>);

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl PipelineConfig {
    /// Loads defaults, the optional file and the environment, then resolves
    /// relative paths against the file's directory and validates.
    pub fn load(file: Option<&Path>) -> Result<PipelineConfig, ConfigErrors> {
        let mut fig = Figment::from(Serialized::defaults(PipelineConfig::default()));
        if let Some(f) = file {
            if !f.exists() {
                return Err(ConfigErrors(vec![format!("config file {} not found", f.display())]));
            }
            fig = match f.extension().and_then(|e| e.to_str()) {
                Some("json") => fig.merge(Json::file(f)),
                _ => fig.merge(Toml::file(f)),
            };
        }
        fig = fig.merge(Env::prefixed("RETRACE_").split("__"));
        let mut cfg: PipelineConfig = fig
            .extract()
            .map_err(|e| ConfigErrors(e.into_iter().map(|e| e.to_string()).collect()))?;
        if let Some(base) = file.and_then(Path::parent) {
            cfg.resolve_paths(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let fix_opt = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        fix(&mut self.workdir);
        fix_opt(&mut self.ingest.exclusions);
        fix_opt(&mut self.ingest.humanities_labels);
        if !matches!(self.ingest.mapping.as_str(), "retraction_watch" | "canonical") {
            let mut p = PathBuf::from(&self.ingest.mapping);
            fix(&mut p);
            self.ingest.mapping = p.to_string_lossy().into_owned();
        }
        for s in &mut self.harvest.sources {
            fix_opt(&mut s.fixture);
        }
        for p in [
            &mut self.harvest.metadata,
            &mut self.harvest.cache_dir,
            &mut self.harvest.journals,
            &mut self.harvest.books,
            &mut self.harvest.lcc_rules,
            &mut self.affinity.judgments,
            &mut self.corpus.stopwords_file,
            &mut self.corpus.extra_stopwords_file,
            &mut self.corpus.lemma_file,
        ] {
            fix_opt(p);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errors = Vec::new();
        let mut names = std::collections::BTreeSet::new();
        for (i, s) in self.harvest.sources.iter().enumerate() {
            if !names.insert(s.name.as_str()) {
                errors.push(format!("harvest.sources[{i}].name: duplicate source `{}`", s.name));
            }
            if s.fixture.is_some() == s.url.is_some() {
                errors.push(format!("harvest.sources[{i}]: set exactly one of `fixture` and `url`"));
            }
            if s.url.as_deref().is_some_and(|u| !u.contains("{doi}")) {
                errors.push(format!("harvest.sources[{i}].url: template must contain {{doi}}"));
            }
        }
        if self.harvest.workers == 0 {
            errors.push("harvest.workers: must be at least 1".into());
        }
        if self.harvest.requests_per_second.is_nan() || self.harvest.requests_per_second <= 0.0 {
            errors.push("harvest.requests_per_second: must be positive".into());
        }
        if self.harvest.max_attempts == 0 {
            errors.push("harvest.max_attempts: must be at least 1".into());
        }
        if self.corpus.tokenizer.min_token_length == 0 {
            errors.push("corpus.tokenizer.min_token_length: must be at least 1".into());
        }
        let t = &self.topics;
        if t.k < 2 {
            errors.push("topics.k: must be at least 2".into());
        }
        if let Err(e) = parse_k_range(&t.k_range) {
            errors.push(format!("topics.k_range: {e}"));
        }
        if t.alpha.is_some_and(|a| a.is_nan() || a <= 0.0) {
            errors.push("topics.alpha: must be positive".into());
        }
        if t.beta.is_nan() || t.beta <= 0.0 {
            errors.push("topics.beta: must be positive".into());
        }
        if t.iterations == 0 {
            errors.push("topics.iterations: must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&t.lambda) {
            errors.push("topics.lambda: must lie in [0, 1]".into());
        }
        if t.coherence_top_n < 2 {
            errors.push("topics.coherence_top_n: must be at least 2".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errors))
        }
    }
}
