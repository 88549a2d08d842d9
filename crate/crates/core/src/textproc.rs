//! Tokenization and bag-of-words corpora.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{self, BufRead};
use std::path::Path;

use rayon::prelude::*;
use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::hashing::json_hash;

/// English stop-word list shipped with the toolkit, one word per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

pub const CORPUS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("every document is empty after tokenization; nothing to model")]
    EmptyCorpus,
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("min_token_length must be at least 1")]
    MinLength,
    #[error("corpus is inconsistent: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Parses a plain-text word list (one per line, `#` comments), lowercased.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.nfc().collect::<String>().to_lowercase())
        .collect()
}

pub fn read_word_list(path: &Path) -> io::Result<BTreeSet<String>> {
    Ok(parse_word_list(&std::fs::read_to_string(path)?))
}

/// Reads a lemma dictionary: `form<TAB>lemma` per line.
pub fn read_lemma_dictionary<R: BufRead>(input: R) -> io::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in input.lines() {
        let line = line?;
        if let Some((form, lemma)) = line.split_once('\t') {
            let form = form.trim().to_lowercase();
            if !form.is_empty() && !form.starts_with('#') {
                out.insert(form, lemma.trim().to_lowercase());
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TokenPipelineConfig {
    pub base_stopwords: BTreeSet<String>,
    pub extra_stopwords: BTreeSet<String>,
    pub min_token_length: usize,
    /// Drop digits along with punctuation and symbols.
    pub strip_digits: bool,
    pub stemming: bool,
    pub lemmatization: bool,
    pub lemmas: BTreeMap<String, String>,
}

impl Default for TokenPipelineConfig {
    fn default() -> Self {
        TokenPipelineConfig {
            base_stopwords: parse_word_list(DEFAULT_STOPWORDS),
            extra_stopwords: BTreeSet::new(),
            min_token_length: 2,
            strip_digits: true,
            stemming: true,
            lemmatization: false,
            lemmas: BTreeMap::new(),
        }
    }
}

impl TokenPipelineConfig {
    /// Lowercasing and punctuation splitting only.
    pub fn plain() -> Self {
        TokenPipelineConfig {
            base_stopwords: BTreeSet::new(),
            min_token_length: 1,
            stemming: false,
            ..Default::default()
        }
    }

    pub fn with_extra_stopwords<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, words: I) -> Self {
        self.extra_stopwords.extend(words.into_iter().map(|w| w.as_ref().to_lowercase()));
        self
    }
}

/// A compiled pipeline. Stop-words are checked on the surface form and again
/// after lemmatization/stemming, so `methods` is dropped when `method` is a
/// stop-word.
pub struct Tokenizer {
    stopwords: HashSet<String>,
    stemmer: Option<Stemmer>,
    lemmas: Option<BTreeMap<String, String>>,
    min_len: usize,
    strip_digits: bool,
}

impl Tokenizer {
    pub fn new(config: &TokenPipelineConfig) -> Result<Tokenizer, TextError> {
        if config.min_token_length < 1 {
            return Err(TextError::MinLength);
        }
        let stemmer = config.stemming.then(|| Stemmer::create(Algorithm::English));
        let mut stopwords: HashSet<String> = config
            .base_stopwords
            .iter()
            .chain(&config.extra_stopwords)
            .map(|w| w.to_lowercase())
            .collect();
        if let Some(s) = &stemmer {
            let stems: Vec<String> = stopwords.iter().map(|w| s.stem(w).into_owned()).collect();
            stopwords.extend(stems);
        }
        Ok(Tokenizer {
            stopwords,
            stemmer,
            lemmas: config.lemmatization.then(|| config.lemmas.clone()),
            min_len: config.min_token_length,
            strip_digits: config.strip_digits,
        })
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let text: String = text.nfc().collect::<String>().to_lowercase();
        let keep = |c: char| c.is_alphabetic() || (!self.strip_digits && c.is_numeric());
        text.split(|c: char| !keep(c))
            .filter(|w| !w.is_empty() && !self.stopwords.contains(*w))
            .filter_map(|w| {
                let mut t = w.to_string();
                if let Some(l) = self.lemmas.as_ref().and_then(|d| d.get(&t)) {
                    t = l.clone();
                }
                if let Some(s) = &self.stemmer {
                    t = s.stem(&t).into_owned();
                }
                (t.chars().count() >= self.min_len && !self.stopwords.contains(&t)).then_some(t)
            })
            .collect()
    }
}

pub fn tokenize(text: &str, config: &TokenPipelineConfig) -> Result<Vec<String>, TextError> {
    Ok(Tokenizer::new(config)?.tokenize(text))
}

/// Document handed to [`build_corpus`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub id: String,
    /// `(term index, count)` pairs sorted by term index; counts are positive.
    pub counts: Vec<(u32, u32)>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Vec<String>>,
}

impl CorpusDocument {
    pub fn len(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Token stream with each term repeated `count` times.
    pub fn tokens(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts.iter().flat_map(|&(w, c)| std::iter::repeat(w as usize).take(c as usize))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub schema_version: u32,
    pub vocabulary: Vec<String>,
    pub documents: Vec<CorpusDocument>,
}

impl Corpus {
    /// Builds a corpus straight from token lists; the vocabulary is every
    /// distinct token, sorted.
    pub fn from_tokens(docs: Vec<(String, Vec<String>)>) -> Result<Corpus, TextError> {
        assemble(
            docs.into_iter().map(|(id, toks)| (id, toks, BTreeMap::new())).collect(),
            1,
        )
    }

    pub fn num_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.documents.iter().map(CorpusDocument::len).sum()
    }

    /// Corpus-wide count of each term.
    pub fn term_totals(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.vocabulary.len()];
        for d in &self.documents {
            for &(w, c) in &d.counts {
                out[w as usize] += c as u64;
            }
        }
        out
    }

    /// Marginal term probabilities `p(w)`.
    pub fn term_probabilities(&self) -> Vec<f64> {
        let total = self.total_tokens() as f64;
        self.term_totals().into_iter().map(|c| c as f64 / total).collect()
    }

    /// Set of term indices present in each document.
    pub fn doc_term_sets(&self) -> Vec<BTreeSet<usize>> {
        self.documents
            .iter()
            .map(|d| d.counts.iter().map(|&(w, _)| w as usize).collect())
            .collect()
    }

    pub fn hash(&self) -> String {
        json_hash(self)
    }

    pub fn validate(&self) -> Result<(), TextError> {
        let mut seen = HashSet::new();
        for d in &self.documents {
            if !seen.insert(d.id.as_str()) {
                return Err(TextError::DuplicateId(d.id.clone()));
            }
            let mut prev = None;
            for &(w, c) in &d.counts {
                if w as usize >= self.vocabulary.len() || c == 0 || prev.is_some_and(|p| p >= w) {
                    return Err(TextError::Invalid(format!("document `{}` has a bad count entry ({w}, {c})", d.id)));
                }
                prev = Some(w);
            }
        }
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Corpus, TextError> {
        let corpus: Corpus = serde_json::from_slice(&std::fs::read(path)?)?;
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), TextError> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }
}

fn assemble(
    docs: Vec<(String, Vec<String>, BTreeMap<String, Vec<String>>)>,
    min_frequency: u64,
) -> Result<Corpus, TextError> {
    let mut seen = HashSet::new();
    for (id, _, _) in &docs {
        if !seen.insert(id.as_str()) {
            return Err(TextError::DuplicateId(id.clone()));
        }
    }
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for (_, toks, _) in &docs {
        for t in toks {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let vocabulary: Vec<String> = freq
        .iter()
        .filter(|(_, &c)| c >= min_frequency.max(1))
        .map(|(t, _)| t.to_string())
        .collect();
    if vocabulary.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let index: HashMap<&str, u32> = vocabulary.iter().enumerate().map(|(i, t)| (t.as_str(), i as u32)).collect();
    let documents = docs
        .iter()
        .map(|(id, toks, meta)| {
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for t in toks {
                if let Some(&i) = index.get(t.as_str()) {
                    *counts.entry(i).or_default() += 1;
                }
            }
            CorpusDocument { id: id.clone(), counts: counts.into_iter().collect(), metadata: meta.clone() }
        })
        .collect();
    Ok(Corpus { schema_version: CORPUS_SCHEMA_VERSION, vocabulary, documents })
}

/// Tokenizes every document (in parallel) and assembles the bag-of-words
/// corpus. Terms whose corpus frequency is below `min_frequency` are dropped.
/// Document order follows the input.
pub fn build_corpus(
    docs: &[SourceDocument],
    config: &TokenPipelineConfig,
    min_frequency: u64,
) -> Result<Corpus, TextError> {
    let tokenizer = Tokenizer::new(config)?;
    let tokenized: Vec<_> = docs
        .par_iter()
        .map(|d| (d.id.clone(), tokenizer.tokenize(&d.text), d.metadata.clone()))
        .collect();
    let empty = tokenized.iter().filter(|(_, t, _)| t.is_empty()).count();
    if empty > 0 {
        log::warn!("{empty} document(s) have no tokens after filtering");
    }
    assemble(tokenized, min_frequency)
}
