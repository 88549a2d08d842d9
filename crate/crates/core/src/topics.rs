//! LDA topic models fitted by collapsed Gibbs sampling, with UMass coherence,
//! λ-relevance rankings, inter-topic maps and metadata-grouped topic tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::textproc::Corpus;

pub const MODEL_SCHEMA_VERSION: u32 = 1;
pub const BUNDLE_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_LAMBDA: f64 = 0.3;
/// Metadata bucket for documents that carry no value for a grouping key.
pub const UNKNOWN_GROUP: &str = "unknown";
/// Coherence scores closer than this count as tied.
pub const COHERENCE_TIE_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("k must be at least 2 (got {0})")]
    TooFewTopics(usize),
    #[error("k = {k} exceeds the {distinct} distinct terms in the corpus")]
    TooManyTopics { k: usize, distinct: usize },
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("lambda must lie in [0, 1] (got {0})")]
    Lambda(f64),
    #[error("k range is empty")]
    EmptyRange,
    #[error("fit for k = {k} failed: {source}")]
    AtK { k: usize, source: Box<TopicError> },
    #[error("model does not match corpus: {0}")]
    Mismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    /// Defaults to `50 / k` when unset.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaParams {
    pub fn new(k: usize, seed: u64) -> LdaParams {
        LdaParams { k, alpha: None, beta: DEFAULT_BETA, iterations: DEFAULT_ITERATIONS, seed }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }
}

/// Independent RNG stream per document, keyed on the document id so that the
/// draws a document sees do not depend on where it sits in the input.
fn doc_rng(seed: u64, doc_id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(doc_id.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Collapsed Gibbs sampler state. Documents are swept in doc-id order.
pub struct GibbsSampler<'a> {
    corpus: &'a Corpus,
    k: usize,
    alpha: f64,
    beta: f64,
    vocab: usize,
    order: Vec<usize>,
    tokens: Vec<Vec<u32>>,
    z: Vec<Vec<u32>>,
    n_dk: Vec<Vec<u32>>,
    n_kw: Vec<u32>,
    n_k: Vec<u64>,
    rngs: Vec<ChaCha8Rng>,
    buf: Vec<f64>,
    sweeps: usize,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(corpus: &'a Corpus, params: &LdaParams) -> Result<GibbsSampler<'a>, TopicError> {
        let k = params.k;
        if k < 2 {
            return Err(TopicError::TooFewTopics(k));
        }
        if params.iterations < 1 {
            return Err(TopicError::NoIterations);
        }
        let distinct = corpus.term_totals().iter().filter(|&&c| c > 0).count();
        if distinct == 0 {
            return Err(TopicError::EmptyCorpus);
        }
        if k > distinct {
            return Err(TopicError::TooManyTopics { k, distinct });
        }
        let vocab = corpus.vocab_size();
        let mut order: Vec<usize> = (0..corpus.num_docs()).collect();
        order.sort_by(|&a, &b| corpus.documents[a].id.cmp(&corpus.documents[b].id));
        let tokens: Vec<Vec<u32>> =
            corpus.documents.iter().map(|d| d.tokens().map(|w| w as u32).collect()).collect();
        for d in corpus.documents.iter().filter(|d| d.is_empty()) {
            log::warn!("document `{}` is empty; its topic mixture will be uniform", d.id);
        }
        let mut rngs: Vec<ChaCha8Rng> =
            corpus.documents.iter().map(|d| doc_rng(params.seed, &d.id)).collect();
        let mut z = vec![Vec::new(); tokens.len()];
        let mut n_dk = vec![vec![0u32; k]; tokens.len()];
        let mut n_kw = vec![0u32; k * vocab];
        let mut n_k = vec![0u64; k];
        for &d in &order {
            z[d] = tokens[d]
                .iter()
                .map(|&w| {
                    let t = rngs[d].gen_range(0..k);
                    n_dk[d][t] += 1;
                    n_kw[t * vocab + w as usize] += 1;
                    n_k[t] += 1;
                    t as u32
                })
                .collect();
        }
        Ok(GibbsSampler {
            corpus,
            k,
            alpha: params.alpha(),
            beta: params.beta,
            vocab,
            order,
            tokens,
            z,
            n_dk,
            n_kw,
            n_k,
            rngs,
            buf: vec![0.0; k],
            sweeps: 0,
        })
    }

    /// One pass over every token.
    pub fn sweep(&mut self) {
        let (k, v, vb) = (self.k, self.vocab, self.vocab as f64 * self.beta);
        for &d in &self.order {
            for i in 0..self.tokens[d].len() {
                let w = self.tokens[d][i] as usize;
                let old = self.z[d][i] as usize;
                self.n_dk[d][old] -= 1;
                self.n_kw[old * v + w] -= 1;
                self.n_k[old] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (self.n_dk[d][t] as f64 + self.alpha) * (self.n_kw[t * v + w] as f64 + self.beta)
                        / (self.n_k[t] as f64 + vb);
                    self.buf[t] = total;
                }
                let u = self.rngs[d].gen::<f64>() * total;
                let new = self.buf.iter().position(|&c| u < c).unwrap_or(k - 1);
                self.z[d][i] = new as u32;
                self.n_dk[d][new] += 1;
                self.n_kw[new * v + w] += 1;
                self.n_k[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// `phi[t][w] = (n_tw + β) / (n_t + Vβ)`.
    pub fn phi(&self) -> Vec<Vec<f64>> {
        let vb = self.vocab as f64 * self.beta;
        (0..self.k)
            .map(|t| {
                let denom = self.n_k[t] as f64 + vb;
                (0..self.vocab).map(|w| (self.n_kw[t * self.vocab + w] as f64 + self.beta) / denom).collect()
            })
            .collect()
    }

    /// `theta[d][t] = (n_dt + α) / (N_d + kα)`, rows in corpus order.
    pub fn theta(&self) -> Vec<Vec<f64>> {
        let ka = self.k as f64 * self.alpha;
        self.n_dk
            .iter()
            .zip(&self.tokens)
            .map(|(row, toks)| {
                let denom = toks.len() as f64 + ka;
                row.iter().map(|&c| (c as f64 + self.alpha) / denom).collect()
            })
            .collect()
    }

    /// Checks count bookkeeping and that phi/theta rows are distributions.
    pub fn check_invariants(&self) -> Result<(), String> {
        let total: u64 = self.tokens.iter().map(|t| t.len() as u64).sum();
        if self.n_k.iter().sum::<u64>() != total {
            return Err(format!("topic counts sum to {} but corpus has {total} tokens", self.n_k.iter().sum::<u64>()));
        }
        for t in 0..self.k {
            let row: u64 = self.n_kw[t * self.vocab..(t + 1) * self.vocab].iter().map(|&c| c as u64).sum();
            if row != self.n_k[t] {
                return Err(format!("topic {t}: term counts {row} != topic count {}", self.n_k[t]));
            }
        }
        for (d, row) in self.n_dk.iter().enumerate() {
            if row.iter().map(|&c| c as usize).sum::<usize>() != self.tokens[d].len() {
                return Err(format!("document {d}: topic counts do not match its length"));
            }
        }
        for (name, rows) in [("phi", self.phi()), ("theta", self.theta())] {
            for (i, r) in rows.iter().enumerate() {
                let s: f64 = r.iter().sum();
                if (s - 1.0).abs() > 1e-9 || r.iter().any(|&x| x < 0.0) {
                    return Err(format!("{name} row {i} sums to {s}"));
                }
            }
        }
        Ok(())
    }

    pub fn into_model(self, params: &LdaParams) -> TopicModel {
        TopicModel {
            schema_version: MODEL_SCHEMA_VERSION,
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.sweeps,
            seed: params.seed,
            corpus_hash: self.corpus.hash(),
            doc_ids: self.corpus.documents.iter().map(|d| d.id.clone()).collect(),
            phi: self.phi(),
            theta: self.theta(),
            assignments: self.z,
            labels: vec![None; self.k],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub schema_version: u32,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub corpus_hash: String,
    pub doc_ids: Vec<String>,
    /// k × V.
    pub phi: Vec<Vec<f64>>,
    /// D × k, rows in corpus document order.
    pub theta: Vec<Vec<f64>>,
    /// Final topic of every token, in [`crate::textproc::CorpusDocument::tokens`] order.
    pub assignments: Vec<Vec<u32>>,
    /// Human-assigned topic names; never generated.
    #[serde(default)]
    pub labels: Vec<Option<String>>,
}

impl TopicModel {
    pub fn read_json(path: &Path) -> Result<TopicModel, TopicError> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), TopicError> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn hash(&self) -> String {
        crate::hashing::json_hash(self)
    }

    /// Errors unless the model was fitted on `corpus`.
    pub fn check_corpus(&self, corpus: &Corpus) -> Result<(), TopicError> {
        if self.corpus_hash != corpus.hash() {
            return Err(TopicError::Mismatch("corpus hash differs".into()));
        }
        Ok(())
    }

    /// Index of the most probable topic per document (ties → lowest index).
    pub fn dominant_topics(&self) -> Vec<usize> {
        self.theta.iter().map(|r| argmax(r)).collect()
    }

    /// Term indices of topic `t` by descending φ, ties by index.
    pub fn top_terms(&self, t: usize, n: usize) -> Vec<usize> {
        let row = &self.phi[t];
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        idx.truncate(n);
        idx
    }
}

fn argmax(r: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in r.iter().enumerate() {
        if x > r[best] {
            best = i;
        }
    }
    best
}

pub fn fit_lda(corpus: &Corpus, params: &LdaParams) -> Result<TopicModel, TopicError> {
    fit_lda_observed(corpus, params, |_| {})
}

/// Like [`fit_lda`], calling `observe` after every sweep.
pub fn fit_lda_observed<F: FnMut(&GibbsSampler<'_>)>(
    corpus: &Corpus,
    params: &LdaParams,
    mut observe: F,
) -> Result<TopicModel, TopicError> {
    let mut s = GibbsSampler::new(corpus, params)?;
    for _ in 0..params.iterations {
        s.sweep();
        observe(&s);
    }
    Ok(s.into_model(params))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    pub mean: f64,
    pub per_topic: Vec<f64>,
    pub top_n: usize,
}

/// UMass coherence: for each topic's top terms `w_1..w_n` (by φ),
/// `Σ_{i<j} log[(codoc(w_i, w_j) + 1) / docfreq(w_j)]`, averaged over topics.
pub fn coherence(model: &TopicModel, corpus: &Corpus, top_n: usize) -> Coherence {
    let vocab = corpus.vocab_size();
    let n = if top_n > vocab {
        log::warn!("top_n {top_n} exceeds vocabulary size {vocab}; clamped");
        vocab
    } else {
        top_n
    };
    let sets = corpus.doc_term_sets();
    let mut df = vec![0u32; vocab];
    for s in &sets {
        for &w in s {
            df[w] += 1;
        }
    }
    let per_topic: Vec<f64> = (0..model.k)
        .map(|t| {
            let top = model.top_terms(t, n);
            let mut score = 0.0;
            for i in 0..top.len() {
                for j in i + 1..top.len() {
                    let (wi, wj) = (top[i], top[j]);
                    if df[wj] == 0 {
                        continue;
                    }
                    let co = sets.iter().filter(|s| s.contains(&wi) && s.contains(&wj)).count();
                    score += ((co as f64 + 1.0) / df[wj] as f64).ln();
                }
            }
            score
        })
        .collect();
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Coherence { mean, per_topic, top_n: n }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub per_k: BTreeMap<usize, f64>,
    pub chosen_k: usize,
    pub top_n: usize,
    pub seeds: BTreeMap<usize, u64>,
}

/// Seed used for the `k` fit of a sweep started from `seed`.
pub fn seed_for_k(seed: u64, k: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((k as u64).to_le_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}

/// Fits one model per `k` (in parallel) and picks the most coherent; scores
/// within [`COHERENCE_TIE_EPS`] of the best go to the smallest `k`.
pub fn select_k(
    corpus: &Corpus,
    ks: &[usize],
    base: &LdaParams,
    top_n: usize,
) -> Result<CoherenceReport, TopicError> {
    if ks.is_empty() {
        return Err(TopicError::EmptyRange);
    }
    let scored: Vec<(usize, u64, f64)> = ks
        .par_iter()
        .map(|&k| {
            let params = LdaParams { k, seed: seed_for_k(base.seed, k), alpha: base.alpha, ..*base };
            let model = fit_lda(corpus, &params).map_err(|e| TopicError::AtK { k, source: Box::new(e) })?;
            Ok((k, params.seed, coherence(&model, corpus, top_n).mean))
        })
        .collect::<Result<_, TopicError>>()?;
    let per_k: BTreeMap<usize, f64> = scored.iter().map(|&(k, _, c)| (k, c)).collect();
    let seeds = scored.iter().map(|&(k, s, _)| (k, s)).collect();
    let best = per_k.values().cloned().fold(f64::NEG_INFINITY, f64::max);
    let chosen_k = *per_k.iter().find(|(_, &c)| c >= best - COHERENCE_TIE_EPS).unwrap().0;
    Ok(CoherenceReport { per_k, chosen_k, top_n: top_n.min(corpus.vocab_size()), seeds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTerm {
    pub term: String,
    pub index: usize,
    pub relevance: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceRanking {
    pub lambda: f64,
    pub top_n: usize,
    pub topics: Vec<Vec<RankedTerm>>,
}

/// `λ·log φ + (1−λ)·log(φ/p)`.
pub fn relevance_score(phi: f64, p: f64, lambda: f64) -> f64 {
    lambda * phi.ln() + (1.0 - lambda) * (phi / p).ln()
}

/// Per-topic terms by descending relevance, ties by term index.
pub fn relevance(model: &TopicModel, corpus: &Corpus, lambda: f64, top_n: usize) -> Result<RelevanceRanking, TopicError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(TopicError::Lambda(lambda));
    }
    let p = corpus.term_probabilities();
    if p.len() != model.phi.first().map_or(0, Vec::len) {
        return Err(TopicError::Mismatch("vocabulary size differs".into()));
    }
    let topics = model
        .phi
        .iter()
        .map(|row| {
            let mut terms: Vec<RankedTerm> = row
                .iter()
                .enumerate()
                .map(|(w, &phi)| RankedTerm {
                    term: corpus.vocabulary[w].clone(),
                    index: w,
                    relevance: relevance_score(phi, p[w], lambda),
                    phi,
                })
                .collect();
            terms.sort_by(|a, b| b.relevance.total_cmp(&a.relevance).then(a.index.cmp(&b.index)));
            terms.truncate(top_n);
            terms
        })
        .collect();
    Ok(RelevanceRanking { lambda, top_n, topics })
}

/// Jensen-Shannon divergence with base-2 logs, in [0, 1].
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            s += 0.5 * a * (a / m).log2();
        }
        if b > 0.0 {
            s += 0.5 * b * (b / m).log2();
        }
    }
    s.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMap {
    pub distance_matrix: Vec<Vec<f64>>,
    pub coords_2d: Vec<[f64; 2]>,
    pub topic_share: Vec<f64>,
}

/// Classical multidimensional scaling of a distance matrix to two dimensions.
/// Eigenvector signs are fixed so the largest-magnitude entry is positive.
pub fn classical_mds(dist: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = dist.len();
    if n == 0 {
        return vec![];
    }
    let d2 = DMatrix::from_fn(n, n, |i, j| dist[i][j] * dist[i][j]);
    let j = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let b = -0.5 * &j * d2 * &j;
    let b = 0.5 * (&b + b.transpose());
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));
    let mut coords = vec![[0.0; 2]; n];
    for (dim, &e) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[e];
        if lambda <= 1e-12 {
            continue;
        }
        let v = eig.eigenvectors.column(e);
        let pivot = (0..n).fold(0, |best, i| if v[i].abs() > v[best].abs() + 1e-12 { i } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i][dim] = sign * v[i] * lambda.sqrt();
        }
    }
    coords
}

pub fn topic_map(model: &TopicModel, corpus: &Corpus) -> TopicMap {
    let k = model.k;
    let mut distance_matrix = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let d = jensen_shannon(&model.phi[i], &model.phi[j]);
            distance_matrix[i][j] = d;
            distance_matrix[j][i] = d;
        }
    }
    if distance_matrix.iter().flatten().all(|&d| d == 0.0) {
        log::warn!("all topics are identical; map coordinates collapse to the origin");
    }
    let coords_2d = classical_mds(&distance_matrix);
    let mut mass = vec![0.0; k];
    for (row, doc) in model.theta.iter().zip(&corpus.documents) {
        let n = doc.len() as f64;
        for t in 0..k {
            mass[t] += n * row[t];
        }
    }
    let total: f64 = mass.iter().sum();
    let topic_share = mass.iter().map(|m| if total > 0.0 { m / total } else { 1.0 / k as f64 }).collect();
    TopicMap { distance_matrix, coords_2d, topic_share }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedTopicTable {
    pub group_key: String,
    pub rows: BTreeMap<String, Vec<f64>>,
    pub counts: BTreeMap<String, usize>,
}

impl GroupedTopicTable {
    /// `group,topic_0,...,topic_{k-1},documents`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TopicError> {
        let k = self.rows.values().next().map_or(0, Vec::len);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.group_key.clone()];
        header.extend((0..k).map(|t| format!("topic_{t}")));
        header.push("documents".into());
        w.write_record(&header)?;
        for (g, row) in &self.rows {
            let mut rec = vec![g.clone()];
            rec.extend(row.iter().map(|x| format!("{x:.6}")));
            rec.push(self.counts[g].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean theta per metadata value of `group_key`. Documents with several values
/// count toward each; documents with none go to [`UNKNOWN_GROUP`].
pub fn group_topic_distribution(
    model: &TopicModel,
    corpus: &Corpus,
    group_key: &str,
) -> Result<GroupedTopicTable, TopicError> {
    if model.theta.len() != corpus.num_docs() {
        return Err(TopicError::Mismatch("document count differs".into()));
    }
    let mut sums: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
    for (doc, row) in corpus.documents.iter().zip(&model.theta) {
        let values = doc.metadata.get(group_key).filter(|v| !v.is_empty());
        let unknown = [UNKNOWN_GROUP.to_string()];
        for g in values.map_or(&unknown[..], |v| &v[..]) {
            let e = sums.entry(g.clone()).or_insert_with(|| (vec![0.0; model.k], 0));
            for (acc, &x) in e.0.iter_mut().zip(row) {
                *acc += x;
            }
            e.1 += 1;
        }
    }
    let mut rows = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for (g, (sum, n)) in sums {
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        let z: f64 = mean.iter().sum();
        rows.insert(g.clone(), mean.iter().map(|m| m / z).collect());
        counts.insert(g, n);
    }
    Ok(GroupedTopicTable { group_key: group_key.to_string(), rows, counts })
}

/// Everything a client needs to draw the topic map and re-rank terms at any λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicBundle {
    pub schema_version: u32,
    pub model_hash: String,
    pub corpus_hash: String,
    pub k: usize,
    pub vocabulary: Vec<String>,
    pub phi: Vec<Vec<f64>>,
    pub p_w: Vec<f64>,
    pub term_frequency: Vec<u64>,
    pub topic_map: TopicMap,
    pub default_lambda: f64,
    pub relevance: RelevanceRanking,
    pub labels: Vec<Option<String>>,
}

pub fn topic_bundle(model: &TopicModel, corpus: &Corpus, lambda: f64, top_n: usize) -> Result<TopicBundle, TopicError> {
    model.check_corpus(corpus)?;
    Ok(TopicBundle {
        schema_version: BUNDLE_SCHEMA_VERSION,
        model_hash: model.hash(),
        corpus_hash: model.corpus_hash.clone(),
        k: model.k,
        vocabulary: corpus.vocabulary.clone(),
        phi: model.phi.clone(),
        p_w: corpus.term_probabilities(),
        term_frequency: corpus.term_totals(),
        topic_map: topic_map(model, corpus),
        default_lambda: lambda,
        relevance: relevance(model, corpus, lambda, top_n)?,
        labels: model.labels.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Corpus {
        let docs = (0..6)
            .map(|i| {
                let words = if i % 2 == 0 { "apple pear plum apple" } else { "iron steel copper iron" };
                (format!("d{i}"), words.split(' ').map(String::from).collect())
            })
            .collect();
        Corpus::from_tokens(docs).unwrap()
    }

    #[test]
    fn rejects_bad_k() {
        let c = toy();
        assert!(matches!(fit_lda(&c, &LdaParams::new(1, 0)), Err(TopicError::TooFewTopics(1))));
        assert!(matches!(fit_lda(&c, &LdaParams::new(7, 0)), Err(TopicError::TooManyTopics { .. })));
    }

    #[test]
    fn invariants_hold_every_sweep_and_reruns_match() {
        let c = toy();
        let p = LdaParams { iterations: 50, ..LdaParams::new(2, 9) };
        let a = fit_lda_observed(&c, &p, |s| s.check_invariants().unwrap()).unwrap();
        let b = fit_lda(&c, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn jsd_extremes() {
        assert_eq!(jensen_shannon(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(jensen_shannon(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
    }

    #[test]
    fn identical_topics_map_to_origin() {
        let coords = classical_mds(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]);
        assert!(coords.iter().all(|c| c[0] == 0.0 && c[1] == 0.0));
    }

    #[test]
    fn mds_recovers_a_line() {
        let d = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let c = classical_mds(&d);
        let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        assert!((dist(c[0], c[2]) - 2.0).abs() < 1e-9);
        assert!((dist(c[0], c[1]) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn singleton_k_range() {
        let c = toy();
        let p = LdaParams { iterations: 20, ..LdaParams::new(3, 1) };
        assert_eq!(select_k(&c, &[3], &p, 10).unwrap().chosen_k, 3);
    }
}
