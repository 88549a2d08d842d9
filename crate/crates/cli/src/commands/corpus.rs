use std::collections::{BTreeMap, BTreeSet};
use std::io::BufReader;

use anyhow::{bail, Context, Result};
use retrace_core::annotation::InTextCitation;
use retrace_core::ingest::RetractedPublication;
use retrace_core::textproc::{build_corpus, read_lemma_dictionary, read_word_list, SourceDocument, TokenPipelineConfig};
use retrace_core::timeline::CitationPeriod;

use super::{open, Ctx};
use crate::config::CorpusSource;
use crate::stages::{self, read_json};
use crate::CorpusArgs;

fn tokenizer(ctx: &Ctx) -> Result<TokenPipelineConfig> {
    let c = &ctx.cfg.corpus;
    let mut t = c.tokenizer.clone();
    if let Some(p) = &c.stopwords_file {
        t.base_stopwords = read_word_list(p).with_context(|| format!("reading {}", p.display()))?;
    }
    if let Some(p) = &c.extra_stopwords_file {
        let words = read_word_list(p).with_context(|| format!("reading {}", p.display()))?;
        t = t.with_extra_stopwords(words);
    }
    if let Some(p) = &c.lemma_file {
        t.lemmas = read_lemma_dictionary(BufReader::new(open(p)?))?;
        t.lemmatization = true;
    }
    Ok(t)
}

/// Period labels per (citing entity, cited item) pair, empty before `segment`.
fn pair_periods(ctx: &Ctx) -> Result<BTreeMap<(String, String), String>> {
    let p = ctx.wd.path(stages::PERIODS);
    if !p.exists() {
        log::warn!("{} not found; documents carry no period", p.display());
        return Ok(BTreeMap::new());
    }
    let periods: Vec<CitationPeriod> = read_json(&p)?;
    Ok(periods
        .into_iter()
        .map(|c| ((c.citing_entity_id, c.cited_item_id), c.assignment.period.label().to_string()))
        .collect())
}

/// In-text citations with the annotation log applied.
pub fn annotated_citations(ctx: &Ctx) -> Result<Vec<InTextCitation>> {
    let p = ctx.wd.path(stages::IN_TEXT);
    if !p.exists() {
        return Ok(vec![]);
    }
    let citations = retrace_core::annotation::read_citations(&p)?;
    let state = retrace_core::annotation::replay(&retrace_core::annotation::read_log(
        &ctx.wd.path(stages::ANNOTATIONS),
    )?);
    Ok(citations.iter().map(|c| c.with_annotation(state.latest.get(&c.id))).collect())
}

fn abstracts(ctx: &Ctx) -> Result<Vec<SourceDocument>> {
    let entities = ctx.current_entities()?;
    let records: Vec<RetractedPublication> = ctx.selected_records(&None)?;
    let disciplines: BTreeMap<&str, &[String]> =
        records.iter().map(|r| (r.id.as_str(), r.humanities_disciplines.as_slice())).collect();
    let periods = pair_periods(ctx)?;
    let mut docs = Vec::new();
    for e in &entities {
        let Some(text) = e.abstract_text.as_deref().filter(|t| !t.trim().is_empty()) else { continue };
        let mut period = BTreeSet::new();
        let mut discipline = BTreeSet::new();
        for item in &e.cited_items {
            if let Some(p) = periods.get(&(e.id.clone(), item.clone())) {
                period.insert(p.clone());
            }
            discipline.extend(disciplines.get(item.as_str()).into_iter().flat_map(|d| d.iter().cloned()));
        }
        let area: BTreeSet<String> = e.subject_areas.iter().cloned().collect();
        let metadata = BTreeMap::from([
            ("period".to_string(), period.into_iter().collect()),
            ("discipline".to_string(), discipline.into_iter().collect()),
            ("subject_area".to_string(), area.into_iter().collect()),
        ]);
        docs.push(SourceDocument { id: e.id.clone(), text: text.to_string(), metadata });
    }
    Ok(docs)
}

fn contexts(ctx: &Ctx) -> Result<Vec<SourceDocument>> {
    let periods = pair_periods(ctx)?;
    let citations = annotated_citations(ctx)?;
    Ok(citations
        .into_iter()
        .map(|c| {
            let period = periods.get(&(c.citing_entity_id.clone(), c.cited_item_id.clone())).cloned();
            let metadata = BTreeMap::from([
                ("period".to_string(), period.into_iter().collect()),
                ("section".to_string(), vec![c.section.as_str().to_string()]),
                ("intent".to_string(), c.intent.iter().map(|i| i.0.clone()).collect()),
                ("sentiment".to_string(), c.sentiment.iter().map(|s| s.as_str().to_string()).collect()),
            ]);
            SourceDocument { id: c.id.clone(), text: c.context.text(), metadata }
        })
        .collect())
}

pub fn build(ctx: &Ctx, args: CorpusArgs) -> Result<()> {
    let source = args.source.unwrap_or(ctx.cfg.corpus.source);
    let docs = match source {
        CorpusSource::Abstracts => abstracts(ctx)?,
        CorpusSource::Contexts => contexts(ctx)?,
    };
    if docs.is_empty() {
        bail!("no documents with text for a {source:?} corpus");
    }
    let corpus = build_corpus(&docs, &tokenizer(ctx)?, ctx.cfg.corpus.min_frequency)?;
    let out = args.out.unwrap_or_else(|| ctx.wd.path(stages::CORPUS));
    corpus.write_json(&out)?;
    println!(
        "{} document(s), {} term(s), {} token(s)",
        corpus.num_docs(),
        corpus.vocab_size(),
        corpus.total_tokens()
    );
    Ok(())
}
