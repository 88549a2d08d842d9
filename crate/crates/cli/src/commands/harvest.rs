use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{bail, Result};
use retrace_core::harvest::{
    classify_venue, fetch_all, merge_sources, resolve_metadata, tally_citations, CitationSource, CitedItem, DiskCache,
    FixtureMetadataSource, FixtureSource, HttpSource, LinksBySource, Resolution, RetryPolicy, TokenBucket,
    ValidityPolicy,
};
use retrace_core::Doi;
use serde::Serialize;

use super::Ctx;
use crate::stages::{self, write_json};
use crate::HarvestArgs;

#[derive(Debug, Serialize)]
struct FetchFailure {
    item_id: String,
    source: String,
    error: String,
}

#[derive(Debug, Serialize)]
struct SourceCounts {
    links: usize,
    citing_entities: usize,
    items_with_citations: usize,
}

#[derive(Debug, Serialize)]
struct HarvestReport {
    cited_items: usize,
    items_without_doi: Vec<String>,
    sources: BTreeMap<String, SourceCounts>,
    merged_entities: usize,
    year_conflicts: usize,
    ambiguous_matches: usize,
    quarantined: usize,
    items_with_citations: usize,
    links: usize,
    failures: Vec<FetchFailure>,
}

fn build_sources(ctx: &Ctx) -> Result<Vec<Box<dyn CitationSource>>> {
    let h = &ctx.cfg.harvest;
    if h.sources.is_empty() {
        bail!("no harvest sources configured (harvest.sources)");
    }
    let limiter = Arc::new(TokenBucket::new(h.requests_per_second, h.requests_per_second.max(1.0)));
    let retry = RetryPolicy { max_attempts: h.max_attempts, ..RetryPolicy::default() };
    let mut out: Vec<Box<dyn CitationSource>> = Vec::new();
    for s in &h.sources {
        match (&s.fixture, &s.url) {
            (Some(f), _) => out.push(Box::new(FixtureSource::from_file(&s.name, s.format, f)?)),
            (None, Some(url)) => {
                out.push(Box::new(HttpSource::new(&s.name, s.format, url, limiter.clone(), retry)?));
            }
            (None, None) => bail!("source `{}` has neither fixture nor url", s.name),
        }
    }
    Ok(out)
}

pub fn run(ctx: &Ctx, args: HarvestArgs) -> Result<()> {
    ctx.wd.ensure()?;
    let records = ctx.selected_records(&args.records)?;
    let (items, items_without_doi): (Vec<_>, Vec<_>) = records.iter().partition(|r| r.doi.is_some());
    let items: Vec<CitedItem> =
        items.iter().map(|r| CitedItem { id: r.id.clone(), doi: r.doi.clone().expect("partitioned") }).collect();
    let items_without_doi: Vec<String> = items_without_doi.iter().map(|r| r.id.clone()).collect();
    if !items_without_doi.is_empty() {
        log::warn!("{} record(s) have no DOI and are skipped", items_without_doi.len());
    }
    let sources = build_sources(ctx)?;
    let cache = ctx.cfg.harvest.cache_dir.as_ref().map(DiskCache::new);
    let mut links = LinksBySource::new();
    let mut failures = Vec::new();
    let mut counts = BTreeMap::new();
    for source in &sources {
        let started = std::time::Instant::now();
        let results = fetch_all(source.as_ref(), cache.as_ref(), &items, ctx.cfg.harvest.workers);
        let mut found = Vec::new();
        for (item, r) in items.iter().zip(results) {
            match r {
                Ok(l) => found.extend(l),
                Err(e) => failures.push(FetchFailure {
                    item_id: item.id.clone(),
                    source: source.name().to_string(),
                    error: e.to_string(),
                }),
            }
        }
        let citing: std::collections::BTreeSet<&str> = found.iter().map(|l| l.citing_id.as_str()).collect();
        let cited: std::collections::BTreeSet<&str> = found.iter().map(|l| l.cited_id.as_str()).collect();
        counts.insert(
            source.name().to_string(),
            SourceCounts { links: found.len(), citing_entities: citing.len(), items_with_citations: cited.len() },
        );
        log::info!("{}: {} link(s) in {:.1?}", source.name(), found.len(), started.elapsed());
        links.insert(source.name().to_string(), found);
    }
    write_json(&ctx.wd.path(stages::LINKS), &links)?;

    let merged = merge_sources(&links);
    let policy = ValidityPolicy {
        invalid_types: ctx
            .cfg
            .harvest
            .invalid_types
            .clone()
            .map(|v| v.into_iter().map(|t| t.to_lowercase()).collect())
            .unwrap_or_else(|| ValidityPolicy::default().invalid_types),
        retracted_dois: ctx.cfg.harvest.retracted_dois.iter().filter_map(|d| Doi::parse(d)).collect(),
    };
    let tables = ctx.lookup_tables()?;
    let metadata = ctx.cfg.harvest.metadata.as_deref().map(FixtureMetadataSource::from_file).transpose()?;
    if metadata.is_none() {
        log::warn!("no metadata source configured; entities keep only what the citation sources report");
    }
    let mut entities = Vec::new();
    let mut quarantine = Vec::new();
    for e in &merged.entities {
        let resolved = match &metadata {
            Some(m) => resolve_metadata(e, m, &policy),
            None => Resolution::Resolved(e.clone()),
        };
        match resolved {
            Resolution::Resolved(mut e) => {
                let c = classify_venue(&e.venue_ids, e.venue_title.as_deref(), &tables);
                e.apply_classification(&c);
                entities.push(e);
            }
            Resolution::Quarantined(q) => quarantine.push(q),
        }
    }
    let tally = tally_citations(&entities);
    write_json(&ctx.wd.path(stages::ENTITIES), &entities)?;
    write_json(&ctx.wd.path(stages::QUARANTINE), &quarantine)?;
    let report = HarvestReport {
        cited_items: items.len(),
        items_without_doi,
        sources: counts,
        merged_entities: merged.entities.len(),
        year_conflicts: merged.conflicts.len(),
        ambiguous_matches: merged.ambiguous.len(),
        quarantined: quarantine.len(),
        items_with_citations: tally.items_with_citations,
        links: tally.links,
        failures,
    };
    write_json(&ctx.wd.path(stages::HARVEST_REPORT), &report)?;
    println!(
        "{} citing entities ({} quarantined); {} citation(s) to {} item(s)",
        entities.len(),
        quarantine.len(),
        tally.links,
        tally.items_with_citations
    );
    if !report.failures.is_empty() {
        bail!("{} fetch(es) failed; see {}", report.failures.len(), stages::HARVEST_REPORT);
    }
    Ok(())
}
