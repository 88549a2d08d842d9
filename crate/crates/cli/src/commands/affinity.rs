use std::collections::BTreeSet;

use anyhow::{Context, Result};
use retrace_core::affinity::{
    filter_by_affinity, read_judgments, score_affinity, AbstractJudgment, AffinityInputs, ScoredItem,
};
use retrace_core::harvest::{classify_venue, restrict_to_items, tally_citations, CitingEntity};
use retrace_core::humanities::SubjectSource;

use super::{open, Ctx};
use crate::stages::{self, read_json, write_json};
use crate::{AffinityFilterArgs, AffinityScoreArgs};

/// Scores every selected item that has at least one citing entity. Items
/// missing from a judgment sidecar stay unscored so the filter refuses to run
/// until a human has judged them.
pub fn score(ctx: &Ctx, args: AffinityScoreArgs) -> Result<()> {
    let records = ctx.selected_records(&args.records)?;
    let entities: Vec<CitingEntity> = read_json(&ctx.wd.input(&args.entities, stages::ENTITIES))?;
    let cited: BTreeSet<&str> = entities.iter().flat_map(|e| e.cited_items.iter().map(String::as_str)).collect();
    let vocabulary = ctx.vocabulary()?;
    let tables = ctx.lookup_tables()?;
    let judgments = match args.judgments.as_ref().or(ctx.cfg.affinity.judgments.as_ref()) {
        Some(p) => Some(read_judgments(open(p)?).with_context(|| format!("reading {}", p.display()))?),
        None => {
            log::warn!("no judgment sidecar: title and abstract terms count as 0");
            None
        }
    };
    let mut scored = Vec::new();
    let mut unscored = 0;
    for r in records.iter().filter(|r| cited.contains(r.id.as_str())) {
        let judgment = match &judgments {
            Some(j) => j.get(&r.id).map(|j| (j.title_bonus, j.abstract_adjustment)),
            None => Some((false, AbstractJudgment::Neutral)),
        };
        let score = judgment.map(|(title, abs)| {
            let venue = classify_venue(&r.venue_ids, r.venue.as_deref(), &tables);
            let venue_subjects = venue
                .areas
                .iter()
                .chain(&venue.categories)
                .map(|l| vocabulary.tag(l, SubjectSource::VenueLookup))
                .collect();
            score_affinity(&AffinityInputs {
                retraction_db_subjects: r.subjects.clone(),
                venue_subjects,
                title_is_clearly_humanities: title,
                abstract_judgment: abs,
            })
        });
        if score.is_none() {
            log::warn!("item `{}` has no human judgment", r.id);
            unscored += 1;
        }
        scored.push(ScoredItem { item_id: r.id.clone(), score });
    }
    write_json(&ctx.wd.path(stages::AFFINITY_SCORES), &scored)?;
    println!("scored {} item(s), {unscored} awaiting judgment", scored.len() - unscored);
    Ok(())
}

pub fn filter(ctx: &Ctx, args: AffinityFilterArgs) -> Result<()> {
    let scored: Vec<ScoredItem> = read_json(&ctx.wd.input(&args.scores, stages::AFFINITY_SCORES))?;
    let threshold = args.threshold.unwrap_or(ctx.cfg.affinity.threshold);
    let partition = filter_by_affinity(&scored, threshold)?;
    let entities: Vec<CitingEntity> = read_json(&ctx.wd.path(stages::ENTITIES))?;
    let dataset = restrict_to_items(&entities, &partition.kept_ids());
    let (before, after) = (tally_citations(&entities), tally_citations(&dataset));
    write_json(&ctx.wd.path(stages::AFFINITY_PARTITION), &partition)?;
    write_json(&ctx.wd.path(stages::DATASET), &dataset)?;
    println!(
        "kept {} item(s), dropped {}; {} citation(s) removed, {} citing entities remain",
        partition.kept.len(),
        partition.dropped.len(),
        before.links - after.links,
        dataset.len()
    );
    Ok(())
}
