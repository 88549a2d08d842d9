use anyhow::{bail, Context, Result};
use retrace_core::ingest::{
    apply_exclusions, filter_humanities, parse_retraction_file, summarize_retractions, ColumnMapping, ExclusionList,
};
use serde_json::json;

use super::{open, Ctx};
use crate::stages::{self, write_json};
use crate::IngestArgs;

fn mapping(spec: &str) -> Result<ColumnMapping> {
    Ok(match spec {
        "retraction_watch" => ColumnMapping::retraction_watch(),
        "canonical" => ColumnMapping::canonical(),
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading mapping {path}"))?;
            ColumnMapping::from_json(&text).with_context(|| format!("parsing mapping {path}"))?
        }
    })
}

pub fn run(ctx: &Ctx, args: IngestArgs) -> Result<()> {
    ctx.wd.ensure()?;
    let mapping = mapping(args.mapping.as_deref().unwrap_or(&ctx.cfg.ingest.mapping))?;
    let vocabulary = ctx.vocabulary()?;
    let parsed = parse_retraction_file(&args.input, &mapping, &vocabulary)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    let parsed_count = parsed.records.len();
    if parsed_count == 0 && !parsed.rejects.is_empty() {
        bail!("every row of {} was rejected; see {}", args.input.display(), stages::INGEST_REJECTS);
    }
    let humanities_only = ctx.cfg.ingest.humanities_only && !args.all_subjects;
    let records = if humanities_only { filter_humanities(&parsed.records) } else { parsed.records };
    let exclusions = match args.exclusions.as_ref().or(ctx.cfg.ingest.exclusions.as_ref()) {
        Some(p) => ExclusionList::from_csv(open(p)?).with_context(|| format!("reading {}", p.display()))?,
        None => ExclusionList::default(),
    };
    let outcome = apply_exclusions(&records, &exclusions);
    let summary = summarize_retractions(outcome.selected());
    let selected = outcome.selected().count();
    write_json(&ctx.wd.path(stages::RECORDS), &outcome.records)?;
    write_json(&ctx.wd.path(stages::INGEST_REJECTS), &parsed.rejects)?;
    write_json(
        &ctx.wd.path(stages::INGEST_SUMMARY),
        &json!({
            "parsed": parsed_count,
            "rejected_rows": parsed.rejects.len(),
            "humanities_only": humanities_only,
            "after_subject_filter": outcome.records.len(),
            "excluded": outcome.records.len() - selected,
            "selected": selected,
            "exclusion_warnings": outcome.warnings,
            "summary": summary,
        }),
    )?;
    println!(
        "ingested {parsed_count} record(s), {} rejected row(s); {selected} selected after filtering",
        parsed.rejects.len()
    );
    Ok(())
}
