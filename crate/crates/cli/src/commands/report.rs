use anyhow::Result;
use retrace_core::reports::{
    citation_series, descriptive_report, export_visualization, report_charts, ReportOptions, Snapshot, TopicsExport,
};
use retrace_core::timeline::CitationPeriod;

use super::corpus::annotated_citations;
use super::Ctx;
use crate::stages::{self, read_json, write_bytes, write_json};
use crate::{ExportArgs, ReportArgs};

/// Everything currently in the work directory, restricted to the items kept
/// by the affinity filter when it has run.
pub fn snapshot(ctx: &Ctx) -> Result<Snapshot> {
    let mut items = ctx.selected_records(&None)?;
    if let Some(kept) = ctx.kept_items()? {
        items.retain(|r| kept.contains(&r.id));
    }
    let entities = ctx.current_entities()?;
    let periods_path = ctx.wd.path(stages::PERIODS);
    let periods: Vec<CitationPeriod> = if periods_path.exists() { read_json(&periods_path)? } else { vec![] };
    Ok(Snapshot { items, entities, periods, citations: annotated_citations(ctx)? })
}

fn options(ctx: &Ctx, args: &ReportArgs) -> ReportOptions {
    let mut o = ctx.cfg.report;
    if let Some(d) = args.mention_denominator {
        o.mention_denominator = d.into();
    }
    o
}

pub fn report(ctx: &Ctx, args: ReportArgs) -> Result<()> {
    let report = descriptive_report(&snapshot(ctx)?, &options(ctx, &args))?;
    write_json(&ctx.wd.path(stages::REPORT), &report)?;
    let t = &report.totals;
    println!(
        "{} cited item(s), {} citing entities, {} citation(s), {} in-text citation(s)",
        t.cited_items, t.citing_entities, t.citations, t.in_text_citations
    );
    for (period, n) in &t.per_period {
        println!("  {period}: {n}");
    }
    Ok(())
}

pub fn export_vis(ctx: &Ctx, args: ExportArgs) -> Result<()> {
    let snap = snapshot(ctx)?;
    let report = descriptive_report(&snap, &ctx.cfg.report)?;
    let series = citation_series(&snap);
    let topics_path = ctx.wd.path(stages::TOPICS_EXPORT);
    let topics: Option<TopicsExport> =
        if !args.no_topics && topics_path.exists() { Some(read_json(&topics_path)?) } else { None };
    let dest = args.out.unwrap_or_else(|| ctx.wd.path(stages::BUNDLE));
    let manifest = export_visualization(&report, &series, topics.as_ref(), &dest)?;
    for (name, svg) in report_charts(&report) {
        write_bytes(&ctx.wd.path("charts").join(name), svg.as_bytes())?;
    }
    write_json(&ctx.wd.path(stages::REPORT), &report)?;
    println!("bundle at {} with {} artifact(s)", dest.display(), manifest.artifacts.len());
    Ok(())
}
