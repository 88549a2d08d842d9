use anyhow::Result;
use retrace_core::harvest::CitingEntity;
use retrace_core::timeline::{segment_citations, Period};

use super::Ctx;
use crate::stages::{self, read_json, write_json};
use crate::SegmentArgs;

pub fn run(ctx: &Ctx, args: SegmentArgs) -> Result<()> {
    let records = ctx.selected_records(&args.records)?;
    let entities: Vec<CitingEntity> = match &args.citations {
        Some(p) => read_json(p)?,
        None => ctx.current_entities()?,
    };
    let outcome = segment_citations(&records, &entities);
    let out = args.out.unwrap_or_else(|| ctx.wd.path(stages::PERIODS));
    write_json(&out, &outcome.periods)?;
    write_json(&out.with_file_name(stages::SEGMENT_REJECTS), &outcome.rejects)?;
    let per: Vec<String> = Period::ALL
        .into_iter()
        .map(|p| format!("{} {}", p.label(), outcome.periods.iter().filter(|c| c.assignment.period == p).count()))
        .collect();
    println!("{} citation(s): {}; {} rejected", outcome.periods.len(), per.join(", "), outcome.rejects.len());
    Ok(())
}
