use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use retrace_core::annotation::{
    export_csv, import_csv, read_citations, segment_document, AnnotationStore, CitoDecisionTree, FullText,
    SectionLabel, SectionSynonyms,
};
use retrace_server::AppState;

use super::{open, Ctx};
use crate::stages::{self, read_json, write_json};
use crate::{ExportCsvArgs, ExtractArgs, ImportArgs, ServeArgs};

pub fn extract(ctx: &Ctx, args: ExtractArgs) -> Result<()> {
    ctx.wd.ensure()?;
    let texts: Vec<FullText> = read_json(&args.fulltext)?;
    let mut synonyms = SectionSynonyms::default();
    if let Some(p) = &args.synonyms {
        let extra: BTreeMap<SectionLabel, Vec<String>> = read_json(p)?;
        synonyms.extend(SectionSynonyms(extra));
    }
    let mut citations = Vec::new();
    for doc in &texts {
        let found = segment_document(doc, &synonyms);
        for p in &doc.pointers {
            if !found.iter().any(|c| c.cited_item_id == p.cited_item_id) {
                log::warn!("{}: pointer `{}` not found in the text", doc.citing_entity_id, p.pointer_text);
            }
        }
        citations.extend(found);
    }
    write_json(&ctx.wd.path(stages::IN_TEXT), &citations)?;
    println!("{} in-text citation(s) from {} document(s)", citations.len(), texts.len());
    Ok(())
}

fn tree(path: &Option<PathBuf>) -> Result<CitoDecisionTree> {
    Ok(match path {
        Some(p) => CitoDecisionTree::from_file(p).with_context(|| format!("loading {}", p.display()))?,
        None => CitoDecisionTree::shipped(),
    })
}

fn open_store(ctx: &Ctx, citations: &Option<PathBuf>, log: &Option<PathBuf>, tree: &CitoDecisionTree) -> Result<AnnotationStore> {
    let citations = read_citations(&ctx.wd.input(citations, stages::IN_TEXT))?;
    let log = ctx.wd.input(log, stages::ANNOTATIONS);
    Ok(AnnotationStore::open(&log, citations, tree.functions.clone())?)
}

pub fn serve(ctx: &Ctx, args: ServeArgs) -> Result<()> {
    let tree = tree(&args.tree)?;
    let store = open_store(ctx, &args.citations, &args.log, &tree)?;
    let mut state = AppState::new(store, tree);
    let exports = args.exports.unwrap_or_else(|| ctx.wd.path(stages::BUNDLE));
    state = state.with_exports(exports);
    if let Some(s) = args.static_dir {
        state = state.with_static(s);
    }
    let runtime = tokio::runtime::Runtime::new()?;
    println!("serving on http://{}", args.bind);
    runtime.block_on(retrace_server::serve(state, args.bind))?;
    Ok(())
}

pub fn import(ctx: &Ctx, args: ImportArgs) -> Result<()> {
    let tree = CitoDecisionTree::shipped();
    let mut store = open_store(ctx, &None, &None, &tree)?;
    let n = import_csv(&mut store, open(&args.csv)?, args.annotator.as_deref())
        .with_context(|| format!("importing {}", args.csv.display()))?;
    println!("recorded {n} annotation(s)");
    Ok(())
}

pub fn export(ctx: &Ctx, args: ExportCsvArgs) -> Result<()> {
    let tree = CitoDecisionTree::shipped();
    let store = open_store(ctx, &None, &None, &tree)?;
    let citations = store.citations();
    let file = std::fs::File::create(&args.csv).with_context(|| format!("creating {}", args.csv.display()))?;
    export_csv(&citations, file)?;
    println!("exported {} citation(s)", citations.len());
    Ok(())
}
