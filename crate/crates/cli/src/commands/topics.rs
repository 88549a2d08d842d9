use anyhow::Result;
use retrace_core::reports::TopicsExport;
use retrace_core::textproc::Corpus;
use retrace_core::topics::{fit_lda, group_topic_distribution, select_k, topic_bundle, LdaParams, TopicModel};

use super::Ctx;
use crate::config::parse_k_range;
use crate::stages::{self, write_bytes, write_json};
use crate::{FitArgs, SelectArgs, TopicsExportArgs};

fn params(ctx: &Ctx, k: Option<usize>, seed: Option<u64>, iterations: Option<usize>) -> LdaParams {
    let t = &ctx.cfg.topics;
    LdaParams {
        k: k.unwrap_or(t.k),
        alpha: t.alpha,
        beta: t.beta,
        iterations: iterations.unwrap_or(t.iterations),
        seed: seed.unwrap_or(t.seed),
    }
}

pub fn fit(ctx: &Ctx, args: FitArgs) -> Result<()> {
    let corpus = Corpus::read_json(&ctx.wd.input(&args.corpus, stages::CORPUS))?;
    let p = params(ctx, args.k, args.seed, args.iterations);
    let model = fit_lda(&corpus, &p)?;
    model.write_json(&ctx.wd.path(stages::MODEL))?;
    for t in 0..model.k {
        let terms: Vec<&str> = model.top_terms(t, 8).iter().map(|&w| corpus.vocabulary[w].as_str()).collect();
        println!("topic {t}: {}", terms.join(" "));
    }
    Ok(())
}

pub fn select(ctx: &Ctx, args: SelectArgs) -> Result<()> {
    let corpus = Corpus::read_json(&ctx.wd.input(&args.corpus, stages::CORPUS))?;
    let range = args.k.as_deref().unwrap_or(&ctx.cfg.topics.k_range);
    let ks = parse_k_range(range).map_err(anyhow::Error::msg)?;
    let base = params(ctx, None, args.seed, args.iterations);
    let report = select_k(&corpus, &ks, &base, ctx.cfg.topics.coherence_top_n)?;
    write_json(&ctx.wd.path(stages::COHERENCE), &report)?;
    for (k, c) in &report.per_k {
        println!("k={k} coherence={c:.4}");
    }
    println!("chosen_k={}", report.chosen_k);
    Ok(())
}

pub fn export(ctx: &Ctx, args: TopicsExportArgs) -> Result<()> {
    let corpus = Corpus::read_json(&ctx.wd.path(stages::CORPUS))?;
    let model = TopicModel::read_json(&ctx.wd.path(stages::MODEL))?;
    let t = &ctx.cfg.topics;
    let bundle = topic_bundle(&model, &corpus, args.lambda.unwrap_or(t.lambda), t.relevance_top_n)?;
    let keys = args.group_by.unwrap_or_else(|| t.group_by.clone());
    let mut grouped = Vec::new();
    for key in &keys {
        let table = group_topic_distribution(&model, &corpus, key)?;
        let mut csv = Vec::new();
        table.write_csv(&mut csv)?;
        write_bytes(&ctx.wd.path(&format!("grouped_{key}.csv")), &csv)?;
        grouped.push(table);
    }
    write_json(&ctx.wd.path(stages::TOPICS_EXPORT), &TopicsExport { bundle, grouped })?;
    println!("exported {} topic(s) with {} grouped table(s)", model.k, keys.len());
    Ok(())
}
