use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retrace_core::affinity::{
    filter_by_affinity, score_affinity, AbstractJudgment, AffinityInputs, ScoredItem, DEFAULT_THRESHOLD,
};
use retrace_core::annotation::{
    read_log, replay, traverse_decision_tree, AnnotationInput, AnnotationStore, CitoDecisionTree, Sentiment, TreeStep,
};
use retrace_core::harvest::{merge_sources, restrict_to_items, CitationLink, LinksBySource};
use retrace_core::humanities::{HumanitiesVocabulary, SubjectSource, SubjectTag};
use retrace_core::ingest::{apply_exclusions, ExclusionEntry, ExclusionList};
use retrace_core::reports::{descriptive_report, ReportOptions};
use retrace_core::synthetic::*;
use retrace_core::timeline::{assign_period, Fifth, Period};
use retrace_core::topics::{
    fit_lda, fit_lda_observed, relevance, select_k, topic_map, LdaParams, TopicModel,
};
use retrace_core::Doi;

use super::{common, report_oracle, Outcome};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn link(source: &str, n: u32) -> CitationLink {
    let doi = Doi::parse(&format!("10.1000/w{n}")).unwrap();
    CitationLink {
        citing_id: doi.to_string(),
        citing_doi: Some(doi),
        cited_id: "item".into(),
        source: source.into(),
        creation_year: Some(2015),
        citing_title: None,
    }
}

pub fn merge_arithmetic() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    for i in 0..200 {
        let a: BTreeSet<u32> = (0..r.gen_range(0..300)).map(|_| r.gen_range(0..400)).collect();
        let b: BTreeSet<u32> = (0..r.gen_range(0..300)).map(|_| r.gen_range(0..400)).collect();
        let links: LinksBySource = BTreeMap::from([
            ("a".to_string(), a.iter().map(|&n| link("a", n)).collect()),
            ("b".to_string(), b.iter().map(|&n| link("b", n)).collect()),
        ]);
        let got = merge_sources(&links).entities.len();
        let want = a.len() + b.len() - a.intersection(&b).count();
        ensure!(got == want, "pair {i}: merged {got}, expected {want}");
    }
    let fx = paper_fixture();
    let merged = merge_sources(&fx.links);
    let exclusions = ExclusionList::new(vec![ExclusionEntry { id: fx.outlier_id.clone(), rationale: String::new() }]);
    let selected = apply_exclusions(&fx.records, &exclusions).selected_ids();
    let entities = restrict_to_items(&merged.entities, &selected);
    let in_a = entities.iter().filter(|e| e.sources.contains(PAPER_SOURCE_A.0)).count();
    let in_b = entities.iter().filter(|e| e.sources.contains(PAPER_SOURCE_B.0)).count();
    let both = entities.iter().filter(|e| e.sources.len() == 2).count();
    ensure!(
        (in_a, in_b, both, entities.len())
            == (PAPER_SOURCE_A.1, PAPER_SOURCE_B.1, PAPER_SOURCE_OVERLAP, PAPER_MERGED_ENTITIES),
        "fixture gave {in_a}/{in_b}/{both} -> {}",
        entities.len()
    );
    Ok(format!("200 random pairs exact; {in_a} + {in_b} - {both} = {}", entities.len()))
}

pub fn fifth_assignment() -> Outcome {
    let a = assign_period(2011, 2002, 2012, 2020).map_err(|e| e.to_string())?;
    let label = a.fifth.map(Fifth::label);
    ensure!(a.period == Period::PPre && label == Some("[0.61, 1.00]"), "worked example gave {a:?}");
    for h in -100..=100 {
        let n = Fifth::ALL.iter().filter(|f| (f.bounds().0..=f.bounds().1).contains(&h)).count();
        ensure!(n == 1, "position {h} falls in {n} bins");
    }
    let strategy = (1950i32..2030, 0i32..15, 0i32..30, 0i32..10, -500i32..500);
    runner(10_000)
        .run(&strategy, |(p, dr, dy, dl, shift)| {
            let (r, y) = (p + dr, p + dy);
            let l = y.max(r) + dl;
            let a = assign_period(y, p, r, l).unwrap();
            let expected = if y < r { Period::PPre } else if y == r { Period::PRet } else { Period::PPost };
            prop_assert_eq!(a.period, expected);
            if let Some(h) = a.position_hundredths {
                let x = a.normalized_position().unwrap();
                prop_assert!((-1.0..=1.0).contains(&x));
                let f = a.fifth.unwrap();
                prop_assert!((f.bounds().0..=f.bounds().1).contains(&h));
            }
            prop_assert_eq!(assign_period(y + shift, p + shift, r + shift, l + shift).unwrap(), a);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("worked example P-Pre [0.61, 1.00]; 10000 random cases".into())
}

fn tags(labels: &[&str], source: SubjectSource) -> Vec<SubjectTag> {
    let v = HumanitiesVocabulary::default();
    labels.iter().map(|l| v.tag(l, source)).collect()
}

pub fn affinity() -> Outcome {
    let judgments = [AbstractJudgment::Against, AbstractJudgment::Neutral, AbstractJudgment::For];
    let mut combos = 0;
    for venue in [false, true] {
        for all in [false, true] {
            for title in [false, true] {
                for (j, judgment) in judgments.into_iter().enumerate() {
                    let subjects: &[&str] = if all { &["(HUM) History"] } else { &["(HUM) History", "(SOC) Economics"] };
                    let venue_subjects: &[&str] = if venue { &["Arts and Humanities"] } else { &["Engineering"] };
                    let s = score_affinity(&AffinityInputs {
                        retraction_db_subjects: tags(subjects, SubjectSource::RetractionDb),
                        venue_subjects: tags(venue_subjects, SubjectSource::VenueLookup),
                        title_is_clearly_humanities: title,
                        abstract_judgment: judgment,
                    });
                    let expected = 1 + venue as i32 + all as i32 + title as i32 + j as i32 - 1;
                    ensure!(s.total == expected, "venue={venue} all={all} title={title} abs={j}: {}", s.total);
                    combos += 1;
                }
            }
        }
    }
    const LABELS: [&str; 6] =
        ["(HUM) History", "(HUM) Philosophy", "(SOC) Economics", "(BLS) Biology", "Arts and Humanities", "Engineering"];
    let pick = |ix: &[usize]| ix.iter().map(|&i| LABELS[i]).collect::<Vec<_>>();
    let strategy = (
        prop::collection::vec(0usize..6, 0..4),
        prop::collection::vec(0usize..6, 0..3),
        prop::collection::vec(prop::sample::select(vec![0usize, 1, 4]), 1..3),
        any::<bool>(),
        -1i32..=1,
    );
    runner(1000)
        .run(&strategy, |(base, venue, extra, title, j)| {
            let inputs = AffinityInputs {
                retraction_db_subjects: tags(&pick(&base), SubjectSource::RetractionDb),
                venue_subjects: tags(&pick(&venue), SubjectSource::VenueLookup),
                title_is_clearly_humanities: title,
                abstract_judgment: AbstractJudgment::try_from(j).unwrap(),
            };
            let before = score_affinity(&inputs).total;
            let mut v = inputs.clone();
            v.venue_subjects.extend(tags(&pick(&extra), SubjectSource::VenueLookup));
            prop_assert!(score_affinity(&v).total >= before);
            let mut s = inputs.clone();
            s.retraction_db_subjects.extend(tags(&pick(&extra[..1]), SubjectSource::RetractionDb));
            prop_assert!(score_affinity(&s).total >= before);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let fx = paper_fixture();
    let scored: Vec<ScoredItem> = fx
        .affinity
        .iter()
        .map(|(id, i)| ScoredItem { item_id: id.clone(), score: Some(score_affinity(i)) })
        .collect();
    let part = filter_by_affinity(&scored, DEFAULT_THRESHOLD).map_err(|e| e.to_string())?;
    ensure!(
        scored.len() == 84 && part.dropped.len() == PAPER_LOW_AFFINITY_ITEMS,
        "filter dropped {} of {}",
        part.dropped.len(),
        scored.len()
    );
    Ok(format!("{combos} rule combinations; 1000 monotonicity cases; dropped {} of 84", part.dropped.len()))
}

fn purity(model: &TopicModel) -> f64 {
    let dom = model.dominant_topics();
    let agree = model.doc_ids.iter().zip(&dom).filter(|(id, &t)| t == two_block_label(id)).count();
    agree.max(dom.len() - agree) as f64 / dom.len() as f64
}

pub fn lda() -> Outcome {
    let corpus = random_corpus(25, 60, 30, 3);
    let params = LdaParams { iterations: 50, ..LdaParams::new(4, 11) };
    let mut bad = None;
    fit_lda_observed(&corpus, &params, |s| {
        if bad.is_none() {
            bad = s.check_invariants().err();
        }
    })
    .map_err(|e| e.to_string())?;
    ensure!(bad.is_none(), "invariant broken: {}", bad.unwrap());
    let params = LdaParams { iterations: 200, ..LdaParams::new(3, 99) };
    let a = serde_json::to_vec(&fit_lda(&corpus, &params).unwrap()).unwrap();
    let b = serde_json::to_vec(&fit_lda(&corpus, &params).unwrap()).unwrap();
    ensure!(a == b, "reruns with one seed differ");
    let blocks = two_block_corpus(20, 50, 7);
    let model = fit_lda(&blocks, &LdaParams::new(2, 42)).map_err(|e| e.to_string())?;
    let p = purity(&model);
    ensure!(p >= 0.9, "block purity {p:.3}");
    let report = select_k(&blocks, &[2, 3, 4, 5, 6], &LdaParams::new(2, 42), 10).map_err(|e| e.to_string())?;
    ensure!(report.chosen_k == 2, "select_k chose {} ({:?})", report.chosen_k, report.per_k);
    Ok(format!("invariants over 50 sweeps; identical reruns; purity {p:.2}; chosen k = 2"))
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(x: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&p, &q| x[p].total_cmp(&x[q]));
        let mut r = vec![0.0; x.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
                j += 1;
            }
            for t in &idx[i..=j] {
                r[*t] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn relevance_maps() -> Outcome {
    let corpus = random_corpus(20, 80, 30, 2);
    for seed in 0..50 {
        let mut model = random_model(&corpus, 4, 0.5, seed);
        for row in &mut model.phi {
            row.iter_mut().for_each(|x| *x = (*x * 200.0).round().max(1.0));
            let z: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= z);
        }
        let ranking = relevance(&model, &corpus, 1.0, 80).map_err(|e| e.to_string())?;
        for (t, terms) in ranking.topics.iter().enumerate() {
            let mut expected: Vec<usize> = (0..80).collect();
            expected.sort_by(|&a, &b| model.phi[t][b].total_cmp(&model.phi[t][a]).then(a.cmp(&b)));
            let got: Vec<usize> = terms.iter().map(|r| r.index).collect();
            ensure!(got == expected, "model {seed} topic {t}: lambda = 1 order differs from phi");
        }
    }
    let corpus = random_corpus(20, 50, 30, 6);
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let model = random_model(&corpus, 5, 0.2, seed);
        let map = topic_map(&model, &corpus);
        for i in 0..5 {
            for j in 0..5 {
                let (p, q) = (&model.phi[i], &model.phi[j]);
                let (mut kp, mut kq) = (0.0, 0.0);
                for w in 0..p.len() {
                    let m = (p[w] + q[w]) / 2.0;
                    kp += p[w] * (p[w] / m).log2();
                    kq += q[w] * (q[w] / m).log2();
                }
                let brute: f64 = (0.5 * kp + 0.5 * kq).clamp(0.0, 1.0);
                worst = worst.max((map.distance_matrix[i][j] - brute).abs());
            }
        }
    }
    ensure!(worst < 1e-12, "JSD deviates by {worst:e}");
    let corpus = random_corpus(30, 200, 40, 1);
    let mut sum = 0.0;
    for seed in 0..50 {
        let map = topic_map(&random_model(&corpus, 5, 0.1, seed), &corpus);
        let (mut jsd, mut planar) = (vec![], vec![]);
        for i in 0..5 {
            for j in i + 1..5 {
                let (a, b) = (map.coords_2d[i], map.coords_2d[j]);
                jsd.push(map.distance_matrix[i][j]);
                planar.push(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        sum += spearman(&jsd, &planar);
    }
    let mean = sum / 50.0;
    ensure!(mean >= 0.8, "mean MDS rank correlation {mean:.3}");
    Ok(format!("50 models ordered by phi; JSD within {worst:.0e}; mean MDS rank correlation {mean:.3}"))
}

pub fn reports_oracle() -> Outcome {
    let snap = report_fixture();
    ensure!(snap.entities.len() == 300, "fixture has {} entities", snap.entities.len());
    let report = descriptive_report(&snap, &ReportOptions::default()).map_err(|e| e.to_string())?;
    let o = report_oracle::oracle(&snap);
    for (table, expected) in [
        (&report.citing_by_period_and_discipline, &o.disciplines),
        (&report.subject_area_distribution_per_period, &o.areas),
    ] {
        for ps in &table.periods {
            let exp = &expected[ps.period.label()];
            let den: u64 = exp.values().sum();
            ensure!(ps.denominator == den, "{}: denominator {} vs {den}", ps.period, ps.denominator);
            ensure!(ps.rows.len() == exp.len(), "{}: row sets differ", ps.period);
            for (k, share) in &ps.rows {
                ensure!(share.count == exp[k], "{} {k}: {} vs {}", ps.period, share.count, exp[k]);
                ensure!((share.percent - report_oracle::pct(exp[k], den)).abs() < 0.01, "{} {k}: percent", ps.period);
            }
        }
    }
    for p in &report.in_text_by_intent_section_sentiment.periods {
        for (rows, exp) in [(&p.by_intent, &o.intents), (&p.by_section, &o.sections)] {
            let exp = exp.get(p.period.label()).cloned().unwrap_or_default();
            ensure!(rows.len() == exp.len(), "{}: in-text rows differ", p.period);
            for (k, row) in rows {
                ensure!(row.sentiment == exp[k], "{} {k}: sentiment counts differ", p.period);
            }
        }
    }
    let m = &report.retraction_mention_rate.share;
    ensure!((m.count, m.denominator) == o.mention, "mention rate {}/{} vs {:?}", m.count, m.denominator, o.mention);
    let u = &report.fulltext_unavailable_rate;
    ensure!((u.count, u.denominator) == o.unavailable, "unavailable rate differs");
    let shown: Vec<&str> = report
        .subject_area_distribution_per_period
        .periods
        .iter()
        .map(|p| p.rows[ARTS_AND_HUMANITIES].display.as_str())
        .collect();
    ensure!(shown == ["22.94", "18.42", "18.14"], "A&H shares render as {shown:?}");
    Ok(format!("every table matches the tally; A&H shares {}", shown.join("/")))
}

pub fn decision_tree() -> Outcome {
    let tree = CitoDecisionTree::shipped();
    tree.validate().map_err(|e| e.to_string())?;
    let leaves = tree.leaves();
    for (path, function) in &leaves {
        match traverse_decision_tree(&tree, path).map_err(|e| e.to_string())? {
            TreeStep::Leaf { function: f, .. } => ensure!(&f == function, "{path:?} reached {f}"),
            other => return Err(format!("{path:?} stopped at {other:?}")),
        }
    }
    let reviewing = "Reviewing and eventually giving an opinion on the cited entity";
    for (path, want) in [
        ([reviewing, "Inconsistent with", "10", "critiques"], "critiques"),
        ([reviewing, "Consistent with", "20", "agrees_with"], "agrees_with"),
    ] {
        match traverse_decision_tree(&tree, &path).map_err(|e| e.to_string())? {
            TreeStep::Leaf { function, .. } => ensure!(function.as_str() == want, "{path:?} gave {function}"),
            other => return Err(format!("{path:?} stopped at {other:?}")),
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = dir.path().join("annotations.jsonl");
    let citations = report_fixture().citations;
    let ids: Vec<String> = citations.iter().map(|c| c.id.clone()).collect();
    let functions: Vec<String> = tree.functions.iter().cloned().collect();
    let mut r = ChaCha8Rng::seed_from_u64(1000);
    let live = {
        let mut store = AnnotationStore::open(&log, citations.clone(), tree.functions.clone()).map_err(|e| e.to_string())?;
        for n in 0..1000 {
            let input = AnnotationInput {
                sentiment: Some(Sentiment::ALL.choose(&mut r).unwrap().as_str().into()),
                intent: Some(functions.choose(&mut r).unwrap().clone()),
                mentions_retraction: Some(r.gen_bool(0.1)),
                annotator: Some(format!("annotator{}", r.gen_range(0..3))),
            };
            let ts = format!("2021-01-01T00:00:00.{n:03}Z");
            store.record(ids.choose(&mut r).unwrap(), &input, Some(ts)).map_err(|e| e.to_string())?;
        }
        store.state().to_json()
    };
    let events = read_log(&log).map_err(|e| e.to_string())?;
    ensure!(events.len() == 1000, "log holds {} events", events.len());
    ensure!(replay(&events).to_json() == live, "replayed state differs from the live state");
    Ok(format!("{} leaves reachable; both reviewing paths resolve; 1000-event replay identical", leaves.len()))
}

pub fn end_to_end() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::full_pipeline(a.path());
    common::full_pipeline(b.path());
    let read = |d: &std::path::Path| std::fs::read(d.join("bundle/manifest.json")).map_err(|e| e.to_string());
    let (ma, mb) = (read(a.path())?, read(b.path())?);
    ensure!(ma == mb, "manifests differ between runs");
    let manifest: serde_json::Value = serde_json::from_slice(&ma).map_err(|e| e.to_string())?;
    let n = manifest["artifacts"].as_array().map_or(0, Vec::len);
    Ok(format!("two runs, byte-identical manifest with {n} artifacts"))
}
