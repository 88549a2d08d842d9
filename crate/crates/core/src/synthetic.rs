//! Deterministic synthetic datasets for tests, demos and the acceptance suite.
//!
//! The generators reproduce the headline counts of a real retraction-citation
//! study (record totals, source overlap, affinity drop-outs, report
//! percentages) without any of its licensed data.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affinity::{AbstractJudgment, AffinityInputs};
use crate::annotation::{CitationContext, CitoFunction, InTextCitation, SectionLabel, Sentiment};
use crate::doi::Doi;
use crate::harvest::{CitationLink, CitingEntity, LinksBySource, SCIMAGO_AREAS};
use crate::humanities::{HumanitiesVocabulary, SubjectSource};
use crate::ingest::{ItemType, RetractedPublication};
use crate::reports::Snapshot;
use crate::textproc::{Corpus, SourceDocument};
use crate::timeline::{segment_citations, Period};
use crate::topics::TopicModel;

pub const ARTS_AND_HUMANITIES: &str = "Arts and Humanities";

const DISCIPLINES: [&str; 8] =
    ["architecture", "arts", "history", "journalism", "linguistics", "literature", "philosophy", "religion"];

const REASONS: [&str; 6] = [
    "Plagiarism of Article",
    "Duplication of Article",
    "Fake Peer Review",
    "Error in Analyses",
    "Concerns/Issues About Data",
    "Withdrawal",
];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn item_doi(id: &str) -> Doi {
    Doi::parse(&format!("10.5555/{id}")).expect("valid doi")
}

/// A humanities retraction record with plausible years and subjects.
pub fn retracted_item(id: &str, r: &mut ChaCha8Rng) -> RetractedPublication {
    let vocab = HumanitiesVocabulary::default();
    let retraction_year = r.gen_range(2002..=2020);
    let pub_year = retraction_year - r.gen_range(0..=6).min(retraction_year - 1996);
    let discipline = DISCIPLINES[r.gen_range(0..DISCIPLINES.len())];
    let head = format!("(HUM) {}{}", discipline[..1].to_uppercase(), &discipline[1..]);
    let mut labels = vec![head];
    if r.gen_bool(0.3) {
        labels.push("(SOC) Sociology".into());
    }
    RetractedPublication {
        id: id.to_string(),
        doi: Some(item_doi(id)),
        title: format!("On {discipline}: study {id}"),
        pub_year,
        retraction_year,
        subjects: labels.iter().map(|l| vocab.tag(l, SubjectSource::RetractionDb)).collect(),
        humanities_disciplines: vec![discipline.to_string()],
        reasons: vec![REASONS[r.gen_range(0..REASONS.len())].to_string()],
        item_type: if r.gen_bool(0.85) { ItemType::Article } else { ItemType::BookChapter },
        venue: Some(format!("Journal of {discipline}")),
        venue_ids: vec![],
        excluded: false,
        exclusion_rationale: None,
    }
}

/// Harvest-stage fixture: 474 records, 85 of them cited through two sources.
#[derive(Debug, Clone)]
pub struct PaperFixture {
    pub records: Vec<RetractedPublication>,
    pub links: LinksBySource,
    /// Heavily cited item removed by the exclusion list.
    pub outlier_id: String,
    /// Affinity inputs of the 84 items left after the exclusion.
    pub affinity: Vec<(String, AffinityInputs)>,
}

pub const PAPER_RECORDS: usize = 474;
pub const PAPER_CITED_ITEMS: usize = 85;
pub const PAPER_LINKS: usize = 2054;
pub const PAPER_OUTLIER_CITATIONS: usize = 1050;
pub const PAPER_SOURCE_A: (&str, usize) = ("mag", 891);
pub const PAPER_SOURCE_B: (&str, usize) = ("coci", 388);
pub const PAPER_SOURCE_OVERLAP: usize = 344;
pub const PAPER_MERGED_ENTITIES: usize = 935;
pub const PAPER_LOW_AFFINITY_ITEMS: usize = 12;
pub const PAPER_LOW_AFFINITY_CITATIONS: usize = 257;
pub const PAPER_KEPT_ENTITIES: usize = 678;
/// Entities of the kept items that cite two of them.
const DOUBLE_CITERS: usize = 69;

fn record_id(i: usize) -> String {
    format!("rw{i:04}")
}

/// Builds the harvest fixture. Item `rw0001` is the outlier; `rw0074..=rw0085`
/// score below the affinity threshold.
pub fn paper_fixture() -> PaperFixture {
    let mut r = rng(2021);
    let records: Vec<RetractedPublication> =
        (1..=PAPER_RECORDS).map(|i| retracted_item(&record_id(i), &mut r)).collect();
    let outlier_id = record_id(1);
    let kept: Vec<String> = (2..=73).map(record_id).collect();
    let low: Vec<String> = (74..=85).map(record_id).collect();
    let by_id: BTreeMap<&str, &RetractedPublication> = records.iter().map(|x| (x.id.as_str(), x)).collect();

    let (a_name, a_size) = PAPER_SOURCE_A;
    let (b_name, _) = PAPER_SOURCE_B;
    let b_start = a_size - PAPER_SOURCE_OVERLAP;
    let mut links: LinksBySource = BTreeMap::new();
    for i in 0..PAPER_MERGED_ENTITIES {
        let mut cited = vec![if i < PAPER_LOW_AFFINITY_CITATIONS {
            low[i % low.len()].clone()
        } else {
            kept[(i - PAPER_LOW_AFFINITY_CITATIONS) % kept.len()].clone()
        }];
        if (PAPER_LOW_AFFINITY_CITATIONS..PAPER_LOW_AFFINITY_CITATIONS + DOUBLE_CITERS).contains(&i) {
            let k = (i - PAPER_LOW_AFFINITY_CITATIONS + 1) % kept.len();
            cited.push(kept[k].clone());
        }
        let earliest = cited.iter().map(|c| by_id[c.as_str()].pub_year).max().unwrap();
        let year = r.gen_range(earliest..=2021);
        let doi = (i >= b_start || i % 10 != 3).then(|| Doi::parse(&format!("10.7777/citing.{i}")).unwrap());
        let title = format!("Citing work number {i}");
        if i < a_size {
            for c in &cited {
                links.entry(a_name.into()).or_default().push(CitationLink {
                    citing_id: doi.as_ref().map_or_else(|| format!("{a_name}:{i}"), |d| d.to_string()),
                    citing_doi: doi.clone(),
                    cited_id: c.clone(),
                    source: a_name.into(),
                    creation_year: Some(year),
                    citing_title: Some(title.clone()),
                });
            }
        }
        if i >= b_start {
            // a handful of shared works carry different years in the two sources
            let b_year = if i % 97 == 0 { year + 1 } else { year };
            for c in &cited {
                links.entry(b_name.into()).or_default().push(CitationLink {
                    citing_id: doi.as_ref().unwrap().to_string(),
                    citing_doi: doi.clone(),
                    cited_id: c.clone(),
                    source: b_name.into(),
                    creation_year: Some(b_year),
                    citing_title: None,
                });
            }
        }
    }
    let outlier_year = by_id[outlier_id.as_str()].pub_year;
    for n in 0..PAPER_OUTLIER_CITATIONS {
        let doi = Doi::parse(&format!("10.8888/outlier.{n}")).unwrap();
        links.entry(a_name.into()).or_default().push(CitationLink {
            citing_id: doi.to_string(),
            citing_doi: Some(doi),
            cited_id: outlier_id.clone(),
            source: a_name.into(),
            creation_year: Some(r.gen_range(outlier_year..=2021)),
            citing_title: None,
        });
    }
    for l in links.values_mut() {
        l.sort();
    }

    let vocab = HumanitiesVocabulary::default();
    let tag = |l: &str, s| vocab.tag(l, s);
    let affinity = kept
        .iter()
        .chain(&low)
        .enumerate()
        .map(|(n, id)| {
            let item = by_id[id.as_str()];
            let inputs = if n < kept.len() {
                // totals between 2 and 5
                let venue = if n % 3 == 0 { "Social Sciences" } else { ARTS_AND_HUMANITIES };
                AffinityInputs {
                    retraction_db_subjects: item.subjects.clone(),
                    venue_subjects: vec![tag(venue, SubjectSource::VenueLookup)],
                    title_is_clearly_humanities: n % 2 == 0,
                    abstract_judgment: if n % 3 == 0 { AbstractJudgment::For } else { AbstractJudgment::Neutral },
                }
            } else {
                // totals 0 or 1
                AffinityInputs {
                    retraction_db_subjects: vec![
                        tag("(HUM) Philosophy", SubjectSource::RetractionDb),
                        tag("(BLS) Biology - Cellular", SubjectSource::RetractionDb),
                    ],
                    venue_subjects: vec![tag("Medicine", SubjectSource::VenueLookup)],
                    title_is_clearly_humanities: false,
                    abstract_judgment: if n % 2 == 0 { AbstractJudgment::Against } else { AbstractJudgment::Neutral },
                }
            };
            (id.clone(), inputs)
        })
        .collect();
    PaperFixture { records, links, outlier_id, affinity }
}

/// Shape of one period in a report fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodSpec {
    pub period: Period,
    pub entities: usize,
    /// (entity, subject area) assignments; at least `entities`.
    pub assignments: usize,
    /// Assignments to Arts and Humanities.
    pub humanities: usize,
    /// Entities without full text.
    pub unavailable: usize,
    /// Entities whose contexts mention the retraction.
    pub mentioning: usize,
}

/// 300 entities; Arts and Humanities shares render as 22.94 / 18.42 / 18.14
/// and 5 of the 222 P-Ret/P-Post entities mention the retraction.
pub const REPORT_FIXTURE: [PeriodSpec; 3] = [
    PeriodSpec { period: Period::PPre, entities: 78, assignments: 109, humanities: 25, unavailable: 4, mentioning: 0 },
    PeriodSpec { period: Period::PRet, entities: 42, assignments: 76, humanities: 14, unavailable: 3, mentioning: 2 },
    PeriodSpec { period: Period::PPost, entities: 180, assignments: 204, humanities: 37, unavailable: 5, mentioning: 3 },
];

/// 546 entities: 192 P-Pre, 94 P-Ret, 260 P-Post; 46 without full text.
pub const PERIOD_TOTALS_FIXTURE: [PeriodSpec; 3] = [
    PeriodSpec { period: Period::PPre, entities: 192, assignments: 230, humanities: 40, unavailable: 15, mentioning: 0 },
    PeriodSpec { period: Period::PRet, entities: 94, assignments: 110, humanities: 20, unavailable: 8, mentioning: 1 },
    PeriodSpec { period: Period::PPost, entities: 260, assignments: 300, humanities: 50, unavailable: 23, mentioning: 4 },
];

const INTENTS: [(&str, u32); 8] = [
    ("obtains_background_from", 30),
    ("cites_for_information", 22),
    ("discusses", 12),
    ("cites_as_related", 10),
    ("describes", 8),
    ("critiques", 6),
    ("supports", 6),
    ("disagrees_with", 6),
];

fn weighted<'a>(r: &mut ChaCha8Rng, table: &[(&'a str, u32)]) -> &'a str {
    let total: u32 = table.iter().map(|t| t.1).sum();
    let mut x = r.gen_range(0..total);
    for (v, w) in table {
        if x < *w {
            return v;
        }
        x -= w;
    }
    unreachable!()
}

/// Builds a dataset snapshot with one cited item per entity, periods assigned
/// through [`segment_citations`] and annotated in-text citations.
pub fn snapshot_from_spec(specs: &[PeriodSpec], seed: u64) -> Snapshot {
    let mut r = rng(seed);
    let items: Vec<RetractedPublication> = (0..10)
        .map(|i| {
            let mut it = retracted_item(&format!("ri{i:02}"), &mut r);
            it.pub_year = 2000 + (i as i32 % 3);
            it.retraction_year = 2008 + (i as i32 % 4);
            it
        })
        .collect();
    let other_areas: Vec<&str> = SCIMAGO_AREAS.iter().copied().filter(|a| *a != ARTS_AND_HUMANITIES).collect();
    let mut entities = Vec::new();
    let mut citations = Vec::new();
    for spec in specs {
        assert!(spec.assignments >= spec.entities && spec.humanities <= spec.entities);
        let n = spec.entities;
        let mut areas: Vec<Vec<String>> = vec![Vec::new(); n];
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut r);
        for &e in &order[..spec.humanities] {
            areas[e].push(ARTS_AND_HUMANITIES.into());
        }
        // entities without A&H get one other area; a few stay unclassified
        for (k, &e) in order[spec.humanities..].iter().enumerate() {
            if k % 17 != 5 {
                areas[e].push(other_areas[r.gen_range(0..other_areas.len())].into());
            }
        }
        let mut remaining = spec.assignments - n;
        while remaining > 0 {
            let e = r.gen_range(0..n);
            if areas[e].is_empty() {
                continue;
            }
            let a = other_areas[r.gen_range(0..other_areas.len())];
            if !areas[e].iter().any(|x| x == a) {
                areas[e].push(a.into());
                remaining -= 1;
            }
        }
        let mut flags: Vec<(bool, bool)> = vec![(true, false); n];
        order.shuffle(&mut r);
        for &e in &order[..spec.unavailable] {
            flags[e].0 = false;
        }
        for &e in &order[spec.unavailable..spec.unavailable + spec.mentioning] {
            flags[e].1 = true;
        }
        for (e, (area, (full_text, mentions))) in areas.into_iter().zip(flags).enumerate() {
            let item = &items[r.gen_range(0..items.len())];
            let (p, rt) = (item.pub_year, item.retraction_year);
            let year = match spec.period {
                Period::PPre => r.gen_range(p..rt),
                Period::PRet => rt,
                Period::PPost => r.gen_range(rt + 1..=rt + 8),
            };
            let id = format!("{}-{e:03}", spec.period.label().to_lowercase());
            let mut ent = CitingEntity::from_link(&CitationLink {
                citing_id: id.clone(),
                citing_doi: Doi::parse(&format!("10.9999/{id}")),
                cited_id: item.id.clone(),
                source: "coci".into(),
                creation_year: Some(year),
                citing_title: Some(format!("Citing entity {id}")),
            });
            ent.subject_areas = area;
            ent.full_text_available = full_text;
            let flag_on_entity = mentions && e % 2 == 0;
            if flag_on_entity {
                ent.mentions_retraction = Some(true);
            }
            if full_text {
                for c in 0..r.gen_range(1..=3) {
                    let sentiment = match r.gen_range(0..100) {
                        0..=4 => Some(Sentiment::Negative),
                        5..=6 => Some(Sentiment::Positive),
                        7..=14 => None,
                        _ => Some(Sentiment::Neutral),
                    };
                    let annotated = sentiment.is_some();
                    citations.push(InTextCitation {
                        id: format!("{id}#{}", c + 1),
                        citing_entity_id: id.clone(),
                        cited_item_id: item.id.clone(),
                        pointer_text: "[1]".into(),
                        section: SectionLabel::ALL[r.gen_range(0..SectionLabel::ALL.len())],
                        section_title: None,
                        context: CitationContext {
                            preceding: None,
                            anchor: format!("As argued in [1], the case of {} matters.", item.title),
                            following: None,
                        },
                        sentiment,
                        intent: annotated.then(|| CitoFunction(weighted(&mut r, &INTENTS).into())),
                        mentions_retraction: annotated.then_some(mentions && !flag_on_entity && c == 0),
                        annotator: annotated.then(|| "fixture".into()),
                        annotated_at: annotated.then(|| "2021-06-01T00:00:00.000Z".into()),
                    });
                }
                if mentions && !flag_on_entity && !citations.last().unwrap().mentions_retraction.unwrap_or(false) {
                    // make sure the mention is recorded even if the first context went unannotated
                    let c = citations.iter_mut().rev().find(|c| c.citing_entity_id == id).unwrap();
                    c.sentiment = Some(Sentiment::Neutral);
                    c.intent = Some(CitoFunction("discusses".into()));
                    c.mentions_retraction = Some(true);
                    c.annotator = Some("fixture".into());
                    c.annotated_at = Some("2021-06-01T00:00:00.000Z".into());
                }
            }
            entities.push(ent);
        }
    }
    let periods = segment_citations(&items, &entities).periods;
    Snapshot { items, entities, periods, citations }
}

pub fn report_fixture() -> Snapshot {
    snapshot_from_spec(&REPORT_FIXTURE, 300)
}

pub fn period_totals_fixture() -> Snapshot {
    snapshot_from_spec(&PERIOD_TOTALS_FIXTURE, 546)
}

/// Two disjoint vocabularies (`a00..`, `b00..`); every document contains its
/// whole block, each term 1 to 3 times.
pub fn two_block_corpus(docs_per_block: usize, terms_per_block: usize, seed: u64) -> Corpus {
    let mut r = rng(seed);
    let mut docs = Vec::new();
    for block in ["a", "b"] {
        for d in 0..docs_per_block {
            let mut toks = Vec::new();
            for t in 0..terms_per_block {
                for _ in 0..r.gen_range(1..=3) {
                    toks.push(format!("{block}{t:02}"));
                }
            }
            toks.shuffle(&mut r);
            docs.push((format!("{block}-doc{d:02}"), toks));
        }
    }
    Corpus::from_tokens(docs).expect("non-empty")
}

/// Block (0 or 1) a two-block document id belongs to.
pub fn two_block_label(doc_id: &str) -> usize {
    usize::from(doc_id.starts_with('b'))
}

const THEMES: [&[&str]; 5] = [
    &["leadership", "organization", "management", "team", "employee", "performance", "firm", "strategy"],
    &["museum", "heritage", "archive", "collection", "exhibition", "curator", "artifact", "restoration"],
    &["scripture", "ritual", "theology", "belief", "church", "sacred", "doctrine", "worship"],
    &["novel", "poetry", "narrative", "author", "reader", "genre", "metaphor", "translation"],
    &["plagiarism", "misconduct", "retraction", "integrity", "editor", "journal", "duplication", "fraud"],
];

const FILLER: &[&str] = &[
    "the", "of", "and", "in", "this", "study", "we", "method", "results", "conclusions", "paper", "analysis",
];

/// Short theme-mixture abstracts with period and discipline metadata.
pub fn abstracts_fixture(n: usize, seed: u64) -> Vec<SourceDocument> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let main = r.gen_range(0..THEMES.len());
            let second = r.gen_range(0..THEMES.len());
            let words: Vec<&str> = (0..r.gen_range(25..60))
                .map(|_| match r.gen_range(0..10) {
                    0..=5 => THEMES[main][r.gen_range(0..THEMES[main].len())],
                    6..=7 => THEMES[second][r.gen_range(0..THEMES[second].len())],
                    _ => FILLER[r.gen_range(0..FILLER.len())],
                })
                .collect();
            let period = Period::ALL[r.gen_range(0..3)].label().to_string();
            let discipline = DISCIPLINES[r.gen_range(0..DISCIPLINES.len())].to_string();
            SourceDocument {
                id: format!("abs{i:04}"),
                text: format!("{}.", words.join(" ")),
                metadata: BTreeMap::from([
                    ("period".to_string(), vec![period]),
                    ("discipline".to_string(), vec![discipline]),
                ]),
            }
        })
        .collect()
}

fn dirichlet_row(r: &mut ChaCha8Rng, n: usize, concentration: f64) -> Vec<f64> {
    // Gamma(c, 1) via Marsaglia-Tsang with the c < 1 boost
    let gamma = |r: &mut ChaCha8Rng, c: f64| -> f64 {
        let (shape, boost) = if c < 1.0 { (c + 1.0, true) } else { (c, false) };
        let d = shape - 1.0 / 3.0;
        let cc = 1.0 / (9.0 * d).sqrt();
        let g = loop {
            let (u1, u2): (f64, f64) = (r.gen(), r.gen());
            let z = (-2.0 * u1.max(f64::MIN_POSITIVE).ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            let v = (1.0 + cc * z).powi(3);
            if v <= 0.0 {
                continue;
            }
            let u: f64 = r.gen();
            if u.ln() < 0.5 * z * z + d - d * v + d * v.ln() {
                break d * v;
            }
        };
        if boost {
            g * r.gen::<f64>().powf(1.0 / c)
        } else {
            g
        }
    };
    let raw: Vec<f64> = (0..n).map(|_| gamma(r, concentration).max(1e-300)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// A topic model with Dirichlet-random phi and theta over `corpus`.
pub fn random_model(corpus: &Corpus, k: usize, concentration: f64, seed: u64) -> TopicModel {
    let mut r = rng(seed);
    let v = corpus.vocab_size();
    TopicModel {
        schema_version: crate::topics::MODEL_SCHEMA_VERSION,
        k,
        alpha: 50.0 / k as f64,
        beta: 0.01,
        iterations: 0,
        seed,
        corpus_hash: corpus.hash(),
        doc_ids: corpus.documents.iter().map(|d| d.id.clone()).collect(),
        phi: (0..k).map(|_| dirichlet_row(&mut r, v, concentration)).collect(),
        theta: (0..corpus.num_docs()).map(|_| dirichlet_row(&mut r, k, 1.0)).collect(),
        assignments: vec![],
        labels: vec![None; k],
    }
}

/// A random bag-of-words corpus over `vocab` terms `t000..`.
pub fn random_corpus(docs: usize, vocab: usize, max_len: usize, seed: u64) -> Corpus {
    let mut r = rng(seed);
    let mut seen = BTreeSet::new();
    let mut out: Vec<(String, Vec<String>)> = (0..docs)
        .map(|d| {
            let toks: Vec<String> = (0..r.gen_range(1..=max_len))
                .map(|_| {
                    let t = r.gen_range(0..vocab);
                    seen.insert(t);
                    format!("t{t:03}")
                })
                .collect();
            (format!("d{d:03}"), toks)
        })
        .collect();
    // every term appears somewhere so the vocabulary has exactly `vocab` terms
    for t in (0..vocab).filter(|t| !seen.contains(t)) {
        out[t % docs].1.push(format!("t{t:03}"));
    }
    Corpus::from_tokens(out).expect("non-empty")
}
