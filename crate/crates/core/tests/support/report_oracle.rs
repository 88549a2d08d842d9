//! Brute-force tally of a report snapshot, shared with the acceptance suite.

use std::collections::{BTreeMap, BTreeSet};

use retrace_core::reports::Snapshot;

/// Independent tally of the snapshot: periods come straight from the years.
pub struct Oracle {
    /// period label -> value -> count
    pub disciplines: BTreeMap<&'static str, BTreeMap<String, u64>>,
    pub areas: BTreeMap<&'static str, BTreeMap<String, u64>>,
    pub citations: BTreeMap<&'static str, u64>,
    pub intents: BTreeMap<&'static str, BTreeMap<String, BTreeMap<String, u64>>>,
    pub sections: BTreeMap<&'static str, BTreeMap<String, BTreeMap<String, u64>>>,
    pub mention: (u64, u64),
    pub unavailable: (u64, u64),
}

pub fn oracle(s: &Snapshot) -> Oracle {
    let item = |id: &str| s.items.iter().find(|i| i.id == id).unwrap();
    let mut o = Oracle {
        disciplines: BTreeMap::new(),
        areas: BTreeMap::new(),
        citations: BTreeMap::new(),
        intents: BTreeMap::new(),
        sections: BTreeMap::new(),
        mention: (0, 0),
        unavailable: (0, 0),
    };
    let mut pair_period = BTreeMap::new();
    let mut post = BTreeSet::new();
    for e in &s.entities {
        for c in &e.cited_items {
            let it = item(c);
            let y = e.year.unwrap();
            let p = if y < it.retraction_year { "P-Pre" } else if y == it.retraction_year { "P-Ret" } else { "P-Post" };
            pair_period.insert((e.id.clone(), c.clone()), p);
            *o.citations.entry(p).or_default() += 1;
            if p != "P-Pre" {
                post.insert(e.id.clone());
            }
            let mut ds: Vec<String> = it.humanities_disciplines.clone();
            ds.sort();
            ds.dedup();
            if ds.is_empty() {
                ds.push("unknown".into());
            }
            for d in ds {
                *o.disciplines.entry(p).or_default().entry(d).or_default() += 1;
            }
            let mut areas = e.subject_areas.clone();
            areas.sort();
            areas.dedup();
            if areas.is_empty() {
                areas.push("Unclassified".into());
            }
            for a in areas {
                *o.areas.entry(p).or_default().entry(a).or_default() += 1;
            }
        }
    }
    for c in &s.citations {
        let p = pair_period[&(c.citing_entity_id.clone(), c.cited_item_id.clone())];
        let sent = c.sentiment.map_or("unannotated", |x| x.as_str()).to_string();
        let intent = c.intent.as_ref().map_or("unannotated".to_string(), |i| i.0.clone());
        *o.intents.entry(p).or_default().entry(intent).or_default().entry(sent.clone()).or_default() += 1;
        *o.sections.entry(p).or_default().entry(c.section.as_str().into()).or_default().entry(sent).or_default() += 1;
    }
    for id in &post {
        let e = s.entities.iter().find(|e| &e.id == id).unwrap();
        let via_citation = s.citations.iter().any(|c| &c.citing_entity_id == id && c.mentions_retraction == Some(true));
        o.mention.0 += u64::from(e.mentions_retraction.unwrap_or(via_citation));
        o.mention.1 += 1;
    }
    o.unavailable = (
        s.entities.iter().filter(|e| !e.full_text_available).count() as u64,
        s.entities.len() as u64,
    );
    o
}

pub fn pct(n: u64, d: u64) -> f64 {
    100.0 * n as f64 / d as f64
}
