//! Venue subject classification.
//!
//! Journals are looked up by ISSN (then by normalized title) in a journal
//! table; books go ISBN → LCC class → subject area through a prefix rule table.
//! Anything else is `unclassified`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::merge::normalize_title;

/// The 27 Scimago subject areas.
pub const SCIMAGO_AREAS: [&str; 27] = [
    "Agricultural and Biological Sciences",
    "Arts and Humanities",
    "Biochemistry, Genetics and Molecular Biology",
    "Business, Management and Accounting",
    "Chemical Engineering",
    "Chemistry",
    "Computer Science",
    "Decision Sciences",
    "Dentistry",
    "Earth and Planetary Sciences",
    "Economics, Econometrics and Finance",
    "Energy",
    "Engineering",
    "Environmental Science",
    "Health Professions",
    "Immunology and Microbiology",
    "Materials Science",
    "Mathematics",
    "Medicine",
    "Multidisciplinary",
    "Neuroscience",
    "Nursing",
    "Pharmacology, Toxicology and Pharmaceutics",
    "Physics and Astronomy",
    "Psychology",
    "Social Sciences",
    "Veterinary",
];

/// LCC class prefix → area rules shipped with the toolkit.
pub const DEFAULT_LCC_RULES: &str = include_str!("../../data/lcc_rules.csv");

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{table}: area `{area}` is not in the configured area taxonomy")]
    UnknownArea { table: String, area: String },
    #[error("{table}: category `{category}` is not in the configured category taxonomy")]
    UnknownCategory { table: String, category: String },
    #[error("{table}: missing column `{column}`")]
    MissingColumn { table: String, column: String },
    #[error("{table}: {source}")]
    Csv { table: String, source: csv::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassificationMethod {
    JournalLookup,
    BookLccMapping,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VenueClassification {
    pub venue_key: String,
    pub areas: Vec<String>,
    pub categories: Vec<String>,
    pub method: ClassificationMethod,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct JournalEntry {
    areas: Vec<String>,
    categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTables {
    areas: BTreeSet<String>,
    categories: Option<BTreeSet<String>>,
    journals_by_issn: BTreeMap<String, JournalEntry>,
    journals_by_title: BTreeMap<String, JournalEntry>,
    books: BTreeMap<String, String>,
    /// Longest prefix first.
    lcc_rules: Vec<(String, Vec<String>)>,
}

impl Default for LookupTables {
    fn default() -> Self {
        let mut t = LookupTables::empty(SCIMAGO_AREAS.iter().map(|s| s.to_string()).collect(), None);
        t.load_lcc_rules(DEFAULT_LCC_RULES.as_bytes()).expect("bundled LCC rules are valid");
        t
    }
}

/// `1234-567x` → `1234-567X`; `None` unless eight ISSN characters remain.
pub fn normalize_issn(raw: &str) -> Option<String> {
    let s: String = raw.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_uppercase();
    let ok = s.len() == 8 && s[..7].chars().all(|c| c.is_ascii_digit()) && s[7..].chars().all(|c| c.is_ascii_digit() || c == 'X');
    ok.then(|| format!("{}-{}", &s[..4], &s[4..]))
}

/// Digits (and a trailing X) of an ISBN-10/13; `None` for other lengths.
pub fn normalize_isbn(raw: &str) -> Option<String> {
    let s: String = raw.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_uppercase();
    let ok = (s.len() == 10 || s.len() == 13)
        && s[..s.len() - 1].chars().all(|c| c.is_ascii_digit())
        && s[s.len() - 1..].chars().all(|c| c.is_ascii_digit() || c == 'X');
    ok.then_some(s)
}

fn split_cell(cell: &str) -> Vec<String> {
    cell.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Letter prefix of an LCC call number: `DS135.P6` → `DS`.
fn lcc_class(lcc: &str) -> String {
    lcc.trim().chars().take_while(|c| c.is_ascii_alphabetic()).collect::<String>().to_uppercase()
}

impl LookupTables {
    /// Empty tables over the given area taxonomy; `categories = None` accepts
    /// any category label.
    pub fn empty(areas: BTreeSet<String>, categories: Option<BTreeSet<String>>) -> LookupTables {
        LookupTables {
            areas,
            categories,
            journals_by_issn: BTreeMap::new(),
            journals_by_title: BTreeMap::new(),
            books: BTreeMap::new(),
            lcc_rules: Vec::new(),
        }
    }

    fn check_areas(&self, table: &str, areas: &[String]) -> Result<(), TableError> {
        match areas.iter().find(|a| !self.areas.contains(*a)) {
            Some(a) => Err(TableError::UnknownArea { table: table.into(), area: a.clone() }),
            None => Ok(()),
        }
    }

    fn read_rows<R: Read>(table: &str, input: R, columns: &[&str]) -> Result<Vec<Vec<String>>, TableError> {
        let csv_err = |source| TableError::Csv { table: table.into(), source };
        let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers().map_err(csv_err)?.clone();
        let idx: Vec<usize> = columns
            .iter()
            .map(|c| {
                headers
                    .iter()
                    .position(|h| h == *c)
                    .ok_or_else(|| TableError::MissingColumn { table: table.into(), column: c.to_string() })
            })
            .collect::<Result<_, _>>()?;
        let mut rows = Vec::new();
        for row in reader.records() {
            let row = row.map_err(csv_err)?;
            rows.push(idx.iter().map(|&i| row.get(i).unwrap_or("").to_string()).collect());
        }
        Ok(rows)
    }

    /// `issn,title,areas,categories`; multi-valued cells use `;`.
    pub fn load_journals<R: Read>(&mut self, input: R) -> Result<(), TableError> {
        for row in Self::read_rows("journals", input, &["issn", "title", "areas", "categories"])? {
            let entry = JournalEntry { areas: split_cell(&row[2]), categories: split_cell(&row[3]) };
            self.check_areas("journals", &entry.areas)?;
            if let Some(known) = &self.categories {
                if let Some(c) = entry.categories.iter().find(|c| !known.contains(*c)) {
                    return Err(TableError::UnknownCategory { table: "journals".into(), category: c.clone() });
                }
            }
            for issn in split_cell(&row[0]).iter().filter_map(|i| normalize_issn(i)) {
                self.journals_by_issn.insert(issn, entry.clone());
            }
            let title = normalize_title(&row[1]);
            if !title.is_empty() {
                self.journals_by_title.insert(title, entry);
            }
        }
        Ok(())
    }

    /// `isbn,lcc`.
    pub fn load_books<R: Read>(&mut self, input: R) -> Result<(), TableError> {
        for row in Self::read_rows("books", input, &["isbn", "lcc"])? {
            if let Some(isbn) = normalize_isbn(&row[0]) {
                self.books.insert(isbn, row[1].trim().to_string());
            }
        }
        Ok(())
    }

    /// `lcc_prefix,areas`; replaces existing rules with the same prefix.
    pub fn load_lcc_rules<R: Read>(&mut self, input: R) -> Result<(), TableError> {
        for row in Self::read_rows("lcc_rules", input, &["lcc_prefix", "areas"])? {
            let prefix = lcc_class(&row[0]);
            let areas = split_cell(&row[1]);
            self.check_areas("lcc_rules", &areas)?;
            self.lcc_rules.retain(|(p, _)| *p != prefix);
            self.lcc_rules.push((prefix, areas));
        }
        self.lcc_rules.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(())
    }

    /// Areas for an LCC call number by longest matching class prefix.
    pub fn lcc_areas(&self, lcc: &str) -> Option<&[String]> {
        let class = lcc_class(lcc);
        self.lcc_rules
            .iter()
            .find(|(p, _)| !p.is_empty() && class.starts_with(p.as_str()))
            .map(|(_, a)| a.as_slice())
    }

    pub fn area_taxonomy(&self) -> &BTreeSet<String> {
        &self.areas
    }
}

pub fn classify_venue(venue_ids: &[String], venue_title: Option<&str>, tables: &LookupTables) -> VenueClassification {
    let journal = |key: String, e: &JournalEntry| VenueClassification {
        venue_key: key,
        areas: e.areas.clone(),
        categories: e.categories.clone(),
        method: ClassificationMethod::JournalLookup,
    };
    for issn in venue_ids.iter().filter_map(|i| normalize_issn(i)) {
        if let Some(e) = tables.journals_by_issn.get(&issn) {
            return journal(issn, e);
        }
    }
    let title = venue_title.map(normalize_title).unwrap_or_default();
    if let Some(e) = tables.journals_by_title.get(&title) {
        return journal(title, e);
    }
    for isbn in venue_ids.iter().filter_map(|i| normalize_isbn(i)) {
        if let Some(areas) = tables.books.get(&isbn).and_then(|lcc| tables.lcc_areas(lcc)) {
            return VenueClassification {
                venue_key: isbn,
                areas: areas.to_vec(),
                categories: vec![],
                method: ClassificationMethod::BookLccMapping,
            };
        }
    }
    let key = venue_ids
        .iter()
        .find_map(|i| normalize_issn(i).or_else(|| normalize_isbn(i)))
        .unwrap_or(title);
    VenueClassification { venue_key: key, areas: vec![], categories: vec![], method: ClassificationMethod::Unclassified }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables() -> LookupTables {
        let mut t = LookupTables::default();
        t.load_journals("issn,title,areas,categories\n0001-0002,Journal of History,Arts and Humanities,History\n".as_bytes())
            .unwrap();
        t.load_books("isbn,lcc\n978-0-00-000000-2,DS135.P6\n0-00-000000-9,BF173\n".as_bytes()).unwrap();
        t
    }

    #[test]
    fn taxonomy_has_27_areas() {
        assert_eq!(SCIMAGO_AREAS.len(), 27);
        assert_eq!(SCIMAGO_AREAS.iter().collect::<BTreeSet<_>>().len(), 27);
    }

    #[test]
    fn journal_by_issn_and_title() {
        let t = tables();
        let c = classify_venue(&["00010002".into()], None, &t);
        assert_eq!(c.method, ClassificationMethod::JournalLookup);
        assert_eq!(c.areas, vec!["Arts and Humanities"]);
        let c = classify_venue(&[], Some("JOURNAL OF HISTORY"), &t);
        assert_eq!(c.method, ClassificationMethod::JournalLookup);
    }

    #[test]
    fn book_goes_through_lcc_rules() {
        let t = tables();
        let c = classify_venue(&["9780000000002".into()], None, &t);
        assert_eq!(c.method, ClassificationMethod::BookLccMapping);
        assert_eq!(c.areas, vec!["Arts and Humanities"]);
        // BF (psychology) overrides the B (philosophy, religion) rule
        let c = classify_venue(&["0000000009".into()], None, &t);
        assert_eq!(c.areas, vec!["Psychology"]);
    }

    #[test]
    fn unknown_venue_is_unclassified() {
        let c = classify_venue(&["9999-9999".into()], Some("Nowhere"), &tables());
        assert_eq!(c.method, ClassificationMethod::Unclassified);
        assert!(c.areas.is_empty());
    }

    #[test]
    fn unknown_area_is_rejected() {
        let mut t = LookupTables::default();
        let err = t.load_journals("issn,title,areas,categories\n0001-0002,X,Astrology,\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TableError::UnknownArea { .. }));
    }

    #[test]
    fn every_default_rule_maps_into_the_taxonomy() {
        let t = LookupTables::default();
        for (_, areas) in &t.lcc_rules {
            assert!(areas.iter().all(|a| t.areas.contains(a)));
        }
        assert_eq!(t.lcc_areas("D"), Some(&["Arts and Humanities".to_string()][..]));
    }
}
