use serde::{Deserialize, Serialize};

use super::section::{classify_section, SectionSynonyms};
use super::{AnnotationError, CitationContext, InTextCitation};

/// Words that take a trailing period without ending a sentence.
const ABBREVIATIONS: &[&str] = &[
    "al", "approx", "ca", "cf", "ch", "chap", "co", "dr", "e.g", "ed", "eds", "eg", "esp", "et", "etc", "fig",
    "figs", "i.e", "ibid", "ie", "inc", "jr", "ltd", "mr", "mrs", "ms", "no", "nos", "op", "p", "pp", "prof",
    "sec", "sr", "st", "trans", "viz", "vol", "vols", "vs",
];

fn is_abbreviation(word: &str) -> bool {
    let w = word.trim_end_matches('.').to_lowercase();
    ABBREVIATIONS.contains(&w.as_str()) || (w.chars().count() == 1 && w.chars().all(char::is_alphabetic))
}

fn opens_sentence(c: char) -> bool {
    c.is_uppercase() || c.is_numeric() || matches!(c, '"' | '“' | '‘' | '(' | '[' | '\'')
}

/// Rule-based splitter on `.`, `!` and `?`. Periods after known abbreviations
/// and initials do not split, nor does punctuation inside parentheses or an
/// open quotation. A break also needs whitespace followed by something that
/// can start a sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut out = Vec::new();
    let mut start = 0;
    let mut depth = 0usize;
    let mut in_quote = false;
    let mut i = 0;
    while i < n {
        let c = chars[i];
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth = depth.saturating_sub(1),
            '“' => in_quote = true,
            '”' => in_quote = false,
            '"' => in_quote = !in_quote,
            _ => {}
        }
        let closes_paren_sentence = c == ')'
            && depth == 0
            && chars[..i].iter().rev().find(|c| !c.is_whitespace()).is_some_and(|p| matches!(p, '.' | '!' | '?'));
        if !(matches!(c, '.' | '!' | '?') && depth == 0 || closes_paren_sentence) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < n && matches!(chars[j], '.' | '!' | '?') {
            j += 1;
        }
        let mut closed_quote = false;
        while j < n && matches!(chars[j], '"' | '”' | '’' | '\'') {
            closed_quote = true;
            j += 1;
        }
        if in_quote && !closed_quote {
            i = j;
            continue;
        }
        if closed_quote {
            in_quote = false;
        }
        if c == '.' && !closes_paren_sentence {
            let word_start = chars[..i]
                .iter()
                .rposition(|c| c.is_whitespace() || matches!(c, '(' | '['))
                .map_or(start, |p| p + 1);
            let word: String = chars[word_start..i].iter().collect();
            if !word.is_empty() && is_abbreviation(&word) {
                i = j;
                continue;
            }
        }
        let mut k = j;
        while k < n && chars[k].is_whitespace() {
            k += 1;
        }
        if k == n || (k > j && opens_sentence(chars[k])) {
            let s: String = chars[start..j].iter().collect();
            if !s.trim().is_empty() {
                out.push(s.trim().to_string());
            }
            start = k;
            in_quote = false;
            i = k;
        } else {
            i = j;
        }
    }
    let rest: String = chars[start.min(n)..].iter().collect();
    if !rest.trim().is_empty() {
        out.push(rest.trim().to_string());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextWarning {
    pub anchor_index: usize,
    pub message: String,
}

/// Anchor sentence plus its neighbours within the same paragraph. When
/// `pointer` is given, an anchor that lacks it yields a warning.
pub fn extract_context<S: AsRef<str>>(
    sentences: &[S],
    anchor_index: usize,
    pointer: Option<&str>,
) -> Result<(CitationContext, Option<ContextWarning>), AnnotationError> {
    let anchor = sentences
        .get(anchor_index)
        .ok_or(AnnotationError::AnchorOutOfRange { index: anchor_index, len: sentences.len() })?
        .as_ref();
    let warning = pointer.filter(|p| !anchor.contains(p)).map(|p| ContextWarning {
        anchor_index,
        message: format!("anchor sentence does not contain pointer `{p}`"),
    });
    let ctx = CitationContext {
        preceding: anchor_index.checked_sub(1).map(|i| sentences[i].as_ref().to_string()),
        anchor: anchor.to_string(),
        following: sentences.get(anchor_index + 1).map(|s| s.as_ref().to_string()),
    };
    Ok((ctx, warning))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextSection {
    pub title: String,
    pub paragraphs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pointer {
    pub cited_item_id: String,
    pub pointer_text: String,
}

/// Pre-extracted full text of a citing entity with the pointers to look for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullText {
    pub citing_entity_id: String,
    pub sections: Vec<TextSection>,
    pub pointers: Vec<Pointer>,
}

/// Finds every sentence containing a pointer and builds its in-text citation.
/// Ids are `<citing>#<n>` numbered in reading order.
pub fn segment_document(doc: &FullText, synonyms: &SectionSynonyms) -> Vec<InTextCitation> {
    let section_len = |s: &TextSection| s.paragraphs.iter().map(|p| p.chars().count()).sum::<usize>();
    let total: usize = doc.sections.iter().map(section_len).sum();
    let mut offset = 0;
    let mut out = Vec::new();
    for section in &doc.sections {
        let position = if total == 0 { 0.0 } else { offset as f64 / total as f64 };
        offset += section_len(section);
        let label = classify_section(&section.title, position, synonyms);
        for paragraph in &section.paragraphs {
            let sentences = split_sentences(paragraph);
            for (i, s) in sentences.iter().enumerate() {
                for p in doc.pointers.iter().filter(|p| !p.pointer_text.is_empty() && s.contains(&p.pointer_text)) {
                    let (context, _) = extract_context(&sentences, i, None).expect("index in range");
                    out.push(InTextCitation {
                        id: format!("{}#{}", doc.citing_entity_id, out.len() + 1),
                        citing_entity_id: doc.citing_entity_id.clone(),
                        cited_item_id: p.cited_item_id.clone(),
                        pointer_text: p.pointer_text.clone(),
                        section: label,
                        section_title: Some(section.title.clone()),
                        context,
                        sentiment: None,
                        intent: None,
                        mentions_retraction: None,
                        annotator: None,
                        annotated_at: None,
                    });
                }
            }
        }
    }
    out
}
