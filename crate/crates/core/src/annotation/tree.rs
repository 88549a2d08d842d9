use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnnotationError, CitoFunction};

/// Decision-tree config shipped with the toolkit.
pub const DEFAULT_TREE_JSON: &str = include_str!("../../data/cito_tree.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeOption {
    pub id: String,
    pub function: CitoFunction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeRow {
    /// Opaque row identifier ("10", "20", ...).
    pub id: String,
    pub options: Vec<TreeOption>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeColumn {
    pub label: String,
    pub rows: Vec<TreeRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroCategory {
    pub id: String,
    pub label: String,
    /// Template with `{column}` and `{function}` placeholders.
    pub guide_sentence: String,
    pub columns: Vec<TreeColumn>,
}

impl MacroCategory {
    pub fn guide(&self, column: &str, function: Option<&CitoFunction>) -> String {
        let f = function.map_or_else(|| "...".to_string(), CitoFunction::display_name);
        self.guide_sentence.replace("{column}", &column.to_lowercase()).replace("{function}", &f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CitoDecisionTree {
    pub version: u32,
    pub functions: BTreeSet<String>,
    pub macro_categories: Vec<MacroCategory>,
}

fn check_unique<'a, I: IntoIterator<Item = &'a str>>(what: &str, ids: I) -> Result<(), AnnotationError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(AnnotationError::TreeConfig(format!("duplicate {what} `{id}`")));
        }
    }
    Ok(())
}

impl CitoDecisionTree {
    pub fn shipped() -> CitoDecisionTree {
        CitoDecisionTree::from_json(DEFAULT_TREE_JSON).expect("shipped decision tree is valid")
    }

    pub fn from_json(text: &str) -> Result<CitoDecisionTree, AnnotationError> {
        let tree: CitoDecisionTree = serde_json::from_str(text)?;
        tree.validate()?;
        Ok(tree)
    }

    pub fn from_file(path: &Path) -> Result<CitoDecisionTree, AnnotationError> {
        CitoDecisionTree::from_json(&std::fs::read_to_string(path)?)
    }

    /// Every leaf names a vocabulary function and sibling selectors are
    /// unique, so every leaf is reachable by exactly one path.
    pub fn validate(&self) -> Result<(), AnnotationError> {
        if self.macro_categories.is_empty() {
            return Err(AnnotationError::TreeConfig("no macro categories".into()));
        }
        check_unique("macro category id", self.macro_categories.iter().map(|m| m.id.as_str()))?;
        check_unique("macro category label", self.macro_categories.iter().map(|m| m.label.as_str()))?;
        for m in &self.macro_categories {
            check_unique("column", m.columns.iter().map(|c| c.label.as_str()))?;
            for c in &m.columns {
                check_unique("row", c.rows.iter().map(|r| r.id.as_str()))?;
                for r in &c.rows {
                    if r.options.is_empty() {
                        return Err(AnnotationError::TreeConfig(format!("row {} of `{}` has no options", r.id, c.label)));
                    }
                    check_unique("option", r.options.iter().map(|o| o.id.as_str()))?;
                    if let Some(o) = r.options.iter().find(|o| !self.functions.contains(o.function.as_str())) {
                        return Err(AnnotationError::TreeConfig(format!(
                            "leaf `{}` is not a configured CiTO function",
                            o.function
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_function(&self, name: &str) -> bool {
        self.functions.contains(name)
    }

    /// All `(path, function)` pairs.
    pub fn leaves(&self) -> Vec<(Vec<String>, CitoFunction)> {
        let mut out = Vec::new();
        for m in &self.macro_categories {
            for c in &m.columns {
                for r in &c.rows {
                    for o in &r.options {
                        out.push((vec![m.label.clone(), c.label.clone(), r.id.clone(), o.id.clone()], o.function.clone()));
                    }
                }
            }
        }
        out
    }
}

/// Outcome of following a (possibly partial) path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeStep {
    Question { level: String, prompt: String, options: Vec<String> },
    Leaf { function: CitoFunction, guide_sentence: String },
}

fn pick<'a, T>(
    level: &str,
    items: &'a [T],
    selection: &str,
    keys: impl Fn(&T) -> Vec<&str>,
    listed: impl Fn(&T) -> String,
) -> Result<&'a T, AnnotationError> {
    let sel = selection.trim();
    items.iter().find(|it| keys(it).iter().any(|k| k.eq_ignore_ascii_case(sel))).ok_or_else(|| {
        AnnotationError::Navigation {
            level: level.to_string(),
            selection: selection.to_string(),
            options: items.iter().map(listed).collect(),
        }
    })
}

/// Follows `path` = [macro category, column, row, option]. Macro categories
/// match on label or id; options on id or function name.
pub fn traverse_decision_tree<S: AsRef<str>>(tree: &CitoDecisionTree, path: &[S]) -> Result<TreeStep, AnnotationError> {
    let path: Vec<&str> = path.iter().map(AsRef::as_ref).collect();
    let Some(sel) = path.first() else {
        return Ok(TreeStep::Question {
            level: "macro_category".into(),
            prompt: "What is the citing text doing with the cited entity?".into(),
            options: tree.macro_categories.iter().map(|m| m.label.clone()).collect(),
        });
    };
    let m = pick("macro_category", &tree.macro_categories, sel, |m| vec![&m.label, &m.id], |m| m.label.clone())?;
    let Some(sel) = path.get(1) else {
        return Ok(TreeStep::Question {
            level: "column".into(),
            prompt: m.guide("____", None),
            options: m.columns.iter().map(|c| c.label.clone()).collect(),
        });
    };
    let c = pick("column", &m.columns, sel, |c| vec![&c.label], |c| c.label.clone())?;
    let Some(sel) = path.get(2) else {
        return Ok(TreeStep::Question {
            level: "row".into(),
            prompt: m.guide(&c.label, None),
            options: c.rows.iter().map(|r| r.id.clone()).collect(),
        });
    };
    let r = pick("row", &c.rows, sel, |r| vec![&r.id], |r| r.id.clone())?;
    let Some(sel) = path.get(3) else {
        return Ok(TreeStep::Question {
            level: "option".into(),
            prompt: m.guide(&c.label, None),
            options: r.options.iter().map(|o| format!("({}) {}", o.id, o.function.display_name())).collect(),
        });
    };
    let o = pick("option", &r.options, sel, |o| vec![&o.id, o.function.as_str()], |o| o.id.clone())?;
    if path.len() > 4 {
        return Err(AnnotationError::Navigation {
            level: "leaf".into(),
            selection: path[4].to_string(),
            options: vec![],
        });
    }
    Ok(TreeStep::Leaf { function: o.function.clone(), guide_sentence: m.guide(&c.label, Some(&o.function)) })
}
