//! DOI normalization.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const PREFIXES: &[&str] = &[
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "doi:",
];

/// A normalized DOI: trimmed, lowercase, no resolver prefix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Doi(String);

impl Doi {
    /// Normalizes `raw`, returning `None` when nothing is left.
    pub fn parse(raw: &str) -> Option<Doi> {
        let mut s = raw.trim().to_lowercase();
        loop {
            let before = s.len();
            for p in PREFIXES {
                if let Some(rest) = s.strip_prefix(p) {
                    s = rest.trim_start().to_string();
                }
            }
            if s.len() == before {
                break;
            }
        }
        let s = s.trim().to_string();
        if s.is_empty() {
            None
        } else {
            Some(Doi(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Doi {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Doi {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Doi::parse(&raw).ok_or_else(|| serde::de::Error::custom("empty DOI"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_resolver_and_lowercases() {
        let d = Doi::parse("  https://doi.org/10.1207/S15326934CRJ1801_10 ").unwrap();
        assert_eq!(d.as_str(), "10.1207/s15326934crj1801_10");
        assert_eq!(Doi::parse("doi:10.1/ABC").unwrap().as_str(), "10.1/abc");
        assert_eq!(Doi::parse("http://dx.doi.org/10.5/x").unwrap().as_str(), "10.5/x");
    }

    #[test]
    fn empty_is_none() {
        assert!(Doi::parse("   ").is_none());
        assert!(Doi::parse("https://doi.org/").is_none());
    }
}
