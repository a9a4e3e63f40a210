//! Knowledge-graph fact ingestion.
//!
//! Input is a tab-separated dump, one `subject\trelation\tobject` fact per
//! line. Labels are human-readable surface forms, not IRIs.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One knowledge-graph edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactTriple {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

impl FactTriple {
    /// Builds a triple, trimming each field. Fails on empty fields or fields
    /// carrying tabs or line breaks.
    pub fn new(subject: &str, relation: &str, object: &str) -> Result<Self, String> {
        let check = |name: &str, value: &str| -> Result<String, String> {
            let value = value.trim();
            if value.is_empty() {
                return Err(format!("empty {name} field"));
            }
            if value.contains(['\t', '\n', '\r']) {
                return Err(format!("{name} field contains a tab or line break"));
            }
            Ok(value.to_string())
        };
        Ok(Self {
            subject: check("subject", subject)?,
            relation: check("relation", relation)?,
            object: check("object", object)?,
        })
    }
}

/// Parses a triple stream. Blank lines are ignored; every other line must hold
/// exactly three non-empty tab-separated fields. Duplicates are kept.
pub fn parse_triples<R: BufRead>(input: R, source_name: &str) -> Result<Vec<FactTriple>> {
    let mut triples = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse {
            source_name: source_name.to_string(),
            line: line_no,
            message,
        };
        let line = line.map_err(|e| err(e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        triples.push(FactTriple::new(fields[0], fields[1], fields[2]).map_err(err)?);
    }
    Ok(triples)
}

/// Triples grouped by relation, deduplicated, in first-seen order per relation.
///
/// Relations iterate in ascending identifier order. Once built the store is
/// read-only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationStore {
    relations: BTreeMap<String, Vec<FactTriple>>,
}

impl RelationStore {
    pub fn relation_ids(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn triples(&self, relation: &str) -> Option<&[FactTriple]> {
        self.relations.get(relation).map(Vec::as_slice)
    }

    pub fn count(&self, relation: &str) -> usize {
        self.relations.get(relation).map_or(0, Vec::len)
    }

    /// `(relation, triple count)` pairs in relation order.
    pub fn counts(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(r, ts)| (r.as_str(), ts.len()))
    }

    pub fn total(&self) -> usize {
        self.relations.values().map(Vec::len).sum()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn contains(&self, triple: &FactTriple) -> bool {
        self.relations
            .get(&triple.relation)
            .is_some_and(|ts| ts.contains(triple))
    }
}

pub fn group_by_relation<I>(triples: I) -> RelationStore
where
    I: IntoIterator<Item = FactTriple>,
{
    let mut seen = HashSet::new();
    let mut relations: BTreeMap<String, Vec<FactTriple>> = BTreeMap::new();
    for triple in triples {
        if seen.contains(&triple) {
            continue;
        }
        seen.insert(triple.clone());
        relations
            .entry(triple.relation.clone())
            .or_default()
            .push(triple);
    }
    RelationStore { relations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn t(s: &str, r: &str, o: &str) -> FactTriple {
        FactTriple::new(s, r, o).unwrap()
    }

    #[test]
    fn parses_single_line() {
        let got = parse_triples(Cursor::new("Paris\tcapital\tFrance\n"), "kg.tsv").unwrap();
        assert_eq!(got, vec![t("Paris", "capital", "France")]);
    }

    #[test]
    fn empty_stream_is_empty() {
        assert!(parse_triples(Cursor::new(""), "kg.tsv").unwrap().is_empty());
    }

    #[test]
    fn wrong_field_count_reports_line() {
        let err = parse_triples(Cursor::new("a\tb\n"), "kg.tsv").unwrap_err();
        assert!(matches!(err, Error::Parse { ref source_name, line: 1, .. } if source_name == "kg.tsv"));
        let err = parse_triples(Cursor::new("a\tb\tc\nx\ty\tz\tw\n"), "kg.tsv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_field_is_rejected() {
        let err = parse_triples(Cursor::new("a\t \tc\n"), "f").unwrap_err();
        assert!(err.to_string().contains("empty relation"), "{err}");
    }

    #[test]
    fn keeps_duplicates_and_order() {
        let got = parse_triples(Cursor::new("a\tr\tb\nc\tr\td\na\tr\tb\n"), "f").unwrap();
        assert_eq!(got.len(), 3);
        assert_eq!(got[2], got[0]);
    }

    #[test]
    fn groups_and_counts() {
        let store = group_by_relation(vec![t("a", "r1", "b"), t("c", "r2", "d"), t("e", "r1", "f")]);
        assert_eq!(store.count("r1"), 2);
        assert_eq!(store.count("r2"), 1);
        assert_eq!(store.relation_ids().collect::<Vec<_>>(), ["r1", "r2"]);
        assert_eq!(store.triples("r1").unwrap()[1], t("e", "r1", "f"));
    }

    #[test]
    fn collapses_exact_duplicates() {
        let store = group_by_relation(vec![t("a", "r1", "b"), t("a", "r1", "b")]);
        assert_eq!(store.count("r1"), 1);
        assert_eq!(store.total(), 1);
    }
}
