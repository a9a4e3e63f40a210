//! Synthetic two-column table generation.
//!
//! A positive table holds `R` distinct facts of a single relation, `R` drawn
//! uniformly from the configured row bounds (clamped to what the relation
//! has). A negative table pairs the left column of one positive table with
//! the right column of another table of a different relation.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kg::{FactTriple, RelationStore};
use crate::seed;
use crate::{Error, Result, NEGATIVE_LABEL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub left: String,
    pub right: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

impl Row {
    pub fn new(left: impl Into<String>, right: impl Into<String>) -> Self {
        Self {
            left: left.into(),
            right: right.into(),
            context: None,
        }
    }
}

/// Where a table's rows came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// One relation for positive tables; left then right source relation for
    /// negative tables.
    pub relations: Vec<String>,
    /// Source table ids (negative tables only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<String>,
    /// Seed of the generator that produced the table, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A labelled two-column table. Serializes to one line of the dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticTable {
    pub table_id: String,
    pub relation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headers: Option<(String, String)>,
    pub rows: Vec<Row>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl SyntheticTable {
    pub fn is_negative(&self) -> bool {
        self.relation == NEGATIVE_LABEL
    }

    pub fn left_cells(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.left.as_str())
    }

    pub fn right_cells(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.right.as_str())
    }

    /// Checks the structural invariants: row count within `bounds`, non-empty
    /// cells, no duplicate rows in positive tables, two distinct source
    /// relations recorded for negative tables. With a store, positive rows
    /// must also be facts of the table's relation.
    pub fn validate(&self, bounds: RowBounds, store: Option<&RelationStore>) -> Result<()> {
        let fail = |message: String| Error::InvalidTable {
            table_id: self.table_id.clone(),
            message,
        };
        if self.table_id.is_empty() {
            return Err(fail("empty table id".into()));
        }
        if self.relation.is_empty() {
            return Err(fail("empty relation label".into()));
        }
        let n = self.rows.len();
        if n < bounds.min || n > bounds.max {
            return Err(fail(format!(
                "{n} rows outside [{}, {}]",
                bounds.min, bounds.max
            )));
        }
        if let Some(row) = self.rows.iter().find(|r| r.left.is_empty() || r.right.is_empty()) {
            return Err(fail(format!("empty cell in row ({:?}, {:?})", row.left, row.right)));
        }
        if self.is_negative() {
            let relations = self
                .provenance
                .as_ref()
                .map(|p| p.relations.as_slice())
                .unwrap_or_default();
            match relations {
                [a, b] if a != b => {}
                _ => {
                    return Err(fail(
                        "negative table must record two distinct source relations".into(),
                    ))
                }
            }
        } else {
            let mut pairs: Vec<(&str, &str)> = self
                .rows
                .iter()
                .map(|r| (r.left.as_str(), r.right.as_str()))
                .collect();
            pairs.sort_unstable();
            if pairs.windows(2).any(|w| w[0] == w[1]) {
                return Err(fail("duplicate row in positive table".into()));
            }
            if let Some(store) = store {
                let facts = store.triples(&self.relation).unwrap_or_default();
                for row in &self.rows {
                    let found = facts
                        .iter()
                        .any(|t| t.subject == row.left && t.object == row.right);
                    if !found {
                        return Err(fail(format!(
                            "row ({:?}, {:?}) is not a stored fact",
                            row.left, row.right
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Inclusive row-count interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowBounds {
    pub min: usize,
    pub max: usize,
}

impl RowBounds {
    pub const DEFAULT: RowBounds = RowBounds { min: 5, max: 10 };

    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min < 1 || min > max {
            return Err(Error::Config(format!(
                "row bounds must satisfy 1 <= min <= max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }
}

impl Default for RowBounds {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub master_seed: u64,
    pub rows_min: usize,
    pub rows_max: usize,
    pub tables_per_relation: usize,
    pub negative_fraction: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            rows_min: RowBounds::DEFAULT.min,
            rows_max: RowBounds::DEFAULT.max,
            tables_per_relation: 1,
            negative_fraction: 0.0,
        }
    }
}

impl GenerationConfig {
    pub fn bounds(&self) -> Result<RowBounds> {
        RowBounds::new(self.rows_min, self.rows_max)
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds()?;
        if !(0.0..=1.0).contains(&self.negative_fraction) {
            return Err(Error::Config(format!(
                "negative_fraction must lie in [0, 1], got {}",
                self.negative_fraction
            )));
        }
        Ok(())
    }
}

/// Uniform draw from `[min, max]`.
pub fn sample_row_count<R: Rng + ?Sized>(rng: &mut R, min: usize, max: usize) -> Result<usize> {
    if min > max {
        return Err(Error::Config(format!("row interval [{min}, {max}] is empty")));
    }
    Ok(rng.gen_range(min..=max))
}

/// Table id of the `ordinal`-th table labelled `relation`. The zero-padded
/// ordinal makes id order agree with ordinal order within a relation.
pub fn table_id(relation: &str, ordinal: u64) -> String {
    format!("{relation}#{ordinal:08}")
}

pub fn generate_positive_table<R: Rng + ?Sized>(
    store: &RelationStore,
    relation: &str,
    bounds: RowBounds,
    ordinal: u64,
    rng: &mut R,
) -> Result<SyntheticTable> {
    let skip = |reason: String| Error::RelationSkipped {
        relation: relation.to_string(),
        reason,
    };
    let facts: &[FactTriple] = store
        .triples(relation)
        .ok_or_else(|| skip("unknown relation".into()))?;
    let available = facts.len();
    if available < bounds.min {
        return Err(skip(format!(
            "{available} distinct facts, at least {} required",
            bounds.min
        )));
    }
    let n_rows = sample_row_count(rng, bounds.min, bounds.max.min(available))?;
    let rows = index::sample(rng, available, n_rows)
        .into_iter()
        .map(|i| Row::new(facts[i].subject.clone(), facts[i].object.clone()))
        .collect();
    Ok(SyntheticTable {
        table_id: table_id(relation, ordinal),
        relation: relation.to_string(),
        rows,
        headers: None,
        provenance: Some(Provenance {
            relations: vec![relation.to_string()],
            sources: Vec::new(),
            seed: None,
        }),
    })
}

/// Mixes the left column of one randomly chosen table with the right column
/// of another randomly chosen table of a different relation. Negative tables
/// inside `pool` are ignored. The longer column is truncated.
pub fn generate_negative_table<R: Rng + ?Sized>(
    pool: &[SyntheticTable],
    ordinal: u64,
    rng: &mut R,
) -> Result<SyntheticTable> {
    let positives: Vec<&SyntheticTable> = pool.iter().filter(|t| !t.is_negative()).collect();
    if positives.len() < 2 {
        return Err(Error::Generation(format!(
            "negative tables need at least 2 positive tables, pool has {}",
            positives.len()
        )));
    }
    let first_label = &positives[0].relation;
    if positives.iter().all(|t| &t.relation == first_label) {
        return Err(Error::Generation(
            "negative tables need at least 2 distinct relations in the pool".into(),
        ));
    }

    let left = positives[rng.gen_range(0..positives.len())];
    let right = loop {
        let candidate = positives[rng.gen_range(0..positives.len())];
        if candidate.relation != left.relation {
            break candidate;
        }
    };

    let rows = left
        .rows
        .iter()
        .zip(&right.rows)
        .map(|(l, r)| Row::new(l.left.clone(), r.right.clone()))
        .collect();
    Ok(SyntheticTable {
        table_id: table_id(NEGATIVE_LABEL, ordinal),
        relation: NEGATIVE_LABEL.to_string(),
        rows,
        headers: None,
        provenance: Some(Provenance {
            relations: vec![left.relation.clone(), right.relation.clone()],
            sources: vec![left.table_id.clone(), right.table_id.clone()],
            seed: None,
        }),
    })
}

#[derive(Debug, Default)]
pub struct GeneratedDataset {
    /// Positive tables (relation order, then ordinal) followed by negatives.
    pub tables: Vec<SyntheticTable>,
    /// Relations or steps that were skipped.
    pub warnings: Vec<Error>,
}

/// Generates `tables_per_relation` tables for every relation with enough
/// facts, then `ceil(negative_fraction * positives)` negative tables.
///
/// Each table's generator is seeded from `(master_seed, relation, ordinal)`
/// (see [`crate::seed`]), so relations are generated independently and in
/// parallel without affecting the output.
pub fn generate_dataset(store: &RelationStore, config: &GenerationConfig) -> Result<GeneratedDataset> {
    config.validate()?;
    let bounds = config.bounds()?;
    let relations: Vec<&str> = store.relation_ids().collect();

    let per_relation: Vec<Result<Vec<SyntheticTable>>> = relations
        .par_iter()
        .map(|&relation| {
            (0..config.tables_per_relation as u64)
                .map(|ordinal| {
                    let seed = seed::derive_seed(config.master_seed, relation, ordinal);
                    let mut rng = seed::rng_from_seed(seed);
                    let mut table =
                        generate_positive_table(store, relation, bounds, ordinal, &mut rng)?;
                    if let Some(p) = table.provenance.as_mut() {
                        p.seed = Some(seed);
                    }
                    Ok(table)
                })
                .collect()
        })
        .collect();

    let mut out = GeneratedDataset::default();
    for result in per_relation {
        match result {
            Ok(tables) => out.tables.extend(tables),
            Err(e) => out.warnings.push(e),
        }
    }

    let n_positive = out.tables.len();
    let n_negative = (config.negative_fraction * n_positive as f64).ceil() as u64;
    if n_negative > 0 {
        let pool = &out.tables;
        let negatives: Result<Vec<SyntheticTable>> = (0..n_negative)
            .into_par_iter()
            .map(|ordinal| {
                let seed = seed::derive_seed(config.master_seed, NEGATIVE_LABEL, ordinal);
                let mut rng = seed::rng_from_seed(seed);
                let mut table = generate_negative_table(pool, ordinal, &mut rng)?;
                if let Some(p) = table.provenance.as_mut() {
                    p.seed = Some(seed);
                }
                Ok(table)
            })
            .collect();
        match negatives {
            Ok(tables) => out.tables.extend(tables),
            Err(e) => out.warnings.push(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::group_by_relation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn store_with(counts: &[(&str, usize)]) -> RelationStore {
        let mut triples = Vec::new();
        for (rel, n) in counts {
            for i in 0..*n {
                triples.push(
                    FactTriple::new(&format!("{rel}_s{i}"), rel, &format!("{rel}_o{i}")).unwrap(),
                );
            }
        }
        group_by_relation(triples)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn degenerate_interval() {
        assert_eq!(sample_row_count(&mut rng(1), 5, 5).unwrap(), 5);
    }

    #[test]
    fn inverted_interval_is_config_error() {
        assert!(matches!(sample_row_count(&mut rng(1), 6, 5), Err(Error::Config(_))));
        assert!(RowBounds::new(0, 3).is_err());
    }

    #[test]
    fn row_count_covers_interval() {
        let mut r = rng(42);
        let mut tally = [0usize; 11];
        for _ in 0..10_000 {
            let n = sample_row_count(&mut r, 5, 10).unwrap();
            assert!((5..=10).contains(&n));
            tally[n] += 1;
        }
        assert!(tally[5..=10].iter().all(|&c| c > 0), "{tally:?}");
    }

    #[test]
    fn row_count_is_seeded() {
        let a: Vec<usize> = {
            let mut r = rng(9);
            (0..50).map(|_| sample_row_count(&mut r, 5, 10).unwrap()).collect()
        };
        let b: Vec<usize> = {
            let mut r = rng(9);
            (0..50).map(|_| sample_row_count(&mut r, 5, 10).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn exactly_min_facts_uses_all_of_them() {
        let store = store_with(&[("r", 5)]);
        for seed in 0..20 {
            let t = generate_positive_table(&store, "r", RowBounds::DEFAULT, 0, &mut rng(seed)).unwrap();
            let got: HashSet<_> = t.rows.iter().map(|r| r.left.clone()).collect();
            assert_eq!(got.len(), 5);
            t.validate(RowBounds::DEFAULT, Some(&store)).unwrap();
        }
    }

    #[test]
    fn too_few_facts_is_skip_error() {
        let store = store_with(&[("r", 3)]);
        let err = generate_positive_table(&store, "r", RowBounds::DEFAULT, 0, &mut rng(0)).unwrap_err();
        assert!(matches!(err, Error::RelationSkipped { ref relation, .. } if relation == "r"));
        let err = generate_positive_table(&store, "nope", RowBounds::DEFAULT, 0, &mut rng(0)).unwrap_err();
        assert!(matches!(err, Error::RelationSkipped { .. }));
    }

    #[test]
    fn large_relation_rows_are_distinct_members() {
        let store = store_with(&[("r", 100)]);
        let facts: HashSet<(String, String)> = store
            .triples("r")
            .unwrap()
            .iter()
            .map(|t| (t.subject.clone(), t.object.clone()))
            .collect();
        for seed in 0..200 {
            let t = generate_positive_table(&store, "r", RowBounds::DEFAULT, seed, &mut rng(seed)).unwrap();
            let rows: HashSet<(String, String)> =
                t.rows.iter().map(|r| (r.left.clone(), r.right.clone())).collect();
            assert_eq!(rows.len(), t.rows.len());
            assert!(rows.is_subset(&facts));
            assert!((5..=10).contains(&t.rows.len()));
        }
    }

    fn fixed_table(rel: &str, n: usize) -> SyntheticTable {
        SyntheticTable {
            table_id: table_id(rel, 0),
            relation: rel.into(),
            rows: (0..n).map(|i| Row::new(format!("{rel}L{i}"), format!("{rel}R{i}"))).collect(),
            headers: None,
            provenance: None,
        }
    }

    #[test]
    fn negative_truncates_to_shorter_source() {
        let pool = vec![fixed_table("r1", 5), fixed_table("r2", 7)];
        let mut saw_r1_left = false;
        for seed in 0..30 {
            let t = generate_negative_table(&pool, 0, &mut rng(seed)).unwrap();
            assert_eq!(t.relation, NEGATIVE_LABEL);
            assert_eq!(t.rows.len(), 5);
            let p = t.provenance.as_ref().unwrap();
            assert_ne!(p.relations[0], p.relations[1]);
            let (l, r) = (&p.relations[0], &p.relations[1]);
            for (i, row) in t.rows.iter().enumerate() {
                assert_eq!(row.left, format!("{l}L{i}"));
                assert_eq!(row.right, format!("{r}R{i}"));
            }
            saw_r1_left |= l == "r1";
        }
        assert!(saw_r1_left);
    }

    #[test]
    fn negative_rejects_small_or_mono_pool() {
        assert!(generate_negative_table(&[fixed_table("r1", 5)], 0, &mut rng(0)).is_err());
        let mono = vec![fixed_table("r1", 5), fixed_table("r1", 6)];
        assert!(matches!(
            generate_negative_table(&mono, 0, &mut rng(0)),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn negative_is_seeded() {
        let pool = vec![fixed_table("r1", 5), fixed_table("r2", 7), fixed_table("r3", 6)];
        let a = generate_negative_table(&pool, 3, &mut rng(11)).unwrap();
        let b = generate_negative_table(&pool, 3, &mut rng(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dataset_counts_follow_config() {
        let store = store_with(&[("a", 12), ("b", 8)]);
        let mut config = GenerationConfig {
            tables_per_relation: 3,
            ..Default::default()
        };
        let ds = generate_dataset(&store, &config).unwrap();
        assert_eq!(ds.tables.len(), 6);
        assert!(ds.warnings.is_empty());

        config.negative_fraction = 0.5;
        let ds = generate_dataset(&store, &config).unwrap();
        assert_eq!(ds.tables.iter().filter(|t| t.is_negative()).count(), 3);
        assert_eq!(ds.tables.len(), 9);
    }

    #[test]
    fn ineligible_relations_become_warnings() {
        let store = store_with(&[("a", 12), ("tiny", 2)]);
        let config = GenerationConfig {
            tables_per_relation: 2,
            ..Default::default()
        };
        let ds = generate_dataset(&store, &config).unwrap();
        assert_eq!(ds.tables.len(), 2);
        assert_eq!(ds.warnings.len(), 1);
    }

    #[test]
    fn relation_output_is_independent_of_other_relations() {
        let small = store_with(&[("a", 20)]);
        let big = store_with(&[("a", 20), ("b", 20), ("c", 20)]);
        let config = GenerationConfig {
            master_seed: 5,
            tables_per_relation: 4,
            ..Default::default()
        };
        let x = generate_dataset(&small, &config).unwrap().tables;
        let y: Vec<_> = generate_dataset(&big, &config)
            .unwrap()
            .tables
            .into_iter()
            .filter(|t| t.relation == "a")
            .collect();
        assert_eq!(x, y);
    }
}
