//! Dataset files: one [`SyntheticTable`] per JSON line.
//!
//! ```text
//! {"table_id": "...", "relation": "...", "headers": ["left", "right"],
//!  "rows": [{"left": "...", "right": "...", "context": "..."}], "provenance": {...}}
//! ```
//!
//! `headers`, `context` and `provenance` are omitted when absent.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::jsonl;
use crate::synth::{RowBounds, SyntheticTable};
use crate::Result;

/// Sorts tables by relation label, then table id, and writes them.
pub fn emit_dataset<I>(tables: I, path: &Path) -> Result<usize>
where
    I: IntoIterator<Item = SyntheticTable>,
{
    let mut tables: Vec<SyntheticTable> = tables.into_iter().collect();
    sort_tables(&mut tables);
    jsonl::write_all(path, &tables)
}

/// Canonical output order: relation ascending, then ordinal (table ids carry
/// a zero-padded ordinal).
pub fn sort_tables(tables: &mut [SyntheticTable]) {
    tables.sort_by(|a, b| {
        (a.relation.as_str(), a.table_id.as_str()).cmp(&(b.relation.as_str(), b.table_id.as_str()))
    });
}

pub fn read_dataset(path: &Path) -> Result<Vec<SyntheticTable>> {
    jsonl::read_all(path)
}

/// Validates every table's invariants.
pub fn validate_dataset(tables: &[SyntheticTable], bounds: RowBounds) -> Result<()> {
    tables.iter().try_for_each(|t| t.validate(bounds, None))
}

/// Number of validation tables for `n` tables: the floor of
/// `n * validation_ratio`, guarded against representation error.
pub fn validation_count(n: usize, validation_ratio: f64) -> usize {
    let raw = (n as f64 * validation_ratio + 1e-9).floor();
    (raw.max(0.0) as usize).min(n)
}

/// Marks which of `n` tables go to validation (`true`). Shuffles once with
/// `rng` and assigns the first [`validation_count`] positions.
pub fn partition<R: Rng + ?Sized>(n: usize, validation_ratio: f64, rng: &mut R) -> Vec<bool> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut is_valid = vec![false; n];
    for &i in &order[..validation_count(n, validation_ratio)] {
        is_valid[i] = true;
    }
    is_valid
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSummary {
    pub train_path: PathBuf,
    pub validation_path: PathBuf,
    pub n_train: usize,
    pub n_validation: usize,
}

/// Splits a dataset file at table level. Both outputs keep the input order.
pub fn split_dataset<R: Rng + ?Sized>(
    input: &Path,
    validation_ratio: f64,
    rng: &mut R,
    train_path: &Path,
    validation_path: &Path,
) -> Result<SplitSummary> {
    let tables = read_dataset(input)?;
    let mask = partition(tables.len(), validation_ratio, rng);
    let (valid, train): (Vec<_>, Vec<_>) = tables
        .iter()
        .zip(&mask)
        .partition(|(_, &is_valid)| is_valid);
    let n_train = jsonl::write_all(train_path, train.into_iter().map(|(t, _)| t))?;
    let n_validation = jsonl::write_all(validation_path, valid.into_iter().map(|(t, _)| t))?;
    Ok(SplitSummary {
        train_path: train_path.to_path_buf(),
        validation_path: validation_path.to_path_buf(),
        n_train,
        n_validation,
    })
}
