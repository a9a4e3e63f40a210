//! Micro precision, recall and F1 over column-pair relation labels.
//!
//! The negative label is an abstention: negative predictions do not count
//! towards the precision denominator and negative gold entries do not count
//! towards the recall denominator.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::jsonl;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_pred: usize,
    pub n_gold: usize,
    pub n_correct: usize,
}

impl EvalReport {
    pub fn from_counts(n_pred: usize, n_gold: usize, n_correct: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(n_correct, n_pred);
        let recall = ratio(n_correct, n_gold);
        Self {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
            n_pred,
            n_gold,
            n_correct,
        }
    }
}

/// `2pr / (p + r)`, or 0 when both are 0.
pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Scores predictions against gold labels keyed by table id. Gold ids without
/// a prediction count as unanswered.
pub fn micro_prf<G, P>(gold: &G, pred: &P, negative_label: &str) -> Result<EvalReport>
where
    G: LabelLookup,
    P: LabelSource,
{
    let n_gold = gold
        .labels()
        .filter(|label| *label != negative_label)
        .count();
    let mut n_pred = 0;
    let mut n_correct = 0;
    for (id, label) in pred.entries() {
        let Some(gold_label) = gold.label(id) else {
            return Err(Error::Score(format!("prediction for unknown id {id:?}")));
        };
        if label == negative_label {
            continue;
        }
        n_pred += 1;
        if label == gold_label {
            n_correct += 1;
        }
    }
    Ok(EvalReport::from_counts(n_pred, n_gold, n_correct))
}

/// Gold labels addressable by id.
pub trait LabelLookup {
    fn label(&self, id: &str) -> Option<&str>;
    fn labels(&self) -> Box<dyn Iterator<Item = &str> + '_>;
}

/// Any collection of `(id, label)` pairs.
pub trait LabelSource {
    fn entries(&self) -> Box<dyn Iterator<Item = (&str, &str)> + '_>;
}

macro_rules! impl_label_maps {
    ($($map:ident),*) => {$(
        impl LabelLookup for $map<String, String> {
            fn label(&self, id: &str) -> Option<&str> {
                self.get(id).map(String::as_str)
            }
            fn labels(&self) -> Box<dyn Iterator<Item = &str> + '_> {
                Box::new(self.values().map(String::as_str))
            }
        }

        impl LabelSource for $map<String, String> {
            fn entries(&self) -> Box<dyn Iterator<Item = (&str, &str)> + '_> {
                Box::new(self.iter().map(|(k, v)| (k.as_str(), v.as_str())))
            }
        }
    )*};
}

impl_label_maps!(HashMap, BTreeMap);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldLine {
    pub table_id: String,
    pub gold: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredLine {
    pub table_id: String,
    pub pred: String,
}

fn collect_unique(
    pairs: impl Iterator<Item = Result<(String, String)>>,
    what: &str,
) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (id, label) = pair?;
        if out.insert(id.clone(), label).is_some() {
            return Err(Error::Score(format!("duplicate {what} entry for id {id:?}")));
        }
    }
    Ok(out)
}

pub fn read_gold(path: &Path) -> Result<BTreeMap<String, String>> {
    collect_unique(
        jsonl::open::<GoldLine>(path)?.map(|r| r.map(|g| (g.table_id, g.gold))),
        "gold",
    )
}

pub fn read_predictions(path: &Path) -> Result<BTreeMap<String, String>> {
    collect_unique(
        jsonl::open::<PredLine>(path)?.map(|r| r.map(|p| (p.table_id, p.pred))),
        "prediction",
    )
}
