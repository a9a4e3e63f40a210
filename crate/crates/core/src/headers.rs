//! Column-header inference from an entity-to-header frequency map.
//!
//! The map records, for every cell value of a web-table corpus, how often it
//! appeared under each column header. A column's header is the most common
//! per-cell candidate, where each cell's candidate is the header it was seen
//! under most often.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::synth::SyntheticTable;
use crate::{Error, Result};

/// Lowercase, trim, collapse inner whitespace.
pub fn normalize_key(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCorpusRecord {
    pub table_id: String,
    pub headers: Vec<String>,
    pub columns: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityHeaderMap {
    counts: BTreeMap<String, BTreeMap<String, u64>>,
}

const SNAPSHOT_FORMAT: &str = "tabmeta-header-map/1";

#[derive(Serialize, Deserialize)]
struct Snapshot<T> {
    format: String,
    map: T,
}

impl EntityHeaderMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tallies one table's cells against their column headers.
    pub fn add_table(&mut self, record: &TableCorpusRecord) -> Result<()> {
        if record.headers.len() != record.columns.len() {
            return Err(Error::Ingest {
                table_id: record.table_id.clone(),
                message: format!(
                    "{} headers but {} columns",
                    record.headers.len(),
                    record.columns.len()
                ),
            });
        }
        for (header, cells) in record.headers.iter().zip(&record.columns) {
            let header = normalize_key(header);
            if header.is_empty() {
                continue;
            }
            for cell in cells {
                let cell = normalize_key(cell);
                if cell.is_empty() {
                    continue;
                }
                *self
                    .counts
                    .entry(cell)
                    .or_default()
                    .entry(header.clone())
                    .or_default() += 1;
            }
        }
        Ok(())
    }

    /// Pointwise sum of counts.
    pub fn merge(&mut self, other: EntityHeaderMap) {
        for (entity, headers) in other.counts {
            let slot = self.counts.entry(entity).or_default();
            for (header, n) in headers {
                *slot.entry(header).or_default() += n;
            }
        }
    }

    /// Header counts for an entity, looked up after normalization.
    pub fn headers_of(&self, entity: &str) -> Option<&BTreeMap<String, u64>> {
        self.counts.get(&normalize_key(entity))
    }

    pub fn count(&self, entity: &str, header: &str) -> u64 {
        self.headers_of(entity)
            .and_then(|h| h.get(&normalize_key(header)))
            .copied()
            .unwrap_or(0)
    }

    pub fn entities(&self) -> impl Iterator<Item = (&str, &BTreeMap<String, u64>)> {
        self.counts.iter().map(|(e, h)| (e.as_str(), h))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let snapshot = Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            map: self,
        };
        serde_json::to_writer(&mut out, &snapshot).map_err(|e| Error::io(path, e.into()))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let snapshot: Snapshot<EntityHeaderMap> = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::io(path, e.into()))?;
        if snapshot.format != SNAPSHOT_FORMAT {
            return Err(Error::Config(format!(
                "{}: unsupported header map format {:?}",
                path.display(),
                snapshot.format
            )));
        }
        let map = snapshot.map;
        let valid = map.counts.iter().all(|(e, hs)| {
            !e.is_empty()
                && *e == normalize_key(e)
                && !hs.is_empty()
                && hs.iter().all(|(h, &n)| n >= 1 && !h.is_empty() && *h == normalize_key(h))
        });
        if !valid {
            return Err(Error::Config(format!("{}: corrupt header map", path.display())));
        }
        Ok(map)
    }
}

pub fn build_entity_header_map<'a, I>(records: I) -> Result<EntityHeaderMap>
where
    I: IntoIterator<Item = &'a TableCorpusRecord>,
{
    let mut map = EntityHeaderMap::new();
    for record in records {
        map.add_table(record)?;
    }
    Ok(map)
}

/// Most frequent header of an entity; equal counts go to the
/// lexicographically smallest header.
pub fn entity_candidate_header<'m>(map: &'m EntityHeaderMap, entity: &str) -> Option<&'m str> {
    map.headers_of(entity)?
        .iter()
        // BTreeMap iterates headers ascending, so the first maximum wins.
        .fold(None, |best: Option<(&String, u64)>, (h, &n)| match best {
            Some((_, top)) if top >= n => best,
            _ => Some((h, n)),
        })
        .map(|(h, _)| h.as_str())
}

/// Modal per-cell candidate header of a column. Ties between top candidates
/// are broken uniformly at random with exactly one draw from `rng`; no draw
/// is made when the mode is unique or no cell has a candidate.
pub fn infer_column_header<'a, R, I>(map: &EntityHeaderMap, cells: I, rng: &mut R) -> Option<String>
where
    R: Rng + ?Sized,
    I: IntoIterator<Item = &'a str>,
{
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for cell in cells {
        if let Some(h) = entity_candidate_header(map, cell) {
            *tally.entry(h).or_default() += 1;
        }
    }
    let top = *tally.values().max()?;
    let tied: Vec<&str> = tally
        .iter()
        .filter(|&(_, &n)| n == top)
        .map(|(h, _)| *h)
        .collect();
    let pick = if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.gen_range(0..tied.len())]
    };
    Some(pick.to_string())
}

/// Infers the left header, then the right header. Missing headers become
/// empty strings.
pub fn enrich_with_headers<R: Rng + ?Sized>(
    table: &SyntheticTable,
    map: &EntityHeaderMap,
    rng: &mut R,
) -> SyntheticTable {
    let left = infer_column_header(map, table.left_cells(), rng).unwrap_or_default();
    let right = infer_column_header(map, table.right_cells(), rng).unwrap_or_default();
    SyntheticTable {
        headers: Some((left, right)),
        ..table.clone()
    }
}
