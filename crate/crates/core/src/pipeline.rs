//! File-level pipeline steps behind the command-line subcommands.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use rayon::prelude::*;
use tracing::{info, warn};

use crate::config::PipelineConfig;
use crate::context::enrich_with_context;
use crate::corpus::{build_index, read_corpus, CorpusIndex};
use crate::dataset::{emit_dataset, read_dataset, split_dataset, SplitSummary};
use crate::eval::{micro_prf, read_gold, read_predictions, EvalReport};
use crate::headers::{enrich_with_headers, EntityHeaderMap, TableCorpusRecord};
use crate::kg::{group_by_relation, parse_triples};
use crate::synth::{generate_dataset, SyntheticTable};
use crate::{jsonl, seed, Error, Result};

pub fn build_index_file(corpus: &Path, output: &Path) -> Result<CorpusIndex> {
    let (records, dropped) = read_corpus(corpus)?;
    if dropped > 0 {
        warn!(dropped, "paragraphs empty after cleaning were skipped");
    }
    let index = build_index(records)?;
    index.save(output)?;
    info!(paragraphs = index.len(), terms = index.term_count(), output = %output.display(), "index built");
    Ok(index)
}

pub fn build_header_map_file(tables: &Path, output: &Path) -> Result<EntityHeaderMap> {
    let mut map = EntityHeaderMap::new();
    let mut n_tables = 0usize;
    for record in jsonl::open::<TableCorpusRecord>(tables)? {
        map.add_table(&record?)?;
        n_tables += 1;
    }
    map.save(output)?;
    info!(tables = n_tables, entities = map.len(), output = %output.display(), "header map built");
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateSummary {
    pub positives: usize,
    pub negatives: usize,
    pub warnings: usize,
}

pub fn generate_file(triples: &Path, output: &Path, config: &PipelineConfig) -> Result<GenerateSummary> {
    config.validate()?;
    let file = File::open(triples).map_err(|e| Error::io(triples, e))?;
    let parsed = parse_triples(BufReader::new(file), &triples.display().to_string())?;
    let n_lines = parsed.len();
    let store = group_by_relation(parsed);
    info!(triples = n_lines, distinct = store.total(), relations = store.len(), "triples grouped");

    let generated = generate_dataset(&store, &config.generation())?;
    for w in &generated.warnings {
        warn!(%w, "generation warning");
    }
    let negatives = generated.tables.iter().filter(|t| t.is_negative()).count();
    let summary = GenerateSummary {
        positives: generated.tables.len() - negatives,
        negatives,
        warnings: generated.warnings.len(),
    };
    let written = emit_dataset(generated.tables, output)?;
    info!(tables = written, positives = summary.positives, negatives, output = %output.display(), "dataset written");
    Ok(summary)
}

/// Adds contexts and/or headers to each table. Header tie-breaks use a
/// generator seeded from `(master_seed, "headers/<table_id>", 0)`, so the
/// result does not depend on table order or thread count.
pub fn enrich_tables(
    tables: &[SyntheticTable],
    index: Option<&CorpusIndex>,
    map: Option<&EntityHeaderMap>,
    master_seed: u64,
    top_k: usize,
) -> Vec<SyntheticTable> {
    tables
        .par_iter()
        .map(|table| {
            let mut out = match index {
                Some(index) => enrich_with_context(table, index, top_k),
                None => table.clone(),
            };
            if let Some(map) = map {
                let mut rng = seed::rng_for(master_seed, &format!("headers/{}", table.table_id), 0);
                out = enrich_with_headers(&out, map, &mut rng);
            }
            out
        })
        .collect()
}

pub fn enrich_file(
    input: &Path,
    output: &Path,
    index: Option<&Path>,
    header_map: Option<&Path>,
    config: &PipelineConfig,
) -> Result<usize> {
    config.validate()?;
    if index.is_none() && header_map.is_none() {
        return Err(Error::Config("enrich needs --context and/or --headers".into()));
    }
    let index = index.map(CorpusIndex::load).transpose()?;
    let map = header_map.map(EntityHeaderMap::load).transpose()?;
    let tables = read_dataset(input)?;
    let enriched = enrich_tables(&tables, index.as_ref(), map.as_ref(), config.master_seed, config.top_k);
    let with_context = enriched
        .iter()
        .flat_map(|t| &t.rows)
        .filter(|r| r.context.is_some())
        .count();
    let n = emit_dataset(enriched, output)?;
    info!(tables = n, rows_with_context = with_context, output = %output.display(), "dataset enriched");
    Ok(n)
}

pub fn split_file(
    input: &Path,
    train: &Path,
    validation: &Path,
    config: &PipelineConfig,
) -> Result<SplitSummary> {
    config.validate()?;
    let mut rng = seed::rng_for(config.master_seed, "split", 0);
    let summary = split_dataset(input, config.split_ratios.1, &mut rng, train, validation)?;
    info!(train = summary.n_train, validation = summary.n_validation, "dataset split");
    Ok(summary)
}

pub fn score_files(gold: &Path, predictions: &Path, negative_label: &str) -> Result<EvalReport> {
    let gold = read_gold(gold)?;
    let pred = read_predictions(predictions)?;
    micro_prf(&gold, &pred, negative_label)
}
