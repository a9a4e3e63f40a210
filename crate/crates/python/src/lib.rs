//! Python bindings for the `tabmeta` pipeline.
// pyo3 0.22 macro expansion trips this lint on every PyResult return.
#![allow(clippy::useless_conversion)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tabmeta_core::context::SnippetKind;
use tabmeta_core::{context, corpus, dataset, eval, headers, kg, seed, synth};

fn to_py(err: tabmeta_core::Error) -> PyErr {
    match err {
        tabmeta_core::Error::Io { .. } => PyIOError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

// --- Knowledge graph ---------------------------------------------------------

/// Facts grouped by relation, duplicates removed.
#[pyclass(module = "tabmeta", frozen)]
pub struct RelationStore {
    inner: kg::RelationStore,
}

#[pymethods]
impl RelationStore {
    /// Build from `(subject, relation, object)` tuples.
    #[new]
    fn new(triples: Vec<(String, String, String)>) -> PyResult<Self> {
        let parsed = triples
            .iter()
            .map(|(s, r, o)| kg::FactTriple::new(s, r, o).map_err(PyValueError::new_err))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: kg::group_by_relation(parsed),
        })
    }

    /// Parse tab-separated triple text.
    #[staticmethod]
    #[pyo3(signature = (text, source_name = "<string>"))]
    fn from_tsv(text: &str, source_name: &str) -> PyResult<Self> {
        let triples = kg::parse_triples(text.as_bytes(), source_name).map_err(to_py)?;
        Ok(Self {
            inner: kg::group_by_relation(triples),
        })
    }

    fn relations(&self) -> Vec<String> {
        self.inner.relation_ids().map(str::to_string).collect()
    }

    fn counts(&self) -> BTreeMap<String, usize> {
        self.inner
            .counts()
            .map(|(r, n)| (r.to_string(), n))
            .collect()
    }

    fn triples(&self, relation: &str) -> Vec<(String, String, String)> {
        self.inner
            .triples(relation)
            .unwrap_or_default()
            .iter()
            .map(|t| (t.subject.clone(), t.relation.clone(), t.object.clone()))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.total()
    }
}

// --- Tables ------------------------------------------------------------------

#[pyclass(module = "tabmeta")]
#[derive(Clone)]
pub struct SyntheticTable {
    inner: synth::SyntheticTable,
}

#[pymethods]
impl SyntheticTable {
    #[getter]
    fn table_id(&self) -> &str {
        &self.inner.table_id
    }

    #[getter]
    fn relation(&self) -> &str {
        &self.inner.relation
    }

    #[getter]
    fn is_negative(&self) -> bool {
        self.inner.is_negative()
    }

    /// `(left, right, context)` per row; context is `None` when absent.
    #[getter]
    fn rows(&self) -> Vec<(String, String, Option<String>)> {
        self.inner
            .rows
            .iter()
            .map(|r| (r.left.clone(), r.right.clone(), r.context.clone()))
            .collect()
    }

    #[getter]
    fn headers(&self) -> Option<(String, String)> {
        self.inner.headers.clone()
    }

    #[getter]
    fn source_relations(&self) -> Vec<String> {
        self.inner
            .provenance
            .as_ref()
            .map(|p| p.relations.clone())
            .unwrap_or_default()
    }

    /// The dataset-file line for this table.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(line: &str) -> PyResult<Self> {
        serde_json::from_str(line)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[pyo3(signature = (rows_min = 5, rows_max = 10))]
    fn validate(&self, rows_min: usize, rows_max: usize) -> PyResult<()> {
        let bounds = synth::RowBounds::new(rows_min, rows_max).map_err(to_py)?;
        self.inner.validate(bounds, None).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SyntheticTable(table_id={:?}, relation={:?}, rows={})",
            self.inner.table_id,
            self.inner.relation,
            self.inner.rows.len()
        )
    }
}

/// Generate positive tables per relation and, optionally, negative tables.
#[pyfunction]
#[pyo3(signature = (store, seed = 0, rows_min = 5, rows_max = 10, tables_per_relation = 1, negative_fraction = 0.0))]
fn generate_dataset(
    py: Python<'_>,
    store: &RelationStore,
    seed: u64,
    rows_min: usize,
    rows_max: usize,
    tables_per_relation: usize,
    negative_fraction: f64,
) -> PyResult<(Vec<SyntheticTable>, Vec<String>)> {
    let config = synth::GenerationConfig {
        master_seed: seed,
        rows_min,
        rows_max,
        tables_per_relation,
        negative_fraction,
    };
    let out = py
        .allow_threads(|| synth::generate_dataset(&store.inner, &config))
        .map_err(to_py)?;
    Ok((
        out.tables.into_iter().map(|inner| SyntheticTable { inner }).collect(),
        out.warnings.iter().map(ToString::to_string).collect(),
    ))
}

#[pyfunction]
fn emit_dataset(tables: Vec<SyntheticTable>, path: PathBuf) -> PyResult<usize> {
    dataset::emit_dataset(tables.into_iter().map(|t| t.inner), &path).map_err(to_py)
}

#[pyfunction]
fn read_dataset(path: PathBuf) -> PyResult<Vec<SyntheticTable>> {
    Ok(dataset::read_dataset(&path)
        .map_err(to_py)?
        .into_iter()
        .map(|inner| SyntheticTable { inner })
        .collect())
}

// --- Corpus index and context ------------------------------------------------

#[pyclass(module = "tabmeta", frozen)]
pub struct CorpusIndex {
    inner: corpus::CorpusIndex,
}

fn snippet_dict<'py>(py: Python<'py>, s: &context::ContextSnippet) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("text", &s.text)?;
    d.set_item(
        "kind",
        match s.kind {
            SnippetKind::CoSentential => "CO_SENTENTIAL",
            SnippetKind::Concatenated => "CONCATENATED",
        },
    )?;
    d.set_item("doc_id", &s.source.doc_id)?;
    d.set_item("para_id", s.source.para_id)?;
    Ok(d)
}

#[pymethods]
impl CorpusIndex {
    /// Index `(doc_id, para_id, text)` paragraphs. Text is cleaned first.
    #[new]
    fn new(py: Python<'_>, paragraphs: Vec<(String, u64, String)>) -> PyResult<Self> {
        let records = paragraphs
            .into_iter()
            .map(|(doc, para, text)| corpus::ParagraphRecord::new(doc, para, &text))
            .collect::<Result<Vec<_>, _>>()
            .map_err(to_py)?;
        let inner = py.allow_threads(|| corpus::build_index(records)).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        corpus::CorpusIndex::load(&path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn avg_len(&self) -> f64 {
        self.inner.avg_len()
    }

    fn doc_freq(&self, term: &str) -> usize {
        self.inner.doc_freq(term)
    }

    /// `(doc_id, para_id, score)` of the best `k` paragraphs mentioning both
    /// phrases.
    #[pyo3(signature = (phrase1, phrase2, k = 10))]
    fn and_query(&self, phrase1: &str, phrase2: &str, k: usize) -> PyResult<Vec<(String, u64, f64)>> {
        let hits = corpus::and_query(&self.inner, phrase1, phrase2, k).map_err(to_py)?;
        Ok(hits
            .into_iter()
            .map(|h| {
                let r = self.inner.record(h.para);
                (r.doc_id.clone(), r.para_id, h.score)
            })
            .collect())
    }

    /// Context snippet for an entity pair as a dict, or `None`.
    #[pyo3(signature = (e1, e2, top_k = 10))]
    fn retrieve_context<'py>(
        &self,
        py: Python<'py>,
        e1: &str,
        e2: &str,
        top_k: usize,
    ) -> PyResult<Option<Bound<'py, PyDict>>> {
        context::retrieve_context_top_k(&self.inner, e1, e2, top_k)
            .map_err(to_py)?
            .map(|s| snippet_dict(py, &s))
            .transpose()
    }

    #[pyo3(signature = (table, top_k = 10))]
    fn enrich(&self, py: Python<'_>, table: &SyntheticTable, top_k: usize) -> SyntheticTable {
        SyntheticTable {
            inner: py.allow_threads(|| context::enrich_with_context(&table.inner, &self.inner, top_k)),
        }
    }
}

// --- Header map --------------------------------------------------------------

#[pyclass(module = "tabmeta", frozen)]
pub struct EntityHeaderMap {
    inner: headers::EntityHeaderMap,
}

#[pymethods]
impl EntityHeaderMap {
    /// Build from `(table_id, headers, columns)` tuples.
    #[new]
    fn new(tables: Vec<(String, Vec<String>, Vec<Vec<String>>)>) -> PyResult<Self> {
        let records: Vec<headers::TableCorpusRecord> = tables
            .into_iter()
            .map(|(table_id, headers, columns)| headers::TableCorpusRecord {
                table_id,
                headers,
                columns,
            })
            .collect();
        headers::build_entity_header_map(&records)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        headers::EntityHeaderMap::load(&path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn counts(&self, entity: &str) -> BTreeMap<String, u64> {
        self.inner.headers_of(entity).cloned().unwrap_or_default()
    }

    fn candidate(&self, entity: &str) -> Option<String> {
        headers::entity_candidate_header(&self.inner, entity).map(str::to_string)
    }

    #[pyo3(signature = (cells, seed = 0))]
    fn infer_column(&self, cells: Vec<String>, seed: u64) -> Option<String> {
        let mut rng = seed::rng_from_seed(seed);
        headers::infer_column_header(&self.inner, cells.iter().map(String::as_str), &mut rng)
    }

    #[pyo3(signature = (table, seed = 0))]
    fn enrich(&self, table: &SyntheticTable, seed: u64) -> SyntheticTable {
        let mut rng = seed::rng_from_seed(seed);
        SyntheticTable {
            inner: headers::enrich_with_headers(&table.inner, &self.inner, &mut rng),
        }
    }
}

// --- Scoring and text helpers ------------------------------------------------

/// Micro precision/recall/F1; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (gold, pred, negative_label = tabmeta_core::NEGATIVE_LABEL))]
fn micro_prf<'py>(
    py: Python<'py>,
    gold: BTreeMap<String, String>,
    pred: BTreeMap<String, String>,
    negative_label: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let r = eval::micro_prf(&gold, &pred, negative_label).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("f1", r.f1)?;
    d.set_item("n_pred", r.n_pred)?;
    d.set_item("n_gold", r.n_gold)?;
    d.set_item("n_correct", r.n_correct)?;
    Ok(d)
}

#[pyfunction]
fn normalize_and_tokenize(text: &str) -> Vec<String> {
    corpus::normalize_and_tokenize(text)
}

#[pyfunction]
fn split_sentences(text: &str) -> Vec<String> {
    context::split_sentences(text)
}

#[pyfunction]
fn derive_seed(master_seed: u64, label: &str, ordinal: u64) -> u64 {
    seed::derive_seed(master_seed, label, ordinal)
}

#[pymodule]
pub fn tabmeta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NEGATIVE_LABEL", tabmeta_core::NEGATIVE_LABEL)?;
    m.add_class::<RelationStore>()?;
    m.add_class::<SyntheticTable>()?;
    m.add_class::<CorpusIndex>()?;
    m.add_class::<EntityHeaderMap>()?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(emit_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(read_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(micro_prf, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_and_tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(split_sentences, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    Ok(())
}
