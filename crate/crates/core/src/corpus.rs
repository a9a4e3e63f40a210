//! Embedded paragraph index with BM25 ranking and phrase-level AND queries.
//!
//! BM25 uses `k1 = 1.2`, `b = 0.75` and
//! `idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))`:
//!
//! ```text
//! score(p, Q) = sum over distinct t in Q of
//!     idf(t) * tf(t, p) * (k1 + 1) / (tf(t, p) + k1 * (1 - b + b * len(p) / avg_len))
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::jsonl;
use crate::{Error, Result};

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;
pub const DEFAULT_TOP_K: usize = 10;

/// Lowercases and splits on every non-alphanumeric codepoint.
pub fn normalize_and_tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// True when `needle` occurs as a contiguous run inside `haystack`.
/// An empty needle never matches.
pub fn contains_token_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty()
        && needle.len() <= haystack.len()
        && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Removes HTML tags and control characters, collapses whitespace runs to a
/// single space and trims.
pub fn clean_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '<' {
            let opens_tag = chars
                .peek()
                .is_some_and(|n| n.is_ascii_alphabetic() || matches!(n, '/' | '!' | '?'));
            if opens_tag {
                for inner in chars.by_ref() {
                    if inner == '>' {
                        break;
                    }
                }
                out.push(' ');
                continue;
            }
        }
        if c.is_control() {
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParagraphRecord {
    pub doc_id: String,
    pub para_id: u64,
    pub text: String,
}

impl ParagraphRecord {
    /// Cleans `text`; fails when nothing is left.
    pub fn new(doc_id: impl Into<String>, para_id: u64, text: &str) -> Result<Self> {
        let doc_id = doc_id.into();
        let text = clean_text(text);
        if text.is_empty() {
            return Err(Error::IndexBuild(format!(
                "paragraph ({doc_id}, {para_id}) is empty after cleaning"
            )));
        }
        Ok(Self {
            doc_id,
            para_id,
            text,
        })
    }

    pub fn key(&self) -> ParagraphKey {
        ParagraphKey {
            doc_id: self.doc_id.clone(),
            para_id: self.para_id,
        }
    }
}

/// Externally meaningful paragraph identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ParagraphKey {
    pub doc_id: String,
    pub para_id: u64,
}

/// True iff the normalized tokens of `phrase` occur contiguously in the
/// normalized tokens of the paragraph.
pub fn contains_phrase(record: &ParagraphRecord, phrase: &str) -> Result<bool> {
    let needle = phrase_tokens(phrase)?;
    Ok(contains_token_run(&normalize_and_tokenize(&record.text), &needle))
}

fn phrase_tokens(phrase: &str) -> Result<Vec<String>> {
    let tokens = normalize_and_tokenize(phrase);
    if tokens.is_empty() {
        return Err(Error::Query(format!("phrase {phrase:?} has no tokens")));
    }
    Ok(tokens)
}

/// Reads a corpus in JSON Lines form. Paragraphs that are empty after
/// cleaning are dropped; their count is returned alongside the records.
pub fn read_corpus(path: &Path) -> Result<(Vec<ParagraphRecord>, usize)> {
    #[derive(Deserialize)]
    struct Raw {
        doc_id: String,
        para_id: u64,
        text: String,
    }
    let mut records = Vec::new();
    let mut dropped = 0;
    for raw in jsonl::open::<Raw>(path)? {
        let raw = raw?;
        match ParagraphRecord::new(raw.doc_id, raw.para_id, &raw.text) {
            Ok(r) => records.push(r),
            Err(_) => dropped += 1,
        }
    }
    Ok((records, dropped))
}

/// Position of a paragraph inside a [`CorpusIndex`]. References order like
/// the `(doc_id, para_id)` keys they stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParaRef(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub para: ParaRef,
    pub tf: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredParagraph {
    pub para: ParaRef,
    pub score: f64,
}

/// Immutable inverted index over cleaned paragraphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusIndex {
    records: Vec<ParagraphRecord>,
    lengths: Vec<u32>,
    total_len: u64,
    postings: BTreeMap<String, Vec<Posting>>,
}

const SNAPSHOT_FORMAT: &str = "tabmeta-corpus-index/1";

#[derive(Serialize, Deserialize)]
struct Snapshot<T> {
    format: String,
    index: T,
}

impl CorpusIndex {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn avg_len(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.total_len as f64 / self.records.len() as f64
        }
    }

    pub fn record(&self, para: ParaRef) -> &ParagraphRecord {
        &self.records[para.0 as usize]
    }

    pub fn records(&self) -> &[ParagraphRecord] {
        &self.records
    }

    pub fn para_len(&self, para: ParaRef) -> u32 {
        self.lengths[para.0 as usize]
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn term_freq(&self, term: &str, para: ParaRef) -> u32 {
        let list = self.postings(term);
        list.binary_search_by_key(&para, |p| p.para)
            .map_or(0, |i| list[i].tf)
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.records.len() as f64;
        let df = self.doc_freq(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let snapshot = Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            index: self,
        };
        serde_json::to_writer(&mut out, &snapshot)
            .map_err(|e| Error::io(path, e.into()))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let snapshot: Snapshot<CorpusIndex> = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::io(path, e.into()))?;
        if snapshot.format != SNAPSHOT_FORMAT {
            return Err(Error::IndexBuild(format!(
                "{}: unsupported snapshot format {:?}",
                path.display(),
                snapshot.format
            )));
        }
        let index = snapshot.index;
        index.check_consistency().map_err(|m| {
            Error::IndexBuild(format!("{}: corrupt snapshot: {m}", path.display()))
        })?;
        Ok(index)
    }

    fn check_consistency(&self) -> Result<(), String> {
        if self.lengths.len() != self.records.len() {
            return Err("length table does not match paragraph count".into());
        }
        if self.lengths.iter().map(|&l| u64::from(l)).sum::<u64>() != self.total_len {
            return Err("total length mismatch".into());
        }
        if self
            .records
            .windows(2)
            .any(|w| (&w[0].doc_id, w[0].para_id) >= (&w[1].doc_id, w[1].para_id))
        {
            return Err("paragraphs not in key order".into());
        }
        let n = self.records.len() as u32;
        for (term, list) in &self.postings {
            if list.is_empty()
                || list.windows(2).any(|w| w[0].para >= w[1].para)
                || list.iter().any(|p| p.para.0 >= n || p.tf == 0)
            {
                return Err(format!("bad postings for term {term:?}"));
            }
        }
        Ok(())
    }
}

/// Accumulates paragraphs in one pass; [`IndexBuilder::finish`] freezes them.
#[derive(Debug, Default)]
pub struct IndexBuilder {
    records: Vec<ParagraphRecord>,
    lengths: Vec<u32>,
    keys: HashSet<(String, u64)>,
    postings: BTreeMap<String, Vec<Posting>>,
}

impl IndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, record: ParagraphRecord) -> Result<()> {
        if !self.keys.insert((record.doc_id.clone(), record.para_id)) {
            return Err(Error::IndexBuild(format!(
                "duplicate paragraph ({}, {})",
                record.doc_id, record.para_id
            )));
        }
        let provisional = ParaRef(u32::try_from(self.records.len()).map_err(|_| {
            Error::IndexBuild("more than u32::MAX paragraphs".into())
        })?);
        let tokens = normalize_and_tokenize(&record.text);
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in &tokens {
            *tf.entry(t.clone()).or_default() += 1;
        }
        for (term, count) in tf {
            self.postings.entry(term).or_default().push(Posting {
                para: provisional,
                tf: count,
            });
        }
        self.lengths.push(tokens.len() as u32);
        self.records.push(record);
        Ok(())
    }

    /// Renumbers paragraphs into `(doc_id, para_id)` order and sorts postings.
    pub fn finish(self) -> CorpusIndex {
        let IndexBuilder {
            records,
            lengths,
            mut postings,
            ..
        } = self;
        let mut order: Vec<usize> = (0..records.len()).collect();
        order.sort_by(|&a, &b| {
            (&records[a].doc_id, records[a].para_id).cmp(&(&records[b].doc_id, records[b].para_id))
        });
        let mut new_ref = vec![0u32; records.len()];
        for (new, &old) in order.iter().enumerate() {
            new_ref[old] = new as u32;
        }
        for list in postings.values_mut() {
            for p in list.iter_mut() {
                p.para = ParaRef(new_ref[p.para.0 as usize]);
            }
            list.sort_by_key(|p| p.para);
        }
        let mut slots: Vec<Option<ParagraphRecord>> = records.into_iter().map(Some).collect();
        let records: Vec<ParagraphRecord> = order
            .iter()
            .map(|&old| slots[old].take().expect("each record moved once"))
            .collect();
        let lengths: Vec<u32> = order.iter().map(|&old| lengths[old]).collect();
        let total_len = lengths.iter().map(|&l| u64::from(l)).sum();
        CorpusIndex {
            records,
            lengths,
            total_len,
            postings,
        }
    }
}

pub fn build_index<I>(records: I) -> Result<CorpusIndex>
where
    I: IntoIterator<Item = ParagraphRecord>,
{
    let mut builder = IndexBuilder::new();
    for record in records {
        builder.add(record)?;
    }
    Ok(builder.finish())
}

/// BM25 score of one paragraph; duplicate query terms count once.
pub fn bm25_score<S: AsRef<str>>(index: &CorpusIndex, para: ParaRef, query_terms: &[S]) -> f64 {
    let distinct: BTreeSet<&str> = query_terms.iter().map(AsRef::as_ref).collect();
    let len = f64::from(index.para_len(para));
    let avg = index.avg_len();
    let norm = if avg > 0.0 {
        1.0 - BM25_B + BM25_B * len / avg
    } else {
        1.0
    };
    distinct
        .into_iter()
        .map(|term| {
            let tf = f64::from(index.term_freq(term, para));
            if tf == 0.0 {
                return 0.0;
            }
            index.idf(term) * tf * (BM25_K1 + 1.0) / (tf + BM25_K1 * norm)
        })
        .sum()
}

/// Every paragraph mentioning both phrases, best first. Ties go to the
/// smaller `(doc_id, para_id)`.
pub fn and_candidates(index: &CorpusIndex, phrase1: &str, phrase2: &str) -> Result<Vec<ScoredParagraph>> {
    let first = phrase_tokens(phrase1)?;
    let second = phrase_tokens(phrase2)?;
    let terms: Vec<&String> = first
        .iter()
        .chain(&second)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let lists: Vec<&[Posting]> = terms.iter().map(|t| index.postings(t)).collect();
    let Some(driver) = lists.iter().min_by_key(|l| l.len()) else {
        return Ok(Vec::new());
    };
    let mut hits: Vec<ScoredParagraph> = driver
        .iter()
        .map(|p| p.para)
        .filter(|&para| {
            lists
                .iter()
                .all(|l| l.binary_search_by_key(&para, |p| p.para).is_ok())
        })
        .filter(|&para| {
            let tokens = normalize_and_tokenize(&index.record(para).text);
            contains_token_run(&tokens, &first) && contains_token_run(&tokens, &second)
        })
        .map(|para| ScoredParagraph {
            para,
            score: bm25_score(index, para, &terms),
        })
        .collect();
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.para.cmp(&b.para)));
    Ok(hits)
}

/// The `k` best paragraphs mentioning both phrases.
pub fn and_query(index: &CorpusIndex, phrase1: &str, phrase2: &str, k: usize) -> Result<Vec<ScoredParagraph>> {
    if k == 0 {
        return Err(Error::Query("k must be at least 1".into()));
    }
    let mut hits = and_candidates(index, phrase1, phrase2)?;
    hits.truncate(k);
    Ok(hits)
}
