//! Context retrieval for an entity pair.
//!
//! The cascade: AND query for paragraphs mentioning both entities, keep the
//! top `k` (10 by default), drop paragraphs shorter than
//! `len(e1) + len(e2) + 3` characters, take the best survivor, and pick the
//! first sentence mentioning both entities. Without such a sentence the first
//! sentence mentioning `e1` and the first mentioning `e2` are joined.

use serde::{Deserialize, Serialize};

use crate::corpus::{
    and_query, contains_token_run, normalize_and_tokenize, CorpusIndex, ParagraphKey,
    ParagraphRecord, ScoredParagraph, DEFAULT_TOP_K,
};
use crate::synth::SyntheticTable;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SnippetKind {
    /// One sentence mentioning both entities.
    CoSentential,
    /// First `e1` sentence, a space, first `e2` sentence.
    Concatenated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSnippet {
    pub text: String,
    pub kind: SnippetKind,
    pub source: ParagraphKey,
}

/// Minimum paragraph length, in characters, for an entity pair.
pub fn length_threshold(e1: &str, e2: &str) -> usize {
    e1.chars().count() + e2.chars().count() + 3
}

/// Keeps candidates whose paragraph has at least [`length_threshold`]
/// characters, preserving order.
pub fn length_filter(
    candidates: &[ScoredParagraph],
    e1: &str,
    e2: &str,
    index: &CorpusIndex,
) -> Vec<ScoredParagraph> {
    let threshold = length_threshold(e1, e2);
    candidates
        .iter()
        .filter(|c| index.record(c.para).text.chars().count() >= threshold)
        .copied()
        .collect()
}

/// Splits after `.`, `!` or `?` when followed by whitespace or the end of the
/// text. Abbreviations are not special-cased.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let boundary = match chars.peek() {
            None => true,
            Some((_, next)) => next.is_whitespace(),
        };
        if boundary {
            let end = i + c.len_utf8();
            push_trimmed(&mut sentences, &text[start..end]);
            start = end;
        }
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

/// Picks the context sentence(s) for `(e1, e2)` from a paragraph that
/// mentions both.
pub fn select_context(paragraph: &ParagraphRecord, e1: &str, e2: &str) -> Result<ContextSnippet> {
    let t1 = normalize_and_tokenize(e1);
    let t2 = normalize_and_tokenize(e2);
    let sentences: Vec<(String, Vec<String>)> = split_sentences(&paragraph.text)
        .into_iter()
        .map(|s| {
            let tokens = normalize_and_tokenize(&s);
            (s, tokens)
        })
        .collect();

    let snippet = |text: String, kind| ContextSnippet {
        text,
        kind,
        source: paragraph.key(),
    };

    if let Some((s, _)) = sentences
        .iter()
        .find(|(_, toks)| contains_token_run(toks, &t1) && contains_token_run(toks, &t2))
    {
        return Ok(snippet(s.clone(), SnippetKind::CoSentential));
    }

    let first_with = |needle: &[String]| {
        sentences
            .iter()
            .find(|(_, toks)| contains_token_run(toks, needle))
            .map(|(s, _)| s.as_str())
    };
    match (first_with(&t1), first_with(&t2)) {
        (Some(s1), Some(s2)) => Ok(snippet(format!("{s1} {s2}"), SnippetKind::Concatenated)),
        _ => Err(Error::Contract(format!(
            "paragraph ({}, {}) does not mention both {e1:?} and {e2:?}",
            paragraph.doc_id, paragraph.para_id
        ))),
    }
}

/// Runs the full cascade with the default top-10 cutoff.
pub fn retrieve_context(index: &CorpusIndex, e1: &str, e2: &str) -> Result<Option<ContextSnippet>> {
    retrieve_context_top_k(index, e1, e2, DEFAULT_TOP_K)
}

pub fn retrieve_context_top_k(
    index: &CorpusIndex,
    e1: &str,
    e2: &str,
    top_k: usize,
) -> Result<Option<ContextSnippet>> {
    let top = and_query(index, e1, e2, top_k)?;
    let survivors = length_filter(&top, e1, e2, index);
    match survivors.first() {
        None => Ok(None),
        Some(best) => select_context(index.record(best.para), e1, e2).map(Some),
    }
}

/// Sets every row's context from the corpus; rows without support get none.
/// Rows whose cells have no searchable tokens are left without context.
pub fn enrich_with_context(table: &SyntheticTable, index: &CorpusIndex, top_k: usize) -> SyntheticTable {
    let mut out = table.clone();
    for row in &mut out.rows {
        row.context = match retrieve_context_top_k(index, &row.left, &row.right, top_k) {
            Ok(found) => found.map(|s| s.text),
            Err(_) => None,
        };
    }
    out
}
