//! Fixture generators and brute-force oracles shared by the integration
//! tests. Oracles recompute everything from raw text and counts and do not
//! call into the library's indexing, scoring or selection code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabmeta::corpus::ParagraphRecord;
use tabmeta::headers::TableCorpusRecord;
use tabmeta::kg::FactTriple;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Knowledge-graph fixtures

/// `relations` relations with `per_relation` distinct facts each, as TSV.
pub fn kg_fixture_tsv(relations: usize, per_relation: usize) -> String {
    let mut out = String::new();
    for r in 0..relations {
        for i in 0..per_relation {
            out.push_str(&format!("Subject {r} {i}\trel_{r:02}\tObject {r} {i}\n"));
        }
    }
    out
}

/// 1,000 lines over a handful of relations with deliberate duplicates.
pub fn noisy_kg_tsv(seed: u64) -> String {
    let mut rng = rng(seed);
    let mut out = String::new();
    for _ in 0..1000 {
        let r = rng.gen_range(0..7);
        let s = rng.gen_range(0..60);
        let o = rng.gen_range(0..5);
        out.push_str(&format!("s{s}\tr{r}\to{o}\n"));
    }
    out
}

/// Per-relation distinct-fact counts by linear scan of the raw lines.
pub fn tally_relations(tsv: &str) -> BTreeMap<String, usize> {
    let mut seen: BTreeSet<(&str, &str, &str)> = BTreeSet::new();
    let mut counts = BTreeMap::new();
    for line in tsv.lines().filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split('\t').collect();
        if seen.insert((f[0], f[1], f[2])) {
            *counts.entry(f[1].to_string()).or_insert(0) += 1;
        }
    }
    counts
}

pub fn fact_set(triples: &[FactTriple], relation: &str) -> BTreeSet<(String, String)> {
    triples
        .iter()
        .filter(|t| t.relation == relation)
        .map(|t| (t.subject.clone(), t.object.clone()))
        .collect()
}

// ---------------------------------------------------------------------------
// Paragraph corpus

pub const ENTITIES: &[&str] = &[
    "Paris", "France", "Lyon", "New York", "York", "New Jersey", "Berlin", "Germany",
    "Rhine", "Danube", "Vienna", "Austria", "Rome", "Italy", "Tiber", "Madrid", "Spain",
    "Lisbon", "Portugal", "Tagus", "Oslo", "Norway", "Bergen", "Amsterdam", "Netherlands",
    "Brussels", "Belgium", "Prague", "Czech Republic", "Warsaw", "Poland", "Vistula",
    "Athens", "Greece", "Dublin", "Ireland", "Liffey", "Cairo", "Egypt", "Nile",
];

const FILLER: &[&str] = &[
    "the", "city", "of", "is", "capital", "river", "flows", "through", "near", "large",
    "old", "and", "a", "in", "country", "population", "famous", "north", "south", "bridge",
    "museum", "parisian", "yorkshire", "new", "was", "founded", "by", "trade",
];

fn sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(3..12);
    let mut words: Vec<String> = Vec::new();
    for _ in 0..n {
        if rng.gen_bool(0.3) {
            words.push(ENTITIES.choose(rng).unwrap().to_string());
        } else {
            words.push(FILLER.choose(rng).unwrap().to_string());
        }
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push(*['.', '.', '!', '?'].choose(rng).unwrap());
    s
}

/// `n` paragraphs over a few documents; 1 to 5 sentences each, some very
/// short.
pub fn corpus_fixture(n: usize, seed: u64) -> Vec<ParagraphRecord> {
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let doc = format!("doc{:03}", i % 37);
            let text = if rng.gen_bool(0.05) {
                let a = ENTITIES.choose(&mut rng).unwrap();
                let b = ENTITIES.choose(&mut rng).unwrap();
                format!("{a} {b}")
            } else {
                let k = rng.gen_range(1..=5);
                (0..k).map(|_| sentence(&mut rng)).collect::<Vec<_>>().join(" ")
            };
            ParagraphRecord::new(doc, (i / 37) as u64, &text).unwrap()
        })
        .collect()
}

/// Random entity pairs, half drawn from pairs that co-occur in one paragraph.
pub fn entity_pairs(corpus: &[ParagraphRecord], n: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = rng(seed);
    let mut pairs = Vec::new();
    while pairs.len() < n {
        if rng.gen_bool(0.5) {
            let p = corpus.choose(&mut rng).unwrap();
            let present: Vec<&&str> = ENTITIES
                .iter()
                .filter(|e| oracle_phrase_in(&oracle_tokens(&p.text), &oracle_tokens(e)))
                .collect();
            if present.len() >= 2 {
                let picked: Vec<&&&str> = present.choose_multiple(&mut rng, 2).collect();
                pairs.push((picked[0].to_string(), picked[1].to_string()));
            }
        } else {
            let a = ENTITIES.choose(&mut rng).unwrap();
            let b = ENTITIES.choose(&mut rng).unwrap();
            pairs.push((a.to_string(), b.to_string()));
        }
    }
    pairs
}

// ---------------------------------------------------------------------------
// Retrieval oracles

pub fn oracle_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.chars().flat_map(char::to_lowercase).collect())
        .collect()
}

pub fn oracle_phrase_in(hay: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > hay.len() {
        return false;
    }
    (0..=hay.len() - needle.len()).any(|i| (0..needle.len()).all(|j| hay[i + j] == needle[j]))
}

/// Document frequency of every term by full scan.
pub fn oracle_df(corpus: &[ParagraphRecord]) -> HashMap<String, usize> {
    let mut df = HashMap::new();
    for p in corpus {
        let uniq: BTreeSet<String> = oracle_tokens(&p.text).into_iter().collect();
        for t in uniq {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    df
}

pub struct NaiveScorer {
    tokens: Vec<Vec<String>>,
    df: HashMap<String, usize>,
    avg: f64,
    n: f64,
}

impl NaiveScorer {
    pub fn new(corpus: &[ParagraphRecord]) -> Self {
        let tokens: Vec<Vec<String>> = corpus.iter().map(|p| oracle_tokens(&p.text)).collect();
        let total: usize = tokens.iter().map(Vec::len).sum();
        let n = corpus.len() as f64;
        Self {
            df: oracle_df(corpus),
            avg: if corpus.is_empty() { 0.0 } else { total as f64 / n },
            n,
            tokens,
        }
    }

    /// BM25 of paragraph `i` (k1 = 1.2, b = 0.75) over the distinct terms.
    pub fn score(&self, i: usize, terms: &[String]) -> f64 {
        let distinct: BTreeSet<&String> = terms.iter().collect();
        let len = self.tokens[i].len() as f64;
        let mut s = 0.0;
        for t in distinct {
            let tf = self.tokens[i].iter().filter(|x| *x == t).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let df = *self.df.get(t).unwrap_or(&0) as f64;
            let idf = (1.0 + (self.n - df + 0.5) / (df + 0.5)).ln();
            s += idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * len / self.avg));
        }
        s
    }

    /// All paragraphs mentioning both phrases, best first, ties by key.
    /// Returns `(corpus position, score)`.
    pub fn and_scan(&self, corpus: &[ParagraphRecord], e1: &str, e2: &str) -> Vec<(usize, f64)> {
        let (t1, t2) = (oracle_tokens(e1), oracle_tokens(e2));
        let mut terms = t1.clone();
        terms.extend(t2.iter().cloned());
        let mut hits: Vec<(usize, f64)> = (0..corpus.len())
            .filter(|&i| oracle_phrase_in(&self.tokens[i], &t1) && oracle_phrase_in(&self.tokens[i], &t2))
            .map(|i| (i, self.score(i, &terms)))
            .collect();
        hits.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| (&corpus[a.0].doc_id, corpus[a.0].para_id).cmp(&(&corpus[b.0].doc_id, corpus[b.0].para_id)))
        });
        hits
    }
}

pub fn oracle_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        cur.push(c);
        let terminal = matches!(c, '.' | '!' | '?');
        let at_boundary = i + 1 == chars.len() || chars[i + 1].is_whitespace();
        if terminal && at_boundary {
            let s = cur.trim().to_string();
            if !s.is_empty() {
                out.push(s);
            }
            cur.clear();
        }
    }
    let s = cur.trim().to_string();
    if !s.is_empty() {
        out.push(s);
    }
    out
}

/// Full context cascade by brute force: returns (source position, snippet
/// text, co-sentential?).
pub fn oracle_cascade(
    scorer: &NaiveScorer,
    corpus: &[ParagraphRecord],
    e1: &str,
    e2: &str,
) -> Option<(usize, String, bool)> {
    let threshold = e1.chars().count() + e2.chars().count() + 3;
    let top10: Vec<(usize, f64)> = scorer.and_scan(corpus, e1, e2).into_iter().take(10).collect();
    let (best, _) = top10
        .into_iter()
        .find(|(i, _)| corpus[*i].text.chars().count() >= threshold)?;
    let (t1, t2) = (oracle_tokens(e1), oracle_tokens(e2));
    let sentences = oracle_sentences(&corpus[best].text);
    for s in &sentences {
        let toks = oracle_tokens(s);
        if oracle_phrase_in(&toks, &t1) && oracle_phrase_in(&toks, &t2) {
            return Some((best, s.clone(), true));
        }
    }
    let s1 = sentences.iter().find(|s| oracle_phrase_in(&oracle_tokens(s), &t1))?;
    let s2 = sentences.iter().find(|s| oracle_phrase_in(&oracle_tokens(s), &t2))?;
    Some((best, format!("{s1} {s2}"), false))
}

// ---------------------------------------------------------------------------
// Web-table corpus

const HEADERS: &[&str] = &["City", "city", "Capital", "Country", "Nation", "River", "Town", "Name", ""];

/// `n` tables of 1–4 columns; cells drawn from a small vocabulary so that
/// entities collect several headers with frequent ties.
pub fn table_corpus_fixture(n: usize, seed: u64) -> Vec<TableCorpusRecord> {
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let cols = rng.gen_range(1..=4);
            let headers: Vec<String> = (0..cols)
                .map(|_| {
                    let h = HEADERS.choose(&mut rng).unwrap();
                    if rng.gen_bool(0.1) {
                        format!("  {h}  ")
                    } else {
                        h.to_string()
                    }
                })
                .collect();
            let columns = (0..cols)
                .map(|_| {
                    (0..rng.gen_range(0..8))
                        .map(|_| {
                            let e = ENTITIES.choose(&mut rng).unwrap();
                            match rng.gen_range(0..10) {
                                0 => e.to_uppercase(),
                                1 => String::new(),
                                _ => e.to_string(),
                            }
                        })
                        .collect()
                })
                .collect();
            TableCorpusRecord {
                table_id: format!("web{i:04}"),
                headers,
                columns,
            }
        })
        .collect()
}

fn norm(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Nested-loop tally of (entity, header) co-occurrences.
pub fn oracle_header_tally(records: &[TableCorpusRecord]) -> HashMap<(String, String), u64> {
    let mut tally = HashMap::new();
    for r in records {
        for c in 0..r.headers.len() {
            for cell in &r.columns[c] {
                let (e, h) = (norm(cell), norm(&r.headers[c]));
                if !e.is_empty() && !h.is_empty() {
                    *tally.entry((e, h)).or_insert(0) += 1;
                }
            }
        }
    }
    tally
}

/// Most frequent header of `entity`; ties to the smallest header.
pub fn oracle_candidate(tally: &HashMap<(String, String), u64>, entity: &str) -> Option<String> {
    let e = norm(entity);
    let mut options: Vec<(u64, String)> = tally
        .iter()
        .filter(|((te, _), _)| *te == e)
        .map(|((_, h), &n)| (n, h.clone()))
        .collect();
    options.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    options.into_iter().next().map(|(_, h)| h)
}

/// Column header by brute force. Returns the tied top set (sorted) and the
/// pick made with one draw from `rng` when there is more than one.
pub fn oracle_column_header<R: Rng>(
    tally: &HashMap<(String, String), u64>,
    cells: &[&str],
    rng: &mut R,
) -> Option<(Vec<String>, String)> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for c in cells {
        if let Some(h) = oracle_candidate(tally, c) {
            *counts.entry(h).or_insert(0) += 1;
        }
    }
    let top = *counts.values().max()?;
    let mut tied: Vec<String> = counts.into_iter().filter(|(_, n)| *n == top).map(|(h, _)| h).collect();
    tied.sort();
    let pick = if tied.len() == 1 {
        tied[0].clone()
    } else {
        tied[rng.gen_range(0..tied.len())].clone()
    };
    Some((tied, pick))
}
