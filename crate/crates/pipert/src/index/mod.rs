//! Immutable inverted index with collection statistics and an optional
//! direct index (document term vectors) for query expansion.
//!
//! The index is the native backend all retrieval strategies run against. It
//! is immutable after build/load, so concurrent readers are safe; the only
//! mutable cell is the per-(model, term) upper-bound cache, a thread-safe
//! memoization used by dynamic pruning.

mod format;
mod porter;
mod tokenize;

pub use format::{read_index, read_index_with_stopwords, write_index};
pub use porter::porter_stem;
pub use tokenize::{default_stopwords, stopword_hash, tokenize, IndexOptions, DEFAULT_STOPWORDS};

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::RwLock;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub docid: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocEntry {
    pub docno: String,
    pub doclen: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermEntry {
    pub term: String,
    pub df: u32,
    pub cf: u64,
    /// Start of this term's postings in the flat postings array.
    pub start: usize,
}

/// Counters accumulated by the pruned retrieval strategies, exposed for
/// benchmarking. Relaxed atomics; reset between timed runs.
#[derive(Debug, Default)]
pub struct PruningCounters {
    pub postings_visited: AtomicU64,
    pub postings_skipped: AtomicU64,
    pub docs_fully_scored: AtomicU64,
    pub docs_pruned: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruningStats {
    pub postings_visited: u64,
    pub postings_skipped: u64,
    pub docs_fully_scored: u64,
    pub docs_pruned: u64,
}

impl PruningCounters {
    pub fn record(&self, stats: PruningStats) {
        self.postings_visited
            .fetch_add(stats.postings_visited, Ordering::Relaxed);
        self.postings_skipped
            .fetch_add(stats.postings_skipped, Ordering::Relaxed);
        self.docs_fully_scored
            .fetch_add(stats.docs_fully_scored, Ordering::Relaxed);
        self.docs_pruned
            .fetch_add(stats.docs_pruned, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> PruningStats {
        PruningStats {
            postings_visited: self.postings_visited.load(Ordering::Relaxed),
            postings_skipped: self.postings_skipped.load(Ordering::Relaxed),
            docs_fully_scored: self.docs_fully_scored.load(Ordering::Relaxed),
            docs_pruned: self.docs_pruned.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.postings_visited.store(0, Ordering::Relaxed);
        self.postings_skipped.store(0, Ordering::Relaxed);
        self.docs_fully_scored.store(0, Ordering::Relaxed);
        self.docs_pruned.store(0, Ordering::Relaxed);
    }
}

pub struct Index {
    options: IndexOptions,
    n_docs: u32,
    total_tokens: u64,
    min_doclen: u32,
    docs: Vec<DocEntry>,
    terms: Vec<TermEntry>,
    postings: Vec<Posting>,
    direct: Option<Vec<Vec<(u32, u32)>>>,
    docno_ids: HashMap<String, u32>,
    ub_cache: RwLock<HashMap<(String, u32), f64>>,
    counters: PruningCounters,
}

impl std::fmt::Debug for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Index")
            .field("n_docs", &self.n_docs)
            .field("n_terms", &self.terms.len())
            .field("total_tokens", &self.total_tokens)
            .field("direct", &self.direct.is_some())
            .finish()
    }
}

impl PartialEq for Index {
    fn eq(&self, other: &Self) -> bool {
        self.options == other.options
            && self.n_docs == other.n_docs
            && self.total_tokens == other.total_tokens
            && self.docs == other.docs
            && self.terms == other.terms
            && self.postings == other.postings
            && self.direct == other.direct
    }
}

impl Index {
    pub fn options(&self) -> &IndexOptions {
        &self.options
    }

    pub fn doc_count(&self) -> u32 {
        self.n_docs
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn avg_doclen(&self) -> f64 {
        if self.n_docs == 0 {
            0.0
        } else {
            self.total_tokens as f64 / self.n_docs as f64
        }
    }

    pub fn min_doclen(&self) -> u32 {
        self.min_doclen
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn docno(&self, docid: u32) -> &str {
        &self.docs[docid as usize].docno
    }

    pub fn doclen(&self, docid: u32) -> u32 {
        self.docs[docid as usize].doclen
    }

    pub fn doc_id(&self, docno: &str) -> Option<u32> {
        self.docno_ids.get(docno).copied()
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.terms
            .binary_search_by(|e| e.term.as_str().cmp(term))
            .ok()
            .map(|i| i as u32)
    }

    pub fn term_entry(&self, term_id: u32) -> &TermEntry {
        &self.terms[term_id as usize]
    }

    /// (df, cf) for a term, or None when the term is absent.
    pub fn term_stats(&self, term: &str) -> Option<(u32, u64)> {
        self.term_id(term).map(|id| {
            let e = &self.terms[id as usize];
            (e.df, e.cf)
        })
    }

    pub fn postings(&self, term_id: u32) -> &[Posting] {
        let e = &self.terms[term_id as usize];
        &self.postings[e.start..e.start + e.df as usize]
    }

    /// Term vector of one document: (term_id, tf) sorted by term_id.
    pub fn doc_vector(&self, docid: u32) -> Result<&[(u32, u32)]> {
        let direct = self.direct.as_ref().ok_or(Error::DirectIndexMissing)?;
        Ok(&direct[docid as usize])
    }

    pub fn has_direct(&self) -> bool {
        self.direct.is_some()
    }

    pub fn tokenize_query(&self, text: &str) -> Vec<String> {
        tokenize(text, &self.options)
    }

    /// Memoize an exact per-term score upper bound. Concurrent first
    /// computations may race; they compute the same value.
    pub fn cached_upper_bound(
        &self,
        model_key: &str,
        term_id: u32,
        compute: impl FnOnce() -> f64,
    ) -> f64 {
        if let Some(v) = self.ub_cache.read().get(&(model_key.to_string(), term_id)) {
            return *v;
        }
        let v = compute();
        self.ub_cache
            .write()
            .insert((model_key.to_string(), term_id), v);
        v
    }

    pub fn counters(&self) -> &PruningCounters {
        &self.counters
    }

    fn from_parts(
        options: IndexOptions,
        total_tokens: u64,
        docs: Vec<DocEntry>,
        terms: Vec<TermEntry>,
        postings: Vec<Posting>,
        direct: Option<Vec<Vec<(u32, u32)>>>,
    ) -> Result<Index> {
        let mut docno_ids = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if docno_ids.insert(d.docno.clone(), i as u32).is_some() {
                return Err(Error::DuplicateDocno(d.docno.clone()));
            }
        }
        let min_doclen = docs.iter().map(|d| d.doclen).min().unwrap_or(0);
        Ok(Index {
            options,
            n_docs: docs.len() as u32,
            total_tokens,
            min_doclen,
            docs,
            terms,
            postings,
            direct,
            docno_ids,
            ub_cache: RwLock::new(HashMap::new()),
            counters: PruningCounters::default(),
        })
    }
}

/// Build an index from a finite stream of (docno, text) pairs. Docids are
/// assigned in stream order starting at 0.
pub fn build_index<I>(docs: I, options: IndexOptions) -> Result<Index>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut term_ids: HashMap<String, u32> = HashMap::new();
    let mut postings_by_term: Vec<Vec<Posting>> = Vec::new();
    let mut doc_entries: Vec<DocEntry> = Vec::new();
    let mut direct_tmp: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut total_tokens: u64 = 0;

    for (docno, text) in docs {
        let docid = doc_entries.len() as u32;
        let tokens = tokenize(&text, &options);
        let doclen = tokens.len() as u32;
        total_tokens += doclen as u64;

        let mut counts: HashMap<String, u32> = HashMap::new();
        for t in tokens {
            *counts.entry(t).or_insert(0) += 1;
        }
        let mut doc_terms: Vec<(u32, u32)> = Vec::with_capacity(counts.len());
        for (term, tf) in counts {
            let next = postings_by_term.len() as u32;
            let tid = *term_ids.entry(term).or_insert_with(|| {
                postings_by_term.push(Vec::new());
                next
            });
            postings_by_term[tid as usize].push(Posting { docid, tf });
            doc_terms.push((tid, tf));
        }
        if options.build_direct {
            direct_tmp.push(doc_terms);
        }
        doc_entries.push(DocEntry { docno, doclen });
    }

    // Finalize term ids in lexicographic order.
    let mut sorted: Vec<(String, u32)> = term_ids.into_iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut remap = vec![0u32; sorted.len()];
    let mut terms = Vec::with_capacity(sorted.len());
    let mut postings = Vec::new();
    for (final_id, (term, tmp_id)) in sorted.into_iter().enumerate() {
        remap[tmp_id as usize] = final_id as u32;
        let list = &postings_by_term[tmp_id as usize];
        let cf: u64 = list.iter().map(|p| p.tf as u64).sum();
        terms.push(TermEntry {
            term,
            df: list.len() as u32,
            cf,
            start: postings.len(),
        });
        postings.extend_from_slice(list);
    }

    let direct = if options.build_direct {
        Some(
            direct_tmp
                .into_iter()
                .map(|mut v| {
                    for (tid, _) in v.iter_mut() {
                        *tid = remap[*tid as usize];
                    }
                    v.sort_by_key(|(tid, _)| *tid);
                    v
                })
                .collect(),
        )
    } else {
        None
    };

    Index::from_parts(options, total_tokens, doc_entries, terms, postings, direct)
}

#[derive(Deserialize)]
struct CorpusDoc {
    docno: String,
    text: String,
}

/// Read a JSON-lines corpus: one object per line with string fields
/// `docno` and `text`.
pub fn read_corpus_jsonl(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: CorpusDoc = serde_json::from_str(&line).map_err(|e| Error::Corpus {
            line: i + 1,
            reason: e.to_string(),
        })?;
        docs.push((doc.docno, doc.text));
    }
    Ok(docs)
}

pub fn build_from_jsonl(path: impl AsRef<Path>, options: IndexOptions) -> Result<Index> {
    build_index(read_corpus_jsonl(path)?, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_opts() -> IndexOptions {
        IndexOptions::default().with_stem(false).no_stopwords()
    }

    fn two_doc_index() -> Index {
        build_index(
            vec![
                ("d1".to_string(), "a b".to_string()),
                ("d2".to_string(), "b b c".to_string()),
            ],
            raw_opts(),
        )
        .unwrap()
    }

    #[test]
    fn hand_counted_statistics() {
        let ix = two_doc_index();
        assert_eq!(ix.doc_count(), 2);
        assert_eq!(ix.term_stats("b"), Some((2, 3)));
        assert_eq!(ix.term_stats("a"), Some((1, 1)));
        assert_eq!(ix.doclen(0), 2);
        assert_eq!(ix.doclen(1), 3);
        assert_eq!(ix.total_tokens(), 5);
        assert_eq!(ix.avg_doclen(), 2.5);
    }

    #[test]
    fn term_absent_is_none() {
        let ix = two_doc_index();
        assert_eq!(ix.term_stats("zebra"), None);
    }

    #[test]
    fn doc_vector_matches_hand_count() {
        let ix = two_doc_index();
        let v = ix.doc_vector(1).unwrap();
        let named: Vec<(&str, u32)> = v
            .iter()
            .map(|&(tid, tf)| (ix.term_entry(tid).term.as_str(), tf))
            .collect();
        assert_eq!(named, [("b", 2), ("c", 1)]);
    }

    #[test]
    fn direct_index_missing_error() {
        let ix = build_index(
            vec![("d1".to_string(), "a".to_string())],
            raw_opts().with_direct(false),
        )
        .unwrap();
        assert!(matches!(ix.doc_vector(0), Err(Error::DirectIndexMissing)));
    }

    #[test]
    fn empty_stream_builds_empty_index() {
        let ix = build_index(Vec::new(), raw_opts()).unwrap();
        assert_eq!(ix.doc_count(), 0);
        assert_eq!(ix.term_count(), 0);
    }

    #[test]
    fn duplicate_docno_rejected() {
        let err = build_index(
            vec![
                ("d1".to_string(), "a".to_string()),
                ("d1".to_string(), "b".to_string()),
            ],
            raw_opts(),
        )
        .unwrap_err();
        match err {
            Error::DuplicateDocno(d) => assert_eq!(d, "d1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn postings_reproduce_lexicon_counts() {
        let ix = build_index(
            vec![
                ("d1".into(), "x y x z".into()),
                ("d2".into(), "y y z".into()),
                ("d3".into(), "z".into()),
            ],
            raw_opts(),
        )
        .unwrap();
        for tid in 0..ix.term_count() as u32 {
            let e = ix.term_entry(tid);
            let postings = ix.postings(tid);
            assert_eq!(postings.len(), e.df as usize);
            assert_eq!(postings.iter().map(|p| p.tf as u64).sum::<u64>(), e.cf);
            for w in postings.windows(2) {
                assert!(w[0].docid < w[1].docid);
            }
        }
    }
}
