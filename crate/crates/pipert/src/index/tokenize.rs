//! Tokenization: lowercase, split on non-alphanumeric runs, stopword
//! removal, optional Porter stemming. Indexing and query processing must
//! share one `IndexOptions` so term matching is consistent.

use std::collections::BTreeSet;

use super::porter::porter_stem;

/// The classic 33-word SMART-style English stop list, shipped as a versioned
/// resource; its hash is recorded in the index header.
pub const DEFAULT_STOPWORDS: [&str; 33] = [
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "if", "in", "into", "is",
    "it", "no", "not", "of", "on", "or", "such", "that", "the", "their", "then", "there",
    "these", "they", "this", "to", "was", "will", "with",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexOptions {
    pub stem: bool,
    pub stopwords: BTreeSet<String>,
    pub build_direct: bool,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            stem: true,
            stopwords: default_stopwords(),
            build_direct: true,
        }
    }
}

impl IndexOptions {
    pub fn no_stopwords(mut self) -> Self {
        self.stopwords = BTreeSet::new();
        self
    }

    pub fn with_stem(mut self, stem: bool) -> Self {
        self.stem = stem;
        self
    }

    pub fn with_direct(mut self, direct: bool) -> Self {
        self.build_direct = direct;
        self
    }

    pub fn stopword_hash(&self) -> u64 {
        stopword_hash(&self.stopwords)
    }
}

pub fn default_stopwords() -> BTreeSet<String> {
    DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect()
}

/// FNV-1a over the sorted stop list, newline-separated.
pub fn stopword_hash(stopwords: &BTreeSet<String>) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for word in stopwords {
        for b in word.bytes().chain(std::iter::once(b'\n')) {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    hash
}

pub fn tokenize(text: &str, opts: &IndexOptions) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .filter(|t| !opts.stopwords.contains(t))
        .map(|t| if opts.stem { porter_stem(&t) } else { t })
        .collect()
}
