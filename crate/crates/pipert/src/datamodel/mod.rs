//! The query/result/qrel relations and the relational primitives that all
//! operator semantics are written against.
//!
//! All types are immutable values after construction and all operations are
//! pure functions, so frames can be shared and evaluated in parallel across
//! queries.

mod trec;

pub use trec::{format_run, read_qrels, read_topics, write_run};

use std::collections::{BTreeMap, HashMap, HashSet};

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// A single query: an id, its raw text, and (after rewriting/expansion) an
/// ordered term -> weight map.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub qid: String,
    pub text: String,
    pub terms: Option<IndexMap<String, f64>>,
}

impl Query {
    pub fn from_text(qid: impl Into<String>, text: impl Into<String>) -> Self {
        Query {
            qid: qid.into(),
            text: text.into(),
            terms: None,
        }
    }

    pub fn with_terms(
        qid: impl Into<String>,
        text: impl Into<String>,
        terms: IndexMap<String, f64>,
    ) -> Self {
        Query {
            qid: qid.into(),
            text: text.into(),
            terms: Some(terms),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qid.is_empty() {
            return Err(Error::InvalidQuery {
                qid: String::new(),
                reason: "empty qid".into(),
            });
        }
        let has_terms = self.terms.as_ref().is_some_and(|t| !t.is_empty());
        if self.text.is_empty() && !has_terms {
            return Err(Error::InvalidQuery {
                qid: self.qid.clone(),
                reason: "neither text nor terms present".into(),
            });
        }
        if let Some(terms) = &self.terms {
            for (t, w) in terms {
                if !w.is_finite() || *w < 0.0 {
                    return Err(Error::InvalidQuery {
                        qid: self.qid.clone(),
                        reason: format!("term `{t}` has invalid weight {w}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A finite ordered list of queries; qids are unique.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryFrame {
    queries: Vec<Query>,
}

impl QueryFrame {
    pub fn new(queries: Vec<Query>) -> Result<Self> {
        let mut seen = HashSet::new();
        for q in &queries {
            q.validate()?;
            if !seen.insert(q.qid.clone()) {
                return Err(Error::DuplicateQid(q.qid.clone()));
            }
        }
        Ok(QueryFrame { queries })
    }

    pub fn from_texts<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(qid, text)| Query::from_text(qid.as_ref(), text.as_ref()))
                .collect(),
        )
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn get(&self, qid: &str) -> Option<&Query> {
        self.queries.iter().find(|q| q.qid == qid)
    }

    pub fn qid_set(&self) -> HashSet<&str> {
        self.queries.iter().map(|q| q.qid.as_str()).collect()
    }
}

/// One scored (query, document) row. `score: None` is the undefined-score
/// sentinel produced by the set operators; any arithmetic on it is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub qid: String,
    pub docno: String,
    pub score: Option<f64>,
    pub rank: Option<u32>,
    pub features: Option<Vec<f64>>,
}

impl ResultRow {
    pub fn new(qid: impl Into<String>, docno: impl Into<String>, score: f64) -> Self {
        ResultRow {
            qid: qid.into(),
            docno: docno.into(),
            score: Some(score),
            rank: None,
            features: None,
        }
    }

    pub fn undefined(qid: impl Into<String>, docno: impl Into<String>) -> Self {
        ResultRow {
            qid: qid.into(),
            docno: docno.into(),
            score: None,
            rank: None,
            features: None,
        }
    }

    pub fn score_or_err(&self) -> Result<f64> {
        self.score.ok_or_else(|| Error::UndefinedScore {
            qid: self.qid.clone(),
            docno: self.docno.clone(),
        })
    }
}

/// An ordered list of scored rows plus the names of any feature columns.
/// `(qid, docno)` is the primary key.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultFrame {
    rows: Vec<ResultRow>,
    feature_names: Vec<String>,
}

impl ResultFrame {
    pub fn new(rows: Vec<ResultRow>, feature_names: Vec<String>) -> Result<Self> {
        let frame = ResultFrame {
            rows,
            feature_names,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn empty() -> Self {
        ResultFrame::default()
    }

    /// Convenience constructor for tests and fixtures: no features, no ranks.
    pub fn from_rows(rows: Vec<ResultRow>) -> Result<Self> {
        Self::new(rows, Vec::new())
    }

    pub fn rows(&self) -> &[ResultRow] {
        &self.rows
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Qids in order of first appearance.
    pub fn qids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in &self.rows {
            if seen.insert(r.qid.as_str()) {
                out.push(r.qid.as_str());
            }
        }
        out
    }

    /// Rows for one qid, in frame order.
    pub fn group(&self, qid: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.qid == qid).collect()
    }

    pub fn key_set(&self) -> HashSet<(&str, &str)> {
        self.rows
            .iter()
            .map(|r| (r.qid.as_str(), r.docno.as_str()))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.rows.len());
        for r in &self.rows {
            if !seen.insert((r.qid.as_str(), r.docno.as_str())) {
                return Err(Error::DuplicateKey {
                    qid: r.qid.clone(),
                    docno: r.docno.clone(),
                });
            }
            if let Some(s) = r.score {
                if !s.is_finite() {
                    return Err(Error::InvalidQuery {
                        qid: r.qid.clone(),
                        reason: format!("non-finite score {s} for docno {}", r.docno),
                    });
                }
            }
            match &r.features {
                Some(f) if f.len() != self.feature_names.len() => {
                    return Err(Error::FeatureLength {
                        qid: r.qid.clone(),
                        docno: r.docno.clone(),
                        want: self.feature_names.len(),
                        got: f.len(),
                    });
                }
                _ => {}
            }
        }
        self.validate_ranks()
    }

    // If any rank is set within a qid group, the whole group must carry
    // ranks 0..n-1 in row order with scores non-increasing and score ties
    // broken by ascending docno.
    fn validate_ranks(&self) -> Result<()> {
        let mut groups: IndexMap<&str, Vec<&ResultRow>> = IndexMap::new();
        for r in &self.rows {
            groups.entry(r.qid.as_str()).or_default().push(r);
        }
        for (qid, rows) in groups {
            if rows.iter().all(|r| r.rank.is_none()) {
                continue;
            }
            for (i, r) in rows.iter().enumerate() {
                if r.rank != Some(i as u32) {
                    return Err(Error::InvalidRanks {
                        qid: qid.to_string(),
                        reason: format!("expected rank {i} at docno {}, got {:?}", r.docno, r.rank),
                    });
                }
            }
            for w in rows.windows(2) {
                let (a, b) = (w[0], w[1]);
                let (sa, sb) = (a.score_or_err()?, b.score_or_err()?);
                if sb > sa || (sb == sa && b.docno < a.docno) {
                    return Err(Error::InvalidRanks {
                        qid: qid.to_string(),
                        reason: format!("rows {} and {} out of order", a.docno, b.docno),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A single relevance assessment: graded label, 0 = non-relevant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qrel {
    pub qid: String,
    pub docno: String,
    pub label: u32,
}

/// Relevance assessments keyed by (qid, docno).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QrelSet {
    by_qid: HashMap<String, HashMap<String, u32>>,
}

impl QrelSet {
    pub fn new(entries: Vec<Qrel>) -> Result<Self> {
        let mut by_qid: HashMap<String, HashMap<String, u32>> = HashMap::new();
        for e in entries {
            let per_query = by_qid.entry(e.qid.clone()).or_default();
            if per_query.insert(e.docno.clone(), e.label).is_some() {
                return Err(Error::DuplicateKey {
                    qid: e.qid,
                    docno: e.docno,
                });
            }
        }
        Ok(QrelSet { by_qid })
    }

    pub fn for_query(&self, qid: &str) -> Option<&HashMap<String, u32>> {
        self.by_qid.get(qid)
    }

    pub fn label(&self, qid: &str, docno: &str) -> u32 {
        self.by_qid
            .get(qid)
            .and_then(|m| m.get(docno))
            .copied()
            .unwrap_or(0)
    }

    /// Number of documents with label > 0 for this query.
    pub fn num_relevant(&self, qid: &str) -> usize {
        self.by_qid
            .get(qid)
            .map(|m| m.values().filter(|&&l| l > 0).count())
            .unwrap_or(0)
    }

    pub fn num_queries(&self) -> usize {
        self.by_qid.len()
    }
}

// ---------------------------------------------------------------------------
// Relational primitives
// ---------------------------------------------------------------------------

/// One output row of a natural join: both sides' score and features kept as
/// distinguishable attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedRow {
    pub qid: String,
    pub docno: String,
    pub left_score: Option<f64>,
    pub right_score: Option<f64>,
    pub left_features: Option<Vec<f64>>,
    pub right_features: Option<Vec<f64>>,
}

/// Natural join on the composite (qid, docno) key. Output contains exactly
/// the keys present in both inputs, in the left frame's row order.
pub fn natural_join(r1: &ResultFrame, r2: &ResultFrame) -> Vec<JoinedRow> {
    let right: HashMap<(&str, &str), &ResultRow> = r2
        .rows()
        .iter()
        .map(|r| ((r.qid.as_str(), r.docno.as_str()), r))
        .collect();
    r1.rows()
        .iter()
        .filter_map(|l| {
            right
                .get(&(l.qid.as_str(), l.docno.as_str()))
                .map(|r| JoinedRow {
                    qid: l.qid.clone(),
                    docno: l.docno.clone(),
                    left_score: l.score,
                    right_score: r.score,
                    left_features: l.features.clone(),
                    right_features: r.features.clone(),
                })
        })
        .collect()
}

/// Sortable row attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attr {
    Score,
    Rank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    Asc,
    Desc,
}

/// Sort rows by `key` within each qid group (groups keep their order of
/// first appearance), ties broken by ascending docno, ranks reassigned
/// 0..n-1 per group.
pub fn group_sort(frame: &ResultFrame, key: Attr, order: SortOrder) -> Result<ResultFrame> {
    let mut groups: IndexMap<&str, Vec<&ResultRow>> = IndexMap::new();
    for r in frame.rows() {
        groups.entry(r.qid.as_str()).or_default().push(r);
    }
    let mut out = Vec::with_capacity(frame.len());
    for (_, mut rows) in groups {
        let mut keys = Vec::with_capacity(rows.len());
        for r in &rows {
            let v = match key {
                Attr::Score => r.score_or_err()?,
                Attr::Rank => r
                    .rank
                    .map(f64::from)
                    .ok_or_else(|| Error::UndefinedRank {
                        qid: r.qid.clone(),
                        docno: r.docno.clone(),
                    })?,
            };
            keys.push(v);
        }
        let mut order_idx: Vec<usize> = (0..rows.len()).collect();
        order_idx.sort_by(|&a, &b| {
            let primary = match order {
                SortOrder::Asc => keys[a].total_cmp(&keys[b]),
                SortOrder::Desc => keys[b].total_cmp(&keys[a]),
            };
            primary.then_with(|| rows[a].docno.cmp(&rows[b].docno))
        });
        rows = order_idx.iter().map(|&i| rows[i]).collect();
        for (i, r) in rows.iter().enumerate() {
            let mut row = (*r).clone();
            row.rank = Some(i as u32);
            out.push(row);
        }
    }
    ResultFrame::new(out, frame.feature_names().to_vec())
}

/// Sort each group by descending score, keep the top `k` rows per qid.
pub fn select_topk(frame: &ResultFrame, k: usize) -> Result<ResultFrame> {
    if k == 0 {
        return Err(Error::InvalidK(0));
    }
    let sorted = group_sort(frame, Attr::Score, SortOrder::Desc)?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut out = Vec::new();
    for r in sorted.rows() {
        let c = counts.entry(r.qid.as_str()).or_insert(0);
        if *c < k {
            out.push(r.clone());
            *c += 1;
        }
    }
    ResultFrame::new(out, frame.feature_names().to_vec())
}

/// Replace the score attribute row-by-row; keys, order and all other
/// attributes unchanged. Failures of `f` are reported with the row key.
pub fn map_attr(
    frame: &ResultFrame,
    f: impl Fn(&ResultRow) -> Result<f64>,
) -> Result<ResultFrame> {
    let mut rows = Vec::with_capacity(frame.len());
    for r in frame.rows() {
        let v = f(r).map_err(|e| Error::MapFailed {
            qid: r.qid.clone(),
            docno: r.docno.clone(),
            source: Box::new(e),
        })?;
        let mut row = r.clone();
        row.score = Some(v);
        row.rank = None;
        rows.push(row);
    }
    ResultFrame::new(rows, frame.feature_names().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agg {
    Min,
    Max,
}

/// Per-qid aggregate over the score attribute.
pub fn group_aggregate(frame: &ResultFrame, agg: Agg) -> Result<BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for r in frame.rows() {
        let s = r.score_or_err()?;
        out.entry(r.qid.clone())
            .and_modify(|v| {
                *v = match agg {
                    Agg::Min => v.min(s),
                    Agg::Max => v.max(s),
                }
            })
            .or_insert(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(rows: &[(&str, &str, f64)]) -> ResultFrame {
        ResultFrame::from_rows(
            rows.iter()
                .map(|(q, d, s)| ResultRow::new(*q, *d, *s))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn join_keeps_common_keys_with_both_scores() {
        let r1 = frame(&[("q1", "d1", 1.0), ("q1", "d2", 0.5)]);
        let r2 = frame(&[("q1", "d1", 0.25), ("q1", "d3", 0.9)]);
        let joined = natural_join(&r1, &r2);
        assert_eq!(joined.len(), 1);
        assert_eq!(joined[0].docno, "d1");
        assert_eq!(joined[0].left_score, Some(1.0));
        assert_eq!(joined[0].right_score, Some(0.25));
    }

    #[test]
    fn join_with_empty_is_empty() {
        let r1 = ResultFrame::empty();
        let r2 = frame(&[("q1", "d1", 1.0)]);
        assert!(natural_join(&r1, &r2).is_empty());
        assert!(natural_join(&r2, &r1).is_empty());
    }

    #[test]
    fn self_join_is_identity_on_keys() {
        let r = frame(&[("q1", "d1", 2.0)]);
        let joined = natural_join(&r, &r);
        assert_eq!(joined.len(), 1);
        assert_eq!(joined[0].left_score, joined[0].right_score);
    }

    #[test]
    fn group_sort_desc_with_tie_break() {
        let r = frame(&[("q1", "dB", 3.0), ("q1", "dA", 5.0)]);
        let sorted = group_sort(&r, Attr::Score, SortOrder::Desc).unwrap();
        let docs: Vec<_> = sorted.rows().iter().map(|r| r.docno.as_str()).collect();
        assert_eq!(docs, ["dA", "dB"]);
        assert_eq!(sorted.rows()[0].rank, Some(0));
        assert_eq!(sorted.rows()[1].rank, Some(1));

        let tied = frame(&[("q1", "dB", 1.0), ("q1", "dA", 1.0)]);
        let sorted = group_sort(&tied, Attr::Score, SortOrder::Desc).unwrap();
        let docs: Vec<_> = sorted.rows().iter().map(|r| r.docno.as_str()).collect();
        assert_eq!(docs, ["dA", "dB"]);
    }

    #[test]
    fn group_sort_multi_query_groups_independent() {
        let r = frame(&[
            ("q2", "dX", 1.0),
            ("q1", "dB", 3.0),
            ("q2", "dY", 9.0),
            ("q1", "dA", 5.0),
        ]);
        let sorted = group_sort(&r, Attr::Score, SortOrder::Desc).unwrap();
        // Oracle: sort each group independently, keep first-appearance group order.
        let got: Vec<_> = sorted
            .rows()
            .iter()
            .map(|r| (r.qid.as_str(), r.docno.as_str()))
            .collect();
        assert_eq!(
            got,
            [("q2", "dY"), ("q2", "dX"), ("q1", "dA"), ("q1", "dB")]
        );
    }

    #[test]
    fn group_sort_rejects_undefined_scores() {
        let r = ResultFrame::from_rows(vec![ResultRow::undefined("q1", "d1")]).unwrap();
        assert!(matches!(
            group_sort(&r, Attr::Score, SortOrder::Desc),
            Err(Error::UndefinedScore { .. })
        ));
    }

    #[test]
    fn topk_slices_per_group() {
        let r = frame(&[
            ("q1", "d1", 1.0),
            ("q1", "d2", 5.0),
            ("q1", "d3", 3.0),
            ("q1", "d4", 4.0),
            ("q1", "d5", 2.0),
        ]);
        let top = select_topk(&r, 3).unwrap();
        let docs: Vec<_> = top.rows().iter().map(|r| r.docno.as_str()).collect();
        assert_eq!(docs, ["d2", "d4", "d3"]);

        let small = frame(&[("q1", "d1", 1.0), ("q1", "d2", 2.0)]);
        assert_eq!(select_topk(&small, 10).unwrap().len(), 2);

        let k1 = frame(&[("q1", "dA", 5.0), ("q1", "dB", 3.0)]);
        let top = select_topk(&k1, 1).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top.rows()[0].docno, "dA");
    }

    #[test]
    fn topk_rejects_zero_k() {
        let r = frame(&[("q1", "d1", 1.0)]);
        assert!(matches!(select_topk(&r, 0), Err(Error::InvalidK(0))));
    }

    #[test]
    fn map_attr_examples() {
        let r = frame(&[("q1", "d1", 1.5)]);
        let doubled = map_attr(&r, |row| Ok(row.score_or_err()? * 2.0)).unwrap();
        assert_eq!(doubled.rows()[0].score, Some(3.0));
        let zeroed = map_attr(&r, |_| Ok(0.0)).unwrap();
        assert_eq!(zeroed.rows()[0].score, Some(0.0));
    }

    #[test]
    fn map_attr_attaches_row_key_on_failure() {
        let r = ResultFrame::from_rows(vec![ResultRow::undefined("q1", "d9")]).unwrap();
        let err = map_attr(&r, |row| row.score_or_err()).unwrap_err();
        match err {
            Error::MapFailed { qid, docno, .. } => {
                assert_eq!(qid, "q1");
                assert_eq!(docno, "d9");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn group_aggregate_min_max() {
        let r = frame(&[("q1", "dA", 5.0), ("q1", "dB", 3.0)]);
        assert_eq!(group_aggregate(&r, Agg::Min).unwrap()["q1"], 3.0);
        assert_eq!(group_aggregate(&r, Agg::Max).unwrap()["q1"], 5.0);

        let two = frame(&[("q1", "dA", 5.0), ("q2", "dB", 3.0), ("q2", "dC", 7.0)]);
        let mins = group_aggregate(&two, Agg::Min).unwrap();
        assert_eq!(mins.len(), 2);
        assert_eq!(mins["q1"], 5.0);
        assert_eq!(mins["q2"], 3.0);
    }

    #[test]
    fn frame_rejects_duplicate_keys() {
        let rows = vec![ResultRow::new("q1", "d1", 1.0), ResultRow::new("q1", "d1", 2.0)];
        assert!(matches!(
            ResultFrame::from_rows(rows),
            Err(Error::DuplicateKey { .. })
        ));
    }

    #[test]
    fn query_frame_rejects_duplicate_qids() {
        let qs = vec![Query::from_text("q1", "a"), Query::from_text("q1", "b")];
        assert!(matches!(QueryFrame::new(qs), Err(Error::DuplicateQid(_))));
    }

    #[test]
    fn query_validation() {
        assert!(Query::from_text("", "x").validate().is_err());
        assert!(Query::from_text("q1", "").validate().is_err());
        let mut terms = IndexMap::new();
        terms.insert("a".to_string(), -1.0);
        assert!(Query::with_terms("q1", "", terms).validate().is_err());
    }
}
