//! Crate-wide error type.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // -- frames and relational primitives --
    #[error("undefined score at ({qid}, {docno})")]
    UndefinedScore { qid: String, docno: String },
    #[error("undefined rank at ({qid}, {docno})")]
    UndefinedRank { qid: String, docno: String },
    #[error("invalid k: {0} (must be >= 1)")]
    InvalidK(usize),
    #[error("duplicate (qid, docno) key: ({qid}, {docno})")]
    DuplicateKey { qid: String, docno: String },
    #[error("duplicate qid: {0}")]
    DuplicateQid(String),
    #[error("invalid query {qid}: {reason}")]
    InvalidQuery { qid: String, reason: String },
    #[error("feature vector length {got} does not match {want} feature names at ({qid}, {docno})")]
    FeatureLength {
        qid: String,
        docno: String,
        want: usize,
        got: usize,
    },
    #[error("invalid ranks for qid {qid}: {reason}")]
    InvalidRanks { qid: String, reason: String },
    #[error("map_attr failed at ({qid}, {docno}): {source}")]
    MapFailed {
        qid: String,
        docno: String,
        source: Box<Error>,
    },

    // -- index --
    #[error("duplicate docno: {0}")]
    DuplicateDocno(String),
    #[error("index format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },
    #[error("direct index missing (index was built with build_direct = false)")]
    DirectIndexMissing,
    #[error("degenerate collection statistics: {0}")]
    DegenerateStats(String),
    #[error("unknown docno: {0}")]
    UnknownDocno(String),
    #[error("corpus line {line}: {reason}")]
    Corpus { line: usize, reason: String },

    // -- retrieval --
    #[error("invalid weighting model: {0}")]
    InvalidModel(String),
    #[error("no feedback results for qid {0}")]
    EmptyFeedback(String),

    // -- transformers / operators --
    #[error("stage {stage} requires a results input")]
    MissingResults { stage: String },
    #[error("linear reranker has not been trained")]
    NotTrained,
    #[error("feature length mismatch: model has {expected} weights, frame has {got} features")]
    FeatureLengthMismatch { expected: usize, got: usize },
    #[error("pipeline contains no trainable stage")]
    NoTrainableStage,
    #[error("empty training set: {0}")]
    EmptyTrainingSet(String),
    #[error("transformer contract violation: {0}")]
    ContractViolation(String),
    #[error("feature name collision: {0}")]
    FeatureNameCollision(String),
    #[error("at {path}: {source}")]
    At { path: String, source: Box<Error> },

    // -- compiler --
    #[error("rewrite did not terminate after {0} iterations (buggy rule?)")]
    RuleNonTermination(usize),

    // -- eval --
    #[error("unknown metric: {0}")]
    UnknownMetric(String),
    #[error("no relevance judgments for qid {0}")]
    NoJudgments(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    // -- dsl --
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unbound name `{name}` at {line}:{col}")]
    UnboundName { name: String, line: usize, col: usize },
    #[error("bad arity at {line}:{col}: {msg}")]
    BadArity { line: usize, col: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with a pipeline stage path segment, building paths
    /// like `Then[1].Plus[0]` as execution unwinds.
    pub fn at(self, segment: impl Into<String>) -> Self {
        let segment = segment.into();
        match self {
            Error::At { path, source } => Error::At {
                path: format!("{segment}.{path}"),
                source,
            },
            other => Error::At {
                path: segment,
                source: Box::new(other),
            },
        }
    }

    /// The innermost error, unwrapping any stage-path annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            other => other,
        }
    }
}
