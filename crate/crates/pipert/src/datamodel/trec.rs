//! TREC-style text formats: topics, qrels, and run files.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::datamodel::{Qrel, QrelSet, Query, QueryFrame, ResultFrame};
use crate::error::{Error, Result};

/// Topics: one `qid<TAB>query text` per line, UTF-8.
pub fn read_topics(path: impl AsRef<Path>) -> Result<QueryFrame> {
    let reader = BufReader::new(File::open(path)?);
    let mut queries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (qid, text) = line.split_once('\t').ok_or_else(|| Error::Corpus {
            line: i + 1,
            reason: "expected `qid<TAB>text`".into(),
        })?;
        queries.push(Query::from_text(qid.trim(), text.trim()));
    }
    QueryFrame::new(queries)
}

/// Qrels: whitespace-separated `qid 0 docno label`, one per line.
pub fn read_qrels(path: impl AsRef<Path>) -> Result<QrelSet> {
    let reader = BufReader::new(File::open(path)?);
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Corpus {
                line: i + 1,
                reason: format!("expected 4 fields `qid 0 docno label`, got {}", fields.len()),
            });
        }
        let label: i64 = fields[3].parse().map_err(|_| Error::Corpus {
            line: i + 1,
            reason: format!("bad label `{}`", fields[3]),
        })?;
        if label < 0 {
            return Err(Error::Corpus {
                line: i + 1,
                reason: format!("negative label {label}"),
            });
        }
        entries.push(Qrel {
            qid: fields[0].to_string(),
            docno: fields[2].to_string(),
            label: label as u32,
        });
    }
    QrelSet::new(entries)
}

/// Render a frame in TREC run format: `qid Q0 docno rank score tag`,
/// rank 0-based, score printed with 6 decimal places.
pub fn format_run(frame: &ResultFrame, tag: &str) -> Result<String> {
    let mut out = String::new();
    let mut rank = 0u32;
    let mut current_qid: Option<&str> = None;
    for row in frame.rows() {
        if current_qid != Some(row.qid.as_str()) {
            current_qid = Some(row.qid.as_str());
            rank = 0;
        }
        let score = row.score_or_err()?;
        let r = row.rank.unwrap_or(rank);
        out.push_str(&format!(
            "{} Q0 {} {} {:.6} {}\n",
            row.qid, row.docno, r, score, tag
        ));
        rank += 1;
    }
    Ok(out)
}

pub fn write_run(frame: &ResultFrame, tag: &str, path: impl AsRef<Path>) -> Result<()> {
    let mut file = File::create(path)?;
    file.write_all(format_run(frame, tag)?.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::ResultRow;

    #[test]
    fn run_format_is_six_columns_with_six_decimals() {
        let mut row = ResultRow::new("q1", "d1", 1.25);
        row.rank = Some(0);
        let frame = ResultFrame::from_rows(vec![row]).unwrap();
        let text = format_run(&frame, "tag").unwrap();
        assert_eq!(text, "q1 Q0 d1 0 1.250000 tag\n");
    }

    #[test]
    fn run_format_rejects_undefined_scores() {
        let frame = ResultFrame::from_rows(vec![ResultRow::undefined("q1", "d1")]).unwrap();
        assert!(format_run(&frame, "t").is_err());
    }

    #[test]
    fn topics_and_qrels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let topics = dir.path().join("topics.tsv");
        std::fs::write(&topics, "q1\thello world\nq2\tquick fox\n").unwrap();
        let frame = read_topics(&topics).unwrap();
        assert_eq!(frame.len(), 2);
        assert_eq!(frame.queries()[1].text, "quick fox");

        let qrels = dir.path().join("qrels.txt");
        std::fs::write(&qrels, "q1 0 d1 1\nq1 0 d2 0\nq2 0 d9 2\n").unwrap();
        let qs = read_qrels(&qrels).unwrap();
        assert_eq!(qs.label("q1", "d1"), 1);
        assert_eq!(qs.label("q1", "d2"), 0);
        assert_eq!(qs.label("q2", "d9"), 2);
        assert_eq!(qs.num_relevant("q1"), 1);
    }

    #[test]
    fn qrels_reject_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let qrels = dir.path().join("qrels.txt");
        std::fs::write(&qrels, "q1 0 d1\n").unwrap();
        assert!(matches!(read_qrels(&qrels), Err(Error::Corpus { line: 1, .. })));
    }
}
