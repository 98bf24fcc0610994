//! On-disk index format, bit-exact and little-endian throughout.
//!
//! Layout: magic `PTIR`, format version u32, options block (stem flag u8,
//! stopword-list hash u64, direct flag u8), then sections in order: stats
//! (doc count u32, total tokens u64), doc table (length-prefixed docno,
//! doclen u32), lexicon (sorted length-prefixed terms, df u32, cf u64,
//! postings byte offset u64), postings (df x (docid u32, tf u32)), and the
//! optional direct index. No compression.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::tokenize::{default_stopwords, stopword_hash, IndexOptions};
use super::{build_index, DocEntry, Index, Posting, TermEntry, FORMAT_VERSION};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"PTIR";

pub fn write_index(index: &Index, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_index_to(index, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_index_to(index: &Index, w: &mut impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u8(index.options.stem as u8)?;
    w.write_u64::<LittleEndian>(index.options.stopword_hash())?;
    w.write_u8(index.direct.is_some() as u8)?;

    w.write_u32::<LittleEndian>(index.n_docs)?;
    w.write_u64::<LittleEndian>(index.total_tokens)?;
    for d in &index.docs {
        write_string(w, &d.docno)?;
        w.write_u32::<LittleEndian>(d.doclen)?;
    }

    w.write_u32::<LittleEndian>(index.terms.len() as u32)?;
    let mut offset: u64 = 0;
    for t in &index.terms {
        write_string(w, &t.term)?;
        w.write_u32::<LittleEndian>(t.df)?;
        w.write_u64::<LittleEndian>(t.cf)?;
        w.write_u64::<LittleEndian>(offset)?;
        offset += t.df as u64 * 8;
    }
    for p in &index.postings {
        w.write_u32::<LittleEndian>(p.docid)?;
        w.write_u32::<LittleEndian>(p.tf)?;
    }

    if let Some(direct) = &index.direct {
        for vec in direct {
            w.write_u32::<LittleEndian>(vec.len() as u32)?;
            for &(tid, tf) in vec {
                w.write_u32::<LittleEndian>(tid)?;
                w.write_u32::<LittleEndian>(tf)?;
            }
        }
    }
    Ok(())
}

fn write_string(w: &mut impl Write, s: &str) -> Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Read an index whose stopword-list hash matches a shipped list (the
/// default list or the empty list). Indexes built with a custom list need
/// [`read_index_with_stopwords`].
pub fn read_index(path: impl AsRef<Path>) -> Result<Index> {
    read_index_impl(path, None)
}

/// Read an index built with a custom stopword list; the list's hash must
/// match the one recorded in the header.
pub fn read_index_with_stopwords(
    path: impl AsRef<Path>,
    stopwords: BTreeSet<String>,
) -> Result<Index> {
    read_index_impl(path, Some(stopwords))
}

fn read_index_impl(path: impl AsRef<Path>, stopwords: Option<BTreeSet<String>>) -> Result<Index> {
    let mut r = Tracked {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
    };
    read_index_from(&mut r, stopwords)
}

struct Tracked<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Tracked<R> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::Format {
            offset: self.offset,
            reason: reason.into(),
        }
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> Result<()> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                self.offset += buf.len() as u64;
                Ok(())
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                Err(self.fail("unexpected end of file"))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn read_u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.read_exact(&mut b)?;
        Ok(b[0])
    }

    fn read_u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b)?;
        Ok((&b[..]).read_u32::<LittleEndian>().unwrap())
    }

    fn read_u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b)?;
        Ok((&b[..]).read_u64::<LittleEndian>().unwrap())
    }

    fn read_string(&mut self) -> Result<String> {
        let len = self.read_u32()? as usize;
        let mut buf = vec![0u8; len];
        self.read_exact(&mut buf)?;
        String::from_utf8(buf).map_err(|_| self.fail("invalid UTF-8 string"))
    }
}

fn read_index_from<R: Read>(
    r: &mut Tracked<R>,
    custom_stopwords: Option<BTreeSet<String>>,
) -> Result<Index> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(r.fail(format!("bad magic {magic:?}, expected {MAGIC:?}")));
    }
    let version = r.read_u32()?;
    if version != FORMAT_VERSION {
        return Err(r.fail(format!(
            "unsupported format version {version}, this build reads version {FORMAT_VERSION}"
        )));
    }
    let stem = match r.read_u8()? {
        0 => false,
        1 => true,
        v => return Err(r.fail(format!("bad stem flag {v}"))),
    };
    let stored_hash = r.read_u64()?;
    let has_direct = match r.read_u8()? {
        0 => false,
        1 => true,
        v => return Err(r.fail(format!("bad direct flag {v}"))),
    };

    let stopwords = match custom_stopwords {
        Some(list) => {
            if stopword_hash(&list) != stored_hash {
                return Err(r.fail(format!(
                    "stopword list hash mismatch: header {stored_hash:#018x}, supplied list {:#018x}",
                    stopword_hash(&list)
                )));
            }
            list
        }
        None => {
            let default = default_stopwords();
            if stored_hash == stopword_hash(&default) {
                default
            } else if stored_hash == stopword_hash(&BTreeSet::new()) {
                BTreeSet::new()
            } else {
                return Err(r.fail(format!(
                    "unknown stopword list hash {stored_hash:#018x}; \
                     load with read_index_with_stopwords and the original list"
                )));
            }
        }
    };

    let n_docs = r.read_u32()?;
    let total_tokens = r.read_u64()?;
    let mut docs = Vec::with_capacity(n_docs as usize);
    let mut doclen_sum: u64 = 0;
    for _ in 0..n_docs {
        let docno = r.read_string()?;
        let doclen = r.read_u32()?;
        doclen_sum += doclen as u64;
        docs.push(DocEntry { docno, doclen });
    }
    if doclen_sum != total_tokens {
        return Err(r.fail(format!(
            "doc table doclen sum {doclen_sum} != total tokens {total_tokens}"
        )));
    }

    let n_terms = r.read_u32()?;
    let mut terms: Vec<TermEntry> = Vec::with_capacity(n_terms as usize);
    let mut expected_offset: u64 = 0;
    let mut n_postings: usize = 0;
    for i in 0..n_terms {
        let term = r.read_string()?;
        if let Some(prev) = terms.last() {
            if prev.term >= term {
                return Err(r.fail(format!(
                    "lexicon not sorted: `{}` followed by `{term}`",
                    prev.term
                )));
            }
        }
        let df = r.read_u32()?;
        let cf = r.read_u64()?;
        let offset = r.read_u64()?;
        if offset != expected_offset {
            return Err(r.fail(format!(
                "term {i} postings offset {offset} != expected {expected_offset}"
            )));
        }
        expected_offset += df as u64 * 8;
        terms.push(TermEntry {
            term,
            df,
            cf,
            start: n_postings,
        });
        n_postings += df as usize;
    }

    let mut postings = Vec::with_capacity(n_postings);
    for t in &terms {
        let mut prev_docid: Option<u32> = None;
        let mut tf_sum: u64 = 0;
        for _ in 0..t.df {
            let docid = r.read_u32()?;
            let tf = r.read_u32()?;
            if docid >= n_docs {
                return Err(r.fail(format!("docid {docid} out of range (N={n_docs})")));
            }
            if let Some(p) = prev_docid {
                if docid <= p {
                    return Err(r.fail(format!("postings of `{}` not ascending", t.term)));
                }
            }
            if tf == 0 {
                return Err(r.fail(format!("zero tf in postings of `{}`", t.term)));
            }
            prev_docid = Some(docid);
            tf_sum += tf as u64;
            postings.push(Posting { docid, tf });
        }
        if tf_sum != t.cf {
            return Err(r.fail(format!(
                "postings tf sum {tf_sum} != cf {} for `{}`",
                t.cf, t.term
            )));
        }
    }

    let direct = if has_direct {
        let mut direct = Vec::with_capacity(n_docs as usize);
        for docid in 0..n_docs {
            let count = r.read_u32()?;
            let mut vec = Vec::with_capacity(count as usize);
            let mut tf_sum: u64 = 0;
            for _ in 0..count {
                let tid = r.read_u32()?;
                let tf = r.read_u32()?;
                if tid >= n_terms {
                    return Err(r.fail(format!("term id {tid} out of range in direct index")));
                }
                tf_sum += tf as u64;
                vec.push((tid, tf));
            }
            if tf_sum != docs[docid as usize].doclen as u64 {
                return Err(r.fail(format!(
                    "direct vector tf sum {tf_sum} != doclen {} for doc {docid}",
                    docs[docid as usize].doclen
                )));
            }
            direct.push(vec);
        }
        Some(direct)
    } else {
        None
    };

    let options = IndexOptions {
        stem,
        stopwords,
        build_direct: has_direct,
    };
    Index::from_parts(options, total_tokens, docs, terms, postings, direct)
}

impl Index {
    pub(super) fn from_parts(
        options: IndexOptions,
        total_tokens: u64,
        docs: Vec<DocEntry>,
        terms: Vec<TermEntry>,
        postings: Vec<Posting>,
        direct: Option<Vec<Vec<(u32, u32)>>>,
    ) -> Result<Index> {
        super::Index::assemble(options, total_tokens, docs, terms, postings, direct)
    }
}

// Re-exported for unit tests below; the public surface is write_index/read_index.
#[allow(dead_code)]
pub(super) fn serialize_to_vec(index: &Index) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_index_to(index, &mut buf)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_index() -> Index {
        build_index(
            vec![
                ("docA".to_string(), "a b".to_string()),
                ("docB".to_string(), "b b c".to_string()),
            ],
            IndexOptions::default().with_stem(false).no_stopwords(),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_structurally_equal_and_byte_identical() {
        let ix = sample_index();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.ptir");
        write_index(&ix, &path).unwrap();
        let loaded = read_index(&path).unwrap();
        assert_eq!(ix, loaded);

        let bytes1 = serialize_to_vec(&ix).unwrap();
        let bytes2 = serialize_to_vec(&loaded).unwrap();
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn truncated_file_is_a_format_error() {
        let ix = sample_index();
        let bytes = serialize_to_vec(&ix).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.ptir");
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        match read_index(&path) {
            Err(Error::Format { .. }) => {}
            other => panic!("expected Format error, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ptir");
        std::fs::write(&path, b"NOPE0000000000000000").unwrap();
        match read_index(&path) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected Format error, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_names_versions() {
        let ix = sample_index();
        let mut bytes = serialize_to_vec(&ix).unwrap();
        bytes[4..8].copy_from_slice(&9u32.to_le_bytes());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v9.ptir");
        std::fs::write(&path, &bytes).unwrap();
        match read_index(&path) {
            Err(Error::Format { reason, .. }) => {
                assert!(reason.contains('9') && reason.contains('1'), "{reason}");
            }
            other => panic!("expected Format error, got {other:?}"),
        }
    }

    #[test]
    fn custom_stopword_list_round_trip() {
        let mut stops = BTreeSet::new();
        stops.insert("qqq".to_string());
        let opts = IndexOptions {
            stem: false,
            stopwords: stops.clone(),
            build_direct: true,
        };
        let ix = build_index(vec![("d1".to_string(), "qqq zzz".to_string())], opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("custom.ptir");
        write_index(&ix, &path).unwrap();
        // Plain read fails with an unknown hash; supplying the list succeeds.
        assert!(matches!(read_index(&path), Err(Error::Format { .. })));
        let loaded = read_index_with_stopwords(&path, stops).unwrap();
        assert_eq!(ix, loaded);
    }
}
