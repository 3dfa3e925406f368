//! Documents, corpus ingestion and the two sliding-window decompositions:
//! fixed 100/50 passages for document scoring and m-word chunks for feedback.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::tokenize;

pub const PASSAGE_WINDOW: usize = 100;
pub const PASSAGE_STRIDE: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub token_count: usize,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let token_count = tokenize(&text).len();
        Self {
            doc_id: doc_id.into(),
            text,
            token_count,
        }
    }

    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.text)
    }
}

/// A window of document tokens used as the document side of a scoring pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passage {
    pub doc_id: String,
    pub start: usize,
    pub tokens: Vec<String>,
}

impl Passage {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// An m-word feedback window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub start: usize,
    pub tokens: Vec<String>,
}

impl Chunk {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Start offsets and lengths of passages over `len` tokens: starts at 0, stride,
/// 2*stride, ... while start < len. The last windows may be shorter than `window`.
pub fn passage_spans(len: usize, window: usize, stride: usize) -> Vec<(usize, usize)> {
    assert!(window > 0 && stride > 0 && stride <= window, "invalid passage window/stride");
    (0..len)
        .step_by(stride)
        .map(|start| (start, window.min(len - start)))
        .collect()
}

/// Start offsets and lengths of m-word chunks over `len` tokens. The stride is
/// floor(m/2); windows stop after the first one that reaches the end of the
/// document, so a trailing fragment already covered by its predecessor is
/// never emitted. A document shorter than m yields a single short chunk.
pub fn chunk_spans(len: usize, m: usize) -> Vec<(usize, usize)> {
    assert!(m >= 2, "chunk length must be at least 2");
    let stride = m / 2;
    let mut spans = Vec::new();
    let mut start = 0;
    while start < len {
        let end = (start + m).min(len);
        spans.push((start, end - start));
        if end == len {
            break;
        }
        start += stride;
    }
    spans
}

pub fn decompose_passages(doc: &Document, window: usize, stride: usize) -> Vec<Passage> {
    passages_from_tokens(&doc.doc_id, &doc.tokens(), window, stride)
}

pub fn passages_from_tokens(
    doc_id: &str,
    tokens: &[String],
    window: usize,
    stride: usize,
) -> Vec<Passage> {
    passage_spans(tokens.len(), window, stride)
        .into_iter()
        .map(|(start, len)| Passage {
            doc_id: doc_id.to_owned(),
            start,
            tokens: tokens[start..start + len].to_vec(),
        })
        .collect()
}

pub fn decompose_chunks(doc: &Document, m: usize) -> Vec<Chunk> {
    let tokens = doc.tokens();
    chunk_spans(tokens.len(), m)
        .into_iter()
        .map(|(start, len)| Chunk {
            doc_id: doc.doc_id.clone(),
            start,
            tokens: tokens[start..start + len].to_vec(),
        })
        .collect()
}

/// Documents keyed by id, stored in ascending id order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    lookup: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(mut docs: Vec<Document>) -> Result<Self> {
        docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        if let Some(w) = docs.windows(2).find(|w| w[0].doc_id == w[1].doc_id) {
            return Err(Error::DuplicateDocId(w[0].doc_id.clone()));
        }
        let lookup = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i))
            .collect();
        Ok(Self { docs, lookup })
    }

    /// Reads `doc_id<TAB>text` records, one per line. Blank lines are skipped.
    pub fn read_tsv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = std::io::BufReader::new(file);
        let mut docs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let (id, text) = parse_tsv_record(&line).ok_or_else(|| {
                Error::parse(path, i + 1, "expected `doc_id<TAB>text`")
            })?;
            docs.push(Document::new(id, text));
        }
        Self::new(docs)
    }

    /// Inverse of [`Corpus::read_tsv`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for d in &self.docs {
            out.push_str(&d.doc_id);
            out.push('\t');
            out.push_str(&d.text);
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.lookup.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.docs.iter()
    }
}

/// Splits a `id<TAB>text` line. The id must be non-empty and contain no whitespace.
pub(crate) fn parse_tsv_record(line: &str) -> Option<(&str, &str)> {
    let (id, text) = line.split_once('\t')?;
    let id = id.trim();
    if id.is_empty() || id.contains(char::is_whitespace) {
        return None;
    }
    Some((id, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc_of_len(n: usize) -> Document {
        let text: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        Document::new("d", text.join(" "))
    }

    fn starts(spans: &[(usize, usize)]) -> Vec<usize> {
        spans.iter().map(|s| s.0).collect()
    }

    #[test]
    fn passages_of_80_tokens() {
        let p = decompose_passages(&doc_of_len(80), 100, 50);
        assert_eq!(p.len(), 2);
        assert_eq!((p[0].start, p[0].tokens.len()), (0, 80));
        assert_eq!((p[1].start, p[1].tokens.len()), (50, 30));
    }

    #[test]
    fn passages_of_100_tokens() {
        let spans = passage_spans(100, 100, 50);
        assert_eq!(spans, vec![(0, 100), (50, 50)]);
    }

    #[test]
    fn passages_of_523_tokens() {
        // oracle: every multiple of 50 below 523
        let expected: Vec<usize> = (0..523).filter(|s| s % 50 == 0).collect();
        let spans = passage_spans(523, 100, 50);
        assert_eq!(spans.len(), 11);
        assert_eq!(starts(&spans), expected);
    }

    #[test]
    fn empty_document_has_no_windows() {
        assert!(passage_spans(0, 100, 50).is_empty());
        assert!(chunk_spans(0, 10).is_empty());
    }

    #[test]
    fn chunks_of_short_document() {
        let c = decompose_chunks(&doc_of_len(7), 10);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), 7);
    }

    #[test]
    fn chunks_of_23_tokens() {
        let spans = chunk_spans(23, 10);
        assert_eq!(spans, vec![(0, 10), (5, 10), (10, 10), (15, 8)]);
    }

    #[test]
    fn chunks_of_100_tokens() {
        let spans = chunk_spans(100, 10);
        assert_eq!(spans.len(), 19);
        assert_eq!(starts(&spans), (0..=90).step_by(5).collect::<Vec<_>>());
        assert!(spans.iter().all(|s| s.1 == 10));
    }

    #[test]
    fn odd_chunk_length_uses_floor_stride() {
        let spans = chunk_spans(9, 5);
        assert_eq!(spans, vec![(0, 5), (2, 5), (4, 5)]);
    }

    #[test]
    fn chunk_tokens_are_verbatim() {
        let d = doc_of_len(23);
        let toks = d.tokens();
        for c in decompose_chunks(&d, 10) {
            assert_eq!(c.tokens[..], toks[c.start..c.start + c.len()]);
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = Corpus::new(vec![Document::new("x", "a"), Document::new("x", "b")]).unwrap_err();
        assert!(matches!(err, Error::DuplicateDocId(id) if id == "x"));
    }

    #[test]
    fn tsv_records() {
        assert_eq!(parse_tsv_record("d1\thello world"), Some(("d1", "hello world")));
        assert_eq!(parse_tsv_record("d1\t"), Some(("d1", "")));
        assert_eq!(parse_tsv_record("no tab here"), None);
        assert_eq!(parse_tsv_record("\ttext"), None);
    }
}
