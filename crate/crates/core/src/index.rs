//! In-memory inverted index with collection statistics and a forward
//! (per-document term vector) view used by feedback expansion.
//!
//! Documents are assigned ordinals in ascending doc_id order, so postings sorted
//! by ordinal are also sorted by doc_id.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};

pub type DocOrd = u32;
pub type TermOrd = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: DocOrd,
    pub tf: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvertedIndex {
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    terms: Vec<String>,
    postings: Vec<Vec<Posting>>,
    collection_freqs: Vec<u64>,
    forward: Vec<Vec<(TermOrd, u32)>>,
    total_tokens: u64,
    #[serde(skip)]
    term_lookup: HashMap<String, TermOrd>,
    #[serde(skip)]
    doc_lookup: HashMap<String, DocOrd>,
}

impl InvertedIndex {
    pub fn build(corpus: &Corpus) -> Self {
        let mut doc_ids = Vec::with_capacity(corpus.len());
        let mut doc_lengths = Vec::with_capacity(corpus.len());
        let mut per_doc: Vec<BTreeMap<String, u32>> = Vec::with_capacity(corpus.len());
        for doc in corpus.iter() {
            let tokens = doc.tokens();
            let mut counts = BTreeMap::new();
            for t in tokens.iter() {
                *counts.entry(t.clone()).or_insert(0u32) += 1;
            }
            doc_ids.push(doc.doc_id.clone());
            doc_lengths.push(tokens.len() as u32);
            per_doc.push(counts);
        }

        let mut vocab: BTreeMap<&str, ()> = BTreeMap::new();
        for counts in &per_doc {
            for t in counts.keys() {
                vocab.insert(t.as_str(), ());
            }
        }
        let terms: Vec<String> = vocab.keys().map(|s| s.to_string()).collect();
        let term_lookup: HashMap<String, TermOrd> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermOrd))
            .collect();

        let mut postings = vec![Vec::new(); terms.len()];
        let mut collection_freqs = vec![0u64; terms.len()];
        let mut forward = Vec::with_capacity(per_doc.len());
        for (doc, counts) in per_doc.iter().enumerate() {
            let mut vector = Vec::with_capacity(counts.len());
            for (t, &tf) in counts {
                let ord = term_lookup[t];
                postings[ord as usize].push(Posting {
                    doc: doc as DocOrd,
                    tf,
                });
                collection_freqs[ord as usize] += u64::from(tf);
                vector.push((ord, tf));
            }
            forward.push(vector);
        }
        let total_tokens = doc_lengths.iter().map(|&l| u64::from(l)).sum();

        let mut index = Self {
            doc_ids,
            doc_lengths,
            terms,
            postings,
            collection_freqs,
            forward,
            total_tokens,
            term_lookup: HashMap::new(),
            doc_lookup: HashMap::new(),
        };
        index.rebuild_lookups();
        index
    }

    fn rebuild_lookups(&mut self) {
        self.term_lookup = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermOrd))
            .collect();
        self.doc_lookup = self
            .doc_ids
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i as DocOrd))
            .collect();
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn avg_doc_length(&self) -> f64 {
        if self.doc_ids.is_empty() {
            0.0
        } else {
            self.total_tokens as f64 / self.doc_ids.len() as f64
        }
    }

    pub fn term_ord(&self, term: &str) -> Option<TermOrd> {
        self.term_lookup.get(term).copied()
    }

    pub fn term(&self, ord: TermOrd) -> &str {
        &self.terms[ord as usize]
    }

    pub fn doc_ord(&self, doc_id: &str) -> Option<DocOrd> {
        self.doc_lookup.get(doc_id).copied()
    }

    pub fn doc_id(&self, ord: DocOrd) -> &str {
        &self.doc_ids[ord as usize]
    }

    pub fn doc_length(&self, ord: DocOrd) -> u32 {
        self.doc_lengths[ord as usize]
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.term_ord(term)
            .map_or(0, |t| self.postings[t as usize].len() as u32)
    }

    pub fn collection_freq(&self, term: &str) -> u64 {
        self.term_ord(term)
            .map_or(0, |t| self.collection_freqs[t as usize])
    }

    pub fn doc_freq_of(&self, ord: TermOrd) -> u32 {
        self.postings[ord as usize].len() as u32
    }

    pub fn collection_freq_of(&self, ord: TermOrd) -> u64 {
        self.collection_freqs[ord as usize]
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.term_ord(term)
            .map_or(&[][..], |t| &self.postings[t as usize])
    }

    /// (term ordinal, tf) pairs of one document, ascending by term.
    pub fn term_vector(&self, doc: DocOrd) -> &[(TermOrd, u32)] {
        &self.forward[doc as usize]
    }

    /// Smoothed inverse document frequency, ln((N+1)/(df+0.5)). Always positive,
    /// including for terms absent from the collection.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.num_docs() as f64;
        ((n + 1.0) / (f64::from(self.doc_freq(term)) + 0.5)).ln()
    }
}

const MAGIC: &[u8; 8] = b"CHQEIDX\0";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Artifact {
    documents: Vec<Document>,
    index: InvertedIndex,
}

/// Serialises corpus and index: 8-byte magic, little-endian u32 version, then
/// a bincode payload. Output depends only on the corpus content.
pub fn write_artifact<W: Write>(mut out: W, corpus: &Corpus, index: &InvertedIndex) -> Result<()> {
    let io = |e| Error::io("<index artifact>", e);
    out.write_all(MAGIC).map_err(io)?;
    out.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    let artifact = Artifact {
        documents: corpus.documents().to_vec(),
        index: index.clone(),
    };
    bincode::serialize_into(&mut out, &artifact)?;
    Ok(())
}

pub fn read_artifact<R: Read>(mut input: R) -> Result<(Corpus, InvertedIndex)> {
    let io = |e| Error::io("<index artifact>", e);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(|_| Error::BadMagic)?;
    if &magic != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut version = [0u8; 4];
    input.read_exact(&mut version).map_err(io)?;
    let version = u32::from_le_bytes(version);
    if version != VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: VERSION,
        });
    }
    let artifact: Artifact = bincode::deserialize_from(input)?;
    let corpus = Corpus::new(artifact.documents)?;
    let mut index = artifact.index;
    index.rebuild_lookups();
    Ok((corpus, index))
}

pub fn save(path: &Path, corpus: &Corpus, index: &InvertedIndex) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_artifact(&mut out, corpus, index)?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(Corpus, InvertedIndex)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_artifact(std::io::BufReader::new(file))
}
