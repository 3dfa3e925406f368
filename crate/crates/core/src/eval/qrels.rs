use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// Grades for one query, keyed by document id.
pub type Judgments = BTreeMap<String, u32>;

/// TREC relevance judgments: `query_id iteration doc_id grade` per line.
/// Negative grades are read as 0 (non-relevant).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    by_query: BTreeMap<String, Judgments>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one judgment; a second grade for the same pair is rejected.
    pub fn insert(&mut self, query_id: &str, doc_id: &str, grade: i64) -> Result<()> {
        let grade = grade.clamp(0, u32::MAX as i64) as u32;
        let judged = self.by_query.entry(query_id.to_owned()).or_default();
        if judged.insert(doc_id.to_owned(), grade).is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate judgment for query {query_id}, document {doc_id}"
            )));
        }
        Ok(())
    }

    pub fn parse(reader: impl BufRead, origin: &str) -> Result<Self> {
        let mut qrels = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::parse(origin, i + 1, "expected 4 fields"));
            }
            let grade: i64 = fields[3]
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad grade `{}`", fields[3])))?;
            qrels
                .insert(fields[0], fields[2], grade)
                .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(qrels)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file), &path.display().to_string())
    }

    pub fn to_trec_string(&self) -> String {
        let mut out = String::new();
        for (q, judged) in &self.by_query {
            for (d, g) in judged {
                out.push_str(&format!("{q} 0 {d} {g}\n"));
            }
        }
        out
    }

    pub fn get(&self, query_id: &str) -> Option<&Judgments> {
        self.by_query.get(query_id)
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> u32 {
        self.get(query_id)
            .and_then(|j| j.get(doc_id))
            .copied()
            .unwrap_or(0)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.by_query.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_query.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_query.is_empty()
    }

    pub fn num_relevant(&self, query_id: &str) -> usize {
        self.get(query_id)
            .map_or(0, |j| j.values().filter(|&&g| g > 0).count())
    }
}
