//! Ranked result lists and the TREC run file format
//! (`query_id Q0 doc_id rank score tag`).

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub doc_id: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

/// Scores non-increasing, ranks consecutive from 1, doc_ids unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_id: String,
    entries: Vec<RankedEntry>,
}

fn by_score_desc(a: f64, b: f64) -> std::cmp::Ordering {
    b.total_cmp(&a)
}

impl RankedList {
    pub fn empty(query_id: impl Into<String>) -> Self {
        Self {
            query_id: query_id.into(),
            entries: Vec::new(),
        }
    }

    /// Sorts by descending score, ties by ascending doc_id. Later duplicates of
    /// a doc_id are dropped.
    pub fn from_scores(query_id: impl Into<String>, mut scored: Vec<(String, f64)>) -> Self {
        scored.sort_by(|a, b| by_score_desc(a.1, b.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_sorted(query_id.into(), scored)
    }

    /// Sorts by descending score; ties keep their input order.
    pub fn from_scores_stable(query_id: impl Into<String>, mut scored: Vec<(String, f64)>) -> Self {
        scored.sort_by(|a, b| by_score_desc(a.1, b.1));
        Self::from_sorted(query_id.into(), scored)
    }

    fn from_sorted(query_id: String, scored: Vec<(String, f64)>) -> Self {
        let mut seen = std::collections::HashSet::new();
        let entries = scored
            .into_iter()
            .filter(|(d, _)| seen.insert(d.clone()))
            .enumerate()
            .map(|(i, (doc_id, score))| RankedEntry {
                doc_id,
                score,
                rank: i + 1,
            })
            .collect();
        Self { query_id, entries }
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncated(&self, k: usize) -> Self {
        Self {
            query_id: self.query_id.clone(),
            entries: self.entries.iter().take(k).cloned().collect(),
        }
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }

    pub fn score_of(&self, doc_id: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.doc_id == doc_id)
            .map(|e| e.score)
    }

    pub fn score_map(&self) -> HashMap<&str, f64> {
        self.entries
            .iter()
            .map(|e| (e.doc_id.as_str(), e.score))
            .collect()
    }
}

/// A set of ranked lists, one per query, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    lists: Vec<RankedList>,
    lookup: HashMap<String, usize>,
}

impl Run {
    pub fn new(lists: Vec<RankedList>) -> Self {
        let lookup = lists
            .iter()
            .enumerate()
            .map(|(i, l)| (l.query_id.clone(), i))
            .collect();
        Self { lists, lookup }
    }

    pub fn get(&self, query_id: &str) -> Option<&RankedList> {
        self.lookup.get(query_id).map(|&i| &self.lists[i])
    }

    pub fn lists(&self) -> &[RankedList] {
        &self.lists
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.lists.iter().map(|l| l.query_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Parses a run. Each query's entries are re-sorted by score (ties by
    /// doc_id); the rank column is not trusted.
    pub fn parse<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut order: Vec<String> = Vec::new();
        let mut grouped: HashMap<String, Vec<(String, f64)>> = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 6 {
                return Err(Error::parse(
                    origin,
                    i + 1,
                    format!("expected 6 fields, found {}", fields.len()),
                ));
            }
            fields[3]
                .parse::<usize>()
                .map_err(|_| Error::parse(origin, i + 1, "rank is not an integer"))?;
            let score: f64 = fields[4]
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, "score is not a number"))?;
            if !score.is_finite() {
                return Err(Error::parse(origin, i + 1, "score is not finite"));
            }
            let qid = fields[0].to_owned();
            let list = grouped.entry(qid.clone()).or_insert_with(|| {
                order.push(qid);
                Vec::new()
            });
            list.push((fields[2].to_owned(), score));
        }
        let lists = order
            .into_iter()
            .map(|q| {
                let scored = grouped.remove(&q).unwrap_or_default();
                RankedList::from_scores(q, scored)
            })
            .collect();
        Ok(Self::new(lists))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file), path)
    }

    pub fn write<W: Write>(&self, mut out: W, tag: &str) -> std::io::Result<()> {
        for list in &self.lists {
            write_list(&mut out, list, tag)?;
        }
        Ok(())
    }

    pub fn to_trec_string(&self, tag: &str) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, tag).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("run output is UTF-8")
    }
}

pub fn write_list<W: Write>(out: &mut W, list: &RankedList, tag: &str) -> std::io::Result<()> {
    for e in list.entries() {
        writeln!(
            out,
            "{} Q0 {} {} {:.6} {}",
            list.query_id, e.doc_id, e.rank, e.score, tag
        )?;
    }
    Ok(())
}
