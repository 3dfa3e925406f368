use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_FOLDS: usize = 5;

/// Five disjoint query sets. Fold `i` is tested when it is the test fold,
/// fold `(i + 1) % 5` validates, and the remaining three are training folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    folds: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldRoles {
    pub test: usize,
    pub validation: usize,
    pub train: [usize; 3],
}

/// Orders query ids numerically when every id is an integer, else lexically.
fn sort_ids(ids: &mut [String]) {
    if ids.iter().all(|id| id.parse::<u64>().is_ok()) {
        ids.sort_by_key(|id| id.parse::<u64>().unwrap_or(0));
    } else {
        ids.sort();
    }
}

impl FoldPlan {
    /// Sorted ids; the i-th goes to fold `i mod 5`.
    pub fn round_robin<S: AsRef<str>>(query_ids: &[S]) -> Result<Self> {
        let mut ids: Vec<String> = query_ids.iter().map(|s| s.as_ref().to_owned()).collect();
        let unique: BTreeSet<&String> = ids.iter().collect();
        if unique.len() != ids.len() {
            return Err(Error::FoldMismatch("duplicate query ids".into()));
        }
        if ids.len() < NUM_FOLDS {
            return Err(Error::FoldMismatch(format!(
                "need at least {NUM_FOLDS} queries, got {}",
                ids.len()
            )));
        }
        sort_ids(&mut ids);
        let mut folds = vec![Vec::new(); NUM_FOLDS];
        for (i, id) in ids.into_iter().enumerate() {
            folds[i % NUM_FOLDS].push(id);
        }
        Ok(Self { folds })
    }

    /// Reads `fold_index query_id` lines. Any five distinct fold labels are
    /// accepted and renumbered 0..5 in ascending order.
    pub fn parse(reader: impl BufRead, origin: &str) -> Result<Self> {
        let mut labelled: BTreeMap<i64, Vec<String>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        let mut duplicates = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                [fold, id] => {
                    let fold: i64 = fold
                        .parse()
                        .map_err(|_| Error::parse(origin, i + 1, format!("bad fold index `{fold}`")))?;
                    if !seen.insert(id.to_string()) {
                        duplicates.push(id.to_string());
                    }
                    labelled.entry(fold).or_default().push(id.to_string());
                }
                _ => return Err(Error::parse(origin, i + 1, "expected `fold_index query_id`")),
            }
        }
        if !duplicates.is_empty() {
            return Err(Error::FoldMismatch(format!(
                "query ids listed more than once: {}",
                duplicates.join(", ")
            )));
        }
        if labelled.len() != NUM_FOLDS {
            return Err(Error::FoldMismatch(format!(
                "expected {NUM_FOLDS} folds, found {}",
                labelled.len()
            )));
        }
        let folds = labelled
            .into_values()
            .map(|mut ids| {
                sort_ids(&mut ids);
                ids
            })
            .collect();
        Ok(Self { folds })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file), &path.display().to_string())
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (i, fold) in self.folds.iter().enumerate() {
            for id in fold {
                out.push_str(&format!("{i} {id}\n"));
            }
        }
        out
    }

    /// Errors unless the plan covers exactly `query_ids`, listing the differences.
    pub fn check_partition<S: AsRef<str>>(&self, query_ids: &[S]) -> Result<()> {
        let expected: BTreeSet<&str> = query_ids.iter().map(|s| s.as_ref()).collect();
        let planned: BTreeSet<&str> = self.query_ids().collect();
        let missing: Vec<&str> = expected.difference(&planned).copied().collect();
        let unknown: Vec<&str> = planned.difference(&expected).copied().collect();
        if missing.is_empty() && unknown.is_empty() {
            return Ok(());
        }
        let mut msg = Vec::new();
        if !missing.is_empty() {
            msg.push(format!("not in any fold: {}", missing.join(", ")));
        }
        if !unknown.is_empty() {
            msg.push(format!("unknown queries: {}", unknown.join(", ")));
        }
        Err(Error::FoldMismatch(msg.join("; ")))
    }

    pub fn fold(&self, i: usize) -> &[String] {
        &self.folds[i]
    }

    pub fn folds(&self) -> &[Vec<String>] {
        &self.folds
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.folds.iter().flatten().map(String::as_str)
    }

    pub fn fold_of(&self, query_id: &str) -> Option<usize> {
        self.folds
            .iter()
            .position(|f| f.iter().any(|q| q == query_id))
    }

    pub fn roles(test: usize) -> FoldRoles {
        assert!(test < NUM_FOLDS);
        let validation = (test + 1) % NUM_FOLDS;
        let train = [2, 3, 4].map(|o| (test + o) % NUM_FOLDS);
        FoldRoles { test, validation, train }
    }
}
