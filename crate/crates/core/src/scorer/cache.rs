use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::{Arc, RwLock};

use super::{Probability, RelevanceScorer, ScorePair, ScorerError, SharedScorer};

/// (scorer id, text_a digest, text_b digest). Digests are 128-bit: two
/// SipHash passes with distinct salts.
type CacheKey = (String, u128, u128);

fn digest(text: &str) -> u128 {
    let half = |salt: u8| {
        let mut h = DefaultHasher::new();
        salt.hash(&mut h);
        text.hash(&mut h);
        h.finish()
    };
    (u128::from(half(0)) << 64) | u128::from(half(1))
}

/// Shared score memo. Concurrent writers of one key store identical values,
/// so last-write-wins is harmless.
#[derive(Debug, Default)]
pub struct ScoreCache {
    entries: RwLock<HashMap<CacheKey, Probability>>,
}

impl ScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("score cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub struct CachedScorer {
    inner: SharedScorer,
    cache: Arc<ScoreCache>,
}

impl CachedScorer {
    pub fn new(inner: SharedScorer, cache: Arc<ScoreCache>) -> Self {
        Self { inner, cache }
    }
}

impl RelevanceScorer for CachedScorer {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn score_pairs(&self, pairs: &[ScorePair]) -> Result<Vec<Probability>, ScorerError> {
        let id = self.inner.id().to_owned();
        let keys: Vec<CacheKey> = pairs
            .iter()
            .map(|p| (id.clone(), digest(&p.text_a), digest(&p.text_b)))
            .collect();
        let mut out: Vec<Option<Probability>> = {
            let map = self.cache.entries.read().expect("score cache poisoned");
            keys.iter().map(|k| map.get(k).copied()).collect()
        };
        let missing: Vec<usize> = (0..pairs.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            let batch: Vec<ScorePair> = missing.iter().map(|&i| pairs[i].clone()).collect();
            let scores = self.inner.score_pairs(&batch)?;
            let mut map = self.cache.entries.write().expect("score cache poisoned");
            for (&i, s) in missing.iter().zip(scores) {
                map.insert(keys[i].clone(), s);
                out[i] = Some(s);
            }
        }
        Ok(out.into_iter().map(|s| s.expect("every slot filled")).collect())
    }
}
