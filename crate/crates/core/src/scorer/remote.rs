//! HTTP client for a remote scoring service.
//!
//! `POST {endpoint}/score` with `{"pairs": [{"a": ..., "b": ...}]}` returns
//! `{"scores": [...]}`, same length and order; `GET {endpoint}/health` returns
//! `{"status": "ok", "model": "<name>"}`. Batches above 256 pairs are split.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Probability, RelevanceScorer, ScorePair, ScorerError};

pub const MAX_BATCH: usize = 256;
pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;
const DEFAULT_RETRIES: usize = 2;

#[derive(Serialize)]
struct WirePair<'a> {
    a: &'a str,
    b: &'a str,
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    pairs: Vec<WirePair<'a>>,
}

#[derive(Deserialize)]
struct ScoreResponse {
    scores: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    #[serde(default)]
    pub model: String,
}

pub struct RemoteScorer {
    id: String,
    endpoint: String,
    agent: ureq::Agent,
    retries: usize,
    backoff: Duration,
}

impl RemoteScorer {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let endpoint = endpoint.into().trim_end_matches('/').to_owned();
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            id: format!("remote({endpoint})"),
            endpoint,
            agent,
            retries: DEFAULT_RETRIES,
            backoff: Duration::from_millis(100),
        }
    }

    /// Number of extra attempts after a retryable failure.
    pub fn with_retries(mut self, retries: usize, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn transport(&self, e: impl std::fmt::Display) -> ScorerError {
        ScorerError::Transport {
            endpoint: self.endpoint.clone(),
            message: e.to_string(),
        }
    }

    fn malformed(&self, message: impl Into<String>) -> ScorerError {
        ScorerError::MalformedResponse {
            endpoint: self.endpoint.clone(),
            message: message.into(),
        }
    }

    pub fn health(&self) -> Result<HealthStatus, ScorerError> {
        let url = format!("{}/health", self.endpoint);
        let mut resp = self.agent.get(&url).call().map_err(|e| self.transport(e))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| self.transport(e))?;
        if status != 200 {
            return Err(self.status_error(status, body));
        }
        serde_json::from_str(&body).map_err(|e| self.malformed(format!("health body: {e}")))
    }

    fn status_error(&self, status: u16, body: String) -> ScorerError {
        if status >= 500 || status == 429 {
            self.transport(format!("HTTP {status}: {body}"))
        } else {
            ScorerError::Rejected {
                endpoint: self.endpoint.clone(),
                status,
                message: body,
            }
        }
    }

    fn score_batch_once(&self, pairs: &[ScorePair]) -> Result<Vec<Probability>, ScorerError> {
        let request = ScoreRequest {
            pairs: pairs
                .iter()
                .map(|p| WirePair {
                    a: &p.text_a,
                    b: &p.text_b,
                })
                .collect(),
        };
        let body = serde_json::to_vec(&request).expect("request serialises");
        let url = format!("{}/score", self.endpoint);
        let mut resp = self
            .agent
            .post(&url)
            .header("Content-Type", "application/json")
            .send(&body[..])
            .map_err(|e| self.transport(e))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| self.transport(e))?;
        if status != 200 {
            return Err(self.status_error(status, body));
        }
        let parsed: ScoreResponse =
            serde_json::from_str(&body).map_err(|e| self.malformed(e.to_string()))?;
        if parsed.scores.len() != pairs.len() {
            return Err(self.malformed(format!(
                "expected {} scores, got {}",
                pairs.len(),
                parsed.scores.len()
            )));
        }
        parsed
            .scores
            .iter()
            .enumerate()
            .map(|(i, v)| match v.as_f64() {
                Some(x) if (0.0..=1.0).contains(&x) => Ok(Probability::new(x)),
                _ => Err(self.malformed(format!("score {i} is not a probability: {v}"))),
            })
            .collect()
    }

    fn score_batch(&self, pairs: &[ScorePair]) -> Result<Vec<Probability>, ScorerError> {
        let mut attempt = 0;
        loop {
            match self.score_batch_once(pairs) {
                Err(e) if e.is_retryable() && attempt < self.retries => {
                    attempt += 1;
                    std::thread::sleep(self.backoff * attempt as u32);
                }
                other => return other,
            }
        }
    }
}

impl RelevanceScorer for RemoteScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn score_pairs(&self, pairs: &[ScorePair]) -> Result<Vec<Probability>, ScorerError> {
        let mut out = Vec::with_capacity(pairs.len());
        for batch in pairs.chunks(MAX_BATCH) {
            out.extend(self.score_batch(batch)?);
        }
        Ok(out)
    }
}
