//! Ranked result lists shared by the baseline and the re-rankers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Retrieval service that produced a result list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Model {
    /// TF-IDF baseline.
    Solr,
    /// TF-IDF over the query expanded with suggested descriptors.
    Str,
    /// Bradfordizing.
    Brad,
    /// Author-centrality re-ranking.
    Auth,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Solr, Model::Str, Model::Brad, Model::Auth];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Solr => "SOLR",
            Model::Str => "STR",
            Model::Brad => "BRAD",
            Model::Auth => "AUTH",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SOLR" => Ok(Model::Solr),
            "STR" => Ok(Model::Str),
            "BRAD" => Ok(Model::Brad),
            "AUTH" => Ok(Model::Auth),
            _ => Err(format!("unknown service {s:?}")),
        }
    }
}

/// One ranked document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredResult<T> {
    pub doc_id: String,
    pub baseline_score: T,
    #[serde(default)]
    pub rerank_score: Option<T>,
    /// 1-based.
    pub rank: usize,
    pub model: Model,
}

impl<T> ScoredResult<T> {
    pub fn baseline(doc_id: impl Into<String>, score: T, rank: usize) -> Self {
        ScoredResult {
            doc_id: doc_id.into(),
            baseline_score: score,
            rerank_score: None,
            rank,
            model: Model::Solr,
        }
    }
}

/// Rewrite ranks as 1..k in list order and stamp the model.
pub fn assign_ranks<T>(results: &mut [ScoredResult<T>], model: Model) {
    for (i, r) in results.iter_mut().enumerate() {
        r.rank = i + 1;
        r.model = model;
    }
}

/// Document ids in list order.
pub fn doc_ids<T>(results: &[ScoredResult<T>]) -> Vec<String> {
    results.iter().map(|r| r.doc_id.clone()).collect()
}
