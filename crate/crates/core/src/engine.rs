//! Search pipeline over one immutable snapshot of corpus, index, and
//! association model.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::authnet::{
    author_report, coverage, rank_by_centrality, AuthorRow, CoauthorGraph, GraphScope,
};
use crate::bradford::{bradfordize, core_journal_report, BradMode, JournalRow};
use crate::corpus::{AuthorKey, Corpus, Issn};
use crate::coword::{AssociationModel, AssociationParams, ExpandedQuery, Expansion, Suggestion};
use crate::evalkit::{ServiceRuns, Topic};
use crate::index::{SearchError, SearchIndex, SnapshotError, Tokenizer};
use crate::ranking::{Model, ScoredResult};
use crate::Score;

const SNAPSHOT_MAGIC: &str = "SCIRANK-ENGINE";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("snapshot does not match corpus: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

/// Final ranking applied to the candidate set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    #[default]
    Solr,
    Brad,
    Auth,
}

impl FromStr for Rank {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solr" => Ok(Rank::Solr),
            "brad" => Ok(Rank::Brad),
            "auth" => Ok(Rank::Auth),
            _ => Err(format!("unknown rank {s:?} (expected solr, brad or auth)")),
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rank::Solr => "solr",
            Rank::Brad => "brad",
            Rank::Auth => "auth",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expand {
    #[default]
    None,
    Str,
}

impl FromStr for Expand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Expand::None),
            "str" => Ok(Expand::Str),
            _ => Err(format!("unknown expand {s:?} (expected none or str)")),
        }
    }
}

impl fmt::Display for Expand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expand::None => "none",
            Expand::Str => "str",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    #[serde(default)]
    pub rank: Rank,
    #[serde(default)]
    pub expand: Expand,
    #[serde(default)]
    pub brad_mode: BradMode,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Descriptors picked by the user; replaces automatic expansion when
    /// `expand` is `str`.
    #[serde(default)]
    pub expand_terms: Vec<String>,
}

fn default_k() -> usize {
    10
}

impl SearchRequest {
    pub fn new(query: impl Into<String>) -> Self {
        SearchRequest {
            query: query.into(),
            rank: Rank::Solr,
            expand: Expand::None,
            brad_mode: BradMode::Weighted,
            k: default_k(),
            expand_terms: Vec::new(),
        }
    }

    /// Request that reproduces one of the four evaluated services.
    pub fn for_service(model: Model, query: impl Into<String>, k: usize) -> Self {
        let mut req = SearchRequest::new(query);
        req.k = k;
        match model {
            Model::Solr => {}
            Model::Str => req.expand = Expand::Str,
            Model::Brad => req.rank = Rank::Brad,
            Model::Auth => req.rank = Rank::Auth,
        }
        req
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Baseline hits handed to the re-rankers.
    pub candidate_depth: usize,
    /// Descriptors added by automatic expansion.
    pub expansion_size: usize,
    pub association: AssociationParams,
    pub zone_count: usize,
    pub graph_scope: GraphScope,
    /// Rows returned in the journal and author panels.
    pub panel_size: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            candidate_depth: 200,
            expansion_size: 4,
            association: AssociationParams::default(),
            zone_count: 3,
            graph_scope: GraphScope::ResultSet,
            panel_size: 25,
        }
    }
}

/// One ranked document as returned to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub doc_id: String,
    pub title: String,
    pub journal: Option<String>,
    pub issn: Option<Issn>,
    pub authors: Vec<String>,
    pub baseline_score: f64,
    pub rerank_score: Option<f64>,
    pub rank: usize,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: String,
    pub rank: Rank,
    pub expand: Expand,
    pub brad_mode: BradMode,
    pub k: usize,
    /// Tokens the baseline actually searched for.
    pub terms: Vec<String>,
    pub expansion: Vec<Expansion<Score>>,
    /// Size of the baseline candidate set that was re-ranked.
    pub candidates: usize,
    pub results: Vec<ResultRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journals: Option<Vec<JournalRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub authors: Option<Vec<AuthorRow>>,
    /// Share of candidates with positive author centrality (AUTH only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
}

impl SearchResponse {
    pub fn doc_ids(&self) -> Vec<&str> {
        self.results.iter().map(|r| r.doc_id.as_str()).collect()
    }
}

/// Everything a search needs, built once and read concurrently.
#[derive(Debug, Clone)]
pub struct Engine {
    corpus: Corpus,
    index: SearchIndex,
    model: AssociationModel<Score>,
    config: EngineConfig,
    corpus_graph: Option<CoauthorGraph<Score>>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotBody {
    config: EngineConfig,
    index: SearchIndex,
    model: AssociationModel<Score>,
}

impl Engine {
    pub fn build(corpus: Corpus, config: EngineConfig) -> Self {
        Self::build_with_tokenizer(corpus, config, Tokenizer::default())
    }

    pub fn build_with_tokenizer(
        corpus: Corpus,
        config: EngineConfig,
        tokenizer: Tokenizer,
    ) -> Self {
        let index = SearchIndex::build_with(corpus.records(), tokenizer);
        let model = AssociationModel::build(&index, config.association);
        Self::assemble(corpus, index, model, config)
    }

    fn assemble(
        corpus: Corpus,
        index: SearchIndex,
        model: AssociationModel<Score>,
        config: EngineConfig,
    ) -> Self {
        let corpus_graph = (config.graph_scope == GraphScope::Corpus).then(|| {
            let lists: Vec<Vec<AuthorKey>> = corpus
                .iter()
                .map(|r| corpus.author_keys(&r.id).unwrap_or_default().to_vec())
                .collect();
            CoauthorGraph::build(lists.iter().map(Vec::as_slice))
        });
        Engine {
            corpus,
            index,
            model,
            config,
            corpus_graph,
        }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn index(&self) -> &SearchIndex {
        &self.index
    }

    pub fn model(&self) -> &AssociationModel<Score> {
        &self.model
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<(), SnapshotError> {
        writeln!(out, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}")?;
        let body = SnapshotBody {
            config: self.config,
            index: self.index.clone(),
            model: self.model.clone(),
        };
        serde_json::to_writer(&mut out, &body)?;
        writeln!(out)?;
        Ok(())
    }

    /// Restore a snapshot written by [`write_snapshot`](Self::write_snapshot)
    /// for the same corpus.
    pub fn read_snapshot<R: BufRead>(corpus: Corpus, mut input: R) -> Result<Self, EngineError> {
        let mut header = String::new();
        input.read_line(&mut header).map_err(SnapshotError::from)?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(SNAPSHOT_MAGIC) {
            return Err(SnapshotError::BadMagic.into());
        }
        match parts.next().and_then(|v| v.parse::<u32>().ok()) {
            Some(SNAPSHOT_VERSION) => {}
            Some(v) => return Err(SnapshotError::Version(v).into()),
            None => return Err(SnapshotError::BadMagic.into()),
        }
        let body: SnapshotBody = serde_json::from_reader(input).map_err(SnapshotError::from)?;
        let mut index = body.index;
        index.rebuild_positions();
        let ids_match = index.doc_count() == corpus.len()
            && index
                .doc_ids()
                .iter()
                .zip(corpus.iter())
                .all(|(a, r)| *a == r.id);
        if !ids_match {
            return Err(EngineError::Mismatch(format!(
                "index has {} documents, corpus has {}",
                index.doc_count(),
                corpus.len()
            )));
        }
        Ok(Self::assemble(corpus, index, body.model, body.config))
    }

    /// Suggestions for one query term, strongest first.
    pub fn suggest(&self, term: &str, m: usize) -> Vec<Suggestion> {
        let key = self
            .index
            .tokenize(term)
            .into_iter()
            .next()
            .unwrap_or_default();
        self.model
            .suggest(&key, m)
            .iter()
            .map(Suggestion::from)
            .collect()
    }

    fn expansion(&self, terms: &[String], req: &SearchRequest) -> ExpandedQuery<Score> {
        match req.expand {
            Expand::None => ExpandedQuery::identity(terms),
            Expand::Str if req.expand_terms.is_empty() => {
                self.model.expand_query(terms, self.config.expansion_size)
            }
            Expand::Str => {
                // Explicit picks keep their association score when one exists.
                let mut expansions: Vec<Expansion<Score>> = Vec::new();
                for descriptor in &req.expand_terms {
                    if expansions.iter().any(|e| &e.controlled_term == descriptor) {
                        continue;
                    }
                    let best = terms
                        .iter()
                        .flat_map(|t| self.model.associations(t))
                        .filter(|a| &a.controlled_term == descriptor)
                        .max_by(|a, b| a.score.total_cmp(&b.score));
                    expansions.push(Expansion {
                        controlled_term: descriptor.clone(),
                        source_term: best.map(|a| a.free_term.clone()).unwrap_or_default(),
                        score: best.map_or(0.0, |a| a.score),
                    });
                }
                ExpandedQuery {
                    original: terms.to_vec(),
                    expansions,
                }
            }
        }
    }

    /// Baseline (optionally expanded) candidates for a request.
    pub fn candidates(
        &self,
        req: &SearchRequest,
    ) -> Result<(ExpandedQuery<Score>, Vec<ScoredResult<Score>>), SearchError> {
        if req.k == 0 {
            return Err(SearchError::ZeroK);
        }
        let terms = self.index.tokenize(&req.query);
        if terms.is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let expanded = self.expansion(&terms, req);
        let depth = self.config.candidate_depth.max(req.k);
        let hits = match req.expand {
            Expand::None => self.index.search_tfidf(&terms, depth)?,
            Expand::Str => expanded.search(&self.index, depth)?,
        };
        Ok((expanded, hits))
    }

    pub fn search(&self, req: &SearchRequest) -> Result<SearchResponse, EngineError> {
        let (expanded, candidates) = self.candidates(req)?;
        let terms = expanded.terms(&self.index);
        let candidate_count = candidates.len();
        let mut journals = None;
        let mut authors = None;
        let mut cov = None;

        let mut ranked = match req.rank {
            Rank::Solr => candidates,
            Rank::Brad => {
                let mut rows =
                    core_journal_report(&candidates, &self.corpus, self.config.zone_count);
                rows.truncate(self.config.panel_size);
                journals = Some(rows);
                bradfordize(&candidates, &self.corpus, req.brad_mode)
            }
            Rank::Auth => {
                let local;
                let graph = match &self.corpus_graph {
                    Some(g) => g,
                    None => {
                        local = CoauthorGraph::from_results(&candidates, &self.corpus);
                        &local
                    }
                };
                let mut rows = author_report(graph);
                rows.truncate(self.config.panel_size);
                authors = Some(rows);
                let ranked = rank_by_centrality(&candidates, &self.corpus, graph);
                cov = Some(coverage(&ranked));
                ranked
            }
        };
        ranked.truncate(req.k);

        let results = ranked
            .into_iter()
            .map(|r| {
                let rec = self.corpus.get(&r.doc_id).expect("indexed doc in corpus");
                ResultRow {
                    title: rec.title.clone(),
                    journal: rec.journal_title.clone(),
                    issn: rec.journal_issn.clone(),
                    authors: rec.authors.clone(),
                    doc_id: r.doc_id,
                    baseline_score: r.baseline_score,
                    rerank_score: r.rerank_score,
                    rank: r.rank,
                    model: r.model,
                }
            })
            .collect();

        Ok(SearchResponse {
            query: req.query.clone(),
            rank: req.rank,
            expand: req.expand,
            brad_mode: req.brad_mode,
            k: req.k,
            terms,
            expansion: expanded.expansions,
            candidates: candidate_count,
            results,
            journals,
            authors,
            coverage: cov,
        })
    }

    /// Ranked doc ids of one evaluated service.
    pub fn run_service(
        &self,
        model: Model,
        query: &str,
        k: usize,
    ) -> Result<Vec<String>, EngineError> {
        let resp = self.search(&SearchRequest::for_service(model, query, k))?;
        Ok(resp.results.into_iter().map(|r| r.doc_id).collect())
    }

    /// Top-k of all four services for every topic.
    pub fn run_topics(
        &self,
        topics: &[Topic],
        k: usize,
    ) -> Result<BTreeMap<String, ServiceRuns>, EngineError> {
        let mut runs = BTreeMap::new();
        for topic in topics {
            let mut per_service = ServiceRuns::new();
            for model in Model::ALL {
                per_service.insert(model.to_string(), self.run_service(model, &topic.query, k)?);
            }
            runs.insert(topic.id.clone(), per_service);
        }
        Ok(runs)
    }
}

/// Service names in report order.
pub fn service_names() -> Vec<String> {
    Model::ALL.iter().map(|m| m.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Record;

    fn corpus() -> Corpus {
        let mut docs = Vec::new();
        for i in 0..6 {
            let mut r = Record::new(format!("u{i}"), format!("unemployment study {i}"));
            r.controlled_terms = vec!["Labor Market".into()];
            r.authors = vec![
                format!("Author {}", i % 3),
                format!("Author {}", (i + 1) % 3),
            ];
            r.journal_issn = Some(format!("000{}-0000", i % 2).parse().unwrap());
            docs.push(r);
        }
        for i in 0..4 {
            let mut r = Record::new(format!("m{i}"), format!("labor market reform {i}"));
            r.controlled_terms = vec!["Labor Market".into(), "Reform".into()];
            r.authors = vec![format!("Solo {i}")];
            docs.push(r);
        }
        docs.push(Record::new("x", "unrelated"));
        Corpus::from_records(docs).unwrap()
    }

    #[test]
    fn solr_matches_plain_tfidf() {
        let engine = Engine::build(corpus(), EngineConfig::default());
        let resp = engine.search(&SearchRequest::new("unemployment")).unwrap();
        let direct = engine
            .index()
            .search_text::<f64>("unemployment", 10)
            .unwrap();
        let direct_ids: Vec<&str> = direct.iter().map(|r| r.doc_id.as_str()).collect();
        assert_eq!(resp.doc_ids(), direct_ids);
    }

    #[test]
    fn str_expansion_widens_results() {
        let engine = Engine::build(corpus(), EngineConfig::default());
        let mut req = SearchRequest::new("unemployment");
        let base = engine.search(&req).unwrap();
        req.expand = Expand::Str;
        let expanded = engine.search(&req).unwrap();
        assert_eq!(expanded.expansion[0].controlled_term, "Labor Market");
        assert!(expanded.results.len() > base.results.len());
        assert!(expanded.results.iter().all(|r| r.model == Model::Str));
    }

    #[test]
    fn explicit_expansion_terms() {
        let engine = Engine::build(corpus(), EngineConfig::default());
        let mut req = SearchRequest::new("unemployment");
        req.expand = Expand::Str;
        req.expand_terms = vec!["Reform".into()];
        let resp = engine.search(&req).unwrap();
        assert_eq!(resp.terms, ["unemployment", "reform"]);
    }

    #[test]
    fn panels_follow_rank_mode() {
        let engine = Engine::build(corpus(), EngineConfig::default());
        let mut req = SearchRequest::new("unemployment labor");
        req.rank = Rank::Brad;
        let resp = engine.search(&req).unwrap();
        assert!(resp.journals.is_some() && resp.authors.is_none());
        req.rank = Rank::Auth;
        let resp = engine.search(&req).unwrap();
        assert!(resp.authors.is_some() && resp.coverage.is_some());
    }

    #[test]
    fn corpus_scope_graph() {
        let config = EngineConfig {
            graph_scope: GraphScope::Corpus,
            ..EngineConfig::default()
        };
        let engine = Engine::build(corpus(), config);
        let mut req = SearchRequest::new("unemployment");
        req.rank = Rank::Auth;
        assert_eq!(engine.search(&req).unwrap().results.len(), 6);
    }

    #[test]
    fn empty_query_is_an_error() {
        let engine = Engine::build(corpus(), EngineConfig::default());
        let err = engine.search(&SearchRequest::new("the of")).unwrap_err();
        assert!(matches!(err, EngineError::Search(SearchError::EmptyQuery)));
    }

    #[test]
    fn snapshot_round_trip() {
        let engine = Engine::build(corpus(), EngineConfig::default());
        let mut buf = Vec::new();
        engine.write_snapshot(&mut buf).unwrap();
        let back = Engine::read_snapshot(corpus(), buf.as_slice()).unwrap();
        let req = SearchRequest::new("unemployment");
        assert_eq!(back.search(&req).unwrap(), engine.search(&req).unwrap());

        let other = Corpus::from_records(vec![Record::new("z", "z")]).unwrap();
        assert!(matches!(
            Engine::read_snapshot(other, buf.as_slice()),
            Err(EngineError::Mismatch(_))
        ));
    }
}
