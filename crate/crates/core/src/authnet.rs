//! Co-authorship networks and author-centrality re-ranking.
//!
//! Authors are nodes, joint publications are weighted undirected edges.
//! Each document is scored by the highest betweenness among its authors.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorKey, RecordSource};
use crate::num::{cmp_scores, to_f64, Field};
use crate::ranking::{assign_ranks, Model, ScoredResult};

/// Which documents the co-authorship graph is built from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphScope {
    /// Only the documents of the result set being re-ranked.
    #[default]
    ResultSet,
    /// The whole corpus, built once.
    Corpus,
}

impl FromStr for GraphScope {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "result_set" | "result-set" => Ok(GraphScope::ResultSet),
            "corpus" => Ok(GraphScope::Corpus),
            _ => Err(format!("unknown graph scope {s:?}")),
        }
    }
}

impl fmt::Display for GraphScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphScope::ResultSet => "result_set",
            GraphScope::Corpus => "corpus",
        })
    }
}

/// Undirected co-authorship graph with normalized betweenness per author.
#[derive(Debug, Clone, PartialEq)]
pub struct CoauthorGraph<T> {
    nodes: Vec<AuthorKey>,
    index: BTreeMap<AuthorKey, usize>,
    adjacency: Vec<Vec<usize>>,
    /// Keyed by node index pair `(a, b)` with `a < b`.
    edges: BTreeMap<(usize, usize), u32>,
    /// Publications in scope per author, single-authored ones included.
    publications: BTreeMap<AuthorKey, usize>,
    betweenness: Vec<T>,
}

impl<T: Field> CoauthorGraph<T> {
    /// Every unordered pair of distinct authors on a document adds 1 to the
    /// weight of their edge. Documents with fewer than two authors add no
    /// edges, so authors who never co-publish in scope are not nodes.
    pub fn build<'a, I>(author_lists: I) -> Self
    where
        I: IntoIterator<Item = &'a [AuthorKey]>,
    {
        let mut pair_weights: BTreeMap<(AuthorKey, AuthorKey), u32> = BTreeMap::new();
        let mut publications: BTreeMap<AuthorKey, usize> = BTreeMap::new();
        for authors in author_lists {
            let distinct: BTreeSet<&AuthorKey> = authors.iter().collect();
            for a in &distinct {
                *publications.entry((*a).clone()).or_insert(0) += 1;
            }
            let distinct: Vec<&AuthorKey> = distinct.into_iter().collect();
            for (i, a) in distinct.iter().enumerate() {
                for b in &distinct[i + 1..] {
                    *pair_weights
                        .entry(((*a).clone(), (*b).clone()))
                        .or_insert(0) += 1;
                }
            }
        }

        let node_set: BTreeSet<&AuthorKey> =
            pair_weights.keys().flat_map(|(a, b)| [a, b]).collect();
        let nodes: Vec<AuthorKey> = node_set.into_iter().cloned().collect();
        let index: BTreeMap<AuthorKey, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut edges = BTreeMap::new();
        for ((a, b), w) in pair_weights {
            let (ia, ib) = (index[&a], index[&b]);
            adjacency[ia].push(ib);
            adjacency[ib].push(ia);
            edges.insert((ia.min(ib), ia.max(ib)), w);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        publications.retain(|a, _| index.contains_key(a));
        let betweenness = betweenness(&adjacency);

        CoauthorGraph {
            nodes,
            index,
            adjacency,
            edges,
            publications,
            betweenness,
        }
    }

    /// Graph over the documents of a result list.
    pub fn from_results<R>(results: &[ScoredResult<impl Sized>], records: &R) -> Self
    where
        R: RecordSource + ?Sized,
    {
        let lists: Vec<Vec<AuthorKey>> = results
            .iter()
            .map(|r| records.authors_of(&r.doc_id))
            .collect();
        Self::build(lists.iter().map(Vec::as_slice))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[AuthorKey] {
        &self.nodes
    }

    pub fn contains(&self, author: &AuthorKey) -> bool {
        self.index.contains_key(author)
    }

    pub fn degree(&self, author: &AuthorKey) -> usize {
        self.index
            .get(author)
            .map_or(0, |&i| self.adjacency[i].len())
    }

    pub fn edge_weight(&self, a: &AuthorKey, b: &AuthorKey) -> Option<u32> {
        let (ia, ib) = (*self.index.get(a)?, *self.index.get(b)?);
        self.edges.get(&(ia.min(ib), ia.max(ib))).copied()
    }

    /// Node adjacency lists by node position in [`nodes`](Self::nodes).
    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn betweenness_of(&self, author: &AuthorKey) -> Option<T> {
        self.index.get(author).map(|&i| self.betweenness[i])
    }

    pub fn betweenness(&self) -> BTreeMap<AuthorKey, T> {
        self.nodes
            .iter()
            .cloned()
            .zip(self.betweenness.iter().copied())
            .collect()
    }

    /// Highest betweenness among the given authors; 0 if none is a node.
    pub fn max_betweenness(&self, authors: &[AuthorKey]) -> T {
        authors
            .iter()
            .filter_map(|a| self.betweenness_of(a))
            .fold(T::zero(), |acc, b| if b > acc { b } else { acc })
    }

    /// Edges as `(author_a, author_b, weight)` with `author_a < author_b`.
    pub fn edge_list(&self) -> Vec<(AuthorKey, AuthorKey, u32)> {
        self.edges
            .iter()
            .map(|(&(a, b), &w)| (self.nodes[a].clone(), self.nodes[b].clone(), w))
            .collect()
    }

    /// Tab-separated edge list, one edge per line.
    pub fn write_edge_list<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for (a, b, w) in self.edge_list() {
            writeln!(out, "{a}\t{b}\t{w}")?;
        }
        Ok(())
    }
}

/// Exact shortest-path betweenness of an unweighted undirected graph,
/// normalized by `(n−1)(n−2)/2`.
///
/// Brandes' accumulation: one BFS per source counts shortest paths
/// (`sigma`), then dependencies are accumulated in reverse BFS order.
/// Every unordered pair is visited from both ends, which the
/// normalization absorbs.
pub fn betweenness<T: Field>(adjacency: &[Vec<usize>]) -> Vec<T> {
    let n = adjacency.len();
    let mut centrality = vec![T::zero(); n];
    if n < 3 {
        return centrality;
    }

    let mut order = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![T::zero(); n];
    let mut dist: Vec<Option<usize>> = vec![None; n];
    let mut delta = vec![T::zero(); n];
    let mut queue = VecDeque::new();

    for source in 0..n {
        order.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = T::zero();
            dist[v] = None;
            delta[v] = T::zero();
        }
        sigma[source] = T::one();
        dist[source] = Some(0);
        queue.push_back(source);

        while let Some(v) = queue.pop_front() {
            order.push(v);
            let dv = dist[v].unwrap();
            for &w in &adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
                if dist[w] == Some(dv + 1) {
                    sigma[w] = sigma[w] + sigma[v];
                    preds[w].push(v);
                }
            }
        }

        while let Some(w) = order.pop() {
            for &v in &preds[w] {
                delta[v] = delta[v] + sigma[v] / sigma[w] * (T::one() + delta[w]);
            }
            if w != source {
                centrality[w] = centrality[w] + delta[w];
            }
        }
    }

    // Each pair counted twice above; (n-1)(n-2) = 2 · (n-1)(n-2)/2.
    let norm = T::from_count((n - 1) * (n - 2));
    centrality.into_iter().map(|c| c / norm).collect()
}

/// Re-rank documents by the maximum betweenness of their authors.
///
/// Authors absent from the graph and authorless documents score 0. Ties
/// fall back to baseline score, then doc id.
pub fn rank_by_centrality<T, R>(
    results: &[ScoredResult<T>],
    records: &R,
    graph: &CoauthorGraph<T>,
) -> Vec<ScoredResult<T>>
where
    T: Field,
    R: RecordSource + ?Sized,
{
    let mut out: Vec<ScoredResult<T>> = results
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.rerank_score = Some(graph.max_betweenness(&records.authors_of(&r.doc_id)));
            r
        })
        .collect();
    out.sort_by(|a, b| {
        let score = |x: &ScoredResult<T>| x.rerank_score.unwrap_or_else(T::zero);
        cmp_scores(&score(b), &score(a))
            .then_with(|| cmp_scores(&b.baseline_score, &a.baseline_score))
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    assign_ranks(&mut out, Model::Auth);
    out
}

/// Fraction of re-ranked documents with a positive centrality score.
pub fn coverage<T: Field>(ranked: &[ScoredResult<T>]) -> f64 {
    if ranked.is_empty() {
        return 0.0;
    }
    let covered = ranked
        .iter()
        .filter(|r| r.rerank_score.is_some_and(|s| s > T::zero()))
        .count();
    covered as f64 / ranked.len() as f64
}

/// One row of the author panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorRow {
    pub author: AuthorKey,
    pub betweenness: f64,
    pub degree: usize,
    pub publications: usize,
}

/// Authors by betweenness descending, then degree descending, then name.
pub fn author_report<T>(graph: &CoauthorGraph<T>) -> Vec<AuthorRow>
where
    T: Field + num_traits::ToPrimitive,
{
    let mut rows: Vec<AuthorRow> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, a)| AuthorRow {
            author: a.clone(),
            betweenness: to_f64(graph.betweenness[i]),
            degree: graph.adjacency[i].len(),
            publications: graph.publications.get(a).copied().unwrap_or(0),
        })
        .collect();
    rows.sort_by(|a, b| {
        cmp_scores(&b.betweenness, &a.betweenness)
            .then(b.degree.cmp(&a.degree))
            .then_with(|| a.author.cmp(&b.author))
    });
    rows
}
