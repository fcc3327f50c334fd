//! Co-word associations between free-text terms and controlled descriptors.
//!
//! For a free term A and a descriptor B the documents of the collection
//! fall into a 2×2 contingency table (AB, AB̄, ĀB, ĀB̄). Each pair is
//! weighted by a one-sided log-likelihood ratio over that table; the
//! strongest descriptors for a query term are suggested to the user and
//! used to expand the query.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::{Field, SearchError, SearchIndex};
use crate::num::{cmp_scores, Real};
use crate::ranking::{assign_ranks, Model, ScoredResult};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssociationError {
    #[error("contingency table is empty")]
    EmptyTable,
}

/// Document counts of the four term combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Contingency {
    pub n_ab: u64,
    pub n_ab_not: u64,
    pub n_not_ab: u64,
    pub n_not_a_not_b: u64,
}

impl Contingency {
    pub fn new(n_ab: u64, n_ab_not: u64, n_not_ab: u64, n_not_a_not_b: u64) -> Self {
        Contingency {
            n_ab,
            n_ab_not,
            n_not_ab,
            n_not_a_not_b,
        }
    }

    pub fn total(&self) -> u64 {
        self.n_ab + self.n_ab_not + self.n_not_ab + self.n_not_a_not_b
    }

    /// Exchange the roles of A and B.
    pub fn transposed(&self) -> Self {
        Contingency::new(self.n_ab, self.n_not_ab, self.n_ab_not, self.n_not_a_not_b)
    }

    /// Observed co-occurrence strictly above what independence predicts.
    pub fn is_positive(&self) -> bool {
        let n = u128::from(self.total());
        let row_a = u128::from(self.n_ab + self.n_ab_not);
        let col_b = u128::from(self.n_ab + self.n_not_ab);
        u128::from(self.n_ab) * n > row_a * col_b
    }
}

fn x_ln_x<T: Real>(x: u64) -> T {
    if x == 0 {
        T::zero()
    } else {
        let x = T::from_count(x as usize);
        x * x.ln()
    }
}

/// One-sided log-likelihood ratio G² of a 2×2 table.
///
/// Evaluated through the entropy identity
/// `G² = 2 (Σ O ln O − Σ R ln R − Σ C ln C + N ln N)` with `0 ln 0 = 0`.
/// Tables at or below independence score 0.
pub fn association_score<T: Real>(cells: Contingency) -> Result<T, AssociationError> {
    let n = cells.total();
    if n == 0 {
        return Err(AssociationError::EmptyTable);
    }
    if !cells.is_positive() {
        return Ok(T::zero());
    }
    let Contingency {
        n_ab,
        n_ab_not,
        n_not_ab,
        n_not_a_not_b,
    } = cells;
    let observed = x_ln_x::<T>(n_ab)
        + x_ln_x::<T>(n_ab_not)
        + x_ln_x::<T>(n_not_ab)
        + x_ln_x::<T>(n_not_a_not_b);
    let rows = x_ln_x::<T>(n_ab + n_ab_not) + x_ln_x::<T>(n_not_ab + n_not_a_not_b);
    let cols = x_ln_x::<T>(n_ab + n_not_ab) + x_ln_x::<T>(n_ab_not + n_not_a_not_b);
    let g2 = (observed - rows - cols + x_ln_x::<T>(n)) * T::from_count(2);
    // Rounding can push near-independent tables a hair below zero.
    Ok(if g2 < T::zero() { T::zero() } else { g2 })
}

/// A free term, a descriptor, their contingency table, and its score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermAssociation<T> {
    pub free_term: String,
    pub controlled_term: String,
    #[serde(flatten)]
    pub cells: Contingency,
    pub score: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationParams {
    pub min_cooccurrence: u64,
    /// Keep at most this many associations per free term.
    pub max_per_term: Option<usize>,
}

impl Default for AssociationParams {
    fn default() -> Self {
        AssociationParams {
            min_cooccurrence: 2,
            max_per_term: None,
        }
    }
}

/// Precomputed free-term → descriptor associations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationModel<T> {
    doc_count: u64,
    params: AssociationParams,
    by_term: BTreeMap<String, Vec<TermAssociation<T>>>,
}

impl<T: Real> AssociationModel<T> {
    /// Count document-level co-occurrences and score every pair that
    /// reaches `min_cooccurrence`.
    pub fn build(index: &SearchIndex, params: AssociationParams) -> Self {
        let min_co = params.min_cooccurrence.max(1);
        let n = index.doc_count() as u64;
        let mut by_term = BTreeMap::new();

        for (term, postings) in index.text_postings() {
            let df_a = postings.len() as u64;
            if df_a < min_co {
                continue;
            }
            let mut co: HashMap<&str, u64> = HashMap::new();
            for &pos in postings.keys() {
                for descriptor in index.controlled_terms_of(pos) {
                    *co.entry(descriptor.as_str()).or_insert(0) += 1;
                }
            }
            let mut list: Vec<TermAssociation<T>> = co
                .into_iter()
                .filter(|&(_, n_ab)| n_ab >= min_co)
                .map(|(descriptor, n_ab)| {
                    let df_b = index.df(descriptor, Field::Controlled) as u64;
                    let cells =
                        Contingency::new(n_ab, df_a - n_ab, df_b - n_ab, n + n_ab - df_a - df_b);
                    let score = association_score(cells).expect("non-empty table");
                    TermAssociation {
                        free_term: term.clone(),
                        controlled_term: descriptor.to_string(),
                        cells,
                        score,
                    }
                })
                .collect();
            if list.is_empty() {
                continue;
            }
            list.sort_by(|a, b| {
                cmp_scores(&b.score, &a.score)
                    .then_with(|| a.controlled_term.cmp(&b.controlled_term))
            });
            if let Some(cap) = params.max_per_term {
                list.truncate(cap);
            }
            by_term.insert(term.clone(), list);
        }

        AssociationModel {
            doc_count: n,
            params,
            by_term,
        }
    }

    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn params(&self) -> AssociationParams {
        self.params
    }

    pub fn is_empty(&self) -> bool {
        self.by_term.is_empty()
    }

    /// Number of stored (term, descriptor) pairs.
    pub fn len(&self) -> usize {
        self.by_term.values().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TermAssociation<T>> {
        self.by_term.values().flatten()
    }

    pub fn associations(&self, free_term: &str) -> &[TermAssociation<T>] {
        self.by_term.get(free_term).map_or(&[], Vec::as_slice)
    }

    /// Top-`m` descriptors for a query term, strongest first.
    pub fn suggest(&self, query_term: &str, m: usize) -> &[TermAssociation<T>] {
        let all = self.associations(query_term);
        &all[..all.len().min(m)]
    }

    /// Pool the suggestions of every query term, keep each descriptor once
    /// at its best score, and return the `size` strongest. Associations that
    /// score 0 (no positive dependence) are never used for expansion.
    pub fn expand_query(&self, query_terms: &[String], size: usize) -> ExpandedQuery<T> {
        let mut best: BTreeMap<&str, &TermAssociation<T>> = BTreeMap::new();
        for term in query_terms {
            for assoc in self.associations(term) {
                if assoc.score <= T::zero() {
                    continue;
                }
                best.entry(assoc.controlled_term.as_str())
                    .and_modify(|cur| {
                        if assoc.score > cur.score {
                            *cur = assoc;
                        }
                    })
                    .or_insert(assoc);
            }
        }
        let mut pooled: Vec<&TermAssociation<T>> = best.into_values().collect();
        pooled.sort_by(|a, b| {
            cmp_scores(&b.score, &a.score).then_with(|| a.controlled_term.cmp(&b.controlled_term))
        });
        pooled.truncate(size);
        ExpandedQuery {
            original: query_terms.to_vec(),
            expansions: pooled
                .into_iter()
                .map(|a| Expansion {
                    controlled_term: a.controlled_term.clone(),
                    source_term: a.free_term.clone(),
                    score: a.score,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion<T> {
    pub controlled_term: String,
    /// Query term whose association selected this descriptor.
    pub source_term: String,
    pub score: T,
}

/// Original query terms plus the descriptors chosen to widen it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedQuery<T> {
    pub original: Vec<String>,
    pub expansions: Vec<Expansion<T>>,
}

impl<T> ExpandedQuery<T> {
    /// Query without expansion.
    pub fn identity(query_terms: &[String]) -> Self {
        ExpandedQuery {
            original: query_terms.to_vec(),
            expansions: Vec::new(),
        }
    }

    /// Disjunction of the original terms and the tokenized descriptors,
    /// deduplicated in first-seen order.
    pub fn terms(&self, index: &SearchIndex) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let tokens = self
            .expansions
            .iter()
            .flat_map(|e| index.tokenize(&e.controlled_term));
        for t in self.original.iter().cloned().chain(tokens) {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }

    pub fn descriptors(&self) -> Vec<&str> {
        self.expansions
            .iter()
            .map(|e| e.controlled_term.as_str())
            .collect()
    }
}

impl<T: Real> ExpandedQuery<T> {
    /// TF-IDF over the expanded disjunction; results are labelled STR.
    pub fn search(
        &self,
        index: &SearchIndex,
        k: usize,
    ) -> Result<Vec<ScoredResult<T>>, SearchError> {
        let mut hits = index.search_tfidf(&self.terms(index), k)?;
        assign_ranks(&mut hits, Model::Str);
        Ok(hits)
    }
}

/// Wire shape of one suggestion for the term cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub controlled_term: String,
    pub score: f64,
    pub n_ab: u64,
}

impl<T: Real> From<&TermAssociation<T>> for Suggestion {
    fn from(a: &TermAssociation<T>) -> Self {
        Suggestion {
            controlled_term: a.controlled_term.clone(),
            score: crate::num::to_f64(a.score),
            n_ab: a.cells.n_ab,
        }
    }
}
