//! Inverted index with separate free-text and controlled-term fields, and
//! the TF-IDF baseline ranking.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Record;
use crate::num::{cmp_scores, Real};
use crate::ranking::{Model, ScoredResult};

/// Default English stopword list.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "him", "his",
    "how", "if", "in", "into", "is", "it", "its", "itself", "me", "more", "most", "my", "no",
    "nor", "not", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over",
    "own", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their", "theirs",
    "them", "then", "there", "these", "they", "this", "those", "through", "to", "too", "under",
    "until", "up", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "would", "you", "your",
];

const SNAPSHOT_MAGIC: &str = "SCIRANK-INDEX";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("empty query")]
    EmptyQuery,
    #[error("k must be at least 1")]
    ZeroK,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not an index snapshot (bad magic header)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("snapshot payload: {0}")]
    Payload(#[from] serde_json::Error),
    #[error("snapshot io: {0}")]
    Io(#[from] std::io::Error),
}

/// Lowercasing tokenizer with a configurable stopword list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    stopwords: BTreeSet<String>,
    min_len: usize,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::with_stopwords(DEFAULT_STOPWORDS.iter().copied())
    }
}

impl Tokenizer {
    pub fn with_stopwords<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Tokenizer {
            stopwords: words
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
            min_len: 2,
        }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| t.chars().count() >= self.min_len && !self.stopwords.contains(t))
            .collect()
    }
}

/// Tokenize with the default stopword list.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

/// Field selector for document-frequency lookups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// Title and abstract tokens.
    Text,
    /// Verbatim controlled descriptors.
    Controlled,
    /// Title, abstract, and tokenized descriptors (the retrieval field).
    Combined,
}

type Postings = BTreeMap<String, BTreeMap<u32, u32>>;

/// Immutable inverted index. Documents are addressed internally by their
/// position in the indexed record list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchIndex {
    doc_ids: Vec<String>,
    tokenizer: Tokenizer,
    text_postings: Postings,
    controlled_postings: BTreeMap<String, BTreeSet<u32>>,
    combined_postings: Postings,
    /// Distinct descriptors per document, sorted.
    doc_controlled: Vec<Vec<String>>,
    #[serde(skip)]
    positions: HashMap<String, u32>,
}

impl SearchIndex {
    pub fn build(records: &[Record]) -> Self {
        Self::build_with(records, Tokenizer::default())
    }

    pub fn build_with(records: &[Record], tokenizer: Tokenizer) -> Self {
        let mut text_postings: Postings = BTreeMap::new();
        let mut controlled_postings: BTreeMap<String, BTreeSet<u32>> = BTreeMap::new();
        let mut combined_postings: Postings = BTreeMap::new();
        let mut doc_controlled = Vec::with_capacity(records.len());

        for (pos, record) in records.iter().enumerate() {
            let pos = pos as u32;
            for token in tokenizer.tokenize(&record.free_text()) {
                *text_postings
                    .entry(token.clone())
                    .or_default()
                    .entry(pos)
                    .or_insert(0) += 1;
                *combined_postings
                    .entry(token)
                    .or_default()
                    .entry(pos)
                    .or_insert(0) += 1;
            }
            let mut descriptors = BTreeSet::new();
            for term in &record.controlled_terms {
                let term = term.trim();
                if term.is_empty() {
                    continue;
                }
                descriptors.insert(term.to_string());
                for token in tokenizer.tokenize(term) {
                    *combined_postings
                        .entry(token)
                        .or_default()
                        .entry(pos)
                        .or_insert(0) += 1;
                }
            }
            for d in &descriptors {
                controlled_postings
                    .entry(d.clone())
                    .or_default()
                    .insert(pos);
            }
            doc_controlled.push(descriptors.into_iter().collect());
        }

        let mut index = SearchIndex {
            doc_ids: records.iter().map(|r| r.id.clone()).collect(),
            tokenizer,
            text_postings,
            controlled_postings,
            combined_postings,
            doc_controlled,
            positions: HashMap::new(),
        };
        index.rebuild_positions();
        index
    }

    pub(crate) fn rebuild_positions(&mut self) {
        self.positions = self
            .doc_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        self.tokenizer.tokenize(text)
    }

    pub fn doc_id(&self, pos: u32) -> &str {
        &self.doc_ids[pos as usize]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn position(&self, doc_id: &str) -> Option<u32> {
        self.positions.get(doc_id).copied()
    }

    pub fn df(&self, term: &str, field: Field) -> usize {
        match field {
            Field::Text => self.text_postings.get(term).map_or(0, BTreeMap::len),
            Field::Controlled => self.controlled_postings.get(term).map_or(0, BTreeSet::len),
            Field::Combined => self.combined_postings.get(term).map_or(0, BTreeMap::len),
        }
    }

    /// Term frequency in the retrieval field.
    pub fn tf(&self, term: &str, doc_id: &str) -> u32 {
        let Some(pos) = self.position(doc_id) else {
            return 0;
        };
        self.combined_postings
            .get(term)
            .and_then(|p| p.get(&pos))
            .copied()
            .unwrap_or(0)
    }

    pub fn text_postings(&self) -> &BTreeMap<String, BTreeMap<u32, u32>> {
        &self.text_postings
    }

    pub fn controlled_postings(&self) -> &BTreeMap<String, BTreeSet<u32>> {
        &self.controlled_postings
    }

    pub fn combined_postings(&self) -> &BTreeMap<String, BTreeMap<u32, u32>> {
        &self.combined_postings
    }

    /// Distinct descriptors of a document, sorted.
    pub fn controlled_terms_of(&self, pos: u32) -> &[String] {
        &self.doc_controlled[pos as usize]
    }

    /// TF-IDF ranking over the retrieval field.
    ///
    /// `score(d) = Σ_t (1 + ln tf(t,d)) · ln(N / df(t))` over the distinct
    /// query terms. Zero-score documents are dropped; ties go to the larger
    /// total raw tf, then to the smaller doc id.
    pub fn search_tfidf<T: Real>(
        &self,
        query_terms: &[String],
        k: usize,
    ) -> Result<Vec<ScoredResult<T>>, SearchError> {
        if k == 0 {
            return Err(SearchError::ZeroK);
        }
        let mut seen = HashSet::new();
        let terms: Vec<&str> = query_terms
            .iter()
            .map(String::as_str)
            .filter(|t| !t.is_empty() && seen.insert(*t))
            .collect();
        if terms.is_empty() {
            return Err(SearchError::EmptyQuery);
        }

        let n = T::from_count(self.doc_count());
        let mut acc: BTreeMap<u32, (T, u64)> = BTreeMap::new();
        for term in terms {
            let Some(postings) = self.combined_postings.get(term) else {
                continue;
            };
            let idf = (n / T::from_count(postings.len())).ln();
            for (&pos, &tf) in postings {
                let weight = (T::one() + T::from_count(tf as usize).ln()) * idf;
                let entry = acc.entry(pos).or_insert((T::zero(), 0));
                entry.0 = entry.0 + weight;
                entry.1 += u64::from(tf);
            }
        }

        let mut hits: Vec<(u32, T, u64)> = acc
            .into_iter()
            .filter(|(_, (score, _))| *score > T::zero())
            .map(|(pos, (score, tf))| (pos, score, tf))
            .collect();
        hits.sort_by(|a, b| {
            cmp_scores(&b.1, &a.1)
                .then(b.2.cmp(&a.2))
                .then_with(|| self.doc_id(a.0).cmp(self.doc_id(b.0)))
        });
        hits.truncate(k);
        Ok(hits
            .into_iter()
            .enumerate()
            .map(|(i, (pos, score, _))| ScoredResult {
                doc_id: self.doc_id(pos).to_string(),
                baseline_score: score,
                rerank_score: None,
                rank: i + 1,
                model: Model::Solr,
            })
            .collect())
    }

    /// Tokenize free text and run [`search_tfidf`](Self::search_tfidf).
    pub fn search_text<T: Real>(
        &self,
        query: &str,
        k: usize,
    ) -> Result<Vec<ScoredResult<T>>, SearchError> {
        self.search_tfidf(&self.tokenize(query), k)
    }

    /// Write a versioned snapshot: a magic header line, then JSON.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<(), SnapshotError> {
        writeln!(out, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}")?;
        serde_json::to_writer(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(mut input: R) -> Result<Self, SnapshotError> {
        let mut header = String::new();
        input.read_line(&mut header)?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(SNAPSHOT_MAGIC) {
            return Err(SnapshotError::BadMagic);
        }
        let version: u32 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or(SnapshotError::BadMagic)?;
        if version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version(version));
        }
        let mut index: SearchIndex = serde_json::from_reader(input)?;
        index.rebuild_positions();
        Ok(index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, title: &str) -> Record {
        Record::new(id, title)
    }

    #[test]
    fn tokenizer_examples() {
        assert_eq!(
            tokenize("Sports in Nazi Germany"),
            ["sports", "nazi", "germany"]
        );
        assert!(tokenize("").is_empty());
        assert_eq!(
            tokenize("Co-Authorship networks!"),
            ["co", "authorship", "networks"]
        );
        assert_eq!(tokenize("Ärzte ÖFFENTLICH"), ["ärzte", "öffentlich"]);
    }

    #[test]
    fn custom_stopwords() {
        let t = Tokenizer::with_stopwords(["sports"]);
        assert_eq!(t.tokenize("Sports in Germany"), ["in", "germany"]);
    }

    #[test]
    fn document_frequencies() {
        let idx = SearchIndex::build(&[rec("d1", "alpha beta")]);
        assert_eq!(idx.doc_count(), 1);
        assert_eq!(idx.df("alpha", Field::Text), 1);
        assert_eq!(idx.df("beta", Field::Text), 1);

        let idx = SearchIndex::build(&[rec("d1", "alpha"), rec("d2", "alpha alpha")]);
        assert_eq!(idx.df("alpha", Field::Text), 2);
        assert_eq!(idx.tf("alpha", "d2"), 2);
    }

    #[test]
    fn controlled_terms_are_verbatim_and_tokenized() {
        let mut r = rec("d1", "jobs");
        r.controlled_terms = vec!["Labor Market".into()];
        let idx = SearchIndex::build(&[r]);
        assert_eq!(idx.df("Labor Market", Field::Controlled), 1);
        assert_eq!(idx.df("labor", Field::Combined), 1);
        assert_eq!(idx.df("market", Field::Combined), 1);
        assert_eq!(idx.df("labor", Field::Text), 0);
    }

    #[test]
    fn single_match_scores_ln_n() {
        let idx =
            SearchIndex::build(&[rec("d1", "gamma"), rec("d2", "delta"), rec("d3", "epsilon")]);
        let hits = idx.search_tfidf::<f64>(&["gamma".into()], 10).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].doc_id, "d1");
        assert!((hits[0].baseline_score - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ubiquitous_term_scores_nothing() {
        let idx = SearchIndex::build(&[rec("d1", "gamma"), rec("d2", "gamma")]);
        assert!(idx
            .search_tfidf::<f64>(&["gamma".into()], 10)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn empty_query_is_rejected() {
        let idx = SearchIndex::build(&[rec("d1", "gamma")]);
        assert!(matches!(
            idx.search_tfidf::<f64>(&[], 10),
            Err(SearchError::EmptyQuery)
        ));
        assert!(matches!(
            idx.search_text::<f64>("the of", 10),
            Err(SearchError::EmptyQuery)
        ));
    }

    #[test]
    fn equal_scores_break_on_doc_id() {
        let idx = SearchIndex::build(&[
            rec("b", "xx"),
            rec("a", "xx"),
            rec("z", "other"),
            rec("y", "other"),
        ]);
        let hits = idx.search_tfidf::<f64>(&["xx".into()], 10).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.doc_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn works_in_single_precision() {
        let idx =
            SearchIndex::build(&[rec("d1", "gamma"), rec("d2", "delta"), rec("d3", "epsilon")]);
        let hits = idx.search_tfidf::<f32>(&["gamma".into()], 1).unwrap();
        assert!((hits[0].baseline_score - 3f32.ln()).abs() < 1e-6);
    }

    #[test]
    fn snapshot_round_trip() {
        let mut r = rec("d1", "alpha beta");
        r.controlled_terms = vec!["Labor Market".into()];
        let idx = SearchIndex::build(&[r, rec("d2", "beta")]);
        let mut buf = Vec::new();
        idx.write_snapshot(&mut buf).unwrap();
        assert!(buf.starts_with(b"SCIRANK-INDEX 1\n"));
        let back = SearchIndex::read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back, idx);
        assert_eq!(back.position("d2"), Some(1));
        assert!(matches!(
            SearchIndex::read_snapshot(&b"garbage\n{}"[..]),
            Err(SnapshotError::BadMagic)
        ));
    }
}
