//! Pooled relevance assessment: pools, precision, Fleiss kappa, rater
//! agreement, and top-k overlap between services.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::num::{Field, Real};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("service {service} has no results for topic {topic}")]
    MissingService { topic: String, service: String },
    #[error("no assessments")]
    NoAssessments,
    #[error("degenerate category distribution")]
    DegenerateCategories,
    #[error("fewer than 2 documents judged by exactly {raters} raters")]
    TooFewItems { raters: usize },
    #[error("kappa needs at least 2 raters per document, got {0}")]
    TooFewRaters(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate topic id {0:?}")]
    DuplicateTopic(String),
    #[error("topic {0:?} has an empty query")]
    EmptyQuery(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub query: String,
}

/// Binary relevance decision of one rater for one pooled document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub topic_id: String,
    pub doc_id: String,
    pub rater_id: String,
    #[serde(
        serialize_with = "relevant_as_int",
        deserialize_with = "relevant_from_any"
    )]
    pub relevant: bool,
    #[serde(default)]
    pub timestamp: u64,
}

fn relevant_as_int<S: Serializer>(value: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*value))
}

fn relevant_from_any<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Int(u8),
    }
    match Flag::deserialize(d)? {
        Flag::Bool(b) => Ok(b),
        Flag::Int(0) => Ok(false),
        Flag::Int(1) => Ok(true),
        Flag::Int(other) => Err(serde::de::Error::custom(format!(
            "relevant must be 0 or 1, got {other}"
        ))),
    }
}

impl Judgment {
    pub fn new(topic_id: &str, doc_id: &str, rater_id: &str, relevant: bool) -> Self {
        Judgment {
            topic_id: topic_id.into(),
            doc_id: doc_id.into(),
            rater_id: rater_id.into(),
            relevant,
            timestamp: 0,
        }
    }

    fn key(&self) -> (String, String, String) {
        (
            self.topic_id.clone(),
            self.doc_id.clone(),
            self.rater_id.clone(),
        )
    }
}

/// Outcome of storing a judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Upsert {
    New,
    Updated,
}

/// Judgments keyed by (topic, doc, rater); the newest write wins.
#[derive(Debug, Clone, Default)]
pub struct JudgmentStore {
    by_key: BTreeMap<(String, String, String), Judgment>,
}

impl JudgmentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_judgments(judgments: impl IntoIterator<Item = Judgment>) -> Self {
        let mut store = Self::new();
        for j in judgments {
            store.upsert(j);
        }
        store
    }

    pub fn upsert(&mut self, judgment: Judgment) -> Upsert {
        match self.by_key.insert(judgment.key(), judgment) {
            Some(_) => Upsert::Updated,
            None => Upsert::New,
        }
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    pub fn all(&self) -> Vec<Judgment> {
        self.by_key.values().cloned().collect()
    }

    pub fn for_topic(&self, topic_id: &str) -> Vec<Judgment> {
        self.by_key
            .values()
            .filter(|j| j.topic_id == topic_id)
            .cloned()
            .collect()
    }
}

fn read_jsonl<T, R>(reader: R) -> Result<Vec<T>, EvalError>
where
    T: for<'de> Deserialize<'de>,
    R: BufRead,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| EvalError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Newline-delimited topics; ids must be unique and queries non-empty.
pub fn read_topics<R: BufRead>(reader: R) -> Result<Vec<Topic>, EvalError> {
    let topics: Vec<Topic> = read_jsonl(reader)?;
    let mut seen = HashSet::new();
    for t in &topics {
        if !seen.insert(t.id.as_str()) {
            return Err(EvalError::DuplicateTopic(t.id.clone()));
        }
        if t.query.trim().is_empty() {
            return Err(EvalError::EmptyQuery(t.id.clone()));
        }
    }
    Ok(topics)
}

pub fn read_judgments<R: BufRead>(reader: R) -> Result<Vec<Judgment>, EvalError> {
    read_jsonl(reader)
}

pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut out: W) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Top-k document ids per service for one topic, services in a fixed order.
pub type ServiceRuns = BTreeMap<String, Vec<String>>;

/// Stable 64-bit FNV-1a, used to derive per-topic shuffle seeds.
fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Documents to assess for one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pool {
    pub topic_id: String,
    pub seed: u64,
    /// Presentation order, shuffled so the source service is not visible.
    pub doc_ids: Vec<String>,
}

impl Pool {
    pub fn size(&self) -> usize {
        self.doc_ids.len()
    }
}

/// Union of each service's top-k, deduplicated and shuffled with a seed
/// derived from `seed` and the topic id.
pub fn pool(
    topic: &Topic,
    runs: &ServiceRuns,
    services: &[String],
    k: usize,
    seed: u64,
) -> Result<Pool, EvalError> {
    let mut seen = HashSet::new();
    let mut docs = Vec::new();
    for service in services {
        let list = runs.get(service).filter(|l| !l.is_empty()).ok_or_else(|| {
            EvalError::MissingService {
                topic: topic.id.clone(),
                service: service.clone(),
            }
        })?;
        for id in list.iter().take(k) {
            if seen.insert(id.as_str()) {
                docs.push(id.clone());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&topic.id));
    docs.shuffle(&mut rng);
    Ok(Pool {
        topic_id: topic.id.clone(),
        seed,
        doc_ids: docs,
    })
}

/// Precision of one service's top-k over individual judgments.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionStats<T> {
    pub precision: T,
    pub relevant: usize,
    pub judged: usize,
    /// Per-rater precision over the same documents.
    pub per_rater: BTreeMap<String, T>,
    /// Sample standard deviation of per-rater precision over √raters;
    /// `None` with fewer than two raters.
    pub standard_error: Option<T>,
}

/// `P = |r| / (|r| + |nr|)` over every (rater, doc) judgment that touches
/// the service's top-k. Unjudged documents are ignored.
pub fn precision<T: Real>(
    top_k: &[String],
    judgments: &[Judgment],
) -> Result<PrecisionStats<T>, EvalError> {
    let docs: HashSet<&str> = top_k.iter().map(String::as_str).collect();
    let mut per_rater_counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let (mut relevant, mut judged) = (0, 0);
    for j in judgments
        .iter()
        .filter(|j| docs.contains(j.doc_id.as_str()))
    {
        judged += 1;
        let entry = per_rater_counts.entry(&j.rater_id).or_insert((0, 0));
        entry.1 += 1;
        if j.relevant {
            relevant += 1;
            entry.0 += 1;
        }
    }
    if judged == 0 {
        return Err(EvalError::NoAssessments);
    }
    let ratio = |r: usize, n: usize| T::from_count(r) / T::from_count(n);
    let per_rater: BTreeMap<String, T> = per_rater_counts
        .iter()
        .map(|(rater, &(r, n))| (rater.to_string(), ratio(r, n)))
        .collect();
    let standard_error = standard_error(per_rater.values().copied());
    Ok(PrecisionStats {
        precision: ratio(relevant, judged),
        relevant,
        judged,
        per_rater,
        standard_error,
    })
}

fn standard_error<T: Real>(values: impl Iterator<Item = T>) -> Option<T> {
    let values: Vec<T> = values.collect();
    let m = values.len();
    if m < 2 {
        return None;
    }
    let n = T::from_count(m);
    let mean = values.iter().fold(T::zero(), |a, &b| a + b) / n;
    let ss = values
        .iter()
        .fold(T::zero(), |a, &b| a + (b - mean) * (b - mean));
    let sd = (ss / T::from_count(m - 1)).sqrt();
    Some(sd / n.sqrt())
}

/// Precision with one vote per document: relevant when strictly more than
/// half of its raters said so.
pub fn precision_majority<T: Real>(
    top_k: &[String],
    judgments: &[Judgment],
) -> Result<T, EvalError> {
    let docs: HashSet<&str> = top_k.iter().map(String::as_str).collect();
    let mut votes: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for j in judgments
        .iter()
        .filter(|j| docs.contains(j.doc_id.as_str()))
    {
        let v = votes.entry(&j.doc_id).or_insert((0, 0));
        v.1 += 1;
        if j.relevant {
            v.0 += 1;
        }
    }
    if votes.is_empty() {
        return Err(EvalError::NoAssessments);
    }
    let relevant = votes.values().filter(|(r, n)| 2 * r > *n).count();
    Ok(T::from_count(relevant) / T::from_count(votes.len()))
}

/// (relevant, not relevant) counts per document.
fn category_counts(judgments: &[Judgment]) -> BTreeMap<&str, [usize; 2]> {
    let mut counts: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
    for j in judgments {
        let c = counts.entry(&j.doc_id).or_insert([0, 0]);
        c[usize::from(!j.relevant)] += 1;
    }
    counts
}

/// Fleiss' kappa over the documents judged by exactly `n_raters` raters.
///
/// `P_i = Σ_j n_ij (n_ij − 1) / (n (n − 1))`, `p_j = Σ_i n_ij / (N n)`,
/// `κ = (P̄ − P̄e) / (1 − P̄e)` with `P̄e = Σ_j p_j²`.
pub fn fleiss_kappa<T: Field>(judgments: &[Judgment], n_raters: usize) -> Result<T, EvalError> {
    if n_raters < 2 {
        return Err(EvalError::TooFewRaters(n_raters));
    }
    let items: Vec<[usize; 2]> = category_counts(judgments)
        .into_values()
        .filter(|c| c[0] + c[1] == n_raters)
        .collect();
    if items.len() < 2 {
        return Err(EvalError::TooFewItems { raters: n_raters });
    }
    let n = T::from_count(n_raters);
    let items_t = T::from_count(items.len());
    let pair_norm = n * (n - T::one());

    let mut p_bar = T::zero();
    let mut totals = [0usize; 2];
    for c in &items {
        let agree = c.iter().map(|&x| x * x.saturating_sub(1)).sum::<usize>();
        p_bar = p_bar + T::from_count(agree) / pair_norm;
        totals[0] += c[0];
        totals[1] += c[1];
    }
    p_bar = p_bar / items_t;
    let grand = items_t * n;
    let p_e = totals
        .iter()
        .map(|&t| T::from_count(t) / grand)
        .fold(T::zero(), |acc, p| acc + p * p);
    if p_e == T::one() {
        return Err(EvalError::DegenerateCategories);
    }
    Ok((p_bar - p_e) / (T::one() - p_e))
}

/// Most frequent number of raters per document, ties toward more raters.
pub fn modal_rater_count(judgments: &[Judgment]) -> Option<usize> {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for c in category_counts(judgments).values() {
        *freq.entry(c[0] + c[1]).or_insert(0) += 1;
    }
    freq.into_iter()
        .filter(|&(raters, _)| raters >= 2)
        .max_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(raters, _)| raters)
}

/// Share of agreeing judgment pairs among all pairs of judgments on the
/// same document. `None` if no document has two judgments.
pub fn pairwise_agreement<T: Field>(judgments: &[Judgment]) -> Option<T> {
    let (mut agree, mut pairs) = (0usize, 0usize);
    for c in category_counts(judgments).values() {
        let n = c[0] + c[1];
        pairs += n * n.saturating_sub(1) / 2;
        agree += c
            .iter()
            .map(|&x| x * x.saturating_sub(1) / 2)
            .sum::<usize>();
    }
    (pairs > 0).then(|| T::from_count(agree) / T::from_count(pairs))
}

/// Pairwise top-k intersections summed over topics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapMatrix {
    pub services: Vec<String>,
    pub matrix: Vec<Vec<usize>>,
    /// Sum over unordered service pairs.
    pub total_intersections: usize,
}

impl OverlapMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<usize> {
        let i = self.services.iter().position(|s| s == a)?;
        let j = self.services.iter().position(|s| s == b)?;
        Some(self.matrix[i][j])
    }
}

pub fn overlap_matrix<'a, I>(runs_per_topic: I, services: &[String], k: usize) -> OverlapMatrix
where
    I: IntoIterator<Item = &'a ServiceRuns>,
{
    let s = services.len();
    let mut matrix = vec![vec![0usize; s]; s];
    for runs in runs_per_topic {
        let sets: Vec<BTreeSet<&str>> = services
            .iter()
            .map(|svc| {
                runs.get(svc)
                    .map(|l| l.iter().take(k).map(String::as_str).collect())
                    .unwrap_or_default()
            })
            .collect();
        for i in 0..s {
            for j in 0..s {
                matrix[i][j] += sets[i].intersection(&sets[j]).count();
            }
        }
    }
    let total_intersections = (0..s)
        .flat_map(|i| (i + 1..s).map(move |j| (i, j)))
        .map(|(i, j)| matrix[i][j])
        .sum();
    OverlapMatrix {
        services: services.to_vec(),
        matrix,
        total_intersections,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceReport {
    pub service: String,
    pub precision: Option<f64>,
    pub relevant: usize,
    pub judged: usize,
    pub raters: usize,
    pub standard_error: Option<f64>,
    pub majority_precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unavailable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub topic_id: String,
    pub pool_size: usize,
    pub judgments: usize,
    pub kappa: Option<f64>,
    pub kappa_raters: Option<usize>,
    pub kappa_items: usize,
    pub agreement: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_unavailable: Option<String>,
    pub services: Vec<ServiceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k: usize,
    pub seed: u64,
    pub services: Vec<String>,
    pub topics: Vec<TopicReport>,
    /// Mean of per-topic precision, over topics where it is available.
    pub mean_precision: BTreeMap<String, Option<f64>>,
    pub overlap: OverlapMatrix,
    pub total_judgments: usize,
    /// Agreeing judgment pairs over all judgment pairs, across topics.
    pub overall_agreement: Option<f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn topic(&self, id: &str) -> Option<&TopicReport> {
        self.topics.iter().find(|t| t.topic_id == id)
    }
}

/// Assemble pools, precision, kappa, agreement, and overlap.
///
/// Judgments count only when they touch the topic's pool. Missing
/// judgments leave the affected metrics `null` with a reason.
pub fn build_report(
    topics: &[Topic],
    runs: &BTreeMap<String, ServiceRuns>,
    services: &[String],
    judgments: &[Judgment],
    k: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let store = JudgmentStore::from_judgments(judgments.iter().cloned());
    let empty = ServiceRuns::new();
    let mut topic_reports = Vec::with_capacity(topics.len());
    let mut all_pooled: Vec<Judgment> = Vec::new();

    for topic in topics {
        let topic_runs = runs.get(&topic.id).unwrap_or(&empty);
        let pool = pool(topic, topic_runs, services, k, seed)?;
        let pooled_docs: HashSet<&str> = pool.doc_ids.iter().map(String::as_str).collect();
        let pooled: Vec<Judgment> = store
            .for_topic(&topic.id)
            .into_iter()
            .filter(|j| pooled_docs.contains(j.doc_id.as_str()))
            .collect();

        let mut service_reports = Vec::with_capacity(services.len());
        for service in services {
            let top_k: Vec<String> = topic_runs[service].iter().take(k).cloned().collect();
            let row = match precision::<f64>(&top_k, &pooled) {
                Ok(p) => ServiceReport {
                    service: service.clone(),
                    precision: Some(p.precision),
                    relevant: p.relevant,
                    judged: p.judged,
                    raters: p.per_rater.len(),
                    standard_error: p.standard_error,
                    majority_precision: precision_majority::<f64>(&top_k, &pooled).ok(),
                    unavailable: None,
                },
                Err(e) => ServiceReport {
                    service: service.clone(),
                    precision: None,
                    relevant: 0,
                    judged: 0,
                    raters: 0,
                    standard_error: None,
                    majority_precision: None,
                    unavailable: Some(e.to_string()),
                },
            };
            service_reports.push(row);
        }

        let raters = modal_rater_count(&pooled);
        let (kappa, kappa_items, kappa_unavailable) = match raters {
            None if pooled.is_empty() => (None, 0, Some(EvalError::NoAssessments.to_string())),
            None => (None, 0, Some(EvalError::TooFewRaters(1).to_string())),
            Some(n) => {
                let items = category_counts(&pooled)
                    .values()
                    .filter(|c| c[0] + c[1] == n)
                    .count();
                match fleiss_kappa::<f64>(&pooled, n) {
                    Ok(k) => (Some(k), items, None),
                    Err(e) => (None, items, Some(e.to_string())),
                }
            }
        };

        topic_reports.push(TopicReport {
            topic_id: topic.id.clone(),
            pool_size: pool.size(),
            judgments: pooled.len(),
            kappa,
            kappa_raters: raters,
            kappa_items,
            agreement: pairwise_agreement::<f64>(&pooled),
            kappa_unavailable,
            services: service_reports,
        });
        all_pooled.extend(pooled);
    }

    let mean_precision = services
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let values: Vec<f64> = topic_reports
                .iter()
                .filter_map(|t| t.services[i].precision)
                .collect();
            let mean =
                (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
            (s.clone(), mean)
        })
        .collect();

    let ordered_runs = topics.iter().map(|t| runs.get(&t.id).unwrap_or(&empty));
    Ok(EvalReport {
        k,
        seed,
        services: services.to_vec(),
        topics: topic_reports,
        mean_precision,
        overlap: overlap_matrix(ordered_runs, services, k),
        total_judgments: all_pooled.len(),
        overall_agreement: pairwise_agreement_across_topics(&all_pooled),
    })
}

fn pairwise_agreement_across_topics(judgments: &[Judgment]) -> Option<f64> {
    // Documents are distinct per topic, so group by (topic, doc).
    let mut by_topic: BTreeMap<&str, Vec<Judgment>> = BTreeMap::new();
    for j in judgments {
        by_topic.entry(&j.topic_id).or_default().push(j.clone());
    }
    let (mut agree, mut pairs) = (0usize, 0usize);
    for js in by_topic.values() {
        for c in category_counts(js).values() {
            let n = c[0] + c[1];
            pairs += n * n.saturating_sub(1) / 2;
            agree += c
                .iter()
                .map(|&x| x * x.saturating_sub(1) / 2)
                .sum::<usize>();
        }
    }
    (pairs > 0).then(|| agree as f64 / pairs as f64)
}
