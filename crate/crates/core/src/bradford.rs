//! Journal productivity within a result set, Bradford zones, and
//! Bradfordizing re-ranking.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Issn, RecordSource};
use crate::num::{cmp_scores, Field};
use crate::ranking::{assign_ranks, Model, ScoredResult};

/// How journal productivity is folded into the ranking.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BradMode {
    /// Baseline score multiplied by the journal's in-result article count.
    #[default]
    Weighted,
    /// Whole journals in descending productivity order; baseline order
    /// within each journal.
    Pure,
}

impl FromStr for BradMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weighted" => Ok(BradMode::Weighted),
            "pure" => Ok(BradMode::Pure),
            _ => Err(format!(
                "unknown brad_mode {s:?} (expected weighted or pure)"
            )),
        }
    }
}

impl fmt::Display for BradMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BradMode::Weighted => "weighted",
            BradMode::Pure => "pure",
        })
    }
}

/// Article count per ISSN over the result documents. Documents without an
/// ISSN, or unknown to `records`, are not counted.
pub fn journal_counts<T, R>(results: &[ScoredResult<T>], records: &R) -> BTreeMap<Issn, usize>
where
    R: RecordSource + ?Sized,
{
    let mut counts = BTreeMap::new();
    for r in results {
        if let Some(issn) = records
            .record(&r.doc_id)
            .and_then(|rec| rec.journal_issn.clone())
        {
            *counts.entry(issn).or_insert(0) += 1;
        }
    }
    counts
}

/// Journals ordered by count descending, ties by ISSN ascending.
pub fn journal_order(counts: &BTreeMap<Issn, usize>) -> Vec<(Issn, usize)> {
    let mut order: Vec<(Issn, usize)> = counts.iter().map(|(i, &c)| (i.clone(), c)).collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    order
}

/// Counts, zone labels, and per-zone totals for one result set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BradfordTable {
    pub counts: BTreeMap<Issn, usize>,
    /// Zone label per journal, 1-based.
    pub zones: BTreeMap<Issn, usize>,
    pub zone_article_totals: Vec<usize>,
    pub zone_journal_counts: Vec<usize>,
    /// Journals in productivity order.
    pub ranking: Vec<Issn>,
}

impl BradfordTable {
    pub fn total_articles(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn zone_of(&self, issn: &Issn) -> Option<usize> {
        self.zones.get(issn).copied()
    }
}

/// Greedy cumulative partition into `zone_count` zones.
///
/// Walking journals in productivity order, zone `z` closes at the first
/// journal where the running article total reaches `⌈z·T/zone_count⌉`.
/// A zone closes after at least one journal, so one very productive journal
/// cannot leave a middle zone empty while later journals remain.
pub fn zone_partition(counts: &BTreeMap<Issn, usize>, zone_count: usize) -> BradfordTable {
    let zone_count = zone_count.max(1);
    let order = journal_order(counts);
    let total: usize = order.iter().map(|(_, c)| c).sum();
    let thresholds: Vec<usize> = (1..zone_count)
        .map(|z| (z * total).div_ceil(zone_count))
        .collect();

    let mut zones = BTreeMap::new();
    let mut zone_article_totals = vec![0; zone_count];
    let mut zone_journal_counts = vec![0; zone_count];
    let mut zone = 0;
    let mut cumulative = 0;
    for (issn, count) in &order {
        zones.insert(issn.clone(), zone + 1);
        zone_article_totals[zone] += count;
        zone_journal_counts[zone] += 1;
        cumulative += count;
        if zone + 1 < zone_count && cumulative >= thresholds[zone] {
            zone += 1;
        }
    }

    BradfordTable {
        counts: counts.clone(),
        zones,
        zone_article_totals,
        zone_journal_counts,
        ranking: order.into_iter().map(|(i, _)| i).collect(),
    }
}

/// Convenience: counts and zones of a result list.
pub fn bradford_table<T, R>(
    results: &[ScoredResult<T>],
    records: &R,
    zone_count: usize,
) -> BradfordTable
where
    R: RecordSource + ?Sized,
{
    zone_partition(&journal_counts(results, records), zone_count)
}

/// Re-rank a result list by journal productivity.
///
/// Every input document is returned. Documents without an ISSN follow all
/// ISSN documents, in baseline order.
pub fn bradfordize<T, R>(
    results: &[ScoredResult<T>],
    records: &R,
    mode: BradMode,
) -> Vec<ScoredResult<T>>
where
    T: Field,
    R: RecordSource + ?Sized,
{
    let counts = journal_counts(results, records);
    let journal_rank: BTreeMap<&Issn, usize> = journal_order(&counts)
        .iter()
        .enumerate()
        .map(|(i, (issn, _))| (counts.get_key_value(issn).unwrap().0, i))
        .collect();

    let by_baseline = |a: &ScoredResult<T>, b: &ScoredResult<T>| {
        cmp_scores(&b.baseline_score, &a.baseline_score).then_with(|| a.doc_id.cmp(&b.doc_id))
    };

    let mut with_journal: Vec<(ScoredResult<T>, usize, usize)> = Vec::new();
    let mut without: Vec<ScoredResult<T>> = Vec::new();
    for r in results {
        let mut r = r.clone();
        match records
            .record(&r.doc_id)
            .and_then(|rec| rec.journal_issn.as_ref())
        {
            Some(issn) => {
                let count = counts[issn];
                let jrank = journal_rank[issn];
                r.rerank_score = Some(match mode {
                    BradMode::Weighted => r.baseline_score * T::from_count(count),
                    BradMode::Pure => T::from_count(count),
                });
                with_journal.push((r, count, jrank));
            }
            None => {
                r.rerank_score = None;
                without.push(r);
            }
        }
    }

    match mode {
        BradMode::Weighted => with_journal.sort_by(|a, b| {
            let score = |x: &ScoredResult<T>| x.rerank_score.unwrap_or_else(T::zero);
            cmp_scores(&score(&b.0), &score(&a.0))
                .then(b.1.cmp(&a.1))
                .then_with(|| by_baseline(&a.0, &b.0))
        }),
        BradMode::Pure => with_journal.sort_by(|a, b| match a.2.cmp(&b.2) {
            Ordering::Equal => by_baseline(&a.0, &b.0),
            other => other,
        }),
    }
    without.sort_by(by_baseline);

    let mut out: Vec<ScoredResult<T>> = with_journal.into_iter().map(|(r, _, _)| r).collect();
    out.extend(without);
    assign_ranks(&mut out, Model::Brad);
    out
}

/// One row of the core-journal panel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRow {
    pub issn: Issn,
    pub journal_title: Option<String>,
    pub count: usize,
    pub zone: usize,
}

/// Journals of a result set in productivity order with their zones.
pub fn core_journal_report<T, R>(
    results: &[ScoredResult<T>],
    records: &R,
    zone_count: usize,
) -> Vec<JournalRow>
where
    R: RecordSource + ?Sized,
{
    let table = bradford_table(results, records, zone_count);
    let mut titles: BTreeMap<&Issn, &str> = BTreeMap::new();
    for r in results {
        if let Some(rec) = records.record(&r.doc_id) {
            if let (Some(issn), Some(title)) = (&rec.journal_issn, &rec.journal_title) {
                titles.entry(issn).or_insert(title.as_str());
            }
        }
    }
    let rows = table
        .ranking
        .iter()
        .map(|issn| JournalRow {
            issn: issn.clone(),
            journal_title: titles.get(issn).map(|t| t.to_string()),
            count: table.counts[issn],
            zone: table.zones[issn],
        })
        .collect();
    rows
}
