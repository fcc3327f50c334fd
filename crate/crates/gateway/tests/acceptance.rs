//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use scirank_core::authnet::{betweenness, rank_by_centrality};
use scirank_core::bradford::{bradford_table, journal_counts};
use scirank_core::coword::AssociationParams;
use scirank_core::engine::{service_names, Engine, EngineConfig};
use scirank_core::evalkit::{
    self, fleiss_kappa, overlap_matrix, pool, precision, EvalError, Judgment, ServiceRuns, Topic,
};
use scirank_core::index::Tokenizer;
use scirank_core::synth::power_law_journals;
use scirank_core::{
    bradfordize, load_corpus, AssociationModel, BradMode, CoauthorGraph, Corpus, Issn, Record,
    ScoredResult, SearchIndex,
};

const BIN: &str = env!("CARGO_BIN_EXE_scirank");
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/");

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let checks: [(&str, Check); 9] = [
        ("betweenness oracle", betweenness_oracle),
        ("centrality-rank dominance", centrality_dominance),
        ("bradfordizing properties", bradfordizing_properties),
        ("bradford zones", bradford_zones),
        ("STR oracle", str_oracle),
        ("TF-IDF golden", tfidf_golden),
        ("eval arithmetic", eval_arithmetic),
        ("service overlap on demo topics", service_overlap),
        ("end-to-end CLI", end_to_end_cli),
    ];

    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name:<32} {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<32} {why}");
            }
        }
    }
    let _ = panic::take_hook();
    println!("{} of {} criteria passed", 9 - failed, 9);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

// ---------------------------------------------------------------- graphs

/// Shortest-path betweenness by listing every simple path of each pair.
fn enumerated_betweenness(adj: &[Vec<usize>]) -> Vec<f64> {
    fn walk(adj: &[Vec<usize>], path: &mut Vec<usize>, target: usize, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        if last == target {
            out.push(path.clone());
            return;
        }
        for &next in &adj[last] {
            if !path.contains(&next) {
                path.push(next);
                walk(adj, path, target, out);
                path.pop();
            }
        }
    }
    let n = adj.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let mut paths = Vec::new();
            walk(adj, &mut vec![s], t, &mut paths);
            let Some(len) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let shortest: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == len).collect();
            for (v, sc) in score.iter_mut().enumerate() {
                let through = shortest
                    .iter()
                    .filter(|p| p[1..p.len() - 1].contains(&v))
                    .count();
                *sc += through as f64 / shortest.len() as f64;
            }
        }
    }
    let norm = ((n - 1) * (n - 2)) as f64 / 2.0;
    score.into_iter().map(|c| c / norm).collect()
}

fn random_graph(rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let n = rng.gen_range(1..=7);
    let p: f64 = rng.gen_range(0.1..0.9);
    let mut adj = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    adj
}

fn betweenness_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for g in 0..100 {
        let adj = random_graph(&mut rng);
        let fast = betweenness::<f64>(&adj);
        let exact = betweenness::<Ratio<i64>>(&adj);
        let oracle = enumerated_betweenness(&adj);
        for v in 0..adj.len() {
            let err = (fast[v] - oracle[v]).abs();
            worst = worst.max(err);
            ensure!(
                err <= 1e-9,
                "graph {g} node {v}: {} vs {}",
                fast[v],
                oracle[v]
            );
            let r = *exact[v].numer() as f64 / *exact[v].denom() as f64;
            ensure!(
                (r - oracle[v]).abs() <= 1e-9,
                "graph {g} node {v}: rational {r} vs {}",
                oracle[v]
            );
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {}", secs(elapsed));
    Ok(format!(
        "100 graphs, max error {worst:.1e}, {}",
        secs(elapsed)
    ))
}

fn records_with_authors(lists: &[Vec<String>]) -> (Vec<ScoredResult>, HashMap<String, Record>) {
    let mut records = HashMap::new();
    let mut results = Vec::new();
    for (i, authors) in lists.iter().enumerate() {
        let id = format!("d{i:03}");
        let mut r = Record::new(id.clone(), "t");
        r.authors = authors.clone();
        records.insert(id.clone(), r);
        results.push(ScoredResult::baseline(id, 100.0 - i as f64, i + 1));
    }
    (results, records)
}

fn centrality_dominance() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..300 {
        let docs = rng.gen_range(1..40);
        let pool = rng.gen_range(2..20);
        let lists: Vec<Vec<String>> = (0..docs)
            .map(|_| {
                (0..rng.gen_range(0..4))
                    .map(|_| format!("Author {}", rng.gen_range(0..pool)))
                    .collect()
            })
            .collect();
        let (results, records) = records_with_authors(&lists);
        let graph = CoauthorGraph::from_results(&results, &records);
        let centrality = graph.betweenness();
        let doc_max: HashMap<&str, f64> = results
            .iter()
            .map(|r| {
                let best = records[&r.doc_id]
                    .author_keys()
                    .unwrap()
                    .iter()
                    .map(|a| centrality.get(a).copied().unwrap_or(0.0))
                    .fold(0.0, f64::max);
                (r.doc_id.as_str(), best)
            })
            .collect();
        let ranked = rank_by_centrality(&results, &records, &graph);
        ensure!(ranked.len() == results.len(), "case {case}: length changed");
        for (i, a) in ranked.iter().enumerate() {
            for b in &ranked[i + 1..] {
                ensure!(
                    doc_max[a.doc_id.as_str()] >= doc_max[b.doc_id.as_str()],
                    "case {case}: {} ({}) before {} ({})",
                    a.doc_id,
                    doc_max[a.doc_id.as_str()],
                    b.doc_id,
                    doc_max[b.doc_id.as_str()]
                );
            }
        }
    }
    for n in 1..30 {
        let lists: Vec<Vec<String>> = (0..n).map(|i| vec![format!("Solo {i}")]).collect();
        let (results, records) = records_with_authors(&lists);
        let graph = CoauthorGraph::from_results(&results, &records);
        let ranked = rank_by_centrality(&results, &records, &graph);
        let same = ranked
            .iter()
            .zip(&results)
            .all(|(a, b)| a.doc_id == b.doc_id);
        ensure!(same, "single-author set of {n} reordered");
    }
    Ok("300 random result sets, 29 single-author sets".into())
}

// -------------------------------------------------------------- bradford

fn issn(j: usize) -> Issn {
    format!("{:04}-{:04}", 2000 + j, 3000 + j * 7)
        .parse()
        .unwrap()
}

fn bradfordizing_properties() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..1000 {
        let n = rng.gen_range(0..80);
        let journals = rng.gen_range(1..20);
        let mut records = HashMap::new();
        let mut results: Vec<ScoredResult> = (0..n)
            .map(|i| {
                let id = format!("d{i:03}");
                let mut r = Record::new(id.clone(), "t");
                if rng.gen_bool(0.85) {
                    r.journal_issn = Some(issn(rng.gen_range(0..journals)));
                }
                records.insert(id.clone(), r);
                ScoredResult::baseline(id, f64::from(rng.gen_range(1..500u32)) / 10.0, 0)
            })
            .collect();
        results.sort_by(|a, b| {
            b.baseline_score
                .total_cmp(&a.baseline_score)
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        let position: HashMap<String, usize> = results
            .iter()
            .enumerate()
            .map(|(i, r)| (r.doc_id.clone(), i))
            .collect();
        let counts = journal_counts(&results, &records);
        let journal = |id: &str| records[id].journal_issn.as_ref();

        for mode in [BradMode::Weighted, BradMode::Pure] {
            let out = bradfordize(&results, &records, mode);
            let mut a: Vec<&str> = out.iter().map(|r| r.doc_id.as_str()).collect();
            let mut b: Vec<&str> = results.iter().map(|r| r.doc_id.as_str()).collect();
            a.sort_unstable();
            b.sort_unstable();
            ensure!(a == b, "case {case} {mode}: not a permutation");

            let split = out
                .iter()
                .position(|r| journal(&r.doc_id).is_none())
                .unwrap_or(out.len());
            ensure!(
                out[split..].iter().all(|r| journal(&r.doc_id).is_none()),
                "case {case} {mode}: ISSN document after an ISSN-less one"
            );
            ensure!(
                out[split..]
                    .windows(2)
                    .all(|w| position[&w[0].doc_id] < position[&w[1].doc_id]),
                "case {case} {mode}: ISSN-less tail not in baseline order"
            );

            match mode {
                BradMode::Pure => {
                    let along: Vec<usize> = out[..split]
                        .iter()
                        .map(|r| counts[journal(&r.doc_id).unwrap()])
                        .collect();
                    ensure!(
                        along.windows(2).all(|w| w[0] >= w[1]),
                        "case {case}: pure counts increase"
                    );
                }
                BradMode::Weighted => {
                    let mut last: HashMap<&Issn, usize> = HashMap::new();
                    for r in &out[..split] {
                        let pos = position[&r.doc_id];
                        if let Some(prev) = last.insert(journal(&r.doc_id).unwrap(), pos) {
                            ensure!(prev < pos, "case {case}: journal-internal order broken");
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {}", secs(elapsed));
    Ok(format!("1000 result sets x 2 modes, {}", secs(elapsed)))
}

fn bradford_zones() -> Result<String, String> {
    let corpus =
        Corpus::from_records(power_law_journals(60, 120, 1.0)).map_err(|e| e.to_string())?;
    let results: Vec<ScoredResult> = corpus
        .iter()
        .enumerate()
        .map(|(i, r)| ScoredResult::baseline(r.id.clone(), 1.0, i + 1))
        .collect();
    let table = bradford_table(&results, &corpus, 3);
    ensure!(
        table.counts.len() >= 50,
        "only {} journals",
        table.counts.len()
    );
    let total = table.total_articles();
    let target = total.div_ceil(3);
    let ranked: Vec<usize> = table.ranking.iter().map(|i| table.counts[i]).collect();
    let mut start = 0usize;
    for z in 0..3 {
        let n = table.zone_journal_counts[z];
        let slack = *ranked[start.saturating_sub(1)..start + n]
            .iter()
            .max()
            .unwrap();
        let got = table.zone_article_totals[z];
        ensure!(
            got.abs_diff(target) <= slack,
            "zone {}: {got} articles vs {target} (slack {slack})",
            z + 1
        );
        start += n;
    }
    let j = &table.zone_journal_counts;
    ensure!(j[0] < j[1] && j[1] < j[2], "journals per zone {j:?}");
    Ok(format!(
        "T = {total}, articles {:?}, journals {:?}",
        table.zone_article_totals, table.zone_journal_counts
    ))
}

// ------------------------------------------------------------------- STR

fn g2_reference(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let n = a + b + c + d;
    let rows = [a + b, c + d];
    let cols = [a + c, b + d];
    if a <= rows[0] * cols[0] / n {
        return 0.0;
    }
    let obs = [[a, b], [c, d]];
    let mut g = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            if obs[i][j] > 0.0 {
                g += obs[i][j] * (obs[i][j] * n / (rows[i] * cols[j])).ln();
            }
        }
    }
    2.0 * g
}

fn str_oracle() -> Result<String, String> {
    let corpus = load_corpus(format!("{DATA}demo_corpus.jsonl")).map_err(|e| e.to_string())?;
    ensure!(
        corpus.len() == 500,
        "bundled corpus has {} documents",
        corpus.len()
    );
    let index = SearchIndex::build(corpus.records());
    let model = AssociationModel::build(&index, AssociationParams::default());

    let tokenizer = Tokenizer::default();
    let docs: Vec<(BTreeSet<String>, BTreeSet<String>)> = corpus
        .iter()
        .map(|r| {
            let toks = tokenizer.tokenize(&r.free_text()).into_iter().collect();
            let descs = r
                .controlled_terms
                .iter()
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect();
            (toks, descs)
        })
        .collect();

    let mut checked = 0;
    let mut worst = 0.0f64;
    for assoc in model.iter() {
        let mut cells = [0u64; 4];
        for (toks, descs) in &docs {
            let i = match (
                toks.contains(&assoc.free_term),
                descs.contains(&assoc.controlled_term),
            ) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (false, false) => 3,
            };
            cells[i] += 1;
        }
        let c = assoc.cells;
        ensure!(
            [c.n_ab, c.n_ab_not, c.n_not_ab, c.n_not_a_not_b] == cells,
            "{} / {}: cells {c:?} vs scan {cells:?}",
            assoc.free_term,
            assoc.controlled_term
        );
        let expected = g2_reference(
            cells[0] as f64,
            cells[1] as f64,
            cells[2] as f64,
            cells[3] as f64,
        );
        let err = (assoc.score - expected).abs();
        worst = worst.max(err);
        ensure!(
            err <= 1e-9,
            "{} / {}: {} vs {expected}",
            assoc.free_term,
            assoc.controlled_term,
            assoc.score
        );
        checked += 1;
    }

    let vocabulary: Vec<&String> = index.text_postings().keys().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut expanded_queries = 0;
    for _ in 0..100 {
        let len = rng.gen_range(1..=3);
        let terms: Vec<String> = vocabulary
            .choose_multiple(&mut rng, len)
            .map(|t| t.to_string())
            .collect();
        let expansion = model.expand_query(&terms, 4);
        ensure!(
            expansion.expansions.len() <= 4,
            "{terms:?}: {} descriptors",
            expansion.expansions.len()
        );
        if !expansion.expansions.is_empty() {
            expanded_queries += 1;
        }
        let before: HashSet<String> = index
            .search_tfidf::<f64>(&terms, corpus.len())
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|r| r.doc_id)
            .collect();
        let after: HashSet<String> = expansion
            .search(&index, corpus.len())
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|r| r.doc_id)
            .collect();
        ensure!(
            after.is_superset(&before),
            "{terms:?}: expansion lost documents"
        );
    }
    Ok(format!(
        "{checked} associations, max error {worst:.1e}; 100 queries ({expanded_queries} expanded)"
    ))
}

// ---------------------------------------------------------------- TF-IDF

fn tfidf_corpus() -> Vec<Record> {
    let mk = |id: &str, title: &str, descs: &[&str]| {
        let mut r = Record::new(id, title);
        r.controlled_terms = descs.iter().map(|d| d.to_string()).collect();
        r
    };
    vec![
        mk("d1", "apple banana", &[]),
        mk("d2", "apple apple cherry", &[]),
        mk("d3", "banana cherry cherry", &[]),
        mk("d4", "durian", &["Cherry"]),
        mk("d5", "apple durian durian", &[]),
    ]
}

fn tfidf_golden() -> Result<String, String> {
    let index = SearchIndex::build(&tfidf_corpus());
    let l53 = (5.0f64 / 3.0).ln();
    let l52 = (5.0f64 / 2.0).ln();
    let w2 = 1.0 + 2.0f64.ln();
    let cases: [(&str, Vec<(&str, f64)>); 3] = [
        ("apple", vec![("d2", w2 * l53), ("d1", l53), ("d5", l53)]),
        (
            "apple cherry",
            vec![
                ("d2", w2 * l53 + l53),
                ("d3", w2 * l53),
                ("d1", l53),
                ("d4", l53),
                ("d5", l53),
            ],
        ),
        ("durian", vec![("d5", w2 * l52), ("d4", l52)]),
    ];
    for (q, expected) in &cases {
        let got = index.search_text::<f64>(q, 10).map_err(|e| e.to_string())?;
        ensure!(got.len() == expected.len(), "{q}: {} hits", got.len());
        for (r, (id, score)) in got.iter().zip(expected) {
            ensure!(r.doc_id == *id, "{q}: {} where {id} expected", r.doc_id);
            ensure!(
                (r.baseline_score - score).abs() <= 1e-9,
                "{q} {id}: {} vs {score}",
                r.baseline_score
            );
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus_path = dir.path().join("five.jsonl");
    let lines: Vec<String> = tfidf_corpus().iter().map(Record::to_json_line).collect();
    std::fs::write(&corpus_path, lines.join("\n") + "\n").map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for run in 0..2 {
        let state = dir.path().join(format!("state{run}"));
        cli(&state, &["ingest", corpus_path.to_str().unwrap()])?;
        cli(&state, &["build"])?;
        let out = cli(
            &state,
            &["search", "--q", "apple cherry", "--k", "5", "--json"],
        )?;
        let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
        let ids: Vec<String> = v["results"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["doc_id"].as_str().unwrap().to_string())
            .collect();
        runs.push(ids);
    }
    ensure!(
        runs[0] == runs[1],
        "process runs differ: {:?} vs {:?}",
        runs[0],
        runs[1]
    );
    ensure!(
        runs[0] == ["d2", "d3", "d1", "d4", "d5"],
        "CLI order {:?}",
        runs[0]
    );
    Ok("3 queries to 1e-9; two process runs agree".into())
}

// ------------------------------------------------------------ evaluation

fn ratio(v: &Value) -> Ratio<i64> {
    let (n, d) = v.as_str().unwrap().split_once('/').unwrap();
    Ratio::new(n.parse().unwrap(), d.parse().unwrap())
}

fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn eval_arithmetic() -> Result<String, String> {
    let read = |name: &str| -> Result<Value, String> {
        let text =
            std::fs::read_to_string(format!("{DATA}fixtures/{name}")).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    let fx = read("eval_fixture.json")?;
    let golden = read("eval_golden.json")?;
    let k = fx["k"].as_u64().unwrap() as usize;
    let seed = fx["seed"].as_u64().unwrap();
    let services: Vec<String> = serde_json::from_value(fx["services"].clone()).unwrap();
    let topics: Vec<Topic> = serde_json::from_value(fx["topics"].clone()).unwrap();
    let runs: BTreeMap<String, ServiceRuns> = serde_json::from_value(fx["runs"].clone()).unwrap();
    let judgments: Vec<Judgment> = serde_json::from_value(fx["judgments"].clone()).unwrap();

    let mut values = 0;
    for topic in &topics {
        let g = &golden["topics"][&topic.id];
        let p = pool(topic, &runs[&topic.id], &services, k, seed).map_err(|e| e.to_string())?;
        ensure!(
            p.size() as u64 == g["pool_size"].as_u64().unwrap(),
            "{}: pool size {}",
            topic.id,
            p.size()
        );
        let in_pool: HashSet<&str> = p.doc_ids.iter().map(String::as_str).collect();
        let js: Vec<Judgment> = judgments
            .iter()
            .filter(|j| j.topic_id == topic.id && in_pool.contains(j.doc_id.as_str()))
            .cloned()
            .collect();
        for s in &services {
            let gs = &g["services"][s];
            let top: Vec<String> = runs[&topic.id][s].iter().take(k).cloned().collect();
            let stats = precision::<f64>(&top, &js).map_err(|e| e.to_string())?;
            ensure!(
                stats.precision == to_f64(ratio(&gs["precision"])),
                "{} {s}: precision {}",
                topic.id,
                stats.precision
            );
            let se = stats.standard_error.unwrap();
            let expected = to_f64(ratio(&gs["se_squared"])).sqrt();
            ensure!(
                (se - expected).abs() <= 1e-15,
                "{} {s}: standard error {se} vs {expected}",
                topic.id
            );
            values += 2;
        }
        let n = g["kappa_raters"].as_u64().unwrap() as usize;
        let kappa = fleiss_kappa::<Ratio<i64>>(&js, n).map_err(|e| e.to_string())?;
        ensure!(
            kappa == ratio(&g["kappa"]),
            "{}: kappa {kappa} vs {}",
            topic.id,
            g["kappa"]
        );
        values += 2;
    }
    let m = overlap_matrix(topics.iter().map(|t| &runs[&t.id]), &services, k);
    let expected: Vec<Vec<usize>> = serde_json::from_value(golden["overlap"].clone()).unwrap();
    ensure!(
        m.matrix == expected,
        "overlap {:?} vs {expected:?}",
        m.matrix
    );
    ensure!(
        m.total_intersections as u64 == golden["total_intersections"].as_u64().unwrap(),
        "total intersections"
    );

    let unanimous: Vec<Judgment> = ["a", "b", "c", "d"]
        .iter()
        .enumerate()
        .flat_map(|(i, d)| ["x", "y", "z"].map(|r| Judgment::new("T", d, r, i % 2 == 0)))
        .collect();
    let one = fleiss_kappa::<Ratio<i64>>(&unanimous, 3).map_err(|e| e.to_string())?;
    ensure!(one == Ratio::from_integer(1), "unanimous kappa {one}");

    let single: Vec<Judgment> = ["a", "b", "c"]
        .iter()
        .flat_map(|d| ["x", "y"].map(|r| Judgment::new("T", d, r, false)))
        .collect();
    ensure!(
        matches!(
            fleiss_kappa::<f64>(&single, 2),
            Err(EvalError::DegenerateCategories)
        ),
        "single-category input did not raise the degenerate error"
    );
    Ok(format!(
        "{values} fixture values exact, kappa 1 when unanimous, degenerate input rejected"
    ))
}

fn service_overlap() -> Result<String, String> {
    let corpus = load_corpus(format!("{DATA}demo_corpus.jsonl")).map_err(|e| e.to_string())?;
    let engine = Engine::build(corpus, EngineConfig::default());
    let file =
        std::fs::File::open(format!("{DATA}demo_topics.jsonl")).map_err(|e| e.to_string())?;
    let topics = evalkit::read_topics(std::io::BufReader::new(file)).map_err(|e| e.to_string())?;
    ensure!(topics.len() == 5, "{} demo topics", topics.len());
    let services = service_names();
    let runs = engine.run_topics(&topics, 10).map_err(|e| e.to_string())?;
    let m = overlap_matrix(topics.iter().map(|t| &runs[&t.id]), &services, 10);
    for i in 0..services.len() {
        ensure!(
            m.matrix[i][i] == 50,
            "diagonal {} for {}",
            m.matrix[i][i],
            services[i]
        );
        for j in 0..services.len() {
            ensure!(m.matrix[i][j] == m.matrix[j][i], "matrix not symmetric");
        }
    }
    let differing = topics
        .iter()
        .filter(|t| {
            let r = &runs[&t.id];
            ["STR", "BRAD", "AUTH"].iter().any(|s| r[*s] != r["SOLR"])
        })
        .count();
    ensure!(
        differing >= 4,
        "re-rankings differ from baseline on only {differing} topics"
    );
    Ok(format!(
        "diagonal 50, {} off-diagonal intersections, {differing}/5 topics re-ranked",
        m.total_intersections
    ))
}

// ------------------------------------------------------------------- CLI

fn cli(state: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(BIN)
        .arg("--state")
        .arg(state)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "`scirank {}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn end_to_end_cli() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = format!("{DATA}demo_corpus.jsonl");
    let topics = format!("{DATA}demo_topics.jsonl");
    let judgments = format!("{DATA}demo_judgments.jsonl");
    let start = Instant::now();
    let mut reports = Vec::new();
    for run in 0..2 {
        let state = dir.path().join(format!("run{run}"));
        let report = dir.path().join(format!("report{run}.json"));
        cli(&state, &["ingest", &corpus])?;
        cli(&state, &["build"])?;
        cli(
            &state,
            &[
                "search",
                "--q",
                "Unemployment",
                "--rank",
                "brad",
                "--k",
                "10",
            ],
        )?;
        cli(
            &state,
            &["pool", "--topics", &topics, "--k", "10", "--seed", "42"],
        )?;
        cli(
            &state,
            &[
                "eval",
                "--judgments",
                &judgments,
                "--out",
                report.to_str().unwrap(),
            ],
        )?;
        reports.push(std::fs::read(&report).map_err(|e| e.to_string())?);
    }
    let elapsed = start.elapsed();
    ensure!(
        elapsed < Duration::from_secs(60),
        "two pipelines took {}",
        secs(elapsed)
    );
    ensure!(reports[0] == reports[1], "reports differ between runs");
    let bundled = std::fs::read(format!("{DATA}demo_report.json")).map_err(|e| e.to_string())?;
    ensure!(
        reports[0] == bundled,
        "report differs from data/demo_report.json"
    );
    Ok(format!(
        "two runs in {}, {} byte report identical",
        secs(elapsed),
        reports[0].len()
    ))
}
