use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use scirank_core::authnet::GraphScope;
use scirank_core::bradford::BradMode;
use scirank_core::engine::{
    service_names, EngineConfig, Expand, Rank, SearchRequest, SearchResponse,
};
use scirank_core::evalkit;
use scirank_core::index::{Tokenizer, DEFAULT_STOPWORDS};
use scirank_core::synth::{demo_corpus, DemoSpec};
use scirank_core::CoauthorGraph;

use crate::http::{self, AppState};
use crate::state::{self, run_and_pool, StateDir};

#[derive(Debug, Parser)]
#[command(
    name = "scirank",
    version,
    about = "Scholarly search with term suggestion, Bradfordizing and author centrality"
)]
pub struct Cli {
    /// Working directory holding the corpus, snapshot and evaluation files.
    #[arg(long, global = true, default_value = ".scirank", env = "SCIRANK_STATE")]
    pub state: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a JSONL corpus and copy it into the state directory.
    Ingest { corpus: PathBuf },
    /// Build the search index and the term association model.
    Build(BuildArgs),
    /// Run one query.
    Search(SearchArgs),
    /// Suggest controlled terms for a free term.
    Suggest {
        #[arg(long)]
        term: String,
        #[arg(short, default_value_t = 4)]
        m: usize,
        #[arg(long)]
        json: bool,
    },
    /// Run all services for a topic file and write blinded assessment pools.
    Pool {
        #[arg(long)]
        topics: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute the evaluation report from judgments and the stored runs.
    Eval {
        #[arg(long)]
        judgments: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// k and default pool seed for /pool and /eval/report.
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the synthetic demo corpus and topics.
    Demo {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DemoSpec::default().docs)]
        docs: usize,
        #[arg(long, default_value_t = DemoSpec::default().seed)]
        seed: u64,
    },
    /// Simulate rater judgments for the stored pools of the demo topics.
    SimulateJudgments {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        raters: usize,
        /// Probability that a rater skips a document.
        #[arg(long, default_value_t = 0.0)]
        skip: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = DemoSpec::default().docs)]
        docs: usize,
        #[arg(long, default_value_t = DemoSpec::default().seed)]
        demo_seed: u64,
    },
    /// Write the co-author graph of a query's candidate set as an edge list.
    ExportGraph {
        #[arg(long)]
        q: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, default_value_t = 2)]
    pub min_cooccurrence: u64,
    #[arg(long, default_value_t = 200)]
    pub candidate_depth: usize,
    #[arg(long, default_value_t = 4)]
    pub expansion_size: usize,
    #[arg(long, default_value_t = 3)]
    pub zones: usize,
    #[arg(long, default_value_t = GraphScope::ResultSet)]
    pub graph_scope: GraphScope,
    /// File with one stopword per line, replacing the built-in list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub q: String,
    #[arg(long, default_value_t = Rank::Solr)]
    pub rank: Rank,
    #[arg(long, default_value_t = Expand::None)]
    pub expand: Expand,
    #[arg(long, default_value_t = BradMode::Weighted)]
    pub brad_mode: BradMode,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Explicit expansion descriptors, separated by `|`.
    #[arg(long, value_delimiter = '|')]
    pub expand_terms: Vec<String>,
    #[arg(long)]
    pub json: bool,
}

pub fn run(cli: Cli) -> Result<()> {
    let state = StateDir::new(&cli.state);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Ingest { corpus } => {
            let c = state.ingest(&corpus)?;
            writeln!(
                out,
                "ingested {} records into {}",
                c.len(),
                state.root().display()
            )?;
        }
        Command::Build(args) => {
            let tokenizer = match &args.stopwords {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    Tokenizer::with_stopwords(text.lines().map(str::trim).filter(|l| !l.is_empty()))
                }
                None => Tokenizer::with_stopwords(DEFAULT_STOPWORDS.iter().copied()),
            };
            if args.zones == 0 || args.candidate_depth == 0 {
                bail!("zones and candidate depth must be at least 1");
            }
            let mut config = EngineConfig::default();
            config.association.min_cooccurrence = args.min_cooccurrence;
            config.candidate_depth = args.candidate_depth;
            config.expansion_size = args.expansion_size;
            config.zone_count = args.zones;
            config.graph_scope = args.graph_scope;
            let engine = state.build(config, tokenizer)?;
            writeln!(
                out,
                "built index over {} documents, {} term associations",
                engine.corpus().len(),
                engine.model().len()
            )?;
        }
        Command::Search(args) => {
            let engine = state.load_engine()?;
            let req = SearchRequest {
                query: args.q,
                rank: args.rank,
                expand: args.expand,
                brad_mode: args.brad_mode,
                k: args.k,
                expand_terms: args.expand_terms,
            };
            let resp = engine.search(&req)?;
            if args.json {
                serde_json::to_writer_pretty(&mut out, &resp)?;
                writeln!(out)?;
            } else {
                print_search(&mut out, &resp)?;
            }
        }
        Command::Suggest { term, m, json } => {
            if m == 0 {
                bail!("-m must be at least 1");
            }
            let engine = state.load_engine()?;
            let suggestions = engine.suggest(&term, m);
            if json {
                serde_json::to_writer_pretty(&mut out, &suggestions)?;
                writeln!(out)?;
            } else if suggestions.is_empty() {
                writeln!(out, "no suggestions for {term:?}")?;
            } else {
                for s in suggestions {
                    writeln!(
                        out,
                        "{:>10.4}  {:>4}  {}",
                        s.score, s.n_ab, s.controlled_term
                    )?;
                }
            }
        }
        Command::Pool { topics, k, seed } => {
            if k == 0 {
                bail!("k must be at least 1");
            }
            let engine = state.load_engine()?;
            let topics = state::read_topics(&topics)?;
            let (runs, pools) = run_and_pool(&engine, &topics, k, seed)?;
            state.save_topics(&topics)?;
            state.save_runs(&runs, &pools)?;
            for p in &pools {
                writeln!(out, "topic {}: pool of {} documents", p.topic_id, p.size())?;
            }
        }
        Command::Eval {
            judgments,
            out: report_path,
        } => {
            let runs = state.load_runs()?;
            let topics = state.load_topics()?;
            let judgments = match judgments {
                Some(path) => state::read_judgments(&path)?,
                None => state.load_assessments()?,
            };
            let report = evalkit::build_report(
                &topics,
                &runs.runs,
                &runs.services,
                &judgments,
                runs.k,
                runs.seed,
            )?;
            let text = report.to_json();
            match report_path {
                Some(path) => {
                    fs::write(&path, &text)
                        .with_context(|| format!("writing {}", path.display()))?;
                    print_report_summary(&mut out, &report)?;
                }
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Serve {
            port,
            host,
            k,
            seed,
        } => {
            drop(out);
            serve(&state, SocketAddr::new(host, port), k, seed)?;
        }
        Command::Demo {
            out: dir,
            docs,
            seed,
        } => {
            let demo = demo_corpus(DemoSpec {
                docs,
                seed,
                ..DemoSpec::default()
            });
            fs::create_dir_all(&dir)?;
            let corpus_path = dir.join("demo_corpus.jsonl");
            let topics_path = dir.join("demo_topics.jsonl");
            write_lines(&corpus_path, |w| {
                for r in &demo.records {
                    writeln!(w, "{}", r.to_json_line())?;
                }
                Ok(())
            })?;
            write_lines(&topics_path, |w| evalkit::write_jsonl(&demo.topics, w))?;
            writeln!(
                out,
                "wrote {} records to {} and {} topics to {}",
                demo.records.len(),
                corpus_path.display(),
                demo.topics.len(),
                topics_path.display()
            )?;
        }
        Command::SimulateJudgments {
            out: path,
            raters,
            skip,
            seed,
            docs,
            demo_seed,
        } => {
            if !(0.0..1.0).contains(&skip) {
                bail!("--skip must lie in [0, 1)");
            }
            let pools = state.load_pools()?;
            let demo = demo_corpus(DemoSpec {
                docs,
                seed: demo_seed,
                ..DemoSpec::default()
            });
            let corpus = state.load_corpus()?;
            if corpus.len() != demo.records.len()
                || demo.records.iter().any(|r| corpus.get(&r.id) != Some(r))
            {
                bail!("the ingested corpus is not the demo corpus for these parameters");
            }
            let judgments = demo.simulate_judgments(&pools, raters, skip, seed);
            write_lines(&path, |w| evalkit::write_jsonl(&judgments, w))?;
            writeln!(
                out,
                "wrote {} judgments to {}",
                judgments.len(),
                path.display()
            )?;
        }
        Command::ExportGraph { q, out: path } => {
            let engine = state.load_engine()?;
            let (_, candidates) = engine.candidates(&SearchRequest::new(q))?;
            let graph = CoauthorGraph::from_results(&candidates, engine.corpus());
            write_lines(&path, |w| graph.write_edge_list(w))?;
            writeln!(
                out,
                "wrote {} edges between {} authors to {}",
                graph.edge_count(),
                graph.node_count(),
                path.display()
            )?;
        }
    }
    Ok(())
}

fn write_lines(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn serve(state: &StateDir, addr: SocketAddr, k: usize, seed: u64) -> Result<()> {
    let engine = match state.load_engine() {
        Ok(e) => Some(e),
        Err(e) => {
            log::warn!("starting without an index: {e:#}");
            None
        }
    };
    let topics = state.load_topics()?;
    fs::create_dir_all(state.root())?;
    let app = AppState::new(engine, topics, k, seed)
        .with_assessment_log(state.load_assessments()?, &state.assessments_path())?;
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(http::serve(Arc::new(app), addr))
}

fn print_search<W: Write>(out: &mut W, resp: &SearchResponse) -> io::Result<()> {
    if !resp.expansion.is_empty() {
        let terms: Vec<&str> = resp
            .expansion
            .iter()
            .map(|e| e.controlled_term.as_str())
            .collect();
        writeln!(out, "expanded with: {}", terms.join("; "))?;
    }
    writeln!(
        out,
        "{} of {} candidates, model {}",
        resp.results.len(),
        resp.candidates,
        resp.rank
    )?;
    for r in &resp.results {
        let rerank = r
            .rerank_score
            .map_or_else(|| "-".to_string(), |s| format!("{s:.4}"));
        writeln!(
            out,
            "{:>3}  {:<10} {:>9.4} {:>10}  {}",
            r.rank, r.doc_id, r.baseline_score, rerank, r.title
        )?;
    }
    if let Some(journals) = &resp.journals {
        writeln!(out, "\ncore journals")?;
        for j in journals {
            writeln!(
                out,
                "  zone {}  {:>3}  {}  {}",
                j.zone,
                j.count,
                j.issn,
                j.journal_title.as_deref().unwrap_or("")
            )?;
        }
    }
    if let Some(authors) = &resp.authors {
        writeln!(out, "\ncentral authors")?;
        for a in authors {
            writeln!(
                out,
                "  {:>8.4}  deg {:>2}  pubs {:>2}  {}",
                a.betweenness, a.degree, a.publications, a.author
            )?;
        }
    }
    Ok(())
}

fn print_report_summary<W: Write>(out: &mut W, report: &evalkit::EvalReport) -> io::Result<()> {
    let names = service_names();
    write!(out, "{:<8}", "topic")?;
    for s in &names {
        write!(out, "{s:>8}")?;
    }
    writeln!(out, "{:>8}", "kappa")?;
    for t in &report.topics {
        write!(out, "{:<8}", t.topic_id)?;
        for s in &names {
            let p = t
                .services
                .iter()
                .find(|r| &r.service == s)
                .and_then(|r| r.precision);
            match p {
                Some(p) => write!(out, "{p:>8.3}")?,
                None => write!(out, "{:>8}", "-")?,
            }
        }
        match t.kappa {
            Some(k) => writeln!(out, "{k:>8.3}")?,
            None => writeln!(out, "{:>8}", "-")?,
        }
    }
    writeln!(
        out,
        "off-diagonal intersections: {}",
        report.overlap.total_intersections
    )?;
    Ok(())
}
