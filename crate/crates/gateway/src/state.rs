//! On-disk working directory shared by the CLI subcommands and the server.
//!
//! ```text
//! <state>/corpus.jsonl       validated corpus (written by `ingest`)
//! <state>/engine.snap        index + association model (written by `build`)
//! <state>/topics.jsonl       topics of the last `pool` run
//! <state>/runs.json          per-topic top-k of every service
//! <state>/pools.json         shuffled assessment pools
//! <state>/assessments.jsonl  judgments recorded by the server
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use scirank_core::corpus::{self, Corpus};
use scirank_core::engine::{service_names, Engine, EngineConfig};
use scirank_core::evalkit::{self, Judgment, Pool, ServiceRuns, Topic};
use scirank_core::index::Tokenizer;

/// Stored output of `pool`: the inputs `eval` needs besides judgments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub k: usize,
    pub seed: u64,
    pub services: Vec<String>,
    pub runs: BTreeMap<String, ServiceRuns>,
}

#[derive(Debug, Clone)]
pub struct StateDir {
    root: PathBuf,
}

impl StateDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        StateDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.root.join("corpus.jsonl")
    }

    pub fn snapshot_path(&self) -> PathBuf {
        self.root.join("engine.snap")
    }

    pub fn topics_path(&self) -> PathBuf {
        self.root.join("topics.jsonl")
    }

    pub fn runs_path(&self) -> PathBuf {
        self.root.join("runs.json")
    }

    pub fn pools_path(&self) -> PathBuf {
        self.root.join("pools.json")
    }

    pub fn assessments_path(&self) -> PathBuf {
        self.root.join("assessments.jsonl")
    }

    /// Validate a corpus file and store its normalized copy.
    pub fn ingest(&self, source: &Path) -> Result<Corpus> {
        let corpus = corpus::load_corpus(source)
            .with_context(|| format!("ingesting {}", source.display()))?;
        fs::create_dir_all(&self.root)?;
        let mut out = BufWriter::new(File::create(self.corpus_path())?);
        corpus.write_jsonl(&mut out)?;
        out.flush()?;
        Ok(corpus)
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        let path = self.corpus_path();
        if !path.exists() {
            bail!("no corpus in {}; run `ingest` first", self.root.display());
        }
        Ok(corpus::load_corpus(&path)?)
    }

    pub fn build(&self, config: EngineConfig, tokenizer: Tokenizer) -> Result<Engine> {
        let corpus = self.load_corpus()?;
        let engine = Engine::build_with_tokenizer(corpus, config, tokenizer);
        let mut out = BufWriter::new(File::create(self.snapshot_path())?);
        engine.write_snapshot(&mut out)?;
        out.flush()?;
        Ok(engine)
    }

    pub fn load_engine(&self) -> Result<Engine> {
        let corpus = self.load_corpus()?;
        let path = self.snapshot_path();
        if !path.exists() {
            bail!(
                "index not built in {}; run `build` first",
                self.root.display()
            );
        }
        let file = BufReader::new(File::open(&path)?);
        Engine::read_snapshot(corpus, file).with_context(|| format!("reading {}", path.display()))
    }

    pub fn save_topics(&self, topics: &[Topic]) -> Result<()> {
        let mut out = BufWriter::new(File::create(self.topics_path())?);
        evalkit::write_jsonl(topics, &mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load_topics(&self) -> Result<Vec<Topic>> {
        let path = self.topics_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        read_topics(&path)
    }

    pub fn save_runs(&self, runs: &RunFile, pools: &[Pool]) -> Result<()> {
        write_json(&self.runs_path(), runs)?;
        write_json(&self.pools_path(), &pools)?;
        Ok(())
    }

    pub fn load_runs(&self) -> Result<RunFile> {
        let path = self.runs_path();
        if !path.exists() {
            bail!("no runs in {}; run `pool` first", self.root.display());
        }
        let file = BufReader::new(File::open(&path)?);
        Ok(serde_json::from_reader(file)?)
    }

    pub fn load_pools(&self) -> Result<Vec<Pool>> {
        let file =
            BufReader::new(File::open(self.pools_path()).context("no pools; run `pool` first")?);
        Ok(serde_json::from_reader(file)?)
    }

    pub fn load_assessments(&self) -> Result<Vec<Judgment>> {
        let path = self.assessments_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        read_judgments(&path)
    }
}

pub fn read_topics(path: &Path) -> Result<Vec<Topic>> {
    let file =
        BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    evalkit::read_topics(file).with_context(|| format!("reading {}", path.display()))
}

pub fn read_judgments(path: &Path) -> Result<Vec<Judgment>> {
    let file =
        BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    evalkit::read_judgments(file).with_context(|| format!("reading {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Run all services for the topics and pool their top-k.
pub fn run_and_pool(
    engine: &Engine,
    topics: &[Topic],
    k: usize,
    seed: u64,
) -> Result<(RunFile, Vec<Pool>)> {
    let services = service_names();
    let runs = engine.run_topics(topics, k)?;
    let pools = topics
        .iter()
        .map(|t| evalkit::pool(t, &runs[&t.id], &services, k, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((
        RunFile {
            k,
            seed,
            services,
            runs,
        },
        pools,
    ))
}
