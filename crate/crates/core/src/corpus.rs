//! Bibliographic records, corpus ingestion, and name/identifier normalization.
//!
//! Corpus files are newline-delimited JSON, one object per line:
//!
//! ```text
//! {"id":"d1","title":"...","abstract":"...","controlled_terms":["..."],"authors":["..."],"issn":"1234-567X","journal":"...","year":2009}
//! ```
//!
//! Only `id` and `title` are required. Blank lines are skipped.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Errors for a single corpus line, independent of its position.
#[derive(Debug, Error)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("invalid ISSN {0:?}")]
    InvalidIssn(String),
    #[error("invalid author name: {0}")]
    Author(#[from] AuthorError),
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: RecordError,
    },
    #[error("line {line}: duplicate id {id:?} (first seen on line {first_line})")]
    DuplicateId {
        line: usize,
        id: String,
        first_line: usize,
    },
    #[error("reading corpus: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuthorError {
    #[error("author name is empty after trimming")]
    Empty,
}

/// ISSN in canonical `DDDD-DDDC` form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Issn(String);

impl Issn {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Issn {
    type Err = RecordError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let trimmed = raw.trim();
        let bytes = trimmed.as_bytes();
        let valid = bytes.len() == 9
            && bytes[..4].iter().all(u8::is_ascii_digit)
            && bytes[4] == b'-'
            && bytes[5..8].iter().all(u8::is_ascii_digit)
            && (bytes[8].is_ascii_digit() || bytes[8] == b'X' || bytes[8] == b'x');
        if !valid {
            return Err(RecordError::InvalidIssn(raw.to_string()));
        }
        Ok(Issn(trimmed.to_ascii_uppercase()))
    }
}

impl TryFrom<String> for Issn {
    type Error = RecordError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Issn> for String {
    fn from(issn: Issn) -> String {
        issn.0
    }
}

impl fmt::Display for Issn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Normalized author name, the unit of author identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthorKey(String);

impl AuthorKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AuthorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Compose, case-fold, and collapse whitespace.
///
/// Identity is a plain string match on the result; homonyms collapse and
/// spelling variants stay apart.
pub fn normalize_author(raw: &str) -> Result<AuthorKey, AuthorError> {
    let composed: String = raw.nfc().collect();
    let collapsed = composed.split_whitespace().collect::<Vec<_>>().join(" ");
    if collapsed.is_empty() {
        return Err(AuthorError::Empty);
    }
    // Lowercasing can produce decomposed sequences for a few code points.
    let key: String = collapsed.to_lowercase().nfc().collect();
    Ok(AuthorKey(key))
}

/// One bibliographic document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(default)]
    pub controlled_terms: Vec<String>,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(rename = "issn", default, skip_serializing_if = "Option::is_none")]
    pub journal_issn: Option<Issn>,
    #[serde(rename = "journal", default, skip_serializing_if = "Option::is_none")]
    pub journal_title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

impl Record {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        Record {
            id: id.into(),
            title: title.into(),
            abstract_text: None,
            controlled_terms: Vec::new(),
            authors: Vec::new(),
            journal_issn: None,
            journal_title: None,
            year: None,
        }
    }

    /// Title and abstract joined, the free-text field.
    pub fn free_text(&self) -> String {
        match &self.abstract_text {
            Some(abs) if !abs.is_empty() => format!("{}\n{}", self.title, abs),
            _ => self.title.clone(),
        }
    }

    /// Normalized, deduplicated author keys in publication order.
    pub fn author_keys(&self) -> Result<Vec<AuthorKey>, AuthorError> {
        let mut seen = HashSet::new();
        let mut keys = Vec::with_capacity(self.authors.len());
        for raw in &self.authors {
            let key = normalize_author(raw)?;
            if seen.insert(key.clone()) {
                keys.push(key);
            }
        }
        Ok(keys)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Wire shape used only for parsing, so that required fields produce
/// dedicated errors instead of generic serde messages.
#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    title: Option<String>,
    #[serde(rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    controlled_terms: Vec<String>,
    #[serde(default)]
    authors: Vec<String>,
    issn: Option<String>,
    journal: Option<String>,
    year: Option<i32>,
}

/// Parse one corpus line. Author names are kept as published.
pub fn parse_record(line: &str) -> Result<Record, RecordError> {
    let raw: RawRecord = serde_json::from_str(line)?;
    let id = raw
        .id
        .filter(|id| !id.trim().is_empty())
        .ok_or(RecordError::MissingField("id"))?;
    let title = raw.title.ok_or(RecordError::MissingField("title"))?;
    let journal_issn = match raw.issn {
        Some(s) if !s.trim().is_empty() => Some(s.parse::<Issn>()?),
        _ => None,
    };
    Ok(Record {
        id,
        title,
        abstract_text: raw.abstract_text,
        controlled_terms: raw.controlled_terms,
        authors: raw.authors,
        journal_issn,
        journal_title: raw.journal,
        year: raw.year,
    })
}

/// Validated, immutable collection of records with id lookup.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<Record>,
    authors: Vec<Vec<AuthorKey>>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Build from in-memory records; authors are deduplicated by key.
    pub fn from_records(records: Vec<Record>) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::default();
        let mut first_line = HashMap::new();
        for (i, record) in records.into_iter().enumerate() {
            corpus.push(record, i + 1, &mut first_line)?;
        }
        Ok(corpus)
    }

    fn push(
        &mut self,
        mut record: Record,
        line: usize,
        first_line: &mut HashMap<String, usize>,
    ) -> Result<(), CorpusError> {
        if let Some(&first) = first_line.get(&record.id) {
            return Err(CorpusError::DuplicateId {
                line,
                id: record.id,
                first_line: first,
            });
        }
        let keys = record.author_keys().map_err(|e| CorpusError::Record {
            line,
            source: e.into(),
        })?;
        // Drop raw spellings that collapse onto an earlier author.
        let mut seen = HashSet::new();
        record.authors.retain(|raw| {
            normalize_author(raw)
                .map(|k| seen.insert(k))
                .unwrap_or(false)
        });
        first_line.insert(record.id.clone(), line);
        self.by_id.insert(record.id.clone(), self.records.len());
        self.records.push(record);
        self.authors.push(keys);
        Ok(())
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Record> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Normalized authors of the record with the given id.
    pub fn author_keys(&self, id: &str) -> Option<&[AuthorKey]> {
        self.by_id.get(id).map(|&i| self.authors[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Record> {
        self.records.iter()
    }

    /// Write as newline-delimited JSON.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in &self.records {
            writeln!(out, "{}", record.to_json_line())?;
        }
        Ok(())
    }
}

/// Read a corpus from any line-oriented source.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    let mut first_line = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(&line).map_err(|source| CorpusError::Record {
            line: line_no,
            source,
        })?;
        corpus.push(record, line_no, &mut first_line)?;
    }
    if corpus.is_empty() {
        log::warn!("corpus is empty");
    }
    Ok(corpus)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let file = fs::File::open(path.as_ref())?;
    let corpus = read_corpus(BufReader::new(file))?;
    log::info!(
        "loaded {} records from {}",
        corpus.len(),
        path.as_ref().display()
    );
    Ok(corpus)
}

/// Lookup from document id to record, used by the re-rankers.
pub trait RecordSource {
    fn record(&self, id: &str) -> Option<&Record>;

    /// Normalized authors; the default normalizes on the fly and skips
    /// names that fail normalization.
    fn authors_of(&self, id: &str) -> Vec<AuthorKey> {
        self.record(id)
            .map(|r| {
                let mut seen = HashSet::new();
                r.authors
                    .iter()
                    .filter_map(|a| normalize_author(a).ok())
                    .filter(|k| seen.insert(k.clone()))
                    .collect()
            })
            .unwrap_or_default()
    }
}

impl RecordSource for Corpus {
    fn record(&self, id: &str) -> Option<&Record> {
        self.get(id)
    }

    fn authors_of(&self, id: &str) -> Vec<AuthorKey> {
        self.author_keys(id)
            .map(<[AuthorKey]>::to_vec)
            .unwrap_or_default()
    }
}

impl RecordSource for HashMap<String, Record> {
    fn record(&self, id: &str) -> Option<&Record> {
        self.get(id)
    }
}

impl RecordSource for [Record] {
    fn record(&self, id: &str) -> Option<&Record> {
        self.iter().find(|r| r.id == id)
    }
}
