//! Corpus ingestion, cluster-book JSON, truth CSV and stopword files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::{EvaluationReport, Labels};
use crate::pipeline::{BookCluster, ClusterBook};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed csv: {message}")]
    MalformedCsv { path: PathBuf, message: String },
    #[error("{path}: no column named {column:?}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: expected header \"token,cluster_id\"")]
    MissingHeader { path: PathBuf },
    #[error("{path}: duplicate token {token:?} on line {line}")]
    DuplicateToken { path: PathBuf, token: String, line: u64 },
    #[error("{path}: invalid json: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    InvalidSource(String),
    #[error("cluster book is inconsistent: {0}")]
    InvalidBook(String),
}

impl IoError {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            IoError::MissingFile(_) => "missing_file",
            IoError::Io { .. } => "io",
            IoError::MalformedCsv { .. } => "malformed_csv",
            IoError::MissingColumn { .. } => "missing_column",
            IoError::MissingHeader { .. } => "missing_header",
            IoError::DuplicateToken { .. } => "duplicate_token",
            IoError::Json { .. } => "invalid_json",
            IoError::InvalidSource(_) => "invalid_source",
            IoError::InvalidBook(_) => "invalid_book",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One phrase per line.
    Plain,
    /// Phrases in a named column of a headed CSV file.
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSource {
    path: PathBuf,
    format: CorpusFormat,
    column: Option<String>,
}

impl CorpusSource {
    pub fn plain(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            format: CorpusFormat::Plain,
            column: None,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, column: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            format: CorpusFormat::Csv,
            column: Some(column.into()),
        }
    }

    /// Checks that a column is given exactly when the format is csv.
    pub fn new(path: impl Into<PathBuf>, format: CorpusFormat, column: Option<String>) -> Result<Self, IoError> {
        match (format, &column) {
            (CorpusFormat::Csv, None) => Err(IoError::InvalidSource("csv input requires a column name".into())),
            (CorpusFormat::Plain, Some(_)) => Err(IoError::InvalidSource("plain input takes no column name".into())),
            _ => Ok(Self {
                path: path.into(),
                format,
                column,
            }),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => IoError::MissingFile(path.to_path_buf()),
        _ => IoError::Io {
            path: path.to_path_buf(),
            source,
        },
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_error(path: &Path, err: csv::Error) -> IoError {
    IoError::MalformedCsv {
        path: path.to_path_buf(),
        message: err.to_string(),
    }
}

/// Raw phrases in file order; blank lines or fields are skipped.
pub fn load_corpus(source: &CorpusSource) -> Result<Vec<String>, IoError> {
    let text = read_text(&source.path)?;
    match source.format {
        CorpusFormat::Plain => Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect()),
        CorpusFormat::Csv => {
            let column = source
                .column
                .as_deref()
                .ok_or_else(|| IoError::InvalidSource("csv input requires a column name".into()))?;
            let mut reader = csv::Reader::from_reader(text.as_bytes());
            let headers = reader.headers().map_err(|e| csv_error(&source.path, e))?;
            let idx = headers
                .iter()
                .position(|h| h.trim() == column)
                .ok_or_else(|| IoError::MissingColumn {
                    path: source.path.clone(),
                    column: column.to_string(),
                })?;
            let mut phrases = Vec::new();
            for record in reader.records() {
                let record = record.map_err(|e| csv_error(&source.path, e))?;
                if let Some(field) = record.get(idx).map(str::trim).filter(|f| !f.is_empty()) {
                    phrases.push(field.to_string());
                }
            }
            Ok(phrases)
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WireCluster {
    exemplar: String,
    members: Vec<String>,
    raws: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireBook {
    clusters: Vec<WireCluster>,
    unclustered: Vec<String>,
}

/// Canonical pretty-printed JSON with clusters sorted by exemplar.
pub fn cluster_book_to_json(book: &ClusterBook) -> String {
    let wire = WireBook {
        clusters: book
            .clusters
            .iter()
            .map(|(exemplar, c)| WireCluster {
                exemplar: exemplar.clone(),
                members: c.members.clone(),
                raws: c.raws.clone(),
            })
            .collect(),
        unclustered: {
            let mut u = book.unclustered.clone();
            u.sort();
            u
        },
    };
    let mut json = serde_json::to_string_pretty(&wire).expect("cluster book serializes");
    json.push('\n');
    json
}

pub fn cluster_book_from_json(text: &str, origin: &Path) -> Result<ClusterBook, IoError> {
    let wire: WireBook = serde_json::from_str(text).map_err(|source| IoError::Json {
        path: origin.to_path_buf(),
        source,
    })?;
    let mut book = ClusterBook {
        clusters: BTreeMap::new(),
        unclustered: wire.unclustered,
    };
    let mut seen = BTreeSet::new();
    for c in wire.clusters {
        if !c.members.contains(&c.exemplar) {
            return Err(IoError::InvalidBook(format!("exemplar {:?} missing from its members", c.exemplar)));
        }
        for m in &c.members {
            if !seen.insert(m.clone()) {
                return Err(IoError::InvalidBook(format!("token {m:?} appears twice")));
            }
        }
        book.clusters.insert(
            c.exemplar,
            BookCluster {
                members: c.members,
                raws: c.raws,
            },
        );
    }
    for u in &book.unclustered {
        if !seen.insert(u.clone()) {
            return Err(IoError::InvalidBook(format!("token {u:?} appears twice")));
        }
    }
    Ok(book)
}

pub fn write_cluster_book(book: &ClusterBook, path: &Path) -> Result<(), IoError> {
    write_text(path, &cluster_book_to_json(book))
}

pub fn read_cluster_book(path: &Path) -> Result<ClusterBook, IoError> {
    cluster_book_from_json(&read_text(path)?, path)
}

/// Reads a `token,cluster_id` CSV. Duplicate tokens are rejected.
pub fn load_truth(path: &Path) -> Result<Labels, IoError> {
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != ["token", "cluster_id"] {
        return Err(IoError::MissingHeader { path: path.to_path_buf() });
    }
    let mut truth = Labels::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let token = record.get(0).unwrap_or_default().trim().to_string();
        let cluster = record.get(1).unwrap_or_default().trim().to_string();
        if token.is_empty() {
            continue;
        }
        if truth.insert(token.clone(), cluster).is_some() {
            return Err(IoError::DuplicateToken {
                path: path.to_path_buf(),
                token,
                line,
            });
        }
    }
    Ok(truth)
}

pub fn write_truth(truth: &Labels, path: &Path) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| csv_error(path, e);
    writer.write_record(["token", "cluster_id"]).map_err(to_err)?;
    for (token, cluster) in truth {
        writer.write_record([token, cluster]).map_err(to_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| IoError::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    write_text(path, &String::from_utf8_lossy(&bytes))
}

/// One phrase per line.
pub fn write_corpus<S: AsRef<str>>(phrases: &[S], path: &Path) -> Result<(), IoError> {
    let mut text = String::new();
    for p in phrases {
        text.push_str(p.as_ref());
        text.push('\n');
    }
    write_text(path, &text)
}

/// Lowercased stopwords, one per line; blank lines and `#` comments skipped.
pub fn load_stopwords(path: &Path) -> Result<BTreeSet<String>, IoError> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect())
}

pub fn report_to_json(report: &EvaluationReport) -> String {
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    json
}

pub fn write_report(report: &EvaluationReport, path: &Path) -> Result<(), IoError> {
    write_text(path, &report_to_json(report))
}
