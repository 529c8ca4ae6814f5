//! Document model, the line-delimited JSON interchange format, and ingest.
//!
//! A corpus file holds one JSON object per line:
//!
//! ```text
//! {"id":"d1","title":"...","body":"...","published":"1994-02-15","type":"news",
//!  "entities":[{"entity_id":"E:Giuliani","surface":"Giuliani","start":0,"end":8}],
//!  "times":[{"start":"1994-03","end":"1994-03","char_start":190,"char_end":200}]}
//! ```
//!
//! Character offsets address the concatenation `title + "\n" + body` and count
//! Unicode scalar values, not bytes. Unknown keys are ignored.

mod annotate;
mod synthetic;

pub use annotate::{Annotator, Gazetteer};
pub use synthetic::{BurstSpec, SyntheticSpec};

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::CorpusError;
use crate::month::{Month, MonthSpan};

/// Annotates one document with a throwaway [`Annotator`]. Build an
/// [`Annotator`] directly when annotating many documents.
pub fn trivial_annotate(doc: &Document, gazetteer: &Gazetteer) -> Document {
    Annotator::new(gazetteer).annotate(doc)
}

/// Generates a synthetic corpus and writes it to `path`.
pub fn generate_synthetic(spec: &SyntheticSpec, path: &Path) -> Result<Corpus, CorpusError> {
    let corpus = spec.generate()?;
    corpus.write(path)?;
    Ok(corpus)
}

/// Separator placed between title and body in the shared offset space.
pub const TITLE_SEPARATOR: char = '\n';

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub body: String,
    pub published: NaiveDate,
    pub article_type: String,
    pub entity_mentions: Vec<EntityMention>,
    pub temporal_refs: Vec<TemporalRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub entity_id: String,
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
    pub in_title: bool,
}

/// A normalized time expression found in the text, covering whole months.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalRef {
    pub start_month: Month,
    pub end_month: Month,
    pub char_start: usize,
    pub char_end: usize,
}

impl TemporalRef {
    pub fn span(&self) -> MonthSpan {
        MonthSpan {
            start: self.start_month,
            end: self.end_month,
        }
    }
}

impl Document {
    /// Title and body joined by a single newline.
    pub fn text(&self) -> String {
        let mut s = String::with_capacity(self.title.len() + self.body.len() + 1);
        s.push_str(&self.title);
        s.push(TITLE_SEPARATOR);
        s.push_str(&self.body);
        s
    }

    /// Length of [`Document::text`] in characters.
    pub fn text_len(&self) -> usize {
        self.title_len() + 1 + self.body.chars().count()
    }

    pub fn title_len(&self) -> usize {
        self.title.chars().count()
    }

    pub fn month(&self) -> Month {
        Month::of_date(self.published)
    }

    /// Distinct entity ids mentioned, sorted.
    pub fn entity_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .entity_mentions
            .iter()
            .map(|m| m.entity_id.as_str())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub(crate) fn from_record(rec: DocumentRecord) -> Result<Document, String> {
        if rec.id.trim().is_empty() {
            return Err("empty document id".into());
        }
        let published = NaiveDate::parse_from_str(&rec.published, "%Y-%m-%d")
            .map_err(|_| format!("invalid published date `{}`", rec.published))?;
        let title_len = rec.title.chars().count();
        let text_len = title_len + 1 + rec.body.chars().count();

        let mut entity_mentions = Vec::with_capacity(rec.entities.len());
        for (i, m) in rec.entities.into_iter().enumerate() {
            if m.entity_id.is_empty() {
                return Err(format!("entities[{i}]: empty entity_id"));
            }
            check_range(m.start, m.end, text_len).map_err(|e| format!("entities[{i}]: {e}"))?;
            entity_mentions.push(EntityMention {
                entity_id: m.entity_id,
                surface: m.surface,
                char_start: m.start,
                char_end: m.end,
                in_title: m.end <= title_len,
            });
        }

        let mut temporal_refs = Vec::with_capacity(rec.times.len());
        for (i, t) in rec.times.into_iter().enumerate() {
            let start: Month = t.start.parse().map_err(|e| format!("times[{i}]: {e}"))?;
            let end: Month = t.end.parse().map_err(|e| format!("times[{i}]: {e}"))?;
            if start > end {
                return Err(format!("times[{i}]: start {start} after end {end}"));
            }
            check_range(t.char_start, t.char_end, text_len)
                .map_err(|e| format!("times[{i}]: {e}"))?;
            temporal_refs.push(TemporalRef {
                start_month: start,
                end_month: end,
                char_start: t.char_start,
                char_end: t.char_end,
            });
        }

        Ok(Document {
            doc_id: rec.id,
            title: rec.title,
            body: rec.body,
            published,
            article_type: rec.article_type,
            entity_mentions,
            temporal_refs,
        })
    }

    pub(crate) fn to_record(&self) -> DocumentRecord {
        DocumentRecord {
            id: self.doc_id.clone(),
            title: self.title.clone(),
            body: self.body.clone(),
            published: self.published.format("%Y-%m-%d").to_string(),
            article_type: self.article_type.clone(),
            entities: self
                .entity_mentions
                .iter()
                .map(|m| MentionRecord {
                    entity_id: m.entity_id.clone(),
                    surface: m.surface.clone(),
                    start: m.char_start,
                    end: m.char_end,
                })
                .collect(),
            times: self
                .temporal_refs
                .iter()
                .map(|t| TimeRecord {
                    start: t.start_month.to_string(),
                    end: t.end_month.to_string(),
                    char_start: t.char_start,
                    char_end: t.char_end,
                })
                .collect(),
        }
    }

    /// One line of the interchange format, without the trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("document record serializes")
    }
}

fn check_range(start: usize, end: usize, len: usize) -> Result<(), String> {
    if start >= end {
        return Err(format!("empty or inverted offset range {start}..{end}"));
    }
    if end > len {
        return Err(format!("offset {end} exceeds text length {len}"));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct DocumentRecord {
    id: String,
    title: String,
    body: String,
    published: String,
    #[serde(rename = "type")]
    article_type: String,
    #[serde(default)]
    entities: Vec<MentionRecord>,
    #[serde(default)]
    times: Vec<TimeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MentionRecord {
    entity_id: String,
    surface: String,
    start: usize,
    end: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct TimeRecord {
    start: String,
    end: String,
    char_start: usize,
    char_end: usize,
}

/// An ingested, validated collection. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    span: Option<MonthSpan>,
}

impl Corpus {
    /// Builds a corpus from already-validated documents. Duplicate ids keep the
    /// first occurrence.
    pub fn from_documents(documents: Vec<Document>) -> Corpus {
        let mut seen = std::collections::HashSet::new();
        let documents: Vec<Document> = documents
            .into_iter()
            .filter(|d| seen.insert(d.doc_id.clone()))
            .collect();
        let span = span_of(&documents);
        Corpus { documents, span }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// `[min published month, max published month]`, `None` for an empty corpus.
    pub fn span(&self) -> Option<MonthSpan> {
        self.span
    }

    /// Interchange-format serialization, one line per document.
    pub fn to_jsonl(&self) -> String {
        to_jsonl(&self.documents)
    }

    pub fn write(&self, path: &Path) -> Result<(), CorpusError> {
        write_jsonl(path, &self.documents)
    }
}

fn span_of(documents: &[Document]) -> Option<MonthSpan> {
    let min = documents.iter().map(Document::month).min()?;
    let max = documents.iter().map(Document::month).max()?;
    Some(MonthSpan {
        start: min,
        end: max,
    })
}

pub fn to_jsonl(documents: &[Document]) -> String {
    let mut out = String::new();
    for d in documents {
        out.push_str(&d.to_json_line());
        out.push('\n');
    }
    out
}

pub fn write_jsonl(path: &Path, documents: &[Document]) -> Result<(), CorpusError> {
    let write_err = |source| CorpusError::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(write_err)?;
    f.write_all(to_jsonl(documents).as_bytes()).map_err(write_err)?;
    Ok(())
}

/// A record that was skipped during ingest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestIssue {
    /// 1-based line number.
    pub line: usize,
    pub doc_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub documents: usize,
    pub span: Option<MonthSpan>,
    pub issues: Vec<IngestIssue>,
    pub warnings: Vec<String>,
}

impl std::fmt::Display for IngestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} documents", self.documents)?;
        match self.span {
            Some(span) => write!(f, ", span {span}")?,
            None => write!(f, ", empty span")?,
        }
        writeln!(f, ", {} rejected", self.issues.len())?;
        for issue in &self.issues {
            writeln!(f, "  line {}: {}", issue.line, issue.message)?;
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// When set, documents published outside this span are rejected.
    pub declared_span: Option<MonthSpan>,
}

pub fn ingest(path: &Path) -> Result<(Corpus, IngestReport), CorpusError> {
    ingest_with(path, IngestOptions::default())
}

pub fn ingest_with(
    path: &Path,
    options: IngestOptions,
) -> Result<(Corpus, IngestReport), CorpusError> {
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(ingest_str(&raw, options))
}

/// Parses and validates interchange-format text. Bad records are skipped and
/// reported; ingest never fails on content.
pub fn ingest_str(raw: &str, options: IngestOptions) -> (Corpus, IngestReport) {
    let mut documents: Vec<Document> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut report = IngestReport::default();

    for (i, line) in raw.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DocumentRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                report.issues.push(IngestIssue {
                    line: line_no,
                    doc_id: None,
                    message: format!("malformed record: {e}"),
                });
                continue;
            }
        };
        let id = rec.id.clone();
        let doc = match Document::from_record(rec) {
            Ok(d) => d,
            Err(message) => {
                report.issues.push(IngestIssue {
                    line: line_no,
                    doc_id: Some(id),
                    message,
                });
                continue;
            }
        };
        if let Some(span) = options.declared_span {
            if !span.contains(doc.month()) {
                report.issues.push(IngestIssue {
                    line: line_no,
                    doc_id: Some(id),
                    message: format!("published {} outside declared span {span}", doc.published),
                });
                continue;
            }
        }
        if !seen.insert(doc.doc_id.clone()) {
            report.issues.push(IngestIssue {
                line: line_no,
                doc_id: Some(id.clone()),
                message: format!("duplicate doc_id `{id}`"),
            });
            continue;
        }
        documents.push(doc);
    }

    if documents.is_empty() {
        report.warnings.push("no documents loaded".into());
    }
    let corpus = Corpus {
        span: span_of(&documents),
        documents,
    };
    report.documents = corpus.len();
    report.span = corpus.span;
    (corpus, report)
}
