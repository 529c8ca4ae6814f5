//! Immutable inverted/entity/time index with collection statistics.
//!
//! Documents are numbered by ascending `doc_id`, so the index is a pure
//! function of the set of ingested records.
//!
//! # File format
//!
//! ```text
//! offset  size  content
//! 0       6     magic "EXPIDX"
//! 6       1     format version (currently 1)
//! 7       8     payload length, little-endian u64
//! 15      32    SHA-256 of the payload
//! 47      n     payload: JSON object with sorted keys
//! ```
//!
//! The payload stores the documents, postings, per-document lengths and
//! buckets, entity and bucket maps, and collection statistics. Loading
//! verifies magic, version, length, checksum and the counting invariants.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, Document, DocumentRecord};
use crate::entities::{article_salience, SalientEntity};
use crate::config::SalienceWeights;
use crate::error::IndexError;
use crate::month::{Month, MonthSpan};
use crate::text::tokenize;

/// Dense document number, an index into [`Index::documents`].
pub type DocNo = u32;

pub const FORMAT_VERSION: u8 = 1;
const MAGIC: &[u8; 6] = b"EXPIDX";
const HEADER_LEN: usize = 6 + 1 + 8 + 32;
/// File name used inside an index directory.
pub const INDEX_FILE: &str = "index.bin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: DocNo,
    pub tf: u32,
}

#[derive(Debug)]
pub struct Index {
    docs: Vec<Document>,
    by_id: HashMap<String, DocNo>,
    postings: BTreeMap<String, Vec<Posting>>,
    doc_len: Vec<u32>,
    doc_bucket: Vec<Month>,
    doc_entities: Vec<Vec<String>>,
    entity_docs: BTreeMap<String, Vec<DocNo>>,
    bucket_docs: BTreeMap<Month, Vec<DocNo>>,
    collection_tf: BTreeMap<String, u64>,
    collection_len: u64,
    span: MonthSpan,
    salience: OnceLock<Vec<Vec<SalientEntity>>>,
}

impl Index {
    pub fn build(corpus: &Corpus) -> Result<Index, IndexError> {
        let mut docs: Vec<Document> = corpus.documents().to_vec();
        if docs.is_empty() {
            return Err(IndexError::EmptyCorpus);
        }
        docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_len = Vec::with_capacity(docs.len());
        let mut doc_bucket = Vec::with_capacity(docs.len());
        let mut entity_docs: BTreeMap<String, Vec<DocNo>> = BTreeMap::new();
        let mut bucket_docs: BTreeMap<Month, Vec<DocNo>> = BTreeMap::new();
        let mut collection_tf: BTreeMap<String, u64> = BTreeMap::new();
        let mut collection_len = 0u64;

        for (n, doc) in docs.iter().enumerate() {
            let n = n as DocNo;
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            let tokens = tokenize(&doc.text());
            doc_len.push(tokens.len() as u32);
            collection_len += tokens.len() as u64;
            for t in tokens {
                *tf.entry(t).or_default() += 1;
            }
            for (term, f) in tf {
                *collection_tf.entry(term.clone()).or_default() += f as u64;
                postings.entry(term).or_default().push(Posting { doc: n, tf: f });
            }
            for e in doc.entity_ids() {
                entity_docs.entry(e.to_string()).or_default().push(n);
            }
            doc_bucket.push(doc.month());
            bucket_docs.entry(doc.month()).or_default().push(n);
        }

        let span = span_of(&doc_bucket);
        Ok(Index::assemble(IndexData {
            docs,
            postings,
            doc_len,
            doc_bucket,
            entity_docs,
            bucket_docs,
            collection_tf,
            collection_len,
            span,
        }))
    }

    fn assemble(data: IndexData) -> Index {
        let by_id = data
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i as DocNo))
            .collect();
        let doc_entities = data
            .docs
            .iter()
            .map(|d| d.entity_ids().into_iter().map(str::to_string).collect())
            .collect();
        Index {
            docs: data.docs,
            by_id,
            postings: data.postings,
            doc_len: data.doc_len,
            doc_bucket: data.doc_bucket,
            doc_entities,
            entity_docs: data.entity_docs,
            bucket_docs: data.bucket_docs,
            collection_tf: data.collection_tf,
            collection_len: data.collection_len,
            span: data.span,
            salience: OnceLock::new(),
        }
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn doc(&self, doc: DocNo) -> &Document {
        &self.docs[doc as usize]
    }

    pub fn doc_no(&self, doc_id: &str) -> Option<DocNo> {
        self.by_id.get(doc_id).copied()
    }

    pub fn doc_id(&self, doc: DocNo) -> &str {
        &self.docs[doc as usize].doc_id
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn tf(&self, term: &str, doc: DocNo) -> u32 {
        let p = self.postings(term);
        p.binary_search_by_key(&doc, |p| p.doc)
            .map(|i| p[i].tf)
            .unwrap_or(0)
    }

    pub fn doc_len(&self, doc: DocNo) -> u32 {
        self.doc_len[doc as usize]
    }

    pub fn bucket(&self, doc: DocNo) -> Month {
        self.doc_bucket[doc as usize]
    }

    pub fn article_type(&self, doc: DocNo) -> &str {
        &self.docs[doc as usize].article_type
    }

    /// Distinct entity ids of a document, sorted.
    pub fn entities(&self, doc: DocNo) -> &[String] {
        &self.doc_entities[doc as usize]
    }

    pub fn has_entity(&self, doc: DocNo, entity_id: &str) -> bool {
        self.doc_entities[doc as usize]
            .binary_search_by(|e| e.as_str().cmp(entity_id))
            .is_ok()
    }

    pub fn entity_docs(&self, entity_id: &str) -> &[DocNo] {
        self.entity_docs
            .get(entity_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn bucket_docs(&self, month: Month) -> &[DocNo] {
        self.bucket_docs.get(&month).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn collection_tf(&self, term: &str) -> u64 {
        self.collection_tf.get(term).copied().unwrap_or(0)
    }

    pub fn collection_len(&self) -> u64 {
        self.collection_len
    }

    /// First to last publication month.
    pub fn span(&self) -> MonthSpan {
        self.span
    }

    /// Salient entities of every document under the default weights, computed
    /// once on first use.
    pub fn default_salience(&self, doc: DocNo) -> &[SalientEntity] {
        let all = self.salience.get_or_init(|| {
            let w = SalienceWeights::default();
            self.docs.iter().map(|d| article_salience(d, &w)).collect()
        });
        &all[doc as usize]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let data = IndexDataRef {
            docs: self.docs.iter().map(Document::to_record).collect(),
            postings: &self.postings,
            doc_len: &self.doc_len,
            doc_bucket: &self.doc_bucket,
            entity_docs: &self.entity_docs,
            bucket_docs: &self.bucket_docs,
            collection_tf: &self.collection_tf,
            collection_len: self.collection_len,
            span: self.span,
        };
        let payload = serde_json::to_vec(&data).expect("index payload serializes");
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&Sha256::digest(&payload));
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Index, IndexError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(IndexError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(IndexError::Truncated {
                expected: HEADER_LEN as u64,
                found: bytes.len() as u64,
            });
        }
        let version = bytes[6];
        if version != FORMAT_VERSION {
            return Err(IndexError::Version {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let expected = u64::from_le_bytes(bytes[7..15].try_into().expect("8 bytes"));
        let payload = &bytes[HEADER_LEN..];
        if payload.len() as u64 != expected {
            return Err(IndexError::Truncated {
                expected,
                found: payload.len() as u64,
            });
        }
        if Sha256::digest(payload).as_slice() != &bytes[15..47] {
            return Err(IndexError::Checksum);
        }
        let raw: IndexDataOwned =
            serde_json::from_slice(payload).map_err(|e| IndexError::Corrupt(e.to_string()))?;
        let docs = raw
            .docs
            .into_iter()
            .map(Document::from_record)
            .collect::<Result<Vec<_>, _>>()
            .map_err(IndexError::Corrupt)?;
        let data = IndexData {
            docs,
            postings: raw.postings,
            doc_len: raw.doc_len,
            doc_bucket: raw.doc_bucket,
            entity_docs: raw.entity_docs,
            bucket_docs: raw.bucket_docs,
            collection_tf: raw.collection_tf,
            collection_len: raw.collection_len,
            span: raw.span,
        };
        data.check().map_err(IndexError::Corrupt)?;
        Ok(Index::assemble(data))
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        fs::write(path, self.to_bytes()).map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Index, IndexError> {
        let bytes = fs::read(path).map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Index::from_bytes(&bytes)
    }

    /// Saves into `dir/index.bin`, creating `dir` if needed.
    pub fn save_dir(&self, dir: &Path) -> Result<(), IndexError> {
        fs::create_dir_all(dir).map_err(|source| IndexError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        self.save(&dir.join(INDEX_FILE))
    }

    /// Loads `dir/index.bin`; a path to the file itself is also accepted.
    pub fn load_dir(dir: &Path) -> Result<Index, IndexError> {
        if dir.is_file() {
            Index::load(dir)
        } else {
            Index::load(&dir.join(INDEX_FILE))
        }
    }
}

fn span_of(buckets: &[Month]) -> MonthSpan {
    let start = *buckets.iter().min().expect("non-empty");
    let end = *buckets.iter().max().expect("non-empty");
    MonthSpan { start, end }
}

struct IndexData {
    docs: Vec<Document>,
    postings: BTreeMap<String, Vec<Posting>>,
    doc_len: Vec<u32>,
    doc_bucket: Vec<Month>,
    entity_docs: BTreeMap<String, Vec<DocNo>>,
    bucket_docs: BTreeMap<Month, Vec<DocNo>>,
    collection_tf: BTreeMap<String, u64>,
    collection_len: u64,
    span: MonthSpan,
}

impl IndexData {
    /// Cheap structural checks so a tampered payload is never served.
    fn check(&self) -> Result<(), String> {
        let n = self.docs.len();
        if n == 0 {
            return Err("no documents".into());
        }
        if self.doc_len.len() != n || self.doc_bucket.len() != n {
            return Err("per-document tables disagree with document count".into());
        }
        if self.docs.windows(2).any(|w| w[0].doc_id >= w[1].doc_id) {
            return Err("documents not strictly ordered by id".into());
        }
        let mut len_from_postings = vec![0u64; n];
        let mut total = 0u64;
        for (term, list) in &self.postings {
            let mut sum = 0u64;
            for p in list {
                if p.doc as usize >= n || p.tf == 0 {
                    return Err(format!("bad posting for `{term}`"));
                }
                sum += p.tf as u64;
                len_from_postings[p.doc as usize] += p.tf as u64;
            }
            if list.windows(2).any(|w| w[0].doc >= w[1].doc) {
                return Err(format!("postings for `{term}` not sorted"));
            }
            if self.collection_tf.get(term) != Some(&sum) {
                return Err(format!("collection frequency of `{term}` disagrees with postings"));
            }
            total += sum;
        }
        if self.collection_tf.len() != self.postings.len() || total != self.collection_len {
            return Err("collection length disagrees with postings".into());
        }
        if len_from_postings
            .iter()
            .zip(&self.doc_len)
            .any(|(a, &b)| *a != b as u64)
        {
            return Err("document lengths disagree with postings".into());
        }
        let bucketed: usize = self.bucket_docs.values().map(Vec::len).sum();
        if bucketed != n
            || self
                .bucket_docs
                .iter()
                .any(|(m, ds)| ds.iter().any(|&d| d as usize >= n || self.doc_bucket[d as usize] != *m))
        {
            return Err("bucket map disagrees with document buckets".into());
        }
        if self.doc_bucket.iter().any(|m| !self.span.contains(*m)) {
            return Err("document bucket outside span".into());
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct IndexDataRef<'a> {
    bucket_docs: &'a BTreeMap<Month, Vec<DocNo>>,
    collection_len: u64,
    collection_tf: &'a BTreeMap<String, u64>,
    doc_bucket: &'a [Month],
    doc_len: &'a [u32],
    docs: Vec<DocumentRecord>,
    entity_docs: &'a BTreeMap<String, Vec<DocNo>>,
    postings: &'a BTreeMap<String, Vec<Posting>>,
    span: MonthSpan,
}

#[derive(Deserialize)]
struct IndexDataOwned {
    bucket_docs: BTreeMap<Month, Vec<DocNo>>,
    collection_len: u64,
    collection_tf: BTreeMap<String, u64>,
    doc_bucket: Vec<Month>,
    doc_len: Vec<u32>,
    docs: Vec<DocumentRecord>,
    entity_docs: BTreeMap<String, Vec<DocNo>>,
    postings: BTreeMap<String, Vec<Posting>>,
    span: MonthSpan,
}
