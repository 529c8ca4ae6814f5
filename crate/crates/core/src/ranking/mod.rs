//! The five selectable retrieval models and the candidate pool they share.
//!
//! Every model starts from the textual pool: the top documents by Dirichlet
//! smoothed query likelihood, with scores min-max normalized into `rel01`.
//! Ties are broken everywhere by higher textual score, then by `doc_id`.

mod diversify;
mod lm;

pub use diversify::{
    compound_aspects, diversify_historical, diversify_temporal, diversify_topical, ia_select,
    Aspect, Selection,
};
pub use lm::{lm_score, prepare_query, score_textual};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::index::{DocNo, Index};
use crate::month::Month;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RetrievalModel {
    #[default]
    Textual,
    Temporal,
    TemporalDiv,
    TopicalDiv,
    HistDiv,
}

impl RetrievalModel {
    pub const ALL: [RetrievalModel; 5] = [
        RetrievalModel::Textual,
        RetrievalModel::Temporal,
        RetrievalModel::TemporalDiv,
        RetrievalModel::TopicalDiv,
        RetrievalModel::HistDiv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RetrievalModel::Textual => "TEXTUAL",
            RetrievalModel::Temporal => "TEMPORAL",
            RetrievalModel::TemporalDiv => "TEMPORAL_DIV",
            RetrievalModel::TopicalDiv => "TOPICAL_DIV",
            RetrievalModel::HistDiv => "HIST_DIV",
        }
    }
}

impl fmt::Display for RetrievalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RetrievalModel {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RetrievalModel::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseError::Model(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
    /// Textual language-model score, the first tie-breaker.
    pub lm_score: f64,
    pub rank: usize,
}

/// One pool member as seen by the rerankers.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub doc: DocNo,
    pub doc_id: String,
    pub lm: f64,
    pub rel01: f64,
    pub bucket: Month,
    /// Distinct entity ids, sorted.
    pub entities: Vec<String>,
}

/// Top documents by textual score, best first, with normalized relevance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidatePool {
    pub terms: Vec<String>,
    pub candidates: Vec<Candidate>,
}

impl CandidatePool {
    /// Keeps the first `pool_size` of an already ranked textual list.
    pub fn from_ranked(index: &Index, terms: Vec<String>, ranked: &[(DocNo, f64)], pool_size: usize) -> Self {
        let parts = ranked.iter().take(pool_size).map(|&(doc, lm)| {
            (
                doc,
                index.doc_id(doc).to_string(),
                lm,
                index.bucket(doc),
                index.entities(doc).to_vec(),
            )
        });
        CandidatePool::from_parts(terms, parts)
    }

    /// Builds a pool from raw parts `(doc, doc_id, lm, bucket, entities)`,
    /// sorting by textual score and computing `rel01`.
    pub fn from_parts<I>(terms: Vec<String>, parts: I) -> Self
    where
        I: IntoIterator<Item = (DocNo, String, f64, Month, Vec<String>)>,
    {
        let mut candidates: Vec<Candidate> = parts
            .into_iter()
            .map(|(doc, doc_id, lm, bucket, mut entities)| {
                entities.sort();
                entities.dedup();
                Candidate {
                    doc,
                    doc_id,
                    lm,
                    rel01: 0.0,
                    bucket,
                    entities,
                }
            })
            .collect();
        candidates.sort_by(|a, b| b.lm.total_cmp(&a.lm).then_with(|| a.doc_id.cmp(&b.doc_id)));
        let max = candidates.first().map(|c| c.lm);
        let min = candidates.last().map(|c| c.lm);
        if let (Some(max), Some(min)) = (max, min) {
            let range = max - min;
            for c in &mut candidates {
                c.rel01 = if range > 0.0 { (c.lm - min) / range } else { 1.0 };
            }
        }
        CandidatePool { terms, candidates }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn docs(&self) -> impl Iterator<Item = DocNo> + '_ {
        self.candidates.iter().map(|c| c.doc)
    }

    /// Aspect priors: document frequency of each entity over the first
    /// `top_docs` candidates, normalized to sum to one. Ordered by prior
    /// descending, then entity id.
    pub fn aspect_priors(&self, top_docs: usize) -> Vec<Aspect> {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for c in self.candidates.iter().take(top_docs) {
            for e in &c.entities {
                *df.entry(e).or_default() += 1;
            }
        }
        let total: usize = df.values().sum();
        let mut aspects: Vec<Aspect> = df
            .into_iter()
            .map(|(id, n)| Aspect {
                label: id.to_string(),
                entity_id: id.to_string(),
                bucket: None,
                prior: n as f64 / total as f64,
            })
            .collect();
        aspects.sort_by(|a, b| b.prior.total_cmp(&a.prior).then_with(|| a.entity_id.cmp(&b.entity_id)));
        aspects
    }
}

/// Orders `(score, candidate)` pairs best first under the shared tie-break.
pub(crate) fn cmp_scored(a_score: f64, a: &Candidate, b_score: f64, b: &Candidate) -> Ordering {
    b_score
        .total_cmp(&a_score)
        .then_with(|| b.lm.total_cmp(&a.lm))
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

/// Temporal relevance: `rel01(d) · (P_time(bucket(d)) + epsilon)` over the
/// whole pool, best first.
pub fn score_temporal(pool: &CandidatePool, time_dist: &BTreeMap<Month, f64>, epsilon: f64) -> Vec<Selection> {
    let mut out: Vec<Selection> = pool
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| Selection {
            index: i,
            score: c.rel01 * (time_dist.get(&c.bucket).copied().unwrap_or(0.0) + epsilon),
        })
        .collect();
    out.sort_by(|x, y| {
        cmp_scored(x.score, &pool.candidates[x.index], y.score, &pool.candidates[y.index])
    });
    out
}

/// Textual order of the pool expressed as selections scored by `lm`.
pub fn textual_selection(pool: &CandidatePool) -> Vec<Selection> {
    pool.candidates
        .iter()
        .enumerate()
        .map(|(i, c)| Selection { index: i, score: c.lm })
        .collect()
}

/// Turns selections into a ranked list with ranks `1..=n`.
pub fn to_scored(pool: &CandidatePool, selections: &[Selection]) -> Vec<ScoredDoc> {
    selections
        .iter()
        .enumerate()
        .map(|(r, s)| {
            let c = &pool.candidates[s.index];
            ScoredDoc {
                doc_id: c.doc_id.clone(),
                score: s.score,
                lm_score: c.lm,
                rank: r + 1,
            }
        })
        .collect()
}
