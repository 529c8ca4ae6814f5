//! Selector constraints and constrained re-querying.
//!
//! A refined list starts with the previous results that still satisfy the
//! constraints, in their original order, followed by the constrained ranking
//! minus those documents.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::index::{DocNo, Index};
use crate::month::MonthSpan;
use crate::ranking::ScoredDoc;

/// Entities are conjunctive, article types disjunctive. The empty value is
/// unconstrained.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constraints {
    pub time: Option<MonthSpan>,
    pub entities: BTreeSet<String>,
    pub article_types: BTreeSet<String>,
}

impl Constraints {
    pub fn is_empty(&self) -> bool {
        self.time.is_none() && self.entities.is_empty() && self.article_types.is_empty()
    }

    pub fn matches(&self, doc: DocNo, index: &Index) -> bool {
        if let Some(span) = &self.time {
            if !span.contains(index.bucket(doc)) {
                return false;
            }
        }
        if !self.entities.iter().all(|e| index.has_entity(doc, e)) {
            return false;
        }
        self.article_types.is_empty() || self.article_types.contains(index.article_type(doc))
    }
}

pub fn matches(doc: DocNo, constraints: &Constraints, index: &Index) -> bool {
    constraints.matches(doc, index)
}

/// Merges surviving previous results with a constrained ranking.
///
/// `previous` holds document numbers in their old order; duplicates keep the
/// first occurrence. A surviving document keeps its score from `ranked` when
/// it appears there and otherwise carries its textual score.
pub fn merge_refined(
    previous: &[DocNo],
    ranked: Vec<ScoredDoc>,
    constraints: &Constraints,
    index: &Index,
    lm_of: impl Fn(DocNo) -> f64,
) -> Vec<ScoredDoc> {
    let by_id: HashMap<&str, &ScoredDoc> = ranked.iter().map(|s| (s.doc_id.as_str(), s)).collect();
    let mut seen: HashSet<DocNo> = HashSet::new();
    let mut out: Vec<ScoredDoc> = Vec::new();
    for &d in previous {
        if !seen.insert(d) || !constraints.matches(d, index) {
            continue;
        }
        let id = index.doc_id(d);
        out.push(match by_id.get(id) {
            Some(s) => (*s).clone(),
            None => {
                let lm = lm_of(d);
                ScoredDoc {
                    doc_id: id.to_string(),
                    score: lm,
                    lm_score: lm,
                    rank: 0,
                }
            }
        });
    }
    let pinned: HashSet<String> = out.iter().map(|s| s.doc_id.clone()).collect();
    drop(by_id);
    out.extend(ranked.into_iter().filter(|s| !pinned.contains(&s.doc_id)));
    for (i, s) in out.iter_mut().enumerate() {
        s.rank = i + 1;
    }
    out
}
