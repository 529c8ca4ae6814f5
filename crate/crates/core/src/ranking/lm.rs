//! Dirichlet-smoothed unigram query likelihood.
//!
//! `score(q, d) = Σ_{t ∈ q} ln((tf(t,d) + μ·ctf(t)/|C|) / (|d| + μ))`
//!
//! Query terms never seen in the collection are dropped; if none remain the
//! query has no matches.

use crate::error::RankError;
use crate::index::{DocNo, Index};
use crate::text::tokenize;

/// Tokenizes a raw query and keeps the terms present in the collection, in
/// query order and with multiplicity.
pub fn prepare_query(query: &str, index: &Index) -> Result<Vec<String>, RankError> {
    let terms = tokenize(query);
    if terms.is_empty() {
        return Err(RankError::EmptyQuery);
    }
    let seen: Vec<String> = terms
        .into_iter()
        .filter(|t| index.collection_tf(t) > 0)
        .collect();
    if seen.is_empty() {
        return Err(RankError::NoMatches);
    }
    Ok(seen)
}

/// Query likelihood of one document. Defined for every document, including
/// ones that contain no query term.
pub fn lm_score(index: &Index, doc: DocNo, terms: &[String], mu: f64) -> f64 {
    let clen = index.collection_len() as f64;
    let denom = (index.doc_len(doc) as f64 + mu).ln();
    terms
        .iter()
        .map(|t| {
            let background = mu * index.collection_tf(t) as f64 / clen;
            (index.tf(t, doc) as f64 + background).ln() - denom
        })
        .sum()
}

/// Scores every document that contains at least one query term and passes
/// `filter`, best first (ties by `doc_id`, which is document-number order).
pub fn score_textual<F>(index: &Index, terms: &[String], mu: f64, filter: F) -> Vec<(DocNo, f64)>
where
    F: Fn(DocNo) -> bool,
{
    let mut docs: Vec<DocNo> = terms
        .iter()
        .flat_map(|t| index.postings(t).iter().map(|p| p.doc))
        .collect();
    docs.sort_unstable();
    docs.dedup();
    let mut scored: Vec<(DocNo, f64)> = docs
        .into_iter()
        .filter(|&d| filter(d))
        .map(|d| (d, lm_score(index, d, terms, mu)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored
}
