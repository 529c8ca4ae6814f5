//! Per-article entity salience and the query-time entity selector list.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::SalienceWeights;
use crate::corpus::Document;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalientEntity {
    pub entity_id: String,
    pub salience_score: f64,
    /// Number of top-ranked documents the entity is salient in; only set on
    /// selector lists.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub doc_frequency: Option<usize>,
}

/// Salient entities of one article, best first.
///
/// Each distinct entity scores `title·[mentioned in title] + early·[first
/// mention within the leading fraction of the text] + frequency·freq/max_freq`
/// and is kept when the score reaches the threshold.
pub fn article_salience(doc: &Document, weights: &SalienceWeights) -> Vec<SalientEntity> {
    struct Stats {
        in_title: bool,
        first: usize,
        freq: usize,
    }
    let mut by_entity: BTreeMap<&str, Stats> = BTreeMap::new();
    for m in &doc.entity_mentions {
        let s = by_entity.entry(&m.entity_id).or_insert(Stats {
            in_title: false,
            first: usize::MAX,
            freq: 0,
        });
        s.in_title |= m.in_title;
        s.first = s.first.min(m.char_start);
        s.freq += 1;
    }
    let Some(max_freq) = by_entity.values().map(|s| s.freq).max() else {
        return Vec::new();
    };
    let early_limit = weights.early_fraction * doc.text_len() as f64;

    let mut out: Vec<SalientEntity> = by_entity
        .into_iter()
        .filter_map(|(id, s)| {
            let mut score = weights.frequency * s.freq as f64 / max_freq as f64;
            if s.in_title {
                score += weights.title;
            }
            if (s.first as f64) < early_limit {
                score += weights.early;
            }
            (score >= weights.threshold).then(|| SalientEntity {
                entity_id: id.to_string(),
                salience_score: score,
                doc_frequency: None,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.salience_score
            .total_cmp(&a.salience_score)
            .then_with(|| a.entity_id.cmp(&b.entity_id))
    });
    out
}

/// Entity selectors for a ranked list: over the first `top_docs` documents,
/// count the documents each entity is salient in and keep the `count` most
/// frequent (ties by entity id). `salience_score` is the summed per-article
/// salience.
pub fn query_entity_selectors<'a, I>(ranked_salience: I, top_docs: usize, count: usize) -> Vec<SalientEntity>
where
    I: IntoIterator<Item = &'a [SalientEntity]>,
{
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for salient in ranked_salience.into_iter().take(top_docs) {
        for e in salient {
            let t = tally.entry(&e.entity_id).or_insert((0, 0.0));
            t.0 += 1;
            t.1 += e.salience_score;
        }
    }
    let mut out: Vec<SalientEntity> = tally
        .into_iter()
        .map(|(id, (df, score))| SalientEntity {
            entity_id: id.to_string(),
            salience_score: score,
            doc_frequency: Some(df),
        })
        .collect();
    // Stable sort keeps the BTreeMap's id order on ties.
    out.sort_by_key(|e| std::cmp::Reverse(e.doc_frequency));
    out.truncate(count);
    out
}
