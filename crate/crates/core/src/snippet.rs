//! Query-biased previews sized by rank.

use std::collections::HashMap;

use crate::config::SnippetTiers;
use crate::corpus::Document;
use crate::text::tokens;

/// The `[start, end)` token window of width `min(width, len)` holding the most
/// distinct query terms, earliest on ties.
pub fn best_window(doc_terms: &[String], query_terms: &[String], width: usize) -> (usize, usize) {
    let n = doc_terms.len();
    let w = width.min(n);
    if w == 0 {
        return (0, 0);
    }
    let mut distinct_terms: Vec<&str> = query_terms.iter().map(String::as_str).collect();
    distinct_terms.sort_unstable();
    distinct_terms.dedup();
    let slot: HashMap<&str, usize> = distinct_terms.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let slots: Vec<Option<usize>> = doc_terms.iter().map(|t| slot.get(t.as_str()).copied()).collect();
    let mut counts = vec![0usize; distinct_terms.len()];
    let mut distinct = 0usize;
    for s in slots[..w].iter().flatten() {
        counts[*s] += 1;
        if counts[*s] == 1 {
            distinct += 1;
        }
    }
    let (mut best, mut best_start) = (distinct, 0);
    for start in 1..=n - w {
        if let Some(s) = slots[start - 1] {
            counts[s] -= 1;
            if counts[s] == 0 {
                distinct -= 1;
            }
        }
        if let Some(s) = slots[start + w - 1] {
            counts[s] += 1;
            if counts[s] == 1 {
                distinct += 1;
            }
        }
        if distinct > best {
            best = distinct;
            best_start = start;
        }
    }
    (best_start, best_start + w)
}

/// Preview of `doc` for a result at `rank`: the best window of title + body,
/// cut from the original text.
pub fn snippet_for(doc: &Document, query_terms: &[String], rank: usize, tiers: &SnippetTiers) -> String {
    let text = doc.text();
    let toks = tokens(&text);
    let terms: Vec<String> = toks.iter().map(|t| t.term.clone()).collect();
    let (start, end) = best_window(&terms, query_terms, tiers.budget(rank));
    if start == end {
        return String::new();
    }
    text[toks[start].span.start..toks[end - 1].span.end].to_string()
}
