//! Independent reference implementations and random inputs shared by the
//! integration tests and the acceptance suite.
//!
//! Everything here is written the slow, obvious way: full rescans, no heaps,
//! no per-bucket queues, no cached statistics.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use chrono::NaiveDate;
use expedition_core::corpus::{ingest_str, IngestOptions};
use expedition_core::ranking::{Aspect, Candidate, CandidatePool};
use expedition_core::{Constraints, Corpus, Document, EntityMention, Index, Month, TemporalRef};
use rand::seq::SliceRandom;
use rand::Rng;

/// Fixture path for tests of this crate and of crates that borrow this module.
pub fn fixture_path(name: &str) -> PathBuf {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let local = manifest.join("tests/fixtures").join(name);
    if local.exists() {
        local
    } else {
        manifest.join("../core/tests/fixtures").join(name)
    }
}

pub fn tiny6_documents() -> Vec<Document> {
    let raw = include_str!("../fixtures/tiny6.jsonl");
    let (corpus, report) = ingest_str(raw, IngestOptions::default());
    assert!(report.issues.is_empty(), "fixture is clean");
    corpus.documents().to_vec()
}

pub fn tiny6_index() -> Index {
    Index::build(&Corpus::from_documents(tiny6_documents())).unwrap()
}

pub fn month(s: &str) -> Month {
    s.parse().unwrap()
}

// ---------------------------------------------------------------------------
// Language model

fn oracle_terms(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Dirichlet query likelihood computed from raw text for every document that
/// contains a query term seen in the collection; best first, ties by id.
pub fn lm_brute(docs: &[Document], query: &str, mu: f64) -> Vec<(String, f64)> {
    let bags: Vec<Vec<String>> = docs
        .iter()
        .map(|d| oracle_terms(&format!("{}\n{}", d.title, d.body)))
        .collect();
    let collection_len: usize = bags.iter().map(Vec::len).sum();
    let ctf = |t: &str| bags.iter().flatten().filter(|w| w.as_str() == t).count();
    let terms: Vec<String> = oracle_terms(query).into_iter().filter(|t| ctf(t) > 0).collect();
    let mut out = Vec::new();
    for (d, bag) in docs.iter().zip(&bags) {
        if !terms.iter().any(|t| bag.contains(t)) {
            continue;
        }
        let mut score = 0.0;
        for t in &terms {
            let tf = bag.iter().filter(|w| *w == t).count() as f64;
            let p = (tf + mu * ctf(t) as f64 / collection_len as f64) / (bag.len() as f64 + mu);
            score += p.ln();
        }
        out.push((d.doc_id.clone(), score));
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    out
}

// ---------------------------------------------------------------------------
// Greedy rerankers

/// `true` when (score_a, a) should be picked before (score_b, b).
fn beats(score_a: f64, a: &Candidate, score_b: f64, b: &Candidate) -> bool {
    match score_a.partial_cmp(&score_b).unwrap() {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match a.lm.partial_cmp(&b.lm).unwrap() {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => a.doc_id < b.doc_id,
        },
    }
}

fn argmax(pool: &CandidatePool, remaining: &[usize], score: impl Fn(usize) -> f64) -> usize {
    let mut best = remaining[0];
    for &i in &remaining[1..] {
        if beats(score(i), &pool.candidates[i], score(best), &pool.candidates[best]) {
            best = i;
        }
    }
    best
}

pub fn naive_temporal(pool: &CandidatePool, k: usize, gamma: f64) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    let mut chosen = Vec::new();
    let mut count: HashMap<Month, u32> = HashMap::new();
    while chosen.len() < k && !remaining.is_empty() {
        let score = |i: usize| {
            let c = &pool.candidates[i];
            c.rel01 * (-gamma * *count.get(&c.bucket).unwrap_or(&0) as f64).exp()
        };
        let best = argmax(pool, &remaining, score);
        *count.entry(pool.candidates[best].bucket).or_default() += 1;
        remaining.retain(|&i| i != best);
        chosen.push(best);
    }
    chosen
}

/// Plain IA-Select: recompute every remaining gain at every step.
pub fn naive_ia_select(
    pool: &CandidatePool,
    priors: &[f64],
    covers: impl Fn(usize, usize) -> bool,
    k: usize,
    eta: f64,
) -> Vec<usize> {
    let mut u = priors.to_vec();
    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    let mut chosen = Vec::new();
    while chosen.len() < k && !remaining.is_empty() {
        let gain = |i: usize| {
            let rel = pool.candidates[i].rel01;
            let mut g = 0.0;
            for (a, ua) in u.iter().enumerate() {
                if covers(i, a) {
                    g += ua * rel;
                }
            }
            g + eta * rel
        };
        let best = argmax(pool, &remaining, gain);
        let rel = pool.candidates[best].rel01;
        for (a, ua) in u.iter_mut().enumerate() {
            if covers(best, a) {
                *ua *= 1.0 - rel;
            }
        }
        remaining.retain(|&i| i != best);
        chosen.push(best);
    }
    chosen
}

pub fn naive_topical(pool: &CandidatePool, aspects: &[Aspect], k: usize, eta: f64) -> Vec<usize> {
    let priors: Vec<f64> = aspects.iter().map(|a| a.prior).collect();
    naive_ia_select(
        pool,
        &priors,
        |i, a| pool.candidates[i].entities.contains(&aspects[a].entity_id),
        k,
        eta,
    )
}

pub fn naive_historical(
    pool: &CandidatePool,
    aspects: &[Aspect],
    time: &BTreeMap<Month, f64>,
    k: usize,
    eta: f64,
    top_entities: usize,
    top_buckets: usize,
) -> Vec<usize> {
    let mut ents: Vec<&Aspect> = aspects.iter().collect();
    ents.sort_by(|a, b| b.prior.partial_cmp(&a.prior).unwrap().then_with(|| a.entity_id.cmp(&b.entity_id)));
    ents.truncate(top_entities);
    let mut months: Vec<(Month, f64)> = time.iter().filter(|(_, p)| **p > 0.0).map(|(m, p)| (*m, *p)).collect();
    months.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    months.truncate(top_buckets);
    months.sort_by_key(|m| m.0);

    let mut pairs: Vec<(String, Month, f64)> = Vec::new();
    for a in &ents {
        for (m, p) in &months {
            pairs.push((a.entity_id.clone(), *m, a.prior * p));
        }
    }
    let total: f64 = pairs.iter().map(|p| p.2).sum();
    if total > 0.0 {
        for p in &mut pairs {
            p.2 /= total;
        }
    }
    pairs.retain(|p| p.2 > 0.0);
    let priors: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    naive_ia_select(
        pool,
        &priors,
        |i, a| {
            let c = &pool.candidates[i];
            c.bucket == pairs[a].1 && c.entities.contains(&pairs[a].0)
        },
        k,
        eta,
    )
}

/// A random pool of up to 30 documents over up to 6 months and 6 entities,
/// with deliberately coarse textual scores so ties occur.
pub fn random_pool<R: Rng>(rng: &mut R) -> CandidatePool {
    let n = rng.gen_range(0..=30);
    let n_buckets = rng.gen_range(1..=6);
    let n_entities = rng.gen_range(1..=6);
    let base = month("1990-01");
    let parts = (0..n).map(|i| {
        let lm = -(rng.gen_range(0..12) as f64) * 0.25 - 3.0;
        let bucket = base.offset(rng.gen_range(0..n_buckets) * 3);
        let entities: Vec<String> = (0..n_entities)
            .filter(|_| rng.gen_bool(0.35))
            .map(|e| format!("E:{e}"))
            .collect();
        (i as u32, format!("doc{:02}", rng.gen_range(0..1000) * 100 + i), lm, bucket, entities)
    });
    let parts: Vec<_> = parts.collect();
    CandidatePool::from_parts(vec![], parts)
}

/// Up to 6 random aspects over the entity ids used by [`random_pool`], with
/// priors summing to one.
pub fn random_aspects<R: Rng>(rng: &mut R) -> Vec<Aspect> {
    let mut ids: Vec<usize> = (0..8).collect();
    ids.shuffle(rng);
    ids.truncate(rng.gen_range(0..=6));
    let weights: Vec<f64> = ids.iter().map(|_| rng.gen_range(1..5) as f64).collect();
    let total: f64 = weights.iter().sum();
    ids.iter()
        .zip(&weights)
        .map(|(e, w)| Aspect {
            label: format!("E:{e}"),
            entity_id: format!("E:{e}"),
            bucket: None,
            prior: w / total,
        })
        .collect()
}

/// A random distribution over the months [`random_pool`] may use.
pub fn random_time_dist<R: Rng>(rng: &mut R) -> BTreeMap<Month, f64> {
    let base = month("1990-01");
    let raw: Vec<(Month, f64)> = (0..6)
        .map(|b| (base.offset(b * 3), if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(1..6) as f64 }))
        .collect();
    let total: f64 = raw.iter().map(|r| r.1).sum();
    raw.into_iter()
        .map(|(m, p)| (m, if total > 0.0 { p / total } else { 0.0 }))
        .collect()
}

// ---------------------------------------------------------------------------
// Random corpora

const WORDS: [&str; 16] = [
    "police", "city", "mayor", "budget", "tower", "attack", "river", "harbor", "court", "strike", "union", "school",
    "bridge", "storm", "market", "transit",
];
const TYPES: [&str; 3] = ["news", "opinion", "sports"];

/// A small random annotated corpus: words from a 16-word vocabulary,
/// entity mentions on random words, a few temporal references, and dates in
/// 1990..1993.
pub fn random_documents<R: Rng>(rng: &mut R, n_docs: usize) -> Vec<Document> {
    let lo = month("1990-01");
    (0..n_docs)
        .map(|i| {
            let title_len = rng.gen_range(1..5);
            let body_len = rng.gen_range(0..40);
            let title: Vec<&str> = (0..title_len).map(|_| *WORDS.choose(rng).unwrap()).collect();
            let body: Vec<&str> = (0..body_len).map(|_| *WORDS.choose(rng).unwrap()).collect();
            let title = title.join(" ");
            let body = body.join(" ");
            let text = format!("{title}\n{body}");

            // Word boundaries as character offsets; the text is ASCII.
            let mut words = Vec::new();
            let mut start = None;
            for (j, c) in text.char_indices() {
                match (c.is_alphanumeric(), start) {
                    (true, None) => start = Some(j),
                    (false, Some(s)) => {
                        words.push((s, j));
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                words.push((s, text.len()));
            }
            let mut entity_mentions: Vec<EntityMention> = Vec::new();
            for &(s, e) in &words {
                if rng.gen_bool(0.2) {
                    entity_mentions.push(EntityMention {
                        entity_id: format!("E:{}", rng.gen_range(0..6)),
                        surface: text[s..e].to_string(),
                        char_start: s,
                        char_end: e,
                        in_title: e <= title.len(),
                    });
                }
            }
            entity_mentions.sort_by_key(|m| (m.char_start, m.entity_id.clone()));
            let temporal_refs: Vec<TemporalRef> = (0..rng.gen_range(0..3))
                .map(|_| {
                    let start = lo.offset(rng.gen_range(-12..60));
                    let end = start.offset(rng.gen_range(0..14));
                    TemporalRef {
                        start_month: start,
                        end_month: end,
                        char_start: 0,
                        char_end: 1,
                    }
                })
                .collect();
            let m = lo.offset(rng.gen_range(0..48));
            Document {
                doc_id: format!("r{i:03}"),
                title,
                body,
                published: NaiveDate::from_ymd_opt(m.year(), m.month(), rng.gen_range(1..=28)).unwrap(),
                article_type: TYPES.choose(rng).unwrap().to_string(),
                entity_mentions,
                temporal_refs,
            }
        })
        .collect()
}

pub fn random_query<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(1..=3);
    let mut q: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    if rng.gen_bool(0.2) {
        q.push("zebra");
    }
    q.join(" ")
}

pub fn random_constraints<R: Rng>(rng: &mut R, docs: &[Document]) -> Constraints {
    let mut c = Constraints::default();
    if rng.gen_bool(0.5) {
        let start = month("1990-01").offset(rng.gen_range(0..48));
        c.time = Some(expedition_core::MonthSpan::new(start, start.offset(rng.gen_range(0..24))).unwrap());
    }
    if rng.gen_bool(0.5) && !docs.is_empty() {
        let d = docs.choose(rng).unwrap();
        if let Some(m) = d.entity_mentions.choose(rng) {
            c.entities.insert(m.entity_id.clone());
        }
    }
    if rng.gen_bool(0.3) {
        c.article_types.insert(TYPES.choose(rng).unwrap().to_string());
    }
    c
}

// ---------------------------------------------------------------------------
// Constraints, salience, bursts

/// Constraint check straight from the raw document.
pub fn satisfies(doc: &Document, c: &Constraints) -> bool {
    let m = Month::new(
        chrono::Datelike::year(&doc.published),
        chrono::Datelike::month(&doc.published),
    )
    .unwrap();
    let in_time = c.time.is_none_or(|t| t.start <= m && m <= t.end);
    let ents: HashSet<&str> = doc.entity_mentions.iter().map(|e| e.entity_id.as_str()).collect();
    let has_all = c.entities.iter().all(|e| ents.contains(e.as_str()));
    let typed = c.article_types.is_empty() || c.article_types.contains(&doc.article_type);
    in_time && has_all && typed
}

/// Salient entity ids of one article under the default weights.
pub fn salient_ids(doc: &Document) -> BTreeSet<String> {
    let text_len = doc.title.chars().count() + 1 + doc.body.chars().count();
    let ids: BTreeSet<&str> = doc.entity_mentions.iter().map(|m| m.entity_id.as_str()).collect();
    let freq = |id: &str| doc.entity_mentions.iter().filter(|m| m.entity_id == id).count();
    let max_freq = ids.iter().map(|id| freq(id)).max().unwrap_or(0);
    ids.into_iter()
        .filter(|id| {
            let ms: Vec<&EntityMention> = doc.entity_mentions.iter().filter(|m| m.entity_id == *id).collect();
            let title = if ms.iter().any(|m| m.in_title) { 2.0 } else { 0.0 };
            let first = ms.iter().map(|m| m.char_start).min().unwrap();
            let early = if (first as f64) < 0.2 * text_len as f64 { 1.0 } else { 0.0 };
            title + early + freq(id) as f64 / max_freq as f64 >= 1.0
        })
        .map(String::from)
        .collect()
}

/// Selector pipeline over a ranked list of documents: top 100, document
/// frequency of salient entities, top 10 by frequency then id.
pub fn selectors_brute(ranked: &[&Document]) -> Vec<(String, usize)> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for d in ranked.iter().take(100) {
        for e in salient_ids(d) {
            *df.entry(e).or_default() += 1;
        }
    }
    let mut v: Vec<(String, usize)> = df.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(10);
    v
}

/// Bursting runs `(start, end, peak)` as positions, from the definition.
pub fn bursts_brute(ps: &[f64], k: f64) -> Vec<(usize, usize, usize)> {
    let n = ps.len() as f64;
    let mean = ps.iter().sum::<f64>() / n;
    let sd = (ps.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n).sqrt();
    if ps.len() < 2 || sd == 0.0 {
        return vec![];
    }
    let hot: Vec<bool> = ps.iter().map(|&p| p > mean + k * sd).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < ps.len() {
        if !hot[i] {
            i += 1;
            continue;
        }
        let s = i;
        while i < ps.len() && hot[i] {
            i += 1;
        }
        let mut peak = s;
        for j in s..i {
            if ps[j] > ps[peak] {
                peak = j;
            }
        }
        out.push((s, i - 1, peak));
    }
    out
}

/// Best snippet window by trying every start position.
pub fn window_brute(doc_terms: &[String], query: &[String], w: usize) -> (usize, usize) {
    let w = w.min(doc_terms.len());
    let q: HashSet<&String> = query.iter().collect();
    let mut best = (0, 0usize);
    for s in 0..=doc_terms.len() - w {
        let distinct: HashSet<&String> = doc_terms[s..s + w].iter().filter(|t| q.contains(t)).collect();
        if s == 0 || distinct.len() > best.1 {
            best = (s, distinct.len());
        }
    }
    (best.0, best.0 + w)
}
