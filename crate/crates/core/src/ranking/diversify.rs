//! Greedy rerankers over a [`CandidatePool`].
//!
//! All three select one document at a time and report the marginal value the
//! document had when it was picked, so the reported scores never increase.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use super::{cmp_scored, CandidatePool};
use crate::month::Month;

/// A pool position picked by a reranker, with its score at selection time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub score: f64,
}

/// A unit of intent coverage: an entity, or an (entity, month) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Aspect {
    pub label: String,
    pub entity_id: String,
    pub bucket: Option<Month>,
    pub prior: f64,
}

/// Temporal diversification.
///
/// Repeatedly picks `argmax rel01(d) · exp(-gamma · c(bucket(d)))` where `c`
/// counts already selected documents per month. Within a month the decay is
/// shared, so only the best remaining document of each month competes; a step
/// costs O(months) rather than O(pool).
pub fn diversify_temporal(pool: &CandidatePool, k: usize, gamma: f64) -> Vec<Selection> {
    let cands = &pool.candidates;
    // Candidates are already in (lm desc, doc_id asc) order, which within a
    // month is also (rel01 desc, lm desc, doc_id asc).
    let mut queues: BTreeMap<crate::month::Month, Vec<usize>> = BTreeMap::new();
    for (i, c) in cands.iter().enumerate() {
        queues.entry(c.bucket).or_default().push(i);
    }
    let mut queues: Vec<(Vec<usize>, usize, u32)> = queues.into_values().map(|q| (q, 0, 0)).collect();

    let mut out = Vec::with_capacity(k.min(cands.len()));
    while out.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for (qi, (queue, head, _)) in queues.iter().enumerate() {
            let Some(&i) = queue.get(*head) else { continue };
            let value = cands[i].rel01 * (-gamma * queues[qi].2 as f64).exp();
            let better = match best {
                None => true,
                Some((bq, bv)) => {
                    let bi = queues[bq].0[queues[bq].1];
                    cmp_scored(value, &cands[i], bv, &cands[bi]) == Ordering::Less
                }
            };
            if better {
                best = Some((qi, value));
            }
        }
        let Some((qi, value)) = best else { break };
        let q = &mut queues[qi];
        out.push(Selection {
            index: q.0[q.1],
            score: value,
        });
        q.1 += 1;
        q.2 += 1;
    }
    out
}

struct HeapEntry<'a> {
    gain: f64,
    lm: f64,
    doc_id: &'a str,
    index: usize,
}

impl Ord for HeapEntry<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| self.lm.total_cmp(&other.lm))
            .then_with(|| other.doc_id.cmp(self.doc_id))
    }
}

impl PartialOrd for HeapEntry<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for HeapEntry<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry<'_> {}

/// IA-Select with an additive relevance term.
///
/// `coverage[i]` lists, in ascending order, the aspects candidate `i` covers.
/// The gain is `Σ_a U(a)·V(d|a) + eta·rel01(d)` with `V(d|a) = rel01(d)` on
/// covered aspects, summed in aspect order. After each pick,
/// `U(a) ← U(a)·(1 − V(d*|a))`.
///
/// Gains only shrink as `U` decays, so stale heap entries are upper bounds and
/// the lazy evaluation below returns exactly the plain greedy argmax.
pub fn ia_select(
    pool: &CandidatePool,
    aspects: &[Aspect],
    coverage: &[Vec<usize>],
    k: usize,
    eta: f64,
) -> Vec<Selection> {
    let cands = &pool.candidates;
    let mut utility: Vec<f64> = aspects.iter().map(|a| a.prior).collect();
    let gain = |i: usize, utility: &[f64]| -> f64 {
        let rel = cands[i].rel01;
        let covered: f64 = coverage[i].iter().map(|&a| utility[a] * rel).sum();
        covered + eta * rel
    };

    let mut heap: BinaryHeap<HeapEntry<'_>> = (0..cands.len())
        .map(|i| HeapEntry {
            gain: gain(i, &utility),
            lm: cands[i].lm,
            doc_id: &cands[i].doc_id,
            index: i,
        })
        .collect();

    let mut out = Vec::with_capacity(k.min(cands.len()));
    while out.len() < k {
        let Some(mut top) = heap.pop() else { break };
        top.gain = gain(top.index, &utility);
        if heap.peek().is_some_and(|next| *next > top) {
            heap.push(top);
            continue;
        }
        let rel = cands[top.index].rel01;
        for &a in &coverage[top.index] {
            utility[a] *= 1.0 - rel;
        }
        out.push(Selection {
            index: top.index,
            score: top.gain,
        });
    }
    out
}

/// Topical diversification with entities as aspects.
pub fn diversify_topical(pool: &CandidatePool, aspects: &[Aspect], k: usize, eta: f64) -> Vec<Selection> {
    let slot: HashMap<&str, usize> = aspects
        .iter()
        .enumerate()
        .map(|(i, a)| (a.entity_id.as_str(), i))
        .collect();
    let coverage: Vec<Vec<usize>> = pool
        .candidates
        .iter()
        .map(|c| {
            let mut cov: Vec<usize> = c.entities.iter().filter_map(|e| slot.get(e.as_str()).copied()).collect();
            cov.sort_unstable();
            cov
        })
        .collect();
    ia_select(pool, aspects, &coverage, k, eta)
}

/// Compound (entity, month) aspects for historical diversification.
///
/// Takes the `top_entities` entities by prior (ties by id) and the
/// `top_buckets` months of positive mass by mass (ties earliest first), and
/// gives each pair prior `P(a)·P_time(b)`, renormalized. Pairs are ordered by
/// entity rank, then chronologically.
pub fn compound_aspects(
    aspects: &[Aspect],
    time_dist: &BTreeMap<Month, f64>,
    top_entities: usize,
    top_buckets: usize,
) -> Vec<Aspect> {
    let mut entities: Vec<&Aspect> = aspects.iter().collect();
    entities.sort_by(|a, b| b.prior.total_cmp(&a.prior).then_with(|| a.entity_id.cmp(&b.entity_id)));
    entities.truncate(top_entities);

    let mut buckets: Vec<(Month, f64)> = time_dist.iter().filter(|(_, &p)| p > 0.0).map(|(&m, &p)| (m, p)).collect();
    buckets.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    buckets.truncate(top_buckets);
    buckets.sort_by_key(|b| b.0);

    let mut out: Vec<Aspect> = Vec::with_capacity(entities.len() * buckets.len());
    for a in &entities {
        for &(month, p) in &buckets {
            out.push(Aspect {
                label: format!("{}@{}", a.entity_id, month),
                entity_id: a.entity_id.clone(),
                bucket: Some(month),
                prior: a.prior * p,
            });
        }
    }
    let total: f64 = out.iter().map(|a| a.prior).sum();
    if total > 0.0 {
        for a in &mut out {
            a.prior /= total;
        }
    }
    out.retain(|a| a.prior > 0.0);
    out
}

/// Historical diversification: IA-Select over compound (entity, month)
/// aspects, where a document covers `(a, b)` iff it mentions `a` and was
/// published in `b`.
pub fn diversify_historical(
    pool: &CandidatePool,
    aspects: &[Aspect],
    time_dist: &BTreeMap<Month, f64>,
    k: usize,
    eta: f64,
    top_entities: usize,
    top_buckets: usize,
) -> Vec<Selection> {
    let compound = compound_aspects(aspects, time_dist, top_entities, top_buckets);
    let slot: HashMap<(&str, Month), usize> = compound
        .iter()
        .enumerate()
        .map(|(i, a)| ((a.entity_id.as_str(), a.bucket.expect("compound aspect")), i))
        .collect();
    let coverage: Vec<Vec<usize>> = pool
        .candidates
        .iter()
        .map(|c| {
            let mut cov: Vec<usize> = c
                .entities
                .iter()
                .filter_map(|e| slot.get(&(e.as_str(), c.bucket)).copied())
                .collect();
            cov.sort_unstable();
            cov
        })
        .collect();
    ia_select(pool, &compound, &coverage, k, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::tests::month;
    use crate::ranking::Candidate;

    /// A pool with explicit rel01 values; lm mirrors rel01 so tie-breaks agree.
    fn pool(spec: &[(&str, f64, &str, &[&str])]) -> CandidatePool {
        let mut candidates: Vec<Candidate> = spec
            .iter()
            .enumerate()
            .map(|(i, &(id, rel, m, ents))| Candidate {
                doc: i as u32,
                doc_id: id.to_string(),
                lm: rel,
                rel01: rel,
                bucket: month(m),
                entities: ents.iter().map(|e| e.to_string()).collect(),
            })
            .collect();
        candidates.sort_by(|a, b| b.lm.total_cmp(&a.lm).then_with(|| a.doc_id.cmp(&b.doc_id)));
        CandidatePool {
            terms: vec![],
            candidates,
        }
    }

    fn ids(pool: &CandidatePool, sel: &[Selection]) -> Vec<String> {
        sel.iter().map(|s| pool.candidates[s.index].doc_id.clone()).collect()
    }

    fn aspects(spec: &[(&str, f64)]) -> Vec<Aspect> {
        spec.iter()
            .map(|&(e, p)| Aspect {
                label: e.into(),
                entity_id: e.into(),
                bucket: None,
                prior: p,
            })
            .collect()
    }

    #[test]
    fn temporal_decay_example() {
        let p = pool(&[
            ("a", 1.0, "2000-01", &[]),
            ("b", 0.9, "2000-01", &[]),
            ("c", 0.5, "2000-02", &[]),
            ("d", 0.4, "2000-03", &[]),
        ]);
        let sel = diversify_temporal(&p, 3, 1.0);
        assert_eq!(ids(&p, &sel), ["a", "c", "d"]);
        let all = diversify_temporal(&p, 10, 1.0);
        assert_eq!(ids(&p, &all), ["a", "c", "d", "b"]);
        assert!((all[3].score - 0.9 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn temporal_without_decay_is_relevance_order() {
        let p = pool(&[
            ("a", 1.0, "2000-01", &[]),
            ("b", 0.9, "2000-01", &[]),
            ("c", 0.5, "2000-02", &[]),
            ("d", 0.4, "2000-01", &[]),
        ]);
        assert_eq!(ids(&p, &diversify_temporal(&p, 4, 0.0)), ["a", "b", "c", "d"]);
        let distinct = pool(&[("x", 0.2, "1999-01", &[]), ("y", 0.7, "1999-02", &[]), ("z", 0.3, "1999-03", &[])]);
        assert_eq!(ids(&distinct, &diversify_temporal(&distinct, 3, 1.0)), ["y", "z", "x"]);
        assert!(diversify_temporal(&CandidatePool::default(), 3, 1.0).is_empty());
    }

    #[test]
    fn ia_select_example() {
        let p = pool(&[("p", 1.0, "2000-01", &["X"]), ("q", 0.9, "2000-01", &["X"]), ("r", 0.6, "2000-01", &["Y"])]);
        let asp = aspects(&[("X", 0.5), ("Y", 0.5)]);
        let sel = diversify_topical(&p, &asp, 2, 0.01);
        assert_eq!(ids(&p, &sel), ["p", "r"]);
        assert!((sel[1].score - (0.5 * 0.6 + 0.01 * 0.6)).abs() < 1e-15);
    }

    #[test]
    fn single_aspect_and_no_aspects_keep_relevance_order() {
        let p = pool(&[
            ("a", 1.0, "2000-01", &["X"]),
            ("b", 0.8, "2000-01", &["X"]),
            ("c", 0.3, "2000-01", &["X"]),
        ]);
        let one = aspects(&[("X", 1.0)]);
        assert_eq!(ids(&p, &diversify_topical(&p, &one, 3, 0.01)), ["a", "b", "c"]);
        assert_eq!(ids(&p, &diversify_topical(&p, &[], 3, 0.01)), ["a", "b", "c"]);
    }

    #[test]
    fn two_aspect_doc_wins_first_step() {
        let p = pool(&[("solo", 1.0, "2000-01", &["X"]), ("both", 1.0, "2000-01", &["X", "Y"])]);
        let asp = aspects(&[("X", 0.5), ("Y", 0.5)]);
        let sel = diversify_topical(&p, &asp, 1, 0.01);
        assert_eq!(ids(&p, &sel), ["both"]);
    }

    #[test]
    fn historical_covers_every_compound_aspect() {
        let p = pool(&[
            ("a", 0.5, "2000-01", &["X"]),
            ("b", 0.5, "2000-01", &["Y"]),
            ("c", 0.5, "2000-02", &["X"]),
            ("d", 0.5, "2000-02", &["Y"]),
        ]);
        let asp = aspects(&[("X", 0.5), ("Y", 0.5)]);
        let dist: BTreeMap<Month, f64> = [(month("2000-01"), 0.5), (month("2000-02"), 0.5)].into();
        let sel = diversify_historical(&p, &asp, &dist, 4, 0.01, 20, 20);
        let mut got = ids(&p, &sel);
        got.sort();
        assert_eq!(got, ["a", "b", "c", "d"]);
    }

    #[test]
    fn historical_on_one_month_equals_topical() {
        let p = pool(&[
            ("a", 1.0, "2000-01", &["X", "Y"]),
            ("b", 0.7, "2000-01", &["X"]),
            ("c", 0.6, "2000-01", &["Z"]),
            ("d", 0.2, "2000-01", &["Y"]),
        ]);
        let asp = aspects(&[("X", 0.5), ("Y", 0.3), ("Z", 0.2)]);
        let dist: BTreeMap<Month, f64> = [(month("2000-01"), 1.0)].into();
        let hist = diversify_historical(&p, &asp, &dist, 4, 0.01, 20, 20);
        let top = diversify_topical(&p, &asp, 4, 0.01);
        assert_eq!(ids(&p, &hist), ids(&p, &top));
    }

    #[test]
    fn historical_single_entity_spreads_over_heavy_months() {
        // One entity over three months; the two most relevant docs share a month.
        let p = pool(&[
            ("a", 1.0, "2000-01", &["X"]),
            ("b", 0.95, "2000-01", &["X"]),
            ("c", 0.6, "2000-02", &["X"]),
            ("d", 0.5, "2000-03", &["X"]),
        ]);
        let asp = aspects(&[("X", 1.0)]);
        let dist: BTreeMap<Month, f64> =
            [(month("2000-01"), 0.5), (month("2000-02"), 0.3), (month("2000-03"), 0.2)].into();
        let sel = diversify_historical(&p, &asp, &dist, 4, 0.01, 20, 20);
        assert_eq!(ids(&p, &sel), ["a", "c", "d", "b"]);
    }

    #[test]
    fn compound_priors_are_normalized_and_capped() {
        let asp = aspects(&[("X", 0.6), ("Y", 0.3), ("Z", 0.1)]);
        let dist: BTreeMap<Month, f64> =
            [(month("2000-01"), 0.7), (month("2000-02"), 0.0), (month("2000-03"), 0.3)].into();
        let c = compound_aspects(&asp, &dist, 2, 20);
        assert_eq!(c.len(), 4);
        let total: f64 = c.iter().map(|a| a.prior).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(c[0].label, "X@2000-01");
        assert!((c[0].prior - 0.6 * 0.7 / 0.9).abs() < 1e-12);
        let capped = compound_aspects(&asp, &dist, 20, 1);
        assert!(capped.iter().all(|a| a.bucket == Some(month("2000-01"))));
    }
}
