//! Query-specific monthly timelines, burst detection and burst labels.
//!
//! The publication distribution of the pseudo-relevant pool is mixed with the
//! distribution of the temporal references found in those documents:
//! `p_combined = alpha·p_pub + (1 − alpha)·p_ref`. A reference spreads unit mass
//! evenly over the months it covers; mass falling outside the corpus span is
//! dropped before normalization. With no usable references,
//! `p_combined = p_pub`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::index::{DocNo, Index};
use crate::month::{Month, MonthSpan};
use crate::ranking::ScoredDoc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketMass {
    pub month: Month,
    pub p_pub: f64,
    pub p_ref: f64,
    pub p_combined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub start_month: Month,
    pub end_month: Month,
    pub peak_month: Month,
    pub label_headlines: Vec<String>,
    /// No pool document was published inside the burst; the mass came from
    /// temporal references alone.
    pub reference_driven: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub doc_id: String,
    pub rank: usize,
    pub month: Month,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineProfile {
    pub span: MonthSpan,
    pub buckets: Vec<BucketMass>,
    pub bursts: Vec<Burst>,
    pub top_placements: Vec<Placement>,
    /// The pool was empty; every mass is zero.
    pub no_data: bool,
}

impl TimelineProfile {
    /// `p_combined` keyed by month.
    pub fn distribution(&self) -> BTreeMap<Month, f64> {
        self.buckets.iter().map(|b| (b.month, b.p_combined)).collect()
    }
}

/// Monthly distributions over `span` for the given pool documents.
pub fn temporal_profile<I>(pool: I, index: &Index, span: MonthSpan, alpha: f64) -> TimelineProfile
where
    I: IntoIterator<Item = DocNo>,
{
    let n = span.len();
    let mut pub_counts = vec![0usize; n];
    let mut ref_mass = vec![0.0f64; n];
    let mut pool_len = 0usize;
    for d in pool {
        pool_len += 1;
        if let Some(pos) = span.position(index.bucket(d)) {
            pub_counts[pos] += 1;
        }
        for r in &index.doc(d).temporal_refs {
            let r_span = r.span();
            let share = 1.0 / r_span.len() as f64;
            if let Some(overlap) = r_span.intersect(&span) {
                for m in overlap.months() {
                    ref_mass[span.position(m).expect("inside span")] += share;
                }
            }
        }
    }

    let pub_total: usize = pub_counts.iter().sum();
    let ref_total: f64 = ref_mass.iter().sum();
    let buckets = span
        .months()
        .enumerate()
        .map(|(i, month)| {
            let p_pub = if pub_total > 0 {
                pub_counts[i] as f64 / pub_total as f64
            } else {
                0.0
            };
            let p_ref = if ref_total > 0.0 { ref_mass[i] / ref_total } else { 0.0 };
            let p_combined = if ref_total > 0.0 {
                alpha * p_pub + (1.0 - alpha) * p_ref
            } else {
                p_pub
            };
            BucketMass {
                month,
                p_pub,
                p_ref,
                p_combined,
            }
        })
        .collect();

    TimelineProfile {
        span,
        buckets,
        bursts: Vec::new(),
        top_placements: Vec::new(),
        no_data: pool_len == 0,
    }
}

/// Bursts are maximal runs of consecutive months with
/// `p_combined > mean + burst_k·stddev` (population statistics over the whole
/// span). The peak is the heaviest month of the run, earliest on ties. A flat
/// profile has no bursts.
pub fn detect_bursts(buckets: &[BucketMass], burst_k: f64) -> Vec<Burst> {
    let n = buckets.len();
    if n < 2 {
        return Vec::new();
    }
    let mean = buckets.iter().map(|b| b.p_combined).sum::<f64>() / n as f64;
    let var = buckets.iter().map(|b| (b.p_combined - mean).powi(2)).sum::<f64>() / n as f64;
    let sigma = var.sqrt();
    // Rounding leaves a flat profile with a sigma of a few ulps.
    if sigma <= 1e-12 * mean.abs().max(1e-300) {
        return Vec::new();
    }
    let threshold = mean + burst_k * sigma;

    let mut bursts = Vec::new();
    let mut i = 0;
    while i < n {
        if buckets[i].p_combined <= threshold {
            i += 1;
            continue;
        }
        let start = i;
        let mut peak = i;
        while i < n && buckets[i].p_combined > threshold {
            if buckets[i].p_combined > buckets[peak].p_combined {
                peak = i;
            }
            i += 1;
        }
        bursts.push(Burst {
            start_month: buckets[start].month,
            end_month: buckets[i - 1].month,
            peak_month: buckets[peak].month,
            label_headlines: Vec::new(),
            reference_driven: false,
        });
    }
    bursts
}

/// Labels each burst with the titles of the best pool documents (in pool
/// order) published inside it.
pub fn label_bursts<I>(bursts: &mut [Burst], pool: I, index: &Index, size: usize)
where
    I: IntoIterator<Item = DocNo> + Clone,
{
    for burst in bursts.iter_mut() {
        let span = MonthSpan {
            start: burst.start_month,
            end: burst.end_month,
        };
        burst.label_headlines = pool
            .clone()
            .into_iter()
            .filter(|&d| span.contains(index.bucket(d)))
            .take(size)
            .map(|d| index.doc(d).title.clone())
            .collect();
        burst.reference_driven = burst.label_headlines.is_empty();
    }
}

/// Publication months of the first `k` ranked documents.
pub fn place_top_docs(ranked: &[ScoredDoc], index: &Index, k: usize) -> Vec<Placement> {
    ranked
        .iter()
        .take(k)
        .filter_map(|s| {
            let d = index.doc_no(&s.doc_id)?;
            Some(Placement {
                doc_id: s.doc_id.clone(),
                rank: s.rank,
                month: index.bucket(d),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::tests::tiny6;

    fn masses(ps: &[f64]) -> Vec<BucketMass> {
        let start: Month = "2000-01".parse().unwrap();
        ps.iter()
            .enumerate()
            .map(|(i, &p)| BucketMass {
                month: start.offset(i as i32),
                p_pub: p,
                p_ref: 0.0,
                p_combined: p,
            })
            .collect()
    }

    fn at<'a>(p: &'a TimelineProfile, m: &str) -> &'a BucketMass {
        let m: Month = m.parse().unwrap();
        p.buckets.iter().find(|b| b.month == m).unwrap()
    }

    #[test]
    fn wtc_pool_mixture() {
        let index = tiny6();
        let pool = ["d5", "d6"].map(|id| index.doc_no(id).unwrap());
        let p = temporal_profile(pool, &index, index.span(), 0.5);
        assert_eq!(p.buckets.len(), index.span().len());
        let feb93 = at(&p, "1993-02");
        let sep01 = at(&p, "2001-09");
        assert_eq!(feb93.p_pub, 0.5);
        assert_eq!(sep01.p_pub, 0.5);
        assert!((feb93.p_ref - 2.0 / 3.0).abs() < 1e-15);
        assert!((sep01.p_ref - 1.0 / 3.0).abs() < 1e-15);
        assert!((feb93.p_combined - 7.0 / 12.0).abs() < 1e-15);
        assert!((sep01.p_combined - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn single_doc_without_refs_is_an_indicator() {
        let index = tiny6();
        // d3 refers to 1992, which lies inside the span; use alpha = 1 to
        // isolate publication mass, and a doc list with no refs via a span that
        // excludes 1992.
        let d3 = index.doc_no("d3").unwrap();
        let span: MonthSpan = "1991-01..1991-12".parse().unwrap();
        let p = temporal_profile([d3], &index, span, 0.5);
        for b in &p.buckets {
            let want = if b.month == "1991-06".parse().unwrap() { 1.0 } else { 0.0 };
            assert_eq!(b.p_combined, want);
            assert_eq!(b.p_ref, 0.0);
        }
    }

    #[test]
    fn whole_year_reference_spreads_evenly() {
        let index = tiny6();
        let d3 = index.doc_no("d3").unwrap();
        let p = temporal_profile([d3], &index, index.span(), 0.5);
        for m in "1992-01..1992-12".parse::<MonthSpan>().unwrap().months() {
            let b = p.buckets.iter().find(|b| b.month == m).unwrap();
            assert!((b.p_ref - 1.0 / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_pool_is_no_data() {
        let index = tiny6();
        let p = temporal_profile(std::iter::empty(), &index, index.span(), 0.5);
        assert!(p.no_data);
        assert!(p.buckets.iter().all(|b| b.p_combined == 0.0));
        assert!(detect_bursts(&p.buckets, 1.0).is_empty());
    }

    #[test]
    fn flat_profile_has_no_bursts() {
        assert!(detect_bursts(&masses(&[1.0 / 24.0; 24]), 1.0).is_empty());
    }

    #[test]
    fn single_spike() {
        let mut ps = vec![0.02; 24];
        ps[10] = 0.54;
        let bursts = detect_bursts(&masses(&ps), 1.0);
        assert_eq!(bursts.len(), 1);
        let b = &bursts[0];
        assert_eq!(b.start_month, b.end_month);
        assert_eq!(b.peak_month.to_string(), "2000-11");
    }

    #[test]
    fn separated_spikes_and_runs() {
        let mut ps = vec![0.01; 30];
        ps[3] = 0.2;
        ps[4] = 0.3;
        ps[20] = 0.2;
        let bursts = detect_bursts(&masses(&ps), 1.0);
        assert_eq!(bursts.len(), 2);
        assert_eq!(bursts[0].start_month.to_string(), "2000-04");
        assert_eq!(bursts[0].end_month.to_string(), "2000-05");
        assert_eq!(bursts[0].peak_month.to_string(), "2000-05");
        assert!(bursts[0].end_month < bursts[1].start_month);
    }

    #[test]
    fn labels_and_reference_driven_bursts() {
        let index = tiny6();
        let pool: Vec<DocNo> = ["d6", "d5"].iter().map(|id| index.doc_no(id).unwrap()).collect();
        let one = |s: &str| {
            let m: Month = s.parse().unwrap();
            Burst {
                start_month: m,
                end_month: m,
                peak_month: m,
                label_headlines: vec![],
                reference_driven: false,
            }
        };
        let mut bursts = vec![one("1993-02"), one("1995-01")];
        label_bursts(&mut bursts, pool.iter().copied(), &index, 3);
        assert_eq!(bursts[0].label_headlines, ["World Trade Center bombing kills six"]);
        assert!(!bursts[0].reference_driven);
        assert!(bursts[1].label_headlines.is_empty());
        assert!(bursts[1].reference_driven);
    }

    #[test]
    fn placements_follow_the_min_rule() {
        let index = tiny6();
        let ranked: Vec<ScoredDoc> = index
            .documents()
            .iter()
            .enumerate()
            .map(|(i, d)| ScoredDoc {
                doc_id: d.doc_id.clone(),
                score: 0.0,
                lm_score: 0.0,
                rank: i + 1,
            })
            .collect();
        assert_eq!(place_top_docs(&ranked, &index, 10).len(), 6);
        assert_eq!(place_top_docs(&ranked, &index, 2).len(), 2);
        assert!(place_top_docs(&[], &index, 10).is_empty());
    }
}
