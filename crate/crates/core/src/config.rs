use serde::{Deserialize, Serialize};

/// Tunable constants of the engine. Every field has a documented default and
/// can be overridden per request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    /// Dirichlet prior for the unigram language model.
    pub mu: f64,
    /// Size of the pseudo-relevant candidate pool.
    pub pool_size: usize,
    /// Number of results returned by a ranking.
    pub k: usize,
    /// Per-bucket exponential decay rate of temporal diversification.
    pub gamma: f64,
    /// Weight of plain relevance in the IA-Select marginal gain.
    pub eta: f64,
    /// Entities kept when forming compound (entity, month) aspects.
    pub top_entities: usize,
    /// Months kept when forming compound (entity, month) aspects.
    pub top_buckets: usize,
    /// Pool documents used to estimate aspect priors.
    pub prior_docs: usize,
    /// Added to the timeline mass in temporal relevance scoring.
    pub epsilon: f64,
    /// Weight of publication dates against temporal references on the timeline.
    pub alpha: f64,
    /// A month bursts when its mass exceeds mean + `burst_k` standard deviations.
    pub burst_k: f64,
    /// Headlines per burst label.
    pub burst_label_size: usize,
    /// Results plotted on the timeline.
    pub placements: usize,
    /// Ranked documents inspected for the entity selector list.
    pub selector_docs: usize,
    /// Entity selectors returned.
    pub selector_count: usize,
    pub salience: SalienceWeights,
    pub snippet: SnippetTiers,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            mu: 2000.0,
            pool_size: 1000,
            k: 50,
            gamma: 1.0,
            eta: 0.01,
            top_entities: 20,
            top_buckets: 20,
            prior_docs: 100,
            epsilon: 1e-6,
            alpha: 0.5,
            burst_k: 1.0,
            burst_label_size: 3,
            placements: 10,
            selector_docs: 100,
            selector_count: 10,
            salience: SalienceWeights::default(),
            snippet: SnippetTiers::default(),
        }
    }
}

/// Per-article entity salience heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SalienceWeights {
    pub title: f64,
    pub early: f64,
    pub frequency: f64,
    /// Fraction of the text counted as "early".
    pub early_fraction: f64,
    pub threshold: f64,
}

impl Default for SalienceWeights {
    fn default() -> Self {
        SalienceWeights {
            title: 2.0,
            early: 1.0,
            frequency: 1.0,
            early_fraction: 0.2,
            threshold: 1.0,
        }
    }
}

/// Snippet word budgets by rank band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnippetTiers {
    /// Ranks `1..=large_until` get `large` tokens.
    pub large_until: usize,
    pub large: usize,
    /// Ranks up to `medium_until` get `medium` tokens.
    pub medium_until: usize,
    pub medium: usize,
    pub small: usize,
}

impl Default for SnippetTiers {
    fn default() -> Self {
        SnippetTiers {
            large_until: 2,
            large: 100,
            medium_until: 6,
            medium: 60,
            small: 30,
        }
    }
}

impl SnippetTiers {
    pub fn budget(&self, rank: usize) -> usize {
        if rank <= self.large_until {
            self.large
        } else if rank <= self.medium_until {
            self.medium
        } else {
            self.small
        }
    }
}
