//! Request-level orchestration: ranking with any model, refinement, timelines,
//! selectors, search results with snippets, and document views.

use std::borrow::Cow;
use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::config::Params;
use crate::corpus::{EntityMention, TemporalRef};
use crate::entities::{article_salience, query_entity_selectors, SalientEntity};
use crate::error::RankError;
use crate::index::{DocNo, Index};
use crate::month::{Month, MonthSpan};
use crate::ranking::{
    diversify_historical, diversify_temporal, diversify_topical, lm_score, prepare_query, score_temporal,
    score_textual, textual_selection, to_scored, CandidatePool, RetrievalModel, ScoredDoc,
};
use crate::refine::{merge_refined, Constraints};
use crate::snippet::snippet_for;
use crate::timeline::{detect_bursts, label_bursts, place_top_docs, temporal_profile, TimelineProfile};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QueryRequest {
    pub q: String,
    pub model: RetrievalModel,
    pub constraints: Constraints,
    /// Previous results, best first; a non-empty list turns the request into
    /// a refinement.
    pub prev: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burst_k: Option<f64>,
}

impl QueryRequest {
    pub fn new(q: impl Into<String>, model: RetrievalModel) -> Self {
        QueryRequest {
            q: q.into(),
            model,
            ..Default::default()
        }
    }

    /// `base` with this request's overrides applied.
    pub fn params(&self, base: &Params) -> Params {
        let mut p = *base;
        if let Some(k) = self.k {
            p.k = k;
        }
        if let Some(alpha) = self.alpha {
            p.alpha = alpha;
        }
        if let Some(gamma) = self.gamma {
            p.gamma = gamma;
        }
        if let Some(burst_k) = self.burst_k {
            p.burst_k = burst_k;
        }
        p
    }
}

/// Outcome of ranking one request.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub terms: Vec<String>,
    pub pool: CandidatePool,
    pub results: Vec<ScoredDoc>,
    /// Documents that satisfy the constraints and contain a query term.
    pub total_matching: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub rank: usize,
    pub doc_id: String,
    pub headline: String,
    pub snippet: String,
    pub published: NaiveDate,
    pub article_type: String,
    pub score: f64,
    pub salient_entities: Vec<SalientEntity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub results: Vec<SearchResult>,
    pub total_matching: usize,
    pub no_matches: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentView {
    pub doc_id: String,
    pub headline: String,
    pub body: String,
    pub published: NaiveDate,
    pub article_type: String,
    pub entity_mentions: Vec<EntityMention>,
    pub temporal_refs: Vec<TemporalRef>,
    pub salient_entities: Vec<SalientEntity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub documents: usize,
    pub span: MonthSpan,
    pub format_version: u8,
}

#[derive(Debug)]
pub struct Engine {
    index: Index,
    params: Params,
}

impl Engine {
    pub fn new(index: Index, params: Params) -> Self {
        Engine { index, params }
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Computes lazily cached per-document data up front.
    pub fn warm(&self) {
        if self.index.num_docs() > 0 {
            self.index.default_salience(0);
        }
    }

    pub fn health(&self) -> Health {
        Health {
            status: "ok".into(),
            documents: self.index.num_docs(),
            span: self.index.span(),
            format_version: crate::index::FORMAT_VERSION,
        }
    }

    /// Textual pool of documents satisfying `constraints`, and the number of
    /// such documents before truncation to the pool size.
    pub fn pool(&self, terms: &[String], constraints: &Constraints, p: &Params) -> (CandidatePool, usize) {
        let ranked = score_textual(&self.index, terms, p.mu, |d| constraints.matches(d, &self.index));
        let total = ranked.len();
        (CandidatePool::from_ranked(&self.index, terms.to_vec(), &ranked, p.pool_size), total)
    }

    /// Monthly distributions of a pool over the corpus span.
    pub fn profile(&self, pool: &CandidatePool, p: &Params) -> TimelineProfile {
        temporal_profile(pool.docs(), &self.index, self.index.span(), p.alpha)
    }

    /// Applies `model` to a pool and keeps the first `p.k` documents.
    pub fn rank_pool(&self, pool: &CandidatePool, model: RetrievalModel, p: &Params) -> Vec<ScoredDoc> {
        let k = p.k;
        let selections = match model {
            RetrievalModel::Textual => {
                let mut s = textual_selection(pool);
                s.truncate(k);
                s
            }
            RetrievalModel::Temporal => {
                let dist = self.profile(pool, p).distribution();
                let mut s = score_temporal(pool, &dist, p.epsilon);
                s.truncate(k);
                s
            }
            RetrievalModel::TemporalDiv => diversify_temporal(pool, k, p.gamma),
            RetrievalModel::TopicalDiv => {
                let aspects = pool.aspect_priors(p.prior_docs);
                diversify_topical(pool, &aspects, k, p.eta)
            }
            RetrievalModel::HistDiv => {
                let aspects = pool.aspect_priors(p.prior_docs);
                let dist = self.profile(pool, p).distribution();
                diversify_historical(pool, &aspects, &dist, k, p.eta, p.top_entities, p.top_buckets)
            }
        };
        to_scored(pool, &selections)
    }

    /// Ranks a request, refining against `prev` when it is non-empty.
    pub fn rank(&self, req: &QueryRequest) -> Result<Ranking, RankError> {
        let p = req.params(&self.params);
        let terms = prepare_query(&req.q, &self.index)?;
        let mut warnings = Vec::new();
        let mut previous: Vec<DocNo> = Vec::with_capacity(req.prev.len());
        for id in &req.prev {
            match self.index.doc_no(id) {
                Some(d) => previous.push(d),
                None => warnings.push(format!("unknown previous document `{id}` ignored")),
            }
        }

        let (pool, total_matching) = self.pool(&terms, &req.constraints, &p);
        let ranked = self.rank_pool(&pool, req.model, &p);
        let results = if previous.is_empty() {
            ranked
        } else {
            merge_refined(&previous, ranked, &req.constraints, &self.index, |d| {
                lm_score(&self.index, d, &terms, p.mu)
            })
        };
        if results.is_empty() {
            return Err(if req.constraints.is_empty() {
                RankError::NoMatches
            } else {
                RankError::NoMatchesUnderConstraints
            });
        }
        Ok(Ranking {
            terms,
            pool,
            results,
            total_matching,
            warnings,
        })
    }

    /// Per-article salient entities under the given weights.
    pub fn salience(&self, doc: DocNo, p: &Params) -> Cow<'_, [SalientEntity]> {
        if p.salience == self.params.salience {
            Cow::Borrowed(self.index.default_salience(doc))
        } else {
            Cow::Owned(article_salience(self.index.doc(doc), &p.salience))
        }
    }

    /// Search results with snippets and salient entities. Only an empty query
    /// is an error; unmatched queries yield `no_matches`.
    pub fn search(&self, req: &QueryRequest) -> Result<SearchResponse, RankError> {
        let p = req.params(&self.params);
        let ranking = match self.rank(req) {
            Ok(r) => r,
            Err(RankError::EmptyQuery) => return Err(RankError::EmptyQuery),
            Err(e) => {
                return Ok(SearchResponse {
                    results: Vec::new(),
                    total_matching: 0,
                    no_matches: true,
                    warnings: vec![e.to_string()],
                })
            }
        };
        let results = ranking
            .results
            .iter()
            .map(|s| {
                let d = self.index.doc_no(&s.doc_id).expect("ranked document is indexed");
                let doc = self.index.doc(d);
                SearchResult {
                    rank: s.rank,
                    doc_id: s.doc_id.clone(),
                    headline: doc.title.clone(),
                    snippet: snippet_for(doc, &ranking.terms, s.rank, &p.snippet),
                    published: doc.published,
                    article_type: doc.article_type.clone(),
                    score: s.score,
                    salient_entities: self.salience(d, &p).into_owned(),
                }
            })
            .collect();
        Ok(SearchResponse {
            results,
            total_matching: ranking.total_matching,
            no_matches: false,
            warnings: ranking.warnings,
        })
    }

    /// Timeline of the (constrained) pool with labeled bursts and the
    /// placements of the requested model's top results.
    pub fn timeline(&self, req: &QueryRequest) -> Result<TimelineProfile, RankError> {
        let p = req.params(&self.params);
        let ranking = match self.rank(req) {
            Ok(r) => r,
            Err(RankError::EmptyQuery) => return Err(RankError::EmptyQuery),
            Err(_) => return Ok(temporal_profile(std::iter::empty(), &self.index, self.index.span(), p.alpha)),
        };
        let mut profile = self.profile(&ranking.pool, &p);
        let mut bursts = detect_bursts(&profile.buckets, p.burst_k);
        label_bursts(&mut bursts, ranking.pool.candidates.iter().map(|c| c.doc), &self.index, p.burst_label_size);
        profile.bursts = bursts;
        profile.top_placements = place_top_docs(&ranking.results, &self.index, p.placements);
        Ok(profile)
    }

    /// Entity selectors over the top of the requested ranking.
    pub fn selectors(&self, req: &QueryRequest) -> Result<Vec<SalientEntity>, RankError> {
        let p = req.params(&self.params);
        let ranking = match self.rank(req) {
            Ok(r) => r,
            Err(RankError::EmptyQuery) => return Err(RankError::EmptyQuery),
            Err(_) => return Ok(Vec::new()),
        };
        Ok(self.selectors_for(&ranking.results, &p))
    }

    pub fn selectors_for(&self, ranked: &[ScoredDoc], p: &Params) -> Vec<SalientEntity> {
        let salience: Vec<Cow<'_, [SalientEntity]>> = ranked
            .iter()
            .take(p.selector_docs)
            .filter_map(|s| self.index.doc_no(&s.doc_id))
            .map(|d| self.salience(d, p))
            .collect();
        query_entity_selectors(salience.iter().map(|s| s.as_ref()), p.selector_docs, p.selector_count)
    }

    pub fn document(&self, doc_id: &str) -> Option<DocumentView> {
        let d = self.index.doc_no(doc_id)?;
        let doc = self.index.doc(d);
        Some(DocumentView {
            doc_id: doc.doc_id.clone(),
            headline: doc.title.clone(),
            body: doc.body.clone(),
            published: doc.published,
            article_type: doc.article_type.clone(),
            entity_mentions: doc.entity_mentions.clone(),
            temporal_refs: doc.temporal_refs.clone(),
            salient_entities: self.index.default_salience(d).to_vec(),
        })
    }

    /// Publication month of each ranked document.
    pub fn months(&self, ranked: &[ScoredDoc]) -> BTreeMap<String, Month> {
        ranked
            .iter()
            .filter_map(|s| Some((s.doc_id.clone(), self.index.bucket(self.index.doc_no(&s.doc_id)?))))
            .collect()
    }
}
