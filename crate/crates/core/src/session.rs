//! The search trail state machine, the scholar's corpus, the export format and
//! trail replay.
//!
//! Stages are append-only. Every action appends a stage whose parent is the
//! current stage, so revisiting an old stage and acting again branches the
//! trail while the stage list stays in append order.

use std::collections::{BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, QueryRequest};
use crate::error::SessionError;
use crate::month::MonthSpan;
use crate::ranking::RetrievalModel;
use crate::refine::Constraints;

pub type StageId = u64;

pub const EXPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrailStage {
    pub id: StageId,
    pub parent: Option<StageId>,
    pub query: String,
    pub model: RetrievalModel,
    pub constraints: Constraints,
    pub ts: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub doc_id: String,
    pub headline: String,
    /// Stage the article was saved from; `None` before the first query.
    pub stage: Option<StageId>,
    pub query: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "target", content = "entity_id", rename_all = "snake_case")]
pub enum ClearTarget {
    Time,
    Entity(String),
    ArticleTypes,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    /// A new query text; `model: None` keeps the current model. Constraints
    /// carry over.
    NewQuery {
        query: String,
        #[serde(default)]
        model: Option<RetrievalModel>,
    },
    ChangeModel {
        model: RetrievalModel,
    },
    SelectTime {
        span: MonthSpan,
    },
    SelectEntity {
        entity_id: String,
    },
    SelectArticleTypes {
        types: BTreeSet<String>,
    },
    ClearConstraint {
        clear: ClearTarget,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub session_id: String,
    pub created_at: DateTime<Utc>,
    stages: Vec<TrailStage>,
    current: Option<StageId>,
    corpus: Vec<CorpusEntry>,
}

impl Session {
    pub fn new(session_id: impl Into<String>, created_at: DateTime<Utc>) -> Self {
        Session {
            session_id: session_id.into(),
            created_at,
            stages: Vec::new(),
            current: None,
            corpus: Vec::new(),
        }
    }

    pub fn stages(&self) -> &[TrailStage] {
        &self.stages
    }

    pub fn corpus(&self) -> &[CorpusEntry] {
        &self.corpus
    }

    pub fn current_stage(&self) -> Option<&TrailStage> {
        self.current.and_then(|id| self.stage(id))
    }

    pub fn stage(&self, id: StageId) -> Option<&TrailStage> {
        // Ids are assigned 1, 2, 3, ... in append order.
        let i = usize::try_from(id).ok()?.checked_sub(1)?;
        self.stages.get(i).filter(|s| s.id == id)
    }

    /// Appends a stage for `action`, returning its id, or `None` when the
    /// action leaves the current state unchanged.
    pub fn apply_action(&mut self, action: Action, ts: DateTime<Utc>) -> Result<Option<StageId>, SessionError> {
        let (mut query, mut model, mut constraints) = match self.current_stage() {
            Some(s) => (s.query.clone(), s.model, s.constraints.clone()),
            None => match &action {
                Action::NewQuery { .. } => (String::new(), RetrievalModel::default(), Constraints::default()),
                _ => return Err(SessionError::NoQuery),
            },
        };
        match action {
            Action::NewQuery { query: q, model: m } => {
                query = q;
                if let Some(m) = m {
                    model = m;
                }
            }
            Action::ChangeModel { model: m } => model = m,
            Action::SelectTime { span } => constraints.time = Some(span),
            Action::SelectEntity { entity_id } => {
                constraints.entities.insert(entity_id);
            }
            Action::SelectArticleTypes { types } => constraints.article_types = types,
            Action::ClearConstraint { clear } => match clear {
                ClearTarget::Time => constraints.time = None,
                ClearTarget::Entity(id) => {
                    constraints.entities.remove(&id);
                }
                ClearTarget::ArticleTypes => constraints.article_types.clear(),
                ClearTarget::All => constraints = Constraints::default(),
            },
        }
        if let Some(s) = self.current_stage() {
            if s.query == query && s.model == model && s.constraints == constraints {
                return Ok(None);
            }
        }
        let id = self.stages.len() as StageId + 1;
        self.stages.push(TrailStage {
            id,
            parent: self.current,
            query,
            model,
            constraints,
            ts,
        });
        self.current = Some(id);
        Ok(Some(id))
    }

    pub fn revisit(&mut self, id: StageId) -> Result<(), SessionError> {
        self.stage(id).ok_or(SessionError::UnknownStage(id))?;
        self.current = Some(id);
        Ok(())
    }

    /// Saves an article with the current stage as provenance. Returns `false`
    /// when the document was already saved.
    pub fn save_article(&mut self, doc_id: impl Into<String>, headline: impl Into<String>) -> bool {
        let doc_id = doc_id.into();
        if self.corpus.iter().any(|e| e.doc_id == doc_id) {
            return false;
        }
        let current = self.current_stage();
        self.corpus.push(CorpusEntry {
            doc_id,
            headline: headline.into(),
            stage: current.map(|s| s.id),
            query: current.map(|s| s.query.clone()).unwrap_or_default(),
        });
        true
    }

    pub fn to_export(&self) -> SessionExport {
        SessionExport {
            format_version: EXPORT_FORMAT_VERSION,
            session_id: self.session_id.clone(),
            created_at: self.created_at,
            stages: self.stages.clone(),
            corpus: self.corpus.clone(),
        }
    }

    /// The export document: pretty-printed JSON with a trailing newline.
    pub fn export(&self) -> String {
        self.to_export().to_json()
    }

    /// Parses and validates an export; the current stage becomes the last
    /// stage.
    pub fn import(json: &str) -> Result<Session, SessionError> {
        let export = SessionExport::from_json(json)?;
        Ok(Session {
            session_id: export.session_id,
            created_at: export.created_at,
            current: export.stages.last().map(|s| s.id),
            stages: export.stages,
            corpus: export.corpus,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionExport {
    pub format_version: u32,
    pub session_id: String,
    pub created_at: DateTime<Utc>,
    pub stages: Vec<TrailStage>,
    pub corpus: Vec<CorpusEntry>,
}

impl SessionExport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("export serializes");
        s.push('\n');
        s
    }

    pub fn from_json(json: &str) -> Result<SessionExport, SessionError> {
        let de = &mut serde_json::Deserializer::from_str(json);
        let export: SessionExport = serde_path_to_error::deserialize(de).map_err(|e| SessionError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        export.validate()?;
        Ok(export)
    }

    /// Structural checks beyond the JSON shape.
    pub fn validate(&self) -> Result<(), SessionError> {
        let fail = |path: String, message: &str| {
            Err(SessionError::Schema {
                path,
                message: message.to_string(),
            })
        };
        if self.format_version != EXPORT_FORMAT_VERSION {
            return fail("format_version".into(), "unsupported format version");
        }
        let mut ids = HashSet::new();
        for (i, s) in self.stages.iter().enumerate() {
            if s.id != i as StageId + 1 {
                return fail(format!("stages[{i}].id"), "stage ids must be 1, 2, 3, ... in order");
            }
            match s.parent {
                None if i > 0 => return fail(format!("stages[{i}].parent"), "only the first stage may lack a parent"),
                Some(_) if i == 0 => return fail(format!("stages[{i}].parent"), "the first stage has no parent"),
                Some(p) if p >= s.id => return fail(format!("stages[{i}].parent"), "parent must precede the stage"),
                _ => {}
            }
            ids.insert(s.id);
        }
        let mut saved = HashSet::new();
        for (i, e) in self.corpus.iter().enumerate() {
            if !saved.insert(e.doc_id.as_str()) {
                return fail(format!("corpus[{i}].doc_id"), "duplicate saved document");
            }
            if let Some(stage) = e.stage {
                if !ids.contains(&stage) {
                    return fail(format!("corpus[{i}].stage"), "unknown stage");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReplay {
    pub id: StageId,
    pub query: String,
    pub model: RetrievalModel,
    pub refined: bool,
    pub results: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryCheck {
    pub doc_id: String,
    pub stage: Option<StageId>,
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub stages: Vec<StageReplay>,
    pub corpus: Vec<EntryCheck>,
}

impl ReplayReport {
    pub fn verified(&self) -> usize {
        self.corpus.iter().filter(|e| e.found).count()
    }

    pub fn all_verified(&self) -> bool {
        self.corpus.iter().all(|e| e.found)
    }
}

/// Re-runs every stage. A stage that keeps its parent's query and model but
/// changes constraints is replayed as a refinement of the parent's results,
/// as a client issues it; any other stage is a fresh ranking. Each saved
/// document is then looked up in its stage's results (or in the index when it
/// was saved before any query).
pub fn replay(export: &SessionExport, engine: &Engine) -> ReplayReport {
    let mut stages: Vec<StageReplay> = Vec::with_capacity(export.stages.len());
    for s in &export.stages {
        let parent = s.parent.and_then(|p| export.stages.get(p as usize - 1).map(|ps| (ps, &stages[p as usize - 1])));
        let prev = match parent {
            Some((ps, pr)) if ps.query == s.query && ps.model == s.model && ps.constraints != s.constraints => {
                Some(pr.results.clone())
            }
            _ => None,
        };
        let req = QueryRequest {
            q: s.query.clone(),
            model: s.model,
            constraints: s.constraints.clone(),
            prev: prev.clone().unwrap_or_default(),
            ..Default::default()
        };
        let (results, error) = match engine.rank(&req) {
            Ok(r) => (r.results.into_iter().map(|d| d.doc_id).collect(), None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        stages.push(StageReplay {
            id: s.id,
            query: s.query.clone(),
            model: s.model,
            refined: prev.is_some_and(|p| !p.is_empty()),
            results,
            error,
        });
    }
    let corpus = export
        .corpus
        .iter()
        .map(|e| {
            let found = match e.stage {
                Some(id) => stages
                    .get(id as usize - 1)
                    .is_some_and(|s| s.results.iter().any(|d| d == &e.doc_id)),
                None => engine.index().doc_no(&e.doc_id).is_some(),
            };
            EntryCheck {
                doc_id: e.doc_id.clone(),
                stage: e.stage,
                found,
            }
        })
        .collect();
    ReplayReport { stages, corpus }
}
