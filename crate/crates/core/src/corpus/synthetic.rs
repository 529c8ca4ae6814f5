//! Deterministic synthetic archives with planted publication bursts.
//!
//! Background documents are spread evenly over the span, so an empty burst list
//! yields a flat publication profile. Each burst owns a share of topic
//! documents; `intensity` of them are placed (evenly) inside the burst interval
//! and cover the topic heavily, the rest are spread over the whole span and
//! mention the topic once in passing. Every document ends with a
//! `Filed in <Month> <YYYY>.` sentence carrying a temporal reference to its own
//! publication month.

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Document, EntityMention, TemporalRef};
use crate::error::CorpusError;
use crate::month::{Month, MonthSpan};

const MONTH_NAMES: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];
const ARTICLE_TYPES: [&str; 3] = ["news", "opinion", "feature"];
const VOCABULARY_SIZE: usize = 1500;

#[derive(Debug, Clone, PartialEq)]
pub struct BurstSpec {
    pub interval: MonthSpan,
    pub terms: Vec<String>,
    /// Fraction of this burst's topic documents published inside `interval`.
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n_docs: usize,
    pub span: MonthSpan,
    pub n_entities: usize,
    pub bursts: Vec<BurstSpec>,
    /// Share of all documents that are topic documents of each burst.
    pub topic_fraction: f64,
}

impl SyntheticSpec {
    pub fn new(seed: u64, n_docs: usize, span: MonthSpan) -> Self {
        SyntheticSpec {
            seed,
            n_docs,
            span,
            n_entities: 50,
            bursts: Vec::new(),
            topic_fraction: 0.1,
        }
    }

    pub fn with_entities(mut self, n_entities: usize) -> Self {
        self.n_entities = n_entities;
        self
    }

    pub fn with_burst(mut self, interval: MonthSpan, terms: &[&str], intensity: f64) -> Self {
        self.bursts.push(BurstSpec {
            interval,
            terms: terms.iter().map(|t| t.to_string()).collect(),
            intensity,
        });
        self
    }

    fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::Synthetic(m));
        if self.n_docs == 0 {
            return bad("n_docs must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.topic_fraction) {
            return bad(format!("topic_fraction {} outside [0, 1]", self.topic_fraction));
        }
        if self.topic_fraction * self.bursts.len() as f64 > 1.0 {
            return bad("bursts claim more than all documents".into());
        }
        for b in &self.bursts {
            if self.span.intersect(&b.interval) != Some(b.interval) {
                return bad(format!("burst interval {} outside span {}", b.interval, self.span));
            }
            if !(0.0..=1.0).contains(&b.intensity) {
                return bad(format!("burst intensity {} outside [0, 1]", b.intensity));
            }
            if b.terms.is_empty() || b.terms.iter().any(|t| crate::text::tokenize(t).len() != 1) {
                return bad("burst terms must be non-empty single tokens".into());
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Corpus, CorpusError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let reserved: Vec<String> = self
            .bursts
            .iter()
            .flat_map(|b| b.terms.iter().map(|t| t.to_lowercase()))
            .chain(["filed".to_string(), "in".to_string()])
            .collect();
        let vocab = vocabulary(&mut rng, VOCABULARY_SIZE, &reserved);
        let entities: Vec<(String, String)> = (0..self.n_entities)
            .map(|i| {
                let surface = format!("{} {}", capitalize(&vocab[(i * 7 + 3) % vocab.len()]), capitalize(&vocab[(i * 13 + 11) % vocab.len()]));
                (format!("E:{:04}", i), surface)
            })
            .collect();

        let n_topic: Vec<usize> = self
            .bursts
            .iter()
            .map(|_| ((self.n_docs as f64 * self.topic_fraction).round() as usize).max(1))
            .collect();
        let total_topic: usize = n_topic.iter().sum();
        if total_topic > self.n_docs {
            return Err(CorpusError::Synthetic(
                "too few documents for the requested bursts".into(),
            ));
        }
        let n_background = self.n_docs - total_topic;
        let width = self.n_docs.to_string().len().max(4);
        let gen = Generator {
            vocab: &vocab,
            entities: &entities,
        };

        let mut documents = Vec::with_capacity(self.n_docs);
        let mut next_id = 0usize;
        for (b, burst) in self.bursts.iter().enumerate() {
            let nt = n_topic[b];
            let inside = ((burst.intensity * nt as f64).round() as usize).min(nt);
            for j in 0..nt {
                let (month, focused) = if j < inside {
                    (spread(burst.interval, j, inside), true)
                } else {
                    (spread(self.span, j - inside, nt - inside), false)
                };
                let topic = Topic {
                    terms: &burst.terms,
                    focused,
                };
                documents.push(gen.document(&mut rng, doc_id(next_id, width), month, Some(topic)));
                next_id += 1;
            }
        }
        for i in 0..n_background {
            let month = spread(self.span, i, n_background);
            documents.push(gen.document(&mut rng, doc_id(next_id, width), month, None));
            next_id += 1;
        }
        Ok(Corpus::from_documents(documents))
    }
}

fn doc_id(n: usize, width: usize) -> String {
    format!("syn-{:0width$}", n, width = width)
}

/// The `i`-th of `n` evenly spaced months over `span`.
fn spread(span: MonthSpan, i: usize, n: usize) -> Month {
    let offset = i * span.len() / n.max(1);
    span.start.offset(offset as i32)
}

fn vocabulary(rng: &mut ChaCha8Rng, size: usize, reserved: &[String]) -> Vec<String> {
    const ONSETS: [&str; 16] = [
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st",
    ];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    let mut words = std::collections::BTreeSet::new();
    while words.len() < size {
        let syllables = rng.gen_range(2..=3);
        let w: String = (0..syllables)
            .map(|_| format!("{}{}", ONSETS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap()))
            .collect();
        if !reserved.contains(&w) {
            words.insert(w);
        }
    }
    let mut words: Vec<String> = words.into_iter().collect();
    words.shuffle(rng);
    words
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

struct Topic<'a> {
    terms: &'a [String],
    /// Inside the burst interval: the document is about the topic.
    focused: bool,
}

struct Generator<'a> {
    vocab: &'a [String],
    entities: &'a [(String, String)],
}

/// Accumulates title and body text while recording character offsets in the
/// shared `title + "\n" + body` space.
struct TextBuilder {
    title: String,
    body: String,
    title_chars: usize,
    body_chars: usize,
    mentions: Vec<EntityMention>,
    refs: Vec<TemporalRef>,
}

impl TextBuilder {
    fn new() -> Self {
        TextBuilder {
            title: String::new(),
            body: String::new(),
            title_chars: 0,
            body_chars: 0,
            mentions: Vec::new(),
            refs: Vec::new(),
        }
    }

    /// Appends `piece` (preceded by a space unless first) and returns its
    /// character range in the shared offset space.
    fn push(&mut self, in_title: bool, piece: &str) -> (usize, usize) {
        let (buf, count) = if in_title {
            (&mut self.title, &mut self.title_chars)
        } else {
            (&mut self.body, &mut self.body_chars)
        };
        if !buf.is_empty() && !piece.starts_with(['.', ',']) {
            buf.push(' ');
            *count += 1;
        }
        let start = *count;
        buf.push_str(piece);
        *count += piece.chars().count();
        let end = *count;
        let base = if in_title { 0 } else { self.title_chars + 1 };
        (base + start, base + end)
    }

    fn mention(&mut self, in_title: bool, entity: &(String, String)) {
        let (char_start, char_end) = self.push(in_title, &entity.1);
        self.mentions.push(EntityMention {
            entity_id: entity.0.clone(),
            surface: entity.1.clone(),
            char_start,
            char_end,
            in_title,
        });
    }
}

impl Generator<'_> {
    fn word<R: Rng>(&self, rng: &mut R) -> &str {
        // Skewed toward the head of the vocabulary.
        let u: f64 = rng.gen();
        &self.vocab[((u * u) * self.vocab.len() as f64) as usize % self.vocab.len()]
    }

    fn document<R: Rng>(&self, rng: &mut R, doc_id: String, month: Month, topic: Option<Topic<'_>>) -> Document {
        let day = rng.gen_range(1..=28);
        let published = NaiveDate::from_ymd_opt(month.year(), month.month(), day).expect("valid day");
        let mut tb = TextBuilder::new();

        let doc_entities: Vec<&(String, String)> = if self.entities.is_empty() {
            Vec::new()
        } else {
            let n = rng.gen_range(1..=3).min(self.entities.len());
            let mut picked = Vec::with_capacity(n);
            while picked.len() < n {
                let u: f64 = rng.gen();
                let e = &self.entities[((u * u) * self.entities.len() as f64) as usize % self.entities.len()];
                if !picked.contains(&e) {
                    picked.push(e);
                }
            }
            picked
        };

        // Title.
        let focused = topic.as_ref().is_some_and(|t| t.focused);
        if focused {
            let phrase = topic.as_ref().unwrap().terms.join(" ");
            tb.push(true, &capitalize(&phrase));
        }
        if let Some(e) = doc_entities.first().filter(|_| rng.gen_bool(0.5)) {
            tb.mention(true, e);
        }
        for _ in 0..rng.gen_range(2..=4) {
            let w = self.word(rng).to_string();
            tb.push(true, &w);
        }
        if tb.title.is_empty() {
            tb.push(true, "Untitled");
        }

        // Body.
        let sentences = rng.gen_range(3..=5);
        let topic_sentences: Vec<usize> = match &topic {
            Some(t) if t.focused => (0..sentences).filter(|_| rng.gen_bool(0.7)).chain([0]).collect(),
            Some(_) => vec![rng.gen_range(0..sentences)],
            None => Vec::new(),
        };
        for s in 0..sentences {
            let len = rng.gen_range(6..=12);
            let mention_at = rng.gen_range(0..len);
            let topic_at = rng.gen_range(0..len);
            for w in 0..len {
                if w == topic_at && topic_sentences.contains(&s) {
                    let phrase = topic.as_ref().unwrap().terms.join(" ");
                    tb.push(false, &phrase);
                }
                if w == mention_at && s < doc_entities.len() {
                    tb.mention(false, doc_entities[s]);
                }
                let word = self.word(rng).to_string();
                tb.push(false, &word);
            }
            tb.push(false, ".");
        }
        tb.push(false, "Filed in");
        let (char_start, char_end) = tb.push(
            false,
            &format!("{} {}", MONTH_NAMES[month.month() as usize - 1], month.year()),
        );
        tb.refs.push(TemporalRef {
            start_month: month,
            end_month: month,
            char_start,
            char_end,
        });
        tb.push(false, ".");

        Document {
            doc_id,
            title: tb.title,
            body: tb.body,
            published,
            article_type: ARTICLE_TYPES[rng.gen_range(0..ARTICLE_TYPES.len())].to_string(),
            entity_mentions: tb.mentions,
            temporal_refs: tb.refs,
        }
    }
}
