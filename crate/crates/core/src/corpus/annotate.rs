//! Dictionary annotator for documents that arrive without annotations.
//!
//! Entities come from a gazetteer (case-insensitive, whole-word, longest surface
//! wins). Temporal references come from the body: `Month YYYY` yields a single
//! month, a bare four-digit year in 1850..=2100 yields the whole year.

use std::collections::{BTreeMap, HashMap};

use regex::Regex;

use super::{Document, EntityMention, TemporalRef};
use crate::month::Month;

/// Surface form → canonical entity id.
pub type Gazetteer = BTreeMap<String, String>;

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

pub struct Annotator {
    surfaces: Option<Regex>,
    by_lower: HashMap<String, String>,
    month_year: Regex,
    year: Regex,
}

impl Annotator {
    pub fn new(gazetteer: &Gazetteer) -> Annotator {
        let mut surfaces: Vec<&str> = gazetteer
            .keys()
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .collect();
        // Longest first so alternation prefers the longest surface at a position.
        surfaces.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        surfaces.dedup();
        let surfaces_re = (!surfaces.is_empty()).then(|| {
            let alt: Vec<String> = surfaces.iter().map(|s| regex::escape(s)).collect();
            Regex::new(&format!(r"(?i)\b(?:{})\b", alt.join("|"))).expect("escaped alternation")
        });
        let by_lower = gazetteer
            .iter()
            .filter(|(s, _)| !s.trim().is_empty())
            .map(|(s, id)| (s.trim().to_lowercase(), id.clone()))
            .collect();
        Annotator {
            surfaces: surfaces_re,
            by_lower,
            month_year: Regex::new(&format!(r"\b({})\s+(\d{{4}})\b", MONTH_NAMES.join("|")))
                .expect("month regex"),
            year: Regex::new(r"\b(\d{4})\b").expect("year regex"),
        }
    }

    /// Adds gazetteer mentions and temporal references. Annotations already on
    /// the document are kept; exact duplicates are not added twice, so the
    /// operation is idempotent.
    pub fn annotate(&self, doc: &Document) -> Document {
        let text = doc.text();
        let chars = CharIndex::new(&text);
        let title_len = doc.title_len();
        let mut out = doc.clone();

        let mut new_mentions = Vec::new();
        if let Some(re) = &self.surfaces {
            for m in re.find_iter(&text) {
                let Some(entity_id) = self.by_lower.get(&m.as_str().to_lowercase()) else {
                    continue;
                };
                let (start, end) = (chars.of(m.start()), chars.of(m.end()));
                let mention = EntityMention {
                    entity_id: entity_id.clone(),
                    surface: m.as_str().to_string(),
                    char_start: start,
                    char_end: end,
                    in_title: end <= title_len,
                };
                if !out.entity_mentions.contains(&mention) {
                    new_mentions.push(mention);
                }
            }
        }

        let body_byte = doc.title.len() + 1;
        let body = &text[body_byte..];
        let mut new_refs = Vec::new();
        let mut covered: Vec<(usize, usize)> = Vec::new();
        for caps in self.month_year.captures_iter(body) {
            let whole = caps.get(0).expect("group 0");
            let name = &caps[1];
            let Some(year) = parse_year(&caps[2]) else {
                continue;
            };
            let month_no = MONTH_NAMES.iter().position(|n| *n == name).expect("matched name") as u32 + 1;
            let month = Month::new(year, month_no).expect("valid month");
            covered.push((whole.start(), whole.end()));
            new_refs.push(TemporalRef {
                start_month: month,
                end_month: month,
                char_start: chars.of(body_byte + whole.start()),
                char_end: chars.of(body_byte + whole.end()),
            });
        }
        for caps in self.year.captures_iter(body) {
            let m = caps.get(1).expect("group 1");
            if covered.iter().any(|&(s, e)| m.start() >= s && m.end() <= e) {
                continue;
            }
            let Some(year) = parse_year(m.as_str()) else {
                continue;
            };
            new_refs.push(TemporalRef {
                start_month: Month::new(year, 1).expect("valid month"),
                end_month: Month::new(year, 12).expect("valid month"),
                char_start: chars.of(body_byte + m.start()),
                char_end: chars.of(body_byte + m.end()),
            });
        }
        new_refs.retain(|r| !out.temporal_refs.contains(r));

        if !new_mentions.is_empty() {
            out.entity_mentions.extend(new_mentions);
            out.entity_mentions
                .sort_by(|a, b| (a.char_start, &a.entity_id, a.char_end).cmp(&(b.char_start, &b.entity_id, b.char_end)));
        }
        if !new_refs.is_empty() {
            out.temporal_refs.extend(new_refs);
            out.temporal_refs
                .sort_by_key(|r| (r.char_start, r.char_end, r.start_month, r.end_month));
        }
        out
    }
}

fn parse_year(s: &str) -> Option<i32> {
    let y: i32 = s.parse().ok()?;
    (1850..=2100).contains(&y).then_some(y)
}

/// Byte offset → char offset lookup for one string.
struct CharIndex {
    starts: Vec<usize>,
}

impl CharIndex {
    fn new(text: &str) -> Self {
        CharIndex {
            starts: text.char_indices().map(|(b, _)| b).collect(),
        }
    }

    fn of(&self, byte: usize) -> usize {
        self.starts.partition_point(|&b| b < byte)
    }
}
