//! The tokenizer shared by indexing, ranking and snippets.
//!
//! Lowercase, split on non-alphanumeric characters, drop empty tokens. No
//! stemming and no stopword removal.

use std::ops::Range;

/// A token together with the byte range of the source text it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub term: String,
    pub span: Range<usize>,
}

pub fn tokenize(text: &str) -> Vec<String> {
    tokens(text).into_iter().map(|t| t.term).collect()
}

pub fn tokens(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut run_start = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                push_run(text, s..i, &mut out);
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        push_run(text, s..text.len(), &mut out);
    }
    out
}

fn push_run(text: &str, span: Range<usize>, out: &mut Vec<Token>) {
    let lower = text[span.clone()].to_lowercase();
    // Lowercasing can introduce non-alphanumeric combining marks (e.g. U+0130).
    for piece in lower.split(|c: char| !c.is_alphanumeric()) {
        if !piece.is_empty() {
            out.push(Token {
                term: piece.to_string(),
                span: span.clone(),
            });
        }
    }
}
