//! Viterbi forced alignment over the blank-extended target.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::ctc::{can_skip, check_feasible, extend};
use crate::error::{Error, Result};
use crate::text;
use crate::vocab::{LogitMatrix, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedToken {
    pub label: String,
    pub target_index: usize,
    /// Inclusive `[start, end]` frame span on the best path.
    #[serde(with = "span")]
    pub span: (usize, usize),
    pub emission_frame: usize,
    /// Posterior of `label` at `emission_frame`, temperature 1.
    pub raw_posterior: f64,
    #[serde(skip)]
    pub label_index: usize,
}

mod span {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(span: &(usize, usize), s: S) -> Result<S::Ok, S::Error> {
        [span.0, span.1].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(usize, usize), D::Error> {
        let [a, b] = <[usize; 2]>::deserialize(d)?;
        Ok((a, b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentPath {
    pub tokens: Vec<AlignedToken>,
    pub total_log_prob: f64,
}

/// A word's slice of `AlignmentPath::tokens`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSpan {
    pub text: String,
    pub tokens: Range<usize>,
}

// Backpointer codes.
const STAY: u8 = 0;
const STEP: u8 = 1;
const SKIP: u8 = 2;

/// Best CTC path for `target`.
///
/// Ties between predecessors prefer staying in the current state, then the
/// lowest state index; between the two final states the lower index wins.
pub fn forced_align(
    logits: &LogitMatrix,
    target: &[usize],
    vocab: &Vocabulary,
) -> Result<AlignmentPath> {
    check_feasible(logits, target, vocab)?;
    let frames = logits.frames();
    let labels = logits.labels();
    let blank = vocab.blank_index();
    let lp = logits.log_posteriors();
    let ext = extend(target, blank);
    let states = ext.len();
    let neg = f64::NEG_INFINITY;

    let mut score = vec![neg; states];
    let mut next = vec![neg; states];
    let mut back = vec![STAY; frames * states];
    score[0] = lp[ext[0]];
    score[1] = lp[ext[1]];

    for t in 1..frames {
        let row = &lp[t * labels..(t + 1) * labels];
        for s in 0..states {
            let (mut best, mut code) = (score[s], STAY);
            if can_skip(&ext, s, blank) && score[s - 2] > best {
                best = score[s - 2];
                code = SKIP;
            }
            if s >= 1 && score[s - 1] > best {
                best = score[s - 1];
                code = STEP;
            }
            next[s] = if best == neg { neg } else { best + row[ext[s]] };
            back[t * states + s] = code;
        }
        std::mem::swap(&mut score, &mut next);
    }

    let mut state = states - 2;
    if score[states - 1] > score[states - 2] {
        state = states - 1;
    }
    let total_log_prob = score[state];
    if total_log_prob == neg {
        return Err(Error::InfeasibleTarget {
            frames,
            required: crate::ctc::min_frames(target),
        });
    }

    let mut states_path = vec![0usize; frames];
    for t in (0..frames).rev() {
        states_path[t] = state;
        if t > 0 {
            state -= match back[t * states + state] {
                STEP => 1,
                SKIP => 2,
                _ => 0,
            };
        }
    }

    let mut spans: Vec<Option<(usize, usize)>> = vec![None; target.len()];
    for (t, &s) in states_path.iter().enumerate() {
        if s % 2 == 1 {
            let span = spans[s / 2].get_or_insert((t, t));
            span.1 = t;
        }
    }

    let tokens = target
        .iter()
        .zip(spans)
        .enumerate()
        .map(|(i, (&label, span))| {
            let (start, end) = span.expect("every target token is visited by a feasible path");
            let mut emission = start;
            for t in start + 1..=end {
                if lp[t * labels + label] > lp[emission * labels + label] {
                    emission = t;
                }
            }
            AlignedToken {
                label: vocab.label(label).to_string(),
                target_index: i,
                span: (start, end),
                emission_frame: emission,
                raw_posterior: lp[emission * labels + label].exp(),
                label_index: label,
            }
        })
        .collect();

    Ok(AlignmentPath {
        tokens,
        total_log_prob,
    })
}

/// Normalizes `text` (NFC, lowercase), encodes it, and aligns it.
pub fn forced_align_text(
    logits: &LogitMatrix,
    text: &str,
    vocab: &Vocabulary,
) -> Result<AlignmentPath> {
    let normalized = text::normalize(text);
    if normalized.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let target = vocab.encode(&normalized)?;
    forced_align(logits, &target, vocab)
}

fn is_space_label(label: &str) -> bool {
    label == " " || label == "|"
}

/// Groups aligned tokens into words at space tokens. Empty groups (from
/// leading, trailing or repeated spaces) are dropped.
pub fn align_words(path: &AlignmentPath, target_text: &str) -> Result<Vec<WordSpan>> {
    let normalized = text::normalize(target_text);
    let chars: Vec<char> = normalized.chars().collect();
    if chars.len() != path.tokens.len() {
        return Err(Error::TokenMismatch(format!(
            "{} characters vs {} aligned tokens",
            chars.len(),
            path.tokens.len()
        )));
    }
    let mut buf = [0u8; 4];
    for (i, (&ch, tok)) in chars.iter().zip(&path.tokens).enumerate() {
        let matches = if ch == ' ' {
            is_space_label(&tok.label)
        } else {
            tok.label == *ch.encode_utf8(&mut buf)
        };
        if !matches {
            return Err(Error::TokenMismatch(format!(
                "position {i}: {ch:?} vs {:?}",
                tok.label
            )));
        }
    }

    let mut words = Vec::new();
    let mut start = 0;
    for i in 0..=chars.len() {
        if i == chars.len() || chars[i] == ' ' {
            if i > start {
                words.push(WordSpan {
                    text: chars[start..i].iter().collect(),
                    tokens: start..i,
                });
            }
            start = i + 1;
        }
    }
    Ok(words)
}

impl AlignmentPath {
    pub fn is_space(&self, token: usize) -> bool {
        is_space_label(&self.tokens[token].label)
    }
}
