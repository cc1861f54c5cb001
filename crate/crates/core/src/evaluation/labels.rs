use serde::{Deserialize, Serialize};

use super::edit::{edit_script, EditOp};
use super::Level;
use crate::error::{Error, Result};
use crate::text;

/// Ground truth for one utterance, on the normalized target's segmentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MispronunciationLabels {
    /// Normalized target, words joined by single spaces.
    pub target_text: String,
    pub word_labels: Vec<bool>,
    /// One entry per non-space character of `target_text`.
    pub char_labels: Vec<bool>,
}

impl MispronunciationLabels {
    pub fn units(&self, level: Level) -> &[bool] {
        match level {
            Level::Character => &self.char_labels,
            Level::Word => &self.word_labels,
        }
    }
}

/// Labels target units the verbatim transcript disagrees with.
///
/// Words are aligned with a unit-cost edit script. Substituted and deleted
/// target words are mispronounced; inserted verbatim words are ignored.
/// Inside a substituted pair a character-level edit script marks the
/// substituted and deleted target characters; a deleted word marks all of
/// its characters.
pub fn derive_labels(target_text: &str, verbatim_text: &str) -> Result<MispronunciationLabels> {
    let target = text::words(target_text);
    let verbatim = text::words(verbatim_text);
    if target.is_empty() || verbatim.is_empty() {
        return Err(Error::EmptyText);
    }

    let char_offsets: Vec<usize> = target
        .iter()
        .scan(0, |acc, w| {
            let start = *acc;
            *acc += w.chars().count();
            Some(start)
        })
        .collect();
    let total_chars = target.iter().map(|w| w.chars().count()).sum();
    let mut word_labels = vec![false; target.len()];
    let mut char_labels = vec![false; total_chars];

    for op in edit_script(&target, &verbatim) {
        match op {
            EditOp::Match { .. } | EditOp::Insert { .. } => {}
            EditOp::Delete { reference } => {
                word_labels[reference] = true;
                let len = target[reference].chars().count();
                char_labels[char_offsets[reference]..char_offsets[reference] + len].fill(true);
            }
            EditOp::Substitute {
                reference,
                hypothesis,
            } => {
                word_labels[reference] = true;
                let t: Vec<char> = target[reference].chars().collect();
                let v: Vec<char> = verbatim[hypothesis].chars().collect();
                for cop in edit_script(&t, &v) {
                    match cop {
                        EditOp::Substitute { reference: c, .. }
                        | EditOp::Delete { reference: c } => {
                            char_labels[char_offsets[reference] + c] = true;
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    Ok(MispronunciationLabels {
        target_text: target.join(" "),
        word_labels,
        char_labels,
    })
}
