use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Ordered CTC output symbols with a single designated blank (padding) label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawVocabulary", into = "RawVocabulary")]
pub struct Vocabulary {
    labels: Vec<String>,
    blank: usize,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawVocabulary {
    labels: Vec<String>,
    blank_index: usize,
}

impl TryFrom<RawVocabulary> for Vocabulary {
    type Error = Error;

    fn try_from(raw: RawVocabulary) -> Result<Self> {
        Vocabulary::new(raw.labels, raw.blank_index)
    }
}

impl From<Vocabulary> for RawVocabulary {
    fn from(v: Vocabulary) -> Self {
        RawVocabulary {
            labels: v.labels,
            blank_index: v.blank,
        }
    }
}

impl Vocabulary {
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        blank_index: usize,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if blank_index >= labels.len() {
            return Err(Error::InvalidVocabulary(format!(
                "blank index {blank_index} out of range for {} labels",
                labels.len()
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidVocabulary(format!("label {i} is empty")));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidVocabulary(format!(
                    "duplicate label {label:?}"
                )));
            }
        }
        Ok(Vocabulary {
            labels,
            blank: blank_index,
            index,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn blank_index(&self) -> usize {
        self.blank
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Label used for the space between words: `" "` if present, else the
    /// wav2vec-style `"|"` delimiter.
    pub fn word_delimiter(&self) -> Option<usize> {
        self.index_of(" ").or_else(|| self.index_of("|"))
    }

    pub fn is_word_delimiter(&self, idx: usize) -> bool {
        self.word_delimiter() == Some(idx)
    }

    /// Maps already-normalized text to label indices, one per character.
    pub fn encode(&self, text: &str) -> Result<Vec<usize>> {
        let mut buf = [0u8; 4];
        text.chars()
            .map(|ch| {
                let idx = if ch == ' ' {
                    self.word_delimiter()
                } else {
                    self.index_of(ch.encode_utf8(&mut buf))
                };
                match idx {
                    Some(i) if i != self.blank => Ok(i),
                    _ => Err(Error::UnknownToken(ch.to_string())),
                }
            })
            .collect()
    }

    /// Checks a token sequence against this vocabulary (in range, not blank, non-empty).
    pub fn check_target(&self, target: &[usize]) -> Result<()> {
        if target.is_empty() {
            return Err(Error::EmptyTarget);
        }
        for &tok in target {
            if tok >= self.len() {
                return Err(Error::UnknownToken(format!("#{tok}")));
            }
            if tok == self.blank {
                return Err(Error::UnknownToken(self.labels[tok].clone()));
            }
        }
        Ok(())
    }
}

/// Frames x labels matrix of raw, unnormalized acoustic-model outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMatrix {
    frames: usize,
    labels: usize,
    values: Vec<f64>,
}

impl LogitMatrix {
    pub fn new(frames: usize, labels: usize, values: Vec<f64>) -> Result<Self> {
        if labels == 0 {
            return Err(Error::ShapeMismatch("zero labels".into()));
        }
        if values.len() != frames * labels {
            return Err(Error::ShapeMismatch(format!(
                "expected {frames}x{labels} = {} values, got {}",
                frames * labels,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(LogitMatrix {
            frames,
            labels,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let labels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != labels) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), labels, rows.concat())
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.labels..(t + 1) * self.labels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.labels)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn check_vocab(&self, vocab: &Vocabulary) -> Result<()> {
        if self.labels != vocab.len() {
            return Err(Error::ShapeMismatch(format!(
                "logits have {} columns, vocabulary has {} labels",
                self.labels,
                vocab.len()
            )));
        }
        Ok(())
    }

    /// Row-wise log-softmax at temperature 1.
    pub fn log_posteriors(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        for row in self.rows() {
            out.extend(math::log_softmax(row));
        }
        out
    }

    pub fn posteriors(&self, temperature: f64) -> Result<PosteriorMatrix> {
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.rows() {
            values.extend(math::softmax_temperature(row, temperature)?);
        }
        Ok(PosteriorMatrix {
            labels: self.labels,
            values,
        })
    }
}

/// Row-stochastic frames x labels matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    labels: usize,
    values: Vec<f64>,
}

impl PosteriorMatrix {
    pub fn frames(&self) -> usize {
        self.values.len() / self.labels
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.labels..(t + 1) * self.labels]
    }

    pub fn get(&self, t: usize, label: usize) -> f64 {
        self.values[t * self.labels + label]
    }
}
