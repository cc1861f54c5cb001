//! The CTCL logit container.
//!
//! Layout (all integers little-endian):
//!
//! | bytes   | content                                                     |
//! |---------|-------------------------------------------------------------|
//! | 0..4    | magic `CTCL`                                                |
//! | 4       | version, currently `1`                                      |
//! | 5..9    | `u32` length of the JSON header in bytes                    |
//! | 9..9+n  | UTF-8 JSON `{"frames": int, "labels": [..], "blank_index": int}` |
//! | rest    | `frames * labels.len()` IEEE-754 `f32`, row-major           |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::{LogitMatrix, Vocabulary};

pub const MAGIC: &[u8; 4] = b"CTCL";
pub const VERSION: u8 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    frames: usize,
    labels: Vec<String>,
    blank_index: usize,
}

/// A logit matrix together with the vocabulary its columns are labelled by.
#[derive(Debug, Clone, PartialEq)]
pub struct CtclContainer {
    pub vocab: Vocabulary,
    pub logits: LogitMatrix,
}

impl CtclContainer {
    pub fn new(vocab: Vocabulary, logits: LogitMatrix) -> Result<Self> {
        logits.check_vocab(&vocab)?;
        Ok(CtclContainer { vocab, logits })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            frames: self.logits.frames(),
            labels: self.vocab.labels().to_vec(),
            blank_index: self.vocab.blank_index(),
        };
        let header = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(9 + header.len() + 4 * self.logits.values().len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for &v in self.logits.values() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 9 || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing CTCL magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::Format(format!("unsupported version {}", bytes[4])));
        }
        let header_len = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let body_start = 9usize
            .checked_add(header_len)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| Error::Format("header length exceeds container".into()))?;
        let header: Header = serde_json::from_slice(&bytes[9..body_start])
            .map_err(|e| Error::Format(format!("bad header: {e}")))?;
        let vocab = Vocabulary::new(header.labels, header.blank_index)?;

        let body = &bytes[body_start..];
        let expected = header
            .frames
            .checked_mul(vocab.len())
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Format("shape overflow".into()))?;
        if body.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} payload bytes for {} frames x {} labels, got {}",
                header.frames,
                vocab.len(),
                body.len()
            )));
        }
        let values = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let logits = LogitMatrix::new(header.frames, vocab.len(), values)?;
        Ok(CtclContainer { vocab, logits })
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_bytes(&bytes)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }
}
