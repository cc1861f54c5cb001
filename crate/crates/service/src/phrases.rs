use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phrase {
    pub id: String,
    pub text: String,
}

pub fn default_phrases() -> Vec<Phrase> {
    pronscore::demo::PHRASES
        .iter()
        .map(|text| Phrase {
            id: slug(text),
            text: (*text).to_string(),
        })
        .collect()
}

fn slug(text: &str) -> String {
    pronscore::text::words(text).join("-")
}

/// Phrase file: a JSON array of `{"id", "text"}` objects.
pub fn parse_phrases(json: &str) -> Result<Vec<Phrase>, ServiceError> {
    let phrases: Vec<Phrase> = serde_json::from_str(json)
        .map_err(|e| ServiceError::Config(format!("phrase file: {e}")))?;
    check_unique(&phrases)?;
    Ok(phrases)
}

pub fn load_phrases(path: &Path) -> Result<Vec<Phrase>, ServiceError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    parse_phrases(&text)
}

pub(crate) fn check_unique(phrases: &[Phrase]) -> Result<(), ServiceError> {
    let mut seen = HashSet::new();
    for p in phrases {
        if !seen.insert(p.id.as_str()) {
            return Err(ServiceError::Config(format!(
                "duplicate phrase id {:?}",
                p.id
            )));
        }
    }
    Ok(())
}
