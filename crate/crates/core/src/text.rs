//! Transcript normalization.

use unicode_normalization::UnicodeNormalization;

/// NFC + lowercase. Used on targets before alignment.
pub fn normalize(text: &str) -> String {
    text.nfc().collect::<String>().to_lowercase()
}

/// `normalize`, then strip punctuation (hyphens survive only between two
/// alphanumeric characters) and collapse whitespace runs to single spaces.
pub fn normalize_transcript(text: &str) -> String {
    let chars: Vec<char> = normalize(text).chars().collect();
    let mut out = String::with_capacity(chars.len());
    let mut pending_space = false;
    for (i, &ch) in chars.iter().enumerate() {
        let keep = if ch.is_alphanumeric() {
            true
        } else if ch == '-' {
            i > 0
                && chars[i - 1].is_alphanumeric()
                && chars.get(i + 1).is_some_and(|c| c.is_alphanumeric())
        } else {
            false
        };
        if keep {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(ch);
        } else if ch.is_whitespace() {
            pending_space = true;
        }
    }
    out
}

/// Whitespace-separated words of the normalized transcript.
pub fn words(text: &str) -> Vec<String> {
    normalize_transcript(text)
        .split(' ')
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}
