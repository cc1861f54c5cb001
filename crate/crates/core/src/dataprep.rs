//! Manifest filtering and speaker-disjoint splits.
//!
//! Manifests are JSON lines, one utterance per line:
//!
//! ```json
//! {"id": "u1", "speaker_id": "s1", "duration": 4.2, "target": "dyr", "verbatim": "dyr", "logits_path": "u1.ctcl"}
//! ```
//!
//! `speaker_id`, `duration`, `region`, `verbatim` and `overlapping` are
//! optional in the file; the operations that need them reject entries
//! lacking them. Unknown fields are carried through untouched.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker_id: Option<String>,
    /// Seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbatim: Option<String>,
    #[serde(alias = "audio_path", alias = "audio_or_logits_path")]
    pub logits_path: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub overlapping: bool,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl ManifestEntry {
    fn speaker(&self) -> Result<&str> {
        match self.speaker_id.as_deref() {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(Error::Manifest(format!(
                "entry {} has no speaker_id",
                self.id
            ))),
        }
    }

    fn seconds(&self) -> Result<f64> {
        match self.duration {
            Some(d) if d > 0.0 && d.is_finite() => Ok(d),
            Some(d) => Err(Error::Manifest(format!(
                "entry {} has invalid duration {d}",
                self.id
            ))),
            None => Err(Error::Manifest(format!(
                "entry {} has no duration",
                self.id
            ))),
        }
    }
}

pub fn parse_manifest(reader: impl BufRead) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line)
            .map_err(|e| Error::Manifest(format!("line {}: {e}", n + 1)))?;
        out.push(entry);
    }
    Ok(out)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_manifest(std::io::BufReader::new(file))
}

pub fn write_manifest(mut out: impl Write, entries: &[ManifestEntry]) -> Result<()> {
    for e in entries {
        let line = serde_json::to_string(e).map_err(|e| Error::Manifest(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Keeps entries with `min_dur <= duration <= max_dur`, and drops
/// overlapping-speech entries when `drop_overlap` is set. Order is preserved.
pub fn filter_manifest(
    entries: &[ManifestEntry],
    min_dur: f64,
    max_dur: f64,
    drop_overlap: bool,
) -> Result<Vec<ManifestEntry>> {
    if min_dur.is_nan() || max_dur.is_nan() || min_dur >= max_dur {
        return Err(Error::InvalidBounds(format!(
            "min duration {min_dur} must be below max duration {max_dur}"
        )));
    }
    let mut out = Vec::new();
    for e in entries {
        let d = e.seconds()?;
        if (min_dur..=max_dur).contains(&d) && !(drop_overlap && e.overlapping) {
            out.push(e.clone());
        }
    }
    Ok(out)
}

/// 64-bit linear congruential generator (Knuth's MMIX constants):
/// `state = state * 6364136223846793005 + 1442695040888963407 (mod 2^64)`,
/// seeded with `state = seed`. Each draw advances once and returns the high
/// 32 bits of the new state.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        (self.state >> 32) as u32
    }

    /// Uniform in `0..n` via `(next_u32 * n) >> 32`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u32() as u64 * n as u64) >> 32) as usize
    }

    /// Uniform in `[0, 1)` with 32 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        self.next_u32() as f64 / 4294967296.0
    }
}

/// Splits by speaker: the sorted speaker set is Fisher-Yates shuffled with
/// [`Lcg64`] (for `i` from `n-1` down to 1, swap `i` with `below(i + 1)`), and
/// the first `round(train_fraction * n)` speakers go to train.
pub fn speaker_split(
    entries: &[ManifestEntry],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<ManifestEntry>, Vec<ManifestEntry>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidBounds(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let speakers: BTreeSet<&str> = entries
        .iter()
        .map(ManifestEntry::speaker)
        .collect::<Result<_>>()?;
    if speakers.len() < 2 {
        return Err(Error::TooFewSpeakers(speakers.len()));
    }
    let mut order: Vec<&str> = speakers.into_iter().collect();
    let mut rng = Lcg64::new(seed);
    for i in (1..order.len()).rev() {
        let j = rng.below(i + 1);
        order.swap(i, j);
    }
    let n_train = (train_fraction * order.len() as f64).round() as usize;
    let train_speakers: BTreeSet<&str> = order[..n_train].iter().copied().collect();

    let (train, dev) = entries
        .iter()
        .cloned()
        .partition(|e| train_speakers.contains(e.speaker_id.as_deref().unwrap_or_default()));
    Ok((train, dev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(id: &str, speaker: &str, duration: f64) -> ManifestEntry {
        ManifestEntry {
            id: id.into(),
            speaker_id: Some(speaker.into()),
            duration: Some(duration),
            region: None,
            target: "dyr".into(),
            verbatim: None,
            logits_path: format!("{id}.ctcl"),
            overlapping: false,
            extra: Default::default(),
        }
    }

    fn speakers(entries: &[ManifestEntry]) -> BTreeSet<String> {
        entries
            .iter()
            .map(|e| e.speaker_id.clone().unwrap())
            .collect()
    }

    #[test]
    fn duration_window() {
        let es = vec![
            entry("a", "s", 1.0),
            entry("b", "s", 7.0),
            entry("c", "s", 30.0),
        ];
        let kept = filter_manifest(&es, 2.0, 25.0, true).unwrap();
        assert_eq!(
            kept.iter().map(|e| e.id.as_str()).collect::<Vec<_>>(),
            vec!["b"]
        );
        assert!(filter_manifest(&[], 2.0, 25.0, true).unwrap().is_empty());
        let inside = vec![entry("a", "s", 2.0), entry("b", "s", 25.0)];
        assert_eq!(filter_manifest(&inside, 2.0, 25.0, true).unwrap(), inside);
        assert!(matches!(
            filter_manifest(&es, 5.0, 5.0, true),
            Err(Error::InvalidBounds(_))
        ));
    }

    #[test]
    fn overlap_flag() {
        let mut e = entry("a", "s", 5.0);
        e.overlapping = true;
        assert!(filter_manifest(&[e.clone()], 2.0, 25.0, true)
            .unwrap()
            .is_empty());
        assert_eq!(
            filter_manifest(&[e.clone()], 2.0, 25.0, false).unwrap(),
            vec![e]
        );
    }

    #[test]
    fn ten_speakers() {
        let es: Vec<_> = (0..30)
            .map(|i| entry(&format!("u{i}"), &format!("s{}", i % 10), 5.0))
            .collect();
        let (train, dev) = speaker_split(&es, 0.8, 7).unwrap();
        assert_eq!(speakers(&train).len(), 8);
        assert_eq!(speakers(&dev).len(), 2);
        assert!(speakers(&train).is_disjoint(&speakers(&dev)));
        assert_eq!(train.len() + dev.len(), 30);
        assert_eq!(speaker_split(&es, 0.8, 7).unwrap(), (train, dev));
    }

    #[test]
    fn corpus_sized_split() {
        let es: Vec<_> = (0..468)
            .map(|i| entry(&format!("u{i}"), &format!("spk{i:03}"), 5.0))
            .collect();
        let (train, dev) = speaker_split(&es, 0.82, 2024).unwrap();
        assert_eq!((speakers(&train).len(), speakers(&dev).len()), (384, 84));
        assert!(speakers(&train)
            .intersection(&speakers(&dev))
            .next()
            .is_none());
    }

    #[test]
    fn split_errors() {
        let one = vec![entry("a", "s", 5.0), entry("b", "s", 5.0)];
        assert_eq!(speaker_split(&one, 0.5, 0), Err(Error::TooFewSpeakers(1)));
        assert!(matches!(
            speaker_split(&one, 1.0, 0),
            Err(Error::InvalidBounds(_))
        ));
        let mut anon = entry("x", "s", 5.0);
        anon.speaker_id = None;
        assert!(matches!(
            speaker_split(&[anon], 0.5, 0),
            Err(Error::Manifest(_))
        ));
    }

    #[test]
    fn lcg_reference_sequence() {
        let mut rng = Lcg64::new(0);
        // state_1 = INCREMENT
        assert_eq!(rng.next_u32(), (Lcg64::INCREMENT >> 32) as u32);
        let s2 = Lcg64::INCREMENT
            .wrapping_mul(Lcg64::MULTIPLIER)
            .wrapping_add(Lcg64::INCREMENT);
        assert_eq!(rng.next_u32(), (s2 >> 32) as u32);
    }

    #[test]
    fn jsonl_round_trip_keeps_unknown_fields() {
        let text = "{\"id\":\"u1\",\"speaker_id\":\"s1\",\"duration\":3.5,\"target\":\"dyr\",\"audio_path\":\"a.wav\",\"gender\":\"f\"}\n\n";
        let es = parse_manifest(text.as_bytes()).unwrap();
        assert_eq!(es[0].logits_path, "a.wav");
        assert_eq!(es[0].extra["gender"], "f");
        let mut out = Vec::new();
        write_manifest(&mut out, &es).unwrap();
        assert_eq!(parse_manifest(out.as_slice()).unwrap(), es);
        assert!(parse_manifest("{oops}\n".as_bytes())
            .unwrap_err()
            .to_string()
            .contains("line 1"));
    }

    proptest! {
        #[test]
        fn split_is_order_invariant(seed in any::<u64>(), n in 2usize..20, shuffle_seed in any::<u64>()) {
            let es: Vec<_> = (0..n * 2).map(|i| entry(&format!("u{i}"), &format!("s{}", i % n), 5.0)).collect();
            let mut shuffled = es.clone();
            let mut rng = Lcg64::new(shuffle_seed);
            for i in (1..shuffled.len()).rev() {
                let j = rng.below(i + 1);
                shuffled.swap(i, j);
            }
            let (a, _) = speaker_split(&es, 0.5, seed).unwrap();
            let (b, _) = speaker_split(&shuffled, 0.5, seed).unwrap();
            prop_assert_eq!(speakers(&a), speakers(&b));
        }
    }
}
