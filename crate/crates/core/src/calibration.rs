//! Temperature scaling with top-k normalization, and the verdicts built on it.
//!
//! For one frame's logits `z` and temperature `T > 0`:
//!
//! 1. `P = softmax(z / T)`.
//! 2. The `k` labels with the largest `P` are rescored as `P_i / P_top1`, so
//!    the top label scores exactly 1 and the runners-up move towards it.
//! 3. Every other label keeps its raw (temperature 1) posterior.
//!
//! `T = 0` switches calibration off and every label scores its raw posterior.
//! Because `P_i / P_top1 = exp((z_i - z_max) / T)`, a top-k score only grows
//! with `T`, and top-k membership depends on logit order alone. Raising the
//! temperature therefore never flags a unit that a lower temperature passed.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::alignment::{align_words, forced_align_text};
use crate::error::{Error, Result};
use crate::evaluation::Level;
use crate::math;
use crate::vocab::{LogitMatrix, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct PartialBand {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for PartialBand {
    fn from([lo, hi]: [f64; 2]) -> Self {
        PartialBand { lo, hi }
    }
}

impl From<PartialBand> for [f64; 2] {
    fn from(b: PartialBand) -> Self {
        [b.lo, b.hi]
    }
}

impl PartialBand {
    pub fn contains(&self, score: f64) -> bool {
        self.lo <= score && score < self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Temperature; 0 disables calibration.
    #[serde(rename = "T")]
    pub temperature: f64,
    pub k: usize,
    pub theta: f64,
    /// Half-open `[lo, hi)` band of scores reported as partially correct.
    pub partial: Option<PartialBand>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            temperature: 10.0,
            k: 3,
            theta: 0.5,
            partial: Some(PartialBand { lo: 0.5, hi: 0.75 }),
        }
    }
}

impl CalibrationConfig {
    pub fn with_temperature(self, temperature: f64) -> Self {
        CalibrationConfig {
            temperature,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "T must be finite and >= 0, got {}",
                self.temperature
            )));
        }
        if self.k == 0 {
            return Err(Error::KZero);
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidConfig(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        if let Some(band) = self.partial {
            if !(self.theta <= band.lo && band.lo < band.hi && band.hi <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "partial band [{}, {}) must satisfy theta <= lo < hi <= 1",
                    band.lo, band.hi
                )));
            }
        }
        Ok(())
    }

    pub fn verdict(&self, score: f64) -> Verdict {
        if score < self.theta {
            Verdict::Mispronounced
        } else if self.partial.is_some_and(|b| b.contains(score)) {
            Verdict::Partial
        } else {
            Verdict::Correct
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Mispronounced,
    Partial,
    Correct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordAggregation {
    #[default]
    Min,
    Mean,
}

/// Calibrated score for every label of one logit row.
pub fn calibrate_row(z: &[f64], config: &CalibrationConfig) -> Result<Vec<f64>> {
    if !(config.temperature.is_finite() && config.temperature >= 0.0) {
        return Err(Error::NonPositiveTemperature(config.temperature));
    }
    if config.k == 0 {
        return Err(Error::KZero);
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mut scores = math::softmax_temperature(z, 1.0)?;
    if config.temperature == 0.0 {
        return Ok(scores);
    }
    // P_i / P_top1 = exp((z_i - z_max) / T). Ranking by z keeps top-k
    // membership identical for every T; the stable sort puts the lowest
    // index first among equal logits.
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]));
    let z_max = z[order[0]];
    for &i in order.iter().take(config.k) {
        scores[i] = ((z[i] - z_max) / config.temperature).exp();
    }
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenScore {
    pub token: crate::alignment::AlignedToken,
    pub score: f64,
    pub verdict: Verdict,
}

impl Serialize for TokenScore {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            ch: &'a str,
            index: usize,
            score: f64,
            verdict: Verdict,
            frame: usize,
        }
        Wire {
            ch: &self.token.label,
            index: self.token.target_index,
            score: self.score,
            verdict: self.verdict,
            frame: self.token.emission_frame,
        }
        .serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordScore {
    pub text: String,
    pub score: f64,
    pub verdict: Verdict,
    /// Range into `ScoredTranscript::tokens`.
    #[serde(skip)]
    pub tokens: Range<usize>,
}

/// Per-character and per-word verdicts for one utterance. Space tokens are
/// not scored and do not appear in `tokens`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredTranscript {
    pub target: String,
    pub tokens: Vec<TokenScore>,
    pub words: Vec<WordScore>,
    pub config: CalibrationConfig,
}

impl ScoredTranscript {
    /// Indices of Mispronounced units: positions in `tokens` for characters,
    /// positions in `words` for words.
    pub fn flagged_units(&self, level: Level) -> BTreeSet<usize> {
        match level {
            Level::Character => self
                .tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| t.verdict == Verdict::Mispronounced)
                .map(|(i, _)| i)
                .collect(),
            Level::Word => self
                .words
                .iter()
                .enumerate()
                .filter(|(_, w)| w.verdict == Verdict::Mispronounced)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn unit_count(&self, level: Level) -> usize {
        match level {
            Level::Character => self.tokens.len(),
            Level::Word => self.words.len(),
        }
    }
}

/// Target indices of every Mispronounced character.
pub fn flagged_tokens(scored: &ScoredTranscript) -> BTreeSet<usize> {
    scored
        .tokens
        .iter()
        .filter(|t| t.verdict == Verdict::Mispronounced)
        .map(|t| t.token.target_index)
        .collect()
}

pub fn score_transcript(
    logits: &LogitMatrix,
    target_text: &str,
    vocab: &Vocabulary,
    config: &CalibrationConfig,
) -> Result<ScoredTranscript> {
    score_transcript_with(logits, target_text, vocab, config, WordAggregation::Min)
}

/// Aligns `target_text`, reads each character's calibrated score at its
/// emission frame and aggregates words with `aggregation`.
pub fn score_transcript_with(
    logits: &LogitMatrix,
    target_text: &str,
    vocab: &Vocabulary,
    config: &CalibrationConfig,
    aggregation: WordAggregation,
) -> Result<ScoredTranscript> {
    config.validate()?;
    let path = forced_align_text(logits, target_text, vocab)?;
    let words = align_words(&path, target_text)?;

    // position in the space-free token list for each aligned token
    let mut kept = vec![usize::MAX; path.tokens.len()];
    let mut tokens = Vec::with_capacity(path.tokens.len());
    for (i, tok) in path.tokens.iter().enumerate() {
        if path.is_space(i) {
            continue;
        }
        let row = calibrate_row(logits.row(tok.emission_frame), config)?;
        let score = row[tok.label_index].clamp(0.0, 1.0);
        kept[i] = tokens.len();
        tokens.push(TokenScore {
            token: tok.clone(),
            score,
            verdict: config.verdict(score),
        });
    }

    let words = words
        .into_iter()
        .map(|w| {
            let range = kept[w.tokens.start]..kept[w.tokens.end - 1] + 1;
            let scores = tokens[range.clone()].iter().map(|t| t.score);
            let score = match aggregation {
                WordAggregation::Min => scores.fold(1.0, f64::min),
                WordAggregation::Mean => scores.sum::<f64>() / range.len() as f64,
            };
            WordScore {
                text: w.text,
                score,
                verdict: config.verdict(score),
                tokens: range,
            }
        })
        .collect();

    Ok(ScoredTranscript {
        target: crate::text::normalize(target_text),
        tokens,
        words,
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn reference_row() -> Vec<f64> {
        [0.998f64, 1e-3, 1e-5, 9.9e-4]
            .iter()
            .map(|p| p.ln())
            .collect()
    }

    #[test]
    fn negative_temperature_is_rejected() {
        let cfg = CalibrationConfig {
            temperature: -1.0,
            ..Default::default()
        };
        assert_eq!(
            calibrate_row(&reference_row(), &cfg),
            Err(Error::NonPositiveTemperature(-1.0))
        );
        let cfg = CalibrationConfig {
            temperature: f64::NAN,
            ..Default::default()
        };
        assert!(calibrate_row(&reference_row(), &cfg).is_err());
    }

    #[test]
    fn overconfident_row_at_t10_k3() {
        let cfg = CalibrationConfig {
            temperature: 10.0,
            k: 3,
            ..Default::default()
        };
        let s = calibrate_row(&reference_row(), &cfg).unwrap();
        assert_eq!(s[0], 1.0);
        for (got, want) in s.iter().zip([1.0, 0.5, 1e-5, 0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 0.01);
        }
        // exact: (p_i / p_top)^(1/T)
        assert_abs_diff_eq!(s[1], (1e-3f64 / 0.998).powf(0.1), epsilon = 1e-12);
        assert_abs_diff_eq!(s[3], (9.9e-4f64 / 0.998).powf(0.1), epsilon = 1e-12);
        // K keeps its raw posterior, not its softened one (~0.136)
        let raw = math::softmax_temperature(&reference_row(), 1.0).unwrap();
        assert_abs_diff_eq!(s[2], raw[2], epsilon = 1e-15);
        assert_abs_diff_eq!(s[2], 1e-5, epsilon = 1e-9);
    }

    #[test]
    fn k1_keeps_raw_posteriors() {
        let z = [0.3, 2.0, -1.0, 0.7];
        let cfg = CalibrationConfig {
            temperature: 4.0,
            k: 1,
            ..Default::default()
        };
        let s = calibrate_row(&z, &cfg).unwrap();
        let raw = math::softmax_temperature(&z, 1.0).unwrap();
        assert_eq!(s[1], 1.0);
        for i in [0, 2, 3] {
            assert_eq!(s[i], raw[i]);
        }
    }

    #[test]
    fn uniform_row_ties_go_to_lowest_indices() {
        let cfg = CalibrationConfig {
            temperature: 5.0,
            k: 3,
            ..Default::default()
        };
        let s = calibrate_row(&[0.7; 6], &cfg).unwrap();
        assert_eq!(&s[..3], &[1.0, 1.0, 1.0]);
        for &x in &s[3..] {
            assert_abs_diff_eq!(x, 1.0 / 6.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_temperature_is_raw() {
        let cfg = CalibrationConfig {
            temperature: 0.0,
            ..Default::default()
        };
        assert_eq!(
            calibrate_row(&reference_row(), &cfg).unwrap(),
            math::softmax_temperature(&reference_row(), 1.0).unwrap()
        );
    }

    #[test]
    fn k_larger_than_row_is_fine() {
        let cfg = CalibrationConfig {
            temperature: 2.0,
            k: 10,
            ..Default::default()
        };
        let s = calibrate_row(&[1.0, 0.0], &cfg).unwrap();
        assert_eq!(s[0], 1.0);
        assert_abs_diff_eq!(s[1], (-0.5f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn row_errors() {
        let cfg = CalibrationConfig {
            k: 0,
            ..Default::default()
        };
        assert_eq!(calibrate_row(&[0.0], &cfg), Err(Error::KZero));
        assert_eq!(
            calibrate_row(&[f64::NAN], &CalibrationConfig::default()),
            Err(Error::NonFiniteInput)
        );
    }

    #[test]
    fn config_validation() {
        assert!(CalibrationConfig::default().validate().is_ok());
        let bad = [
            CalibrationConfig {
                temperature: -1.0,
                ..Default::default()
            },
            CalibrationConfig {
                theta: 1.5,
                ..Default::default()
            },
            CalibrationConfig {
                partial: Some(PartialBand { lo: 0.4, hi: 0.75 }),
                ..Default::default()
            },
            CalibrationConfig {
                partial: Some(PartialBand { lo: 0.8, hi: 0.75 }),
                ..Default::default()
            },
            CalibrationConfig {
                partial: Some(PartialBand { lo: 0.5, hi: 1.2 }),
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert_eq!(
            CalibrationConfig {
                k: 0,
                ..Default::default()
            }
            .validate(),
            Err(Error::KZero)
        );
    }

    #[test]
    fn verdict_bands() {
        let cfg = CalibrationConfig::default();
        assert_eq!(cfg.verdict(0.49), Verdict::Mispronounced);
        assert_eq!(cfg.verdict(0.5), Verdict::Partial);
        assert_eq!(cfg.verdict(0.749), Verdict::Partial);
        assert_eq!(cfg.verdict(0.75), Verdict::Correct);
        let no_band = CalibrationConfig {
            partial: None,
            ..cfg
        };
        assert_eq!(no_band.verdict(0.5), Verdict::Correct);
    }

    #[test]
    fn config_json() {
        let json = serde_json::to_value(CalibrationConfig::default()).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"T": 10.0, "k": 3, "theta": 0.5, "partial": [0.5, 0.75]})
        );
    }

    #[test]
    fn perfect_evidence_scores_one() {
        let vocab = demo::vocabulary();
        let scored = score_transcript(
            &demo::dyr_correct(),
            "dyr",
            &vocab,
            &CalibrationConfig::default(),
        )
        .unwrap();
        assert!(scored
            .tokens
            .iter()
            .all(|t| t.score == 1.0 && t.verdict == Verdict::Correct));
        assert_eq!(scored.words.len(), 1);
        assert_eq!(scored.words[0].verdict, Verdict::Correct);
        assert!(flagged_tokens(&scored).is_empty());
    }

    #[test]
    fn swapped_vowel_is_partial_when_calibrated() {
        let vocab = demo::vocabulary();
        let logits = demo::dyr_y_swap();
        let scored =
            score_transcript(&logits, "dyr", &vocab, &CalibrationConfig::default()).unwrap();
        let y = &scored.tokens[1];
        assert_eq!(y.token.label, "y");
        assert_abs_diff_eq!(y.score, 0.501, epsilon = 0.01);
        assert_eq!(y.verdict, Verdict::Partial);
        assert_eq!(scored.words[0].verdict, Verdict::Partial);
        assert!(flagged_tokens(&scored).is_empty());

        let baseline = CalibrationConfig {
            temperature: 0.0,
            ..Default::default()
        };
        let scored = score_transcript(&logits, "dyr", &vocab, &baseline).unwrap();
        assert_abs_diff_eq!(scored.tokens[1].score, 1e-3, epsilon = 1e-5);
        assert_eq!(scored.words[0].verdict, Verdict::Mispronounced);
        assert_eq!(flagged_tokens(&scored), BTreeSet::from([1]));
    }

    #[test]
    fn spaces_are_not_scored() {
        let vocab = demo::vocabulary();
        let logits = demo::spell("vill du", 30.0);
        let scored =
            score_transcript(&logits, "Vill du", &vocab, &CalibrationConfig::default()).unwrap();
        assert_eq!(scored.tokens.len(), 6);
        assert_eq!(
            scored
                .words
                .iter()
                .map(|w| w.text.as_str())
                .collect::<Vec<_>>(),
            vec!["vill", "du"]
        );
        assert_eq!(scored.words[1].tokens, 4..6);
        assert_eq!(scored.tokens[4].token.target_index, 5);
        let json = serde_json::to_value(&scored).unwrap();
        assert_eq!(
            json["tokens"][0],
            serde_json::json!({"ch": "v", "index": 0, "score": 1.0, "verdict": "correct", "frame": 1})
        );
        assert_eq!(
            json["words"][1],
            serde_json::json!({"text": "du", "score": 1.0, "verdict": "correct"})
        );
    }

    #[test]
    fn mean_aggregation() {
        let vocab = demo::vocabulary();
        let baseline = CalibrationConfig {
            temperature: 0.0,
            ..Default::default()
        };
        let scored = score_transcript_with(
            &demo::dyr_y_swap(),
            "dyr",
            &vocab,
            &baseline,
            WordAggregation::Mean,
        )
        .unwrap();
        let mean = scored.tokens.iter().map(|t| t.score).sum::<f64>() / 3.0;
        assert_abs_diff_eq!(scored.words[0].score, mean, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn scores_in_unit_interval_and_top1_is_one(
            z in prop::collection::vec(-30.0f64..30.0, 1..12),
            t in prop_oneof![Just(0.0), 0.01f64..200.0],
            k in 1usize..6,
        ) {
            let cfg = CalibrationConfig { temperature: t, k, ..Default::default() };
            let s = calibrate_row(&z, &cfg).unwrap();
            prop_assert!(s.iter().all(|&x| (0.0..=1.0).contains(&x)));
            if t > 0.0 {
                prop_assert_eq!(s[math::argmax(&z)], 1.0);
            }
        }

        #[test]
        fn top_k_ratio_identity(z in prop::collection::vec(-10.0f64..10.0, 2..10), t in 0.5f64..50.0, k in 1usize..5) {
            let cfg = CalibrationConfig { temperature: t, k, ..Default::default() };
            let s = calibrate_row(&z, &cfg).unwrap();
            let p = math::softmax_temperature(&z, 1.0).unwrap();
            let top = math::argmax(&z);
            let mut order: Vec<usize> = (0..z.len()).collect();
            order.sort_by(|&a, &b| z[b].total_cmp(&z[a]));
            for &i in order.iter().take(k) {
                let want = (p[i] / p[top]).powf(1.0 / t);
                prop_assert!((s[i] / s[top] - want).abs() < 1e-9);
            }
        }

        #[test]
        fn score_non_decreasing_in_temperature(z in prop::collection::vec(-10.0f64..10.0, 2..10), t1 in 0.1f64..50.0, dt in 0.0f64..50.0) {
            let base = CalibrationConfig::default();
            let lo = calibrate_row(&z, &base.with_temperature(t1)).unwrap();
            let hi = calibrate_row(&z, &base.with_temperature(t1 + dt)).unwrap();
            let raw = calibrate_row(&z, &base.with_temperature(0.0)).unwrap();
            for i in 0..z.len() {
                prop_assert!(hi[i] >= lo[i] - 1e-12);
                // (p_i / p_top)^(1/T) >= p_i only once T >= 1
                if t1 >= 1.0 {
                    prop_assert!(lo[i] >= raw[i] - 1e-12);
                }
            }
        }
    }
}
