use serde::{Deserialize, Serialize};

use super::labels::{derive_labels, MispronunciationLabels};
use super::metrics::{compute_metrics, count_confusions, ConfusionCounts, MetricReport};
use super::Level;
use crate::calibration::{
    score_transcript_with, CalibrationConfig, ScoredTranscript, WordAggregation,
};
use crate::error::{Error, Result};
use crate::vocab::{LogitMatrix, Vocabulary};

/// One labelled utterance ready for scoring.
#[derive(Debug, Clone)]
pub struct EvalItem {
    pub id: String,
    pub vocab: Vocabulary,
    pub logits: LogitMatrix,
    pub labels: MispronunciationLabels,
}

impl EvalItem {
    /// Builds an item whose labels come from diffing `target` against `verbatim`.
    pub fn from_transcripts(
        id: impl Into<String>,
        vocab: Vocabulary,
        logits: LogitMatrix,
        target: &str,
        verbatim: &str,
    ) -> Result<Self> {
        let id = id.into();
        let labels = derive_labels(target, verbatim).map_err(|e| tag(&id, e))?;
        Ok(EvalItem {
            id,
            vocab,
            logits,
            labels,
        })
    }

    pub fn score(
        &self,
        config: &CalibrationConfig,
        aggregation: WordAggregation,
    ) -> Result<ScoredTranscript> {
        score_transcript_with(
            &self.logits,
            &self.labels.target_text,
            &self.vocab,
            config,
            aggregation,
        )
        .map_err(|e| tag(&self.id, e))
    }

    /// Confusion counts at character and word level.
    pub fn confusions(
        &self,
        config: &CalibrationConfig,
        aggregation: WordAggregation,
    ) -> Result<(ConfusionCounts, ConfusionCounts)> {
        let scored = self.score(config, aggregation)?;
        let chars = count_confusions(
            &scored.flagged_units(Level::Character),
            &self.labels,
            Level::Character,
        )
        .and_then(|c| {
            check_units(
                c,
                self.labels.char_labels.len(),
                scored.unit_count(Level::Character),
            )
        })
        .map_err(|e| tag(&self.id, e))?;
        let words = count_confusions(
            &scored.flagged_units(Level::Word),
            &self.labels,
            Level::Word,
        )
        .and_then(|c| {
            check_units(
                c,
                self.labels.word_labels.len(),
                scored.unit_count(Level::Word),
            )
        })
        .map_err(|e| tag(&self.id, e))?;
        Ok((chars, words))
    }
}

fn check_units(c: ConfusionCounts, labelled: usize, scored: usize) -> Result<ConfusionCounts> {
    if labelled != scored {
        return Err(Error::SegmentationMismatch(format!(
            "{scored} scored units vs {labelled} labelled"
        )));
    }
    Ok(c)
}

fn tag(id: &str, e: Error) -> Error {
    match e {
        Error::Utterance { .. } => e,
        other => Error::Utterance {
            id: id.to_string(),
            source: Box::new(other),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub character: MetricReport,
    pub word: MetricReport,
}

impl CorpusReport {
    pub fn level(&self, level: Level) -> &MetricReport {
        match level {
            Level::Character => &self.character,
            Level::Word => &self.word,
        }
    }
}

/// Sums per-utterance counts and reports metrics at both levels.
pub fn evaluate_corpus(
    items: &[EvalItem],
    config: &CalibrationConfig,
    aggregation: WordAggregation,
) -> Result<CorpusReport> {
    let mut chars = ConfusionCounts::default();
    let mut words = ConfusionCounts::default();
    for item in items {
        let (c, w) = item.confusions(config, aggregation)?;
        chars = chars + c;
        words = words + w;
    }
    Ok(CorpusReport {
        character: compute_metrics(&chars, Level::Character),
        word: compute_metrics(&words, Level::Word),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub character: MetricReport,
    pub word: MetricReport,
}

/// Evaluates the corpus at each temperature, all other settings fixed.
/// Temperatures must be positive and ascending.
pub fn sweep_temperature(
    items: &[EvalItem],
    temperatures: &[f64],
    base: &CalibrationConfig,
    aggregation: WordAggregation,
) -> Result<Vec<SweepPoint>> {
    if temperatures.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
        return Err(Error::InvalidConfig(
            "sweep temperatures must be positive and finite".into(),
        ));
    }
    if temperatures.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig(
            "sweep temperatures must be sorted ascending".into(),
        ));
    }
    temperatures
        .iter()
        .map(|&t| {
            let report = evaluate_corpus(items, &base.with_temperature(t), aggregation)?;
            Ok(SweepPoint {
                temperature: t,
                character: report.character,
                word: report.word,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;

    fn corpus() -> Vec<EvalItem> {
        let v = demo::vocabulary();
        vec![
            EvalItem::from_transcripts("ok", v.clone(), demo::dyr_correct(), "dyr", "dyr").unwrap(),
            EvalItem::from_transcripts("swap", v, demo::dyr_y_swap(), "dyr", "dir").unwrap(),
        ]
    }

    #[test]
    fn single_temperature_matches_direct_evaluation() {
        let items = corpus();
        let base = CalibrationConfig::default();
        let sweep = sweep_temperature(&items, &[10.0], &base, WordAggregation::Min).unwrap();
        let direct = evaluate_corpus(&items, &base, WordAggregation::Min).unwrap();
        assert_eq!(sweep[0].character, direct.character);
        assert_eq!(sweep[0].word, direct.word);
    }

    #[test]
    fn perfect_utterances_are_constant_in_temperature() {
        let items = &corpus()[..1];
        let sweep = sweep_temperature(
            items,
            &[1.0, 5.0, 10.0, 50.0],
            &CalibrationConfig::default(),
            WordAggregation::Min,
        )
        .unwrap();
        assert!(sweep
            .windows(2)
            .all(|w| w[0].character == w[1].character && w[0].word == w[1].word));
    }

    #[test]
    fn baseline_catches_the_swap() {
        let items = corpus();
        let base = CalibrationConfig::default().with_temperature(0.0);
        let r = evaluate_corpus(&items, &base, WordAggregation::Min).unwrap();
        assert_eq!(r.character.counts.true_rejections, 1);
        assert_eq!(r.word.recall, 1.0);
        let r =
            evaluate_corpus(&items, &CalibrationConfig::default(), WordAggregation::Min).unwrap();
        assert_eq!(r.word.recall, 0.0);
    }

    #[test]
    fn bad_temperature_lists() {
        let items = corpus();
        let base = CalibrationConfig::default();
        assert!(sweep_temperature(&items, &[0.0, 1.0], &base, WordAggregation::Min).is_err());
        assert!(sweep_temperature(&items, &[5.0, 1.0], &base, WordAggregation::Min).is_err());
    }

    #[test]
    fn errors_name_the_utterance() {
        let v = demo::vocabulary();
        let item =
            EvalItem::from_transcripts("u7", v, demo::dyr_correct(), "jag tycker", "jag tycker")
                .unwrap();
        let err = evaluate_corpus(&[item], &CalibrationConfig::default(), WordAggregation::Min)
            .unwrap_err();
        assert!(err.to_string().starts_with("utterance u7:"), "{err}");
    }
}
