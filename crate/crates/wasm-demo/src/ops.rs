use pronscore::demo::{self, SyntheticCorpusConfig};
use pronscore::evaluation::{evaluate_corpus, EvalItem};
use pronscore::{calibrate_row, score_transcript, CalibrationConfig, WordAggregation};

pub const FIXTURES: [&str; 2] = ["dyr_correct", "dyr_swap"];

pub fn calibrate(posteriors: &[f64], temperature: f64, k: usize) -> Result<Vec<f64>, String> {
    if posteriors.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
        return Err("posteriors must be positive".into());
    }
    let total: f64 = posteriors.iter().sum();
    let z: Vec<f64> = posteriors.iter().map(|p| (p / total).ln()).collect();
    let config = CalibrationConfig {
        temperature,
        k,
        ..Default::default()
    };
    calibrate_row(&z, &config).map_err(|e| e.to_string())
}

pub fn score_fixture(name: &str, temperature: f64, k: usize, theta: f64) -> Result<String, String> {
    let logits = match name {
        "dyr_correct" => demo::dyr_correct(),
        "dyr_swap" => demo::dyr_y_swap(),
        other => return Err(format!("unknown fixture {other:?}")),
    };
    let config = CalibrationConfig {
        temperature,
        k,
        theta,
        ..Default::default()
    };
    let scored = score_transcript(&logits, "dyr", &demo::vocabulary(), &config)
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&scored).map_err(|e| e.to_string())
}

/// Temperature 0 is allowed here and means "uncalibrated".
pub fn sweep_curve(temperatures: &[f64], utterances: usize, seed: u64) -> Result<String, String> {
    let vocab = demo::vocabulary();
    let config = SyntheticCorpusConfig {
        utterances,
        seed,
        ..Default::default()
    };
    let items = demo::synthetic_corpus(config)
        .into_iter()
        .map(|u| EvalItem::from_transcripts(u.id, vocab.clone(), u.logits, &u.target, &u.verbatim))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let points = temperatures
        .iter()
        .map(|&t| {
            let cfg = CalibrationConfig::default().with_temperature(t);
            let report = evaluate_corpus(&items, &cfg, WordAggregation::Min).map_err(|e| e.to_string())?;
            Ok(serde_json::json!({
                "T": t,
                "character": {"precision": report.character.precision, "recall": report.character.recall},
                "word": {"precision": report.word.precision, "recall": report.word.recall},
            }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn explorer_matches_reference_row() {
        let s = calibrate(&[0.998, 1e-3, 1e-5, 9.9e-4], 10.0, 3).unwrap();
        assert_eq!(s[0], 1.0);
        assert!((s[1] - 0.5).abs() < 0.01);
        assert!((s[2] - 1e-5).abs() < 1e-7);
        assert!(calibrate(&[0.5, 0.0], 10.0, 1).is_err());
        assert!(calibrate(&[0.5, 0.5], -1.0, 1).is_err());
    }

    #[test]
    fn unnormalized_input_is_rescaled() {
        assert_eq!(
            calibrate(&[2.0, 2.0], 1.0, 1).unwrap(),
            calibrate(&[0.5, 0.5], 1.0, 1).unwrap()
        );
    }

    #[test]
    fn fixture_verdicts_follow_temperature() {
        let verdict = |name, t| {
            let v: Value = serde_json::from_str(&score_fixture(name, t, 3, 0.5).unwrap()).unwrap();
            v["words"][0]["verdict"].as_str().unwrap().to_string()
        };
        assert_eq!(verdict("dyr_correct", 10.0), "correct");
        assert_eq!(verdict("dyr_swap", 0.0), "mispronounced");
        assert_eq!(verdict("dyr_swap", 10.0), "partial");
        assert!(score_fixture("nope", 1.0, 3, 0.5).is_err());
    }

    #[test]
    fn sweep_recall_falls_with_temperature() {
        let v: Value =
            serde_json::from_str(&sweep_curve(&[0.0, 1.0, 10.0], 40, 2).unwrap()).unwrap();
        let recall: Vec<f64> = v
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["character"]["recall"].as_f64().unwrap())
            .collect();
        assert!(recall.windows(2).all(|w| w[1] <= w[0]), "{recall:?}");
    }
}
