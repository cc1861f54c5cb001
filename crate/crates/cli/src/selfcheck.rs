//! Reference examples and shipped fixtures, re-run against this build.

use pronscore::ctcl::CtclContainer;
use pronscore::evaluation::{proportion_ztest, Direction};
use pronscore::{calibrate_row, score_transcript, CalibrationConfig, Verdict};
use serde::Serialize;

const DYR_CORRECT: &[u8] = include_bytes!("../../../fixtures/dyr_correct.ctcl");
const DYR_SWAP: &[u8] = include_bytes!("../../../fixtures/dyr_swap.ctcl");

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run() -> Report {
    let mut checks = vec![reference_row()];
    checks.extend(ztest_rows());
    checks.extend(fixtures());
    Report {
        passed: checks.iter().all(|c| c.pass),
        checks,
    }
}

fn check(name: &str, outcome: Result<String, String>) -> Check {
    match outcome {
        Ok(detail) => Check {
            name: name.into(),
            pass: true,
            detail,
        },
        Err(detail) => Check {
            name: name.into(),
            pass: false,
            detail,
        },
    }
}

fn reference_row() -> Check {
    let raw = [0.998f64, 1e-3, 1e-5, 9.9e-4];
    let want = [1.0, 0.5, 1e-5, 0.5];
    let z: Vec<f64> = raw.iter().map(|p| p.ln()).collect();
    let cfg = CalibrationConfig {
        temperature: 10.0,
        k: 3,
        ..Default::default()
    };
    let outcome = calibrate_row(&z, &cfg)
        .map_err(|e| e.to_string())
        .and_then(|got| {
            let detail = format!("{got:.4?} vs {want:?}");
            if got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 0.01) {
                Ok(detail)
            } else {
                Err(detail)
            }
        });
    check("calibrate_row T=10 k=3", outcome)
}

/// Reported p-values are given to one significant figure; a row passes
/// when the computed value is within one unit of that digit.
fn ztest_rows() -> Vec<Check> {
    let rows = [
        (0.052, 230u64, 0.120, Direction::Less, 8e-4, 1e-4),
        (0.064, 172, 0.158, Direction::Less, 3e-4, 1e-4),
        (0.316, 187, 0.141, Direction::Greater, 4e-12, 1e-12),
    ];
    rows.iter()
        .map(|&(rate, n, p0, dir, want, unit)| {
            let detected = (rate * n as f64).round() as u64;
            let outcome = proportion_ztest(detected, n, p0, dir)
                .map_err(|e| e.to_string())
                .and_then(|r| {
                    let detail = format!("z = {:.3}, p = {:.3e} vs {want:e}", r.z, r.p_value);
                    if (r.p_value - want).abs() < unit {
                        Ok(detail)
                    } else {
                        Err(detail)
                    }
                });
            check(&format!("ztest {detected}/{n} vs {p0}"), outcome)
        })
        .collect()
}

fn fixtures() -> Vec<Check> {
    let cases = [
        (
            "fixture dyr_correct T=10",
            DYR_CORRECT,
            10.0,
            Verdict::Correct,
        ),
        ("fixture dyr_swap T=10", DYR_SWAP, 10.0, Verdict::Partial),
        (
            "fixture dyr_swap T=0",
            DYR_SWAP,
            0.0,
            Verdict::Mispronounced,
        ),
    ];
    cases
        .iter()
        .map(|&(name, bytes, t, want)| {
            let outcome = CtclContainer::from_bytes(bytes)
                .and_then(|c| {
                    let cfg = CalibrationConfig::default().with_temperature(t);
                    score_transcript(&c.logits, "dyr", &c.vocab, &cfg)
                })
                .map_err(|e| e.to_string())
                .and_then(|s| {
                    let got = s.words[0].verdict;
                    let detail = format!("word verdict {got:?}, score {:.4}", s.words[0].score);
                    if got == want {
                        Ok(detail)
                    } else {
                        Err(detail)
                    }
                });
            check(name, outcome)
        })
        .collect()
}
