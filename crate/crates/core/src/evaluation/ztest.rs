use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// H1: the detected rate is below the reference.
    Less,
    /// H1: the detected rate is above the reference.
    Greater,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "less" => Ok(Direction::Less),
            "greater" => Ok(Direction::Greater),
            other => Err(format!(
                "unknown direction {other:?} (expected less or greater)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionTestResult {
    pub count: u64,
    pub detected: u64,
    pub detected_rate: f64,
    pub reference_rate: f64,
    pub z: f64,
    pub p_value: f64,
    pub direction: Direction,
}

/// Standard normal CDF, `erfc(-z / sqrt 2) / 2`. Using the complementary
/// error function keeps full relative precision deep in the lower tail.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// One-sample, one-sided z-test of a detected proportion against a known
/// reference rate, with the standard error taken under the null.
pub fn proportion_ztest(
    detected: u64,
    n: u64,
    reference_rate: f64,
    direction: Direction,
) -> Result<ProportionTestResult> {
    if n == 0 {
        return Err(Error::ZeroSample);
    }
    if !(reference_rate > 0.0 && reference_rate < 1.0) {
        return Err(Error::DegenerateReference(reference_rate));
    }
    if detected > n {
        return Err(Error::InvalidConfig(format!(
            "detected count {detected} exceeds sample size {n}"
        )));
    }
    let rate = detected as f64 / n as f64;
    let se = (reference_rate * (1.0 - reference_rate) / n as f64).sqrt();
    let z = (rate - reference_rate) / se;
    let p_value = match direction {
        Direction::Less => normal_cdf(z),
        Direction::Greater => normal_cdf(-z),
    };
    Ok(ProportionTestResult {
        count: n,
        detected,
        detected_rate: rate,
        reference_rate,
        z,
        p_value,
        direction,
    })
}
