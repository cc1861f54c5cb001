//! Scoring a detector against verbatim transcriptions.

mod edit;
mod labels;
mod metrics;
mod sweep;
mod ztest;

use serde::{Deserialize, Serialize};

pub use edit::{edit_script, EditOp};
pub use labels::{derive_labels, MispronunciationLabels};
pub use metrics::{compute_metrics, count_confusions, ConfusionCounts, MetricReport};
pub use sweep::{evaluate_corpus, sweep_temperature, CorpusReport, EvalItem, SweepPoint};
pub use ztest::{normal_cdf, proportion_ztest, Direction, ProportionTestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    #[serde(alias = "char")]
    Character,
    Word,
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Level::Character => "character",
            Level::Word => "word",
        })
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "char" | "character" => Ok(Level::Character),
            "word" => Ok(Level::Word),
            other => Err(format!("unknown level {other:?} (expected char or word)")),
        }
    }
}
