use std::collections::BTreeSet;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use super::labels::MispronunciationLabels;
use super::Level;
use crate::error::{Error, Result};

/// Detector outcomes over labelled units. A "rejection" is a flagged unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    /// Mispronounced and flagged.
    #[serde(rename = "TR")]
    pub true_rejections: u64,
    /// Mispronounced, not flagged.
    #[serde(rename = "FA")]
    pub false_acceptances: u64,
    /// Correct, flagged.
    #[serde(rename = "FR")]
    pub false_rejections: u64,
    /// Correct, not flagged.
    #[serde(rename = "TA")]
    pub true_acceptances: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_rejections
            + self.false_acceptances
            + self.false_rejections
            + self.true_acceptances
    }
}

impl Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, o: Self) -> Self {
        ConfusionCounts {
            true_rejections: self.true_rejections + o.true_rejections,
            false_acceptances: self.false_acceptances + o.false_acceptances,
            false_rejections: self.false_rejections + o.false_rejections,
            true_acceptances: self.true_acceptances + o.true_acceptances,
        }
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ConfusionCounts::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub level: Level,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
}

/// Tallies flagged unit indices against labels at `level`.
pub fn count_confusions(
    flagged: &BTreeSet<usize>,
    labels: &MispronunciationLabels,
    level: Level,
) -> Result<ConfusionCounts> {
    let units = labels.units(level);
    if let Some(&bad) = flagged.iter().find(|&&i| i >= units.len()) {
        return Err(Error::SegmentationMismatch(format!(
            "flagged unit {bad} but only {} {level:?} units are labelled",
            units.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (i, &mispronounced) in units.iter().enumerate() {
        match (flagged.contains(&i), mispronounced) {
            (true, true) => c.true_rejections += 1,
            (false, true) => c.false_acceptances += 1,
            (true, false) => c.false_rejections += 1,
            (false, false) => c.true_acceptances += 1,
        }
    }
    Ok(c)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Recall `TR/(TR+FA)`, precision `TR/(TR+FR)` and their harmonic mean.
/// Empty denominators give 0.
pub fn compute_metrics(counts: &ConfusionCounts, level: Level) -> MetricReport {
    let recall = ratio(
        counts.true_rejections,
        counts.true_rejections + counts.false_acceptances,
    );
    let precision = ratio(
        counts.true_rejections,
        counts.true_rejections + counts.false_rejections,
    );
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    MetricReport {
        level,
        precision,
        recall,
        f1,
        counts: *counts,
    }
}
