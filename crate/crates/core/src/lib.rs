//! Pronunciation scoring on top of CTC acoustic-model outputs.
//!
//! The crate consumes frame-level logits from any CTC acoustic model and a
//! target transcript, force-aligns the transcript, calibrates the per-frame
//! distributions with temperature scaling and top-k normalization, and turns
//! the resulting scores into per-character and per-word verdicts. It also
//! carries the evaluation stack used to judge a detector against verbatim
//! transcriptions: confusion counts, precision/recall/F1, temperature sweeps
//! and the one-sided proportion z-test.

pub mod alignment;
pub mod calibration;
pub mod ctc;
pub mod ctcl;
pub mod dataprep;
pub mod demo;
mod error;
pub mod evaluation;
pub mod math;
pub mod text;
mod vocab;

pub use alignment::{
    align_words, forced_align, forced_align_text, AlignedToken, AlignmentPath, WordSpan,
};
pub use calibration::{
    calibrate_row, flagged_tokens, score_transcript, score_transcript_with, CalibrationConfig,
    PartialBand, ScoredTranscript, TokenScore, Verdict, WordAggregation, WordScore,
};
pub use ctc::{ctc_loss, enumerate_paths, min_frames, CtcLossResult, CtcPath};
pub use error::{Error, Result};
pub use math::softmax_temperature;
pub use vocab::{LogitMatrix, PosteriorMatrix, Vocabulary};
