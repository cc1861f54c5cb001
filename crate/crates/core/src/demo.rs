//! Swedish character vocabulary, hand-built logit fixtures and a synthetic
//! corpus generator. Used by the CLI self-check, the service's demo mode and
//! the browser demo, so that everything runs without an acoustic model.

use crate::dataprep::Lcg64;
use crate::vocab::{LogitMatrix, Vocabulary};

pub const BLANK: &str = "<pad>";

/// Read-aloud items of the practice set.
pub const PHRASES: [&str; 7] = [
    "banan",
    "dyr",
    "kanske",
    "jag tycker om att sjunga",
    "han kommer från kina",
    "vill du äta här?",
    "på kvällen är jag på gymmet",
];

/// `<pad>`, space, `a`-`z`, `å`, `ä`, `ö`, `-`; blank at index 0.
pub fn vocabulary() -> Vocabulary {
    let mut labels = vec![BLANK.to_string(), " ".to_string()];
    labels.extend(('a'..='z').map(String::from));
    labels.extend(["å", "ä", "ö", "-"].map(String::from));
    Vocabulary::new(labels, 0).expect("static vocabulary is valid")
}

/// Near one-hot logits spelling `text` as `[-, c1, -, c2, ..., cn, -]`, so
/// character `i` is emitted at frame `2i + 1`.
pub fn spell(text: &str, high: f64) -> LogitMatrix {
    let vocab = vocabulary();
    let target = vocab
        .encode(text)
        .expect("demo text uses the demo alphabet");
    let mut rows = vec![one_hot(vocab.len(), vocab.blank_index(), high)];
    for tok in target {
        rows.push(one_hot(vocab.len(), tok, high));
        rows.push(one_hot(vocab.len(), vocab.blank_index(), high));
    }
    LogitMatrix::from_rows(&rows).expect("rows are finite and rectangular")
}

fn one_hot(width: usize, hot: usize, high: f64) -> Vec<f64> {
    let mut row = vec![0.0; width];
    row[hot] = high;
    row
}

/// Row of log-probabilities giving `peaks` their probabilities and spreading
/// `1 - sum(peaks)` evenly over the other labels.
pub fn log_prob_row(vocab: &Vocabulary, peaks: &[(&str, f64)]) -> Vec<f64> {
    let rest = 1.0 - peaks.iter().map(|p| p.1).sum::<f64>();
    let others = (vocab.len() - peaks.len()) as f64;
    let mut row = vec![(rest / others).ln(); vocab.len()];
    for &(label, p) in peaks {
        row[vocab.index_of(label).expect("peak label in vocabulary")] = p.ln();
    }
    row
}

/// "dyr" read cleanly.
pub fn dyr_correct() -> LogitMatrix {
    spell("dyr", 30.0)
}

/// "dyr" where the vowel frame is overconfidently `i`: raw posteriors
/// i 0.998, y 1e-3, blank 9.9e-4, the last 1e-5 spread over the rest.
pub fn dyr_y_swap() -> LogitMatrix {
    let vocab = vocabulary();
    let clean = dyr_correct();
    let mut rows: Vec<Vec<f64>> = clean.rows().map(<[f64]>::to_vec).collect();
    rows[3] = log_prob_row(&vocab, &[("i", 0.998), ("y", 1e-3), (BLANK, 9.9e-4)]);
    LogitMatrix::from_rows(&rows).expect("rows are finite and rectangular")
}

#[derive(Debug, Clone)]
pub struct SyntheticUtterance {
    pub id: String,
    pub target: String,
    pub verbatim: String,
    pub logits: LogitMatrix,
}

#[derive(Debug, Clone, Copy)]
pub struct SyntheticCorpusConfig {
    pub utterances: usize,
    /// Probability that a character is read as a different one.
    pub swap_rate: f64,
    /// Probability that a correctly read character is still acoustically
    /// ambiguous (another label wins the frame, the target is runner-up).
    pub ambiguous_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticCorpusConfig {
    fn default() -> Self {
        SyntheticCorpusConfig {
            utterances: 200,
            swap_rate: 0.15,
            ambiguous_rate: 0.3,
            seed: 1,
        }
    }
}

fn gaussian(rng: &mut Lcg64) -> f64 {
    // Box-Muller; 1 - u keeps the log argument in (0, 1]
    let u = 1.0 - rng.next_f64();
    let v = rng.next_f64();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

fn uniform(rng: &mut Lcg64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

/// Corpus of practice phrases with planted character swaps.
///
/// Every character gets its own emission frame between blank frames. A
/// swapped character's frame is won by the substitute; in half of those
/// cases the intended character stays a close runner-up (a near miss), in
/// the other half it is buried. Correct characters usually win their frame
/// outright, but with `ambiguous_rate` another label wins and the intended
/// one trails by a moderate margin. The verbatim transcript records the
/// substitutes.
pub fn synthetic_corpus(config: SyntheticCorpusConfig) -> Vec<SyntheticUtterance> {
    let vocab = vocabulary();
    let letters: Vec<usize> = (0..vocab.len())
        .filter(|&i| {
            i != vocab.blank_index() && !vocab.is_word_delimiter(i) && vocab.label(i) != "-"
        })
        .collect();
    let blank = vocab.blank_index();
    let mut rng = Lcg64::new(config.seed);
    let mut out = Vec::with_capacity(config.utterances);

    for n in 0..config.utterances {
        let target = crate::text::normalize_transcript(PHRASES[rng.below(PHRASES.len())]);
        let mut verbatim = String::with_capacity(target.len());
        let mut rows = Vec::new();
        let noise_row = |rng: &mut Lcg64, hot: usize, level: f64| -> Vec<f64> {
            let mut row: Vec<f64> = (0..vocab.len()).map(|_| gaussian(rng) - 4.0).collect();
            row[hot] = level + 0.5 * gaussian(rng);
            row
        };
        rows.push(noise_row(&mut rng, blank, 10.0));
        for ch in target.chars() {
            let tok = vocab.encode(&ch.to_string()).expect("phrase alphabet")[0];
            let mut row: Vec<f64> = (0..vocab.len()).map(|_| gaussian(&mut rng)).collect();
            row[blank] = 4.0 + gaussian(&mut rng);
            let top = 9.0 + 0.5 * gaussian(&mut rng);
            if vocab.is_word_delimiter(tok) {
                row[tok] = top;
                verbatim.push(' ');
            } else if rng.next_f64() < config.swap_rate {
                let sub = loop {
                    let c = letters[rng.below(letters.len())];
                    if c != tok {
                        break c;
                    }
                };
                row[sub] = top;
                row[tok] = if rng.next_f64() < 0.5 {
                    top - uniform(&mut rng, 1.0, 5.0)
                } else {
                    top - uniform(&mut rng, 10.0, 14.0)
                };
                verbatim.push_str(vocab.label(sub));
            } else {
                if rng.next_f64() < config.ambiguous_rate {
                    let rival = loop {
                        let c = letters[rng.below(letters.len())];
                        if c != tok {
                            break c;
                        }
                    };
                    row[rival] = top;
                    row[tok] = top - uniform(&mut rng, 1.0, 9.0);
                } else {
                    row[tok] = top;
                }
                verbatim.push(ch);
            }
            rows.push(row);
            rows.push(noise_row(&mut rng, blank, 10.0));
        }
        out.push(SyntheticUtterance {
            id: format!("synth{n:04}"),
            target,
            verbatim,
            logits: LogitMatrix::from_rows(&rows).expect("finite rows"),
        });
    }
    out
}
