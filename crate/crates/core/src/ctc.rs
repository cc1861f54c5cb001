//! CTC loss with maximum-entropy regularization, and a brute-force path
//! enumerator used to cross-check it.
//!
//! The regularized objective is `-ln Z - beta * H`, where `Z` is the total
//! probability of all frame paths that collapse to the target and `H` is the
//! Shannon entropy of the path distribution conditioned on the target. Both
//! terms and their gradients come out of one log-space forward-backward pass
//! that, next to the usual alpha/beta lattices, carries the expected prefix
//! (suffix) path log-probability of every trellis cell.

use crate::error::{Error, Result};
use crate::math::{log_add, log_sum_exp};
use crate::vocab::{LogitMatrix, Vocabulary};

/// Largest instance `enumerate_paths` accepts.
pub const ENUMERATION_MAX_FRAMES: usize = 8;
pub const ENUMERATION_MAX_LABELS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CtcLossResult {
    /// `-ln P(target | logits) - beta * path_entropy`, in nats.
    pub loss: f64,
    /// `-ln P(target | logits)`.
    pub nll: f64,
    /// Entropy of the conditional distribution over feasible paths, in nats.
    pub path_entropy: f64,
    /// d loss / d logits, frames x labels row-major.
    pub gradient: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtcPath {
    pub labels: Vec<usize>,
    pub probability: f64,
}

/// Fewest frames that can emit `target`: one per token plus a separating
/// blank between each adjacent repeated pair.
pub fn min_frames(target: &[usize]) -> usize {
    target.len() + target.windows(2).filter(|w| w[0] == w[1]).count()
}

pub(crate) fn check_feasible(
    logits: &LogitMatrix,
    target: &[usize],
    vocab: &Vocabulary,
) -> Result<()> {
    logits.check_vocab(vocab)?;
    vocab.check_target(target)?;
    let required = min_frames(target);
    if logits.frames() < required {
        return Err(Error::InfeasibleTarget {
            frames: logits.frames(),
            required,
        });
    }
    Ok(())
}

/// Blank-extended target `[-, t0, -, t1, ..., -]`.
pub(crate) fn extend(target: &[usize], blank: usize) -> Vec<usize> {
    let mut ext = Vec::with_capacity(2 * target.len() + 1);
    ext.push(blank);
    for &t in target {
        ext.push(t);
        ext.push(blank);
    }
    ext
}

/// Whether state `s` may be entered directly from `s - 2`.
#[inline]
pub(crate) fn can_skip(ext: &[usize], s: usize, blank: usize) -> bool {
    s >= 2 && ext[s] != blank && ext[s] != ext[s - 2]
}

pub fn ctc_loss(
    logits: &LogitMatrix,
    target: &[usize],
    vocab: &Vocabulary,
    beta: f64,
) -> Result<CtcLossResult> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidConfig(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    check_feasible(logits, target, vocab)?;

    let frames = logits.frames();
    let labels = logits.labels();
    let blank = vocab.blank_index();
    let lp = logits.log_posteriors();
    let emit = |t: usize, s: usize, ext: &[usize]| lp[t * labels + ext[s]];
    let ext = extend(target, blank);
    let states = ext.len();
    let neg = f64::NEG_INFINITY;

    // alpha/beta both include the emission at t. fwd_e/bwd_e hold the
    // expected log-probability of the prefix/suffix given it reaches the cell.
    let mut alpha = vec![neg; frames * states];
    let mut fwd_e = vec![0.0; frames * states];
    let mut beta_l = vec![neg; frames * states];
    let mut bwd_e = vec![0.0; frames * states];

    for s in 0..states.min(2) {
        alpha[s] = emit(0, s, &ext);
        fwd_e[s] = emit(0, s, &ext);
    }
    for t in 1..frames {
        let (done, rest) = alpha.split_at_mut(t * states);
        let prev = &done[(t - 1) * states..];
        let cur_row = &mut rest[..states];
        for s in 0..states {
            let mut preds = [usize::MAX; 3];
            preds[0] = s;
            if s >= 1 {
                preds[1] = s - 1;
            }
            if can_skip(&ext, s, blank) {
                preds[2] = s - 2;
            }
            let total = preds
                .iter()
                .filter(|&&p| p != usize::MAX)
                .fold(neg, |acc, &p| log_add(acc, prev[p]));
            if total == neg {
                continue;
            }
            let e = emit(t, s, &ext);
            cur_row[s] = total + e;
            let mut expect = e;
            for &p in preds.iter().filter(|&&p| p != usize::MAX && prev[p] > neg) {
                expect += (prev[p] - total).exp() * fwd_e[(t - 1) * states + p];
            }
            fwd_e[t * states + s] = expect;
        }
    }

    let last = (frames - 1) * states;
    for s in states.saturating_sub(2)..states {
        beta_l[last + s] = emit(frames - 1, s, &ext);
        bwd_e[last + s] = emit(frames - 1, s, &ext);
    }
    for t in (0..frames - 1).rev() {
        let next = (t + 1) * states;
        for s in 0..states {
            let mut succs = [usize::MAX; 3];
            succs[0] = s;
            if s + 1 < states {
                succs[1] = s + 1;
            }
            if s + 2 < states && can_skip(&ext, s + 2, blank) {
                succs[2] = s + 2;
            }
            let total = succs
                .iter()
                .filter(|&&n| n != usize::MAX)
                .fold(neg, |acc, &n| log_add(acc, beta_l[next + n]));
            if total == neg {
                continue;
            }
            let e = emit(t, s, &ext);
            beta_l[t * states + s] = total + e;
            let mut expect = e;
            for &n in succs
                .iter()
                .filter(|&&n| n != usize::MAX && beta_l[next + n] > neg)
            {
                expect += (beta_l[next + n] - total).exp() * bwd_e[next + n];
            }
            bwd_e[t * states + s] = expect;
        }
    }

    let finals: Vec<usize> = (states.saturating_sub(2)..states).collect();
    let log_z = log_sum_exp(&finals.iter().map(|&s| alpha[last + s]).collect::<Vec<_>>());
    if log_z == neg {
        return Err(Error::InfeasibleTarget {
            frames,
            required: min_frames(target),
        });
    }
    // E_q[ln p(path)]
    let expected_log_p: f64 = finals
        .iter()
        .filter(|&&s| alpha[last + s] > neg)
        .map(|&s| (alpha[last + s] - log_z).exp() * fwd_e[last + s])
        .sum();
    let entropy = log_z - expected_log_p;

    // occupancy[t][c] = sum of state posteriors over states labelled c;
    // weighted[t][c] = same, weighted by the conditional path log-prob.
    let mut occupancy = vec![0.0; frames * labels];
    let mut weighted = vec![0.0; frames * labels];
    for t in 0..frames {
        for s in 0..states {
            let i = t * states + s;
            if alpha[i] == neg || beta_l[i] == neg {
                continue;
            }
            let e = emit(t, s, &ext);
            let gamma = (alpha[i] + beta_l[i] - e - log_z).exp();
            let cond = fwd_e[i] + bwd_e[i] - e;
            occupancy[t * labels + ext[s]] += gamma;
            weighted[t * labels + ext[s]] += gamma * cond;
        }
    }

    // d/d ln y: -occupancy - beta * (E * occupancy - weighted); then through log-softmax.
    let mut gradient = vec![0.0; frames * labels];
    for t in 0..frames {
        let row = t * labels..(t + 1) * labels;
        let g: Vec<f64> = row
            .clone()
            .map(|i| -occupancy[i] - beta * (expected_log_p * occupancy[i] - weighted[i]))
            .collect();
        let g_sum: f64 = g.iter().sum();
        for (c, i) in row.enumerate() {
            gradient[i] = g[c] - lp[i].exp() * g_sum;
        }
    }

    let nll = -log_z;
    Ok(CtcLossResult {
        loss: nll - beta * entropy,
        nll,
        path_entropy: entropy.max(0.0),
        gradient,
    })
}

/// Collapses a frame-level label sequence: merge repeats, then drop blanks.
pub fn collapse(path: &[usize], blank: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = None;
    for &l in path {
        if Some(l) != prev && l != blank {
            out.push(l);
        }
        prev = Some(l);
    }
    out
}

/// Every frame-level path collapsing to `target`, with its probability under
/// the row-softmax of `logits`. Exponential; guarded to tiny instances.
pub fn enumerate_paths(
    logits: &LogitMatrix,
    target: &[usize],
    vocab: &Vocabulary,
) -> Result<Vec<CtcPath>> {
    logits.check_vocab(vocab)?;
    let (frames, labels) = (logits.frames(), logits.labels());
    if frames > ENUMERATION_MAX_FRAMES || labels > ENUMERATION_MAX_LABELS {
        return Err(Error::InstanceTooLarge { frames, labels });
    }
    vocab.check_target(target)?;
    let lp = logits.log_posteriors();
    let total = labels.pow(frames as u32);
    let mut out = Vec::new();
    let mut path = vec![0usize; frames];
    for code in 0..total {
        let mut rest = code;
        for slot in path.iter_mut().rev() {
            *slot = rest % labels;
            rest /= labels;
        }
        if collapse(&path, vocab.blank_index()) == target {
            let log_p: f64 = path
                .iter()
                .enumerate()
                .map(|(t, &l)| lp[t * labels + l])
                .sum();
            out.push(CtcPath {
                labels: path.clone(),
                probability: log_p.exp(),
            });
        }
    }
    Ok(out)
}
