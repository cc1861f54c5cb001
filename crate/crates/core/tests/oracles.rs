//! Cross-checks of the trellis code against brute-force path enumeration
//! and finite differences.

use pronscore::{ctc_loss, enumerate_paths, forced_align, min_frames, LogitMatrix, Vocabulary};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    vocab: Vocabulary,
    logits: LogitMatrix,
    target: Vec<usize>,
}

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=4, 1usize..=3)
        .prop_flat_map(|(labels, len)| {
            let target = prop::collection::vec(1..labels, len);
            (Just(labels), target)
        })
        .prop_flat_map(|(labels, target)| {
            let min = min_frames(&target);
            (Just(labels), Just(target), min..=6usize.max(min))
        })
        .prop_flat_map(|(labels, target, frames)| {
            let values = prop::collection::vec(-3.0f64..3.0, frames * labels);
            (Just(labels), Just(target), Just(frames), values)
        })
        .prop_map(|(labels, target, frames, values)| {
            let names: Vec<String> = (0..labels)
                .map(|i| if i == 0 { "-".into() } else { format!("l{i}") })
                .collect();
            Instance {
                vocab: Vocabulary::new(names, 0).unwrap(),
                logits: LogitMatrix::new(frames, labels, values).unwrap(),
                target,
            }
        })
}

/// `(ln sum p, H)` of the conditional path distribution, by enumeration.
fn brute_force(inst: &Instance) -> (f64, f64) {
    let paths = enumerate_paths(&inst.logits, &inst.target, &inst.vocab).unwrap();
    let z: f64 = paths.iter().map(|p| p.probability).sum();
    let h = -paths
        .iter()
        .map(|p| p.probability / z)
        .filter(|&q| q > 0.0)
        .map(|q| q * q.ln())
        .sum::<f64>();
    (z.ln(), h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn loss_matches_enumeration(inst in instance(), beta in 0.0f64..=1.0) {
        let (log_z, h) = brute_force(&inst);
        let r = ctc_loss(&inst.logits, &inst.target, &inst.vocab, beta).unwrap();
        prop_assert!((r.nll + log_z).abs() < 1e-9);
        prop_assert!((r.path_entropy - h).abs() < 1e-9);
        prop_assert!((r.loss - (-log_z - beta * h)).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_central_differences(inst in instance(), beta in prop_oneof![Just(0.0), Just(0.2), 0.0f64..1.0]) {
        let r = ctc_loss(&inst.logits, &inst.target, &inst.vocab, beta).unwrap();
        let step = 1e-5;
        let base = inst.logits.values().to_vec();
        for i in 0..base.len() {
            let at = |delta: f64| {
                let mut v = base.clone();
                v[i] += delta;
                let m = LogitMatrix::new(inst.logits.frames(), inst.logits.labels(), v).unwrap();
                ctc_loss(&m, &inst.target, &inst.vocab, beta).unwrap().loss
            };
            let fd = (at(step) - at(-step)) / (2.0 * step);
            let err = (fd - r.gradient[i]).abs() / fd.abs().max(r.gradient[i].abs()).max(1e-3);
            prop_assert!(err < 1e-4, "entry {i}: analytic {} vs fd {fd}", r.gradient[i]);
        }
    }

    #[test]
    fn loss_non_increasing_in_beta(inst in instance(), b1 in 0.0f64..1.0, b2 in 0.0f64..1.0) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let a = ctc_loss(&inst.logits, &inst.target, &inst.vocab, lo).unwrap().loss;
        let b = ctc_loss(&inst.logits, &inst.target, &inst.vocab, hi).unwrap().loss;
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn viterbi_finds_the_most_probable_path(inst in instance()) {
        let paths = enumerate_paths(&inst.logits, &inst.target, &inst.vocab).unwrap();
        let best = paths.iter().map(|p| p.probability).fold(0.0, f64::max);
        let total: f64 = paths.iter().map(|p| p.probability).sum();
        let path = forced_align(&inst.logits, &inst.target, &inst.vocab).unwrap();
        prop_assert!((path.total_log_prob.exp() - best).abs() < 1e-9);
        prop_assert!(path.total_log_prob.exp() <= total + 1e-12);

        let mut prev_end = None;
        for (i, tok) in path.tokens.iter().enumerate() {
            prop_assert_eq!(tok.target_index, i);
            prop_assert!(tok.span.0 <= tok.emission_frame && tok.emission_frame <= tok.span.1);
            prop_assert!(tok.span.1 < inst.logits.frames());
            if let Some(end) = prev_end {
                prop_assert!(tok.span.0 > end);
            }
            prev_end = Some(tok.span.1);
            prop_assert!((0.0..=1.0).contains(&tok.raw_posterior));
        }
    }

    #[test]
    fn alignment_is_deterministic(inst in instance()) {
        let a = forced_align(&inst.logits, &inst.target, &inst.vocab).unwrap();
        let b = forced_align(&inst.logits, &inst.target, &inst.vocab).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn long_utterances_do_not_underflow() {
    // 400 frames of a flat distribution: linear-space probabilities would be 0
    let vocab = Vocabulary::new(["-", "a", "b"], 0).unwrap();
    let logits = LogitMatrix::new(400, 3, vec![0.0; 1200]).unwrap();
    let target: Vec<usize> = (0..40).map(|i| 1 + i % 2).collect();
    let r = ctc_loss(&logits, &target, &vocab, 0.2).unwrap();
    assert!(r.loss.is_finite() && r.nll > 0.0);
    assert!(r.gradient.iter().all(|g| g.is_finite()));
    let path = forced_align(&logits, &target, &vocab).unwrap();
    assert!(path.total_log_prob.is_finite());
    assert_eq!(path.tokens.len(), 40);
}
