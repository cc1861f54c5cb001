//! Numerically stable softmax and log-space helpers.

use crate::error::{Error, Result};

/// `ln(exp(a) + exp(b))` without overflow; `-inf` acts as the additive identity.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

pub fn log_softmax(z: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(z);
    z.iter().map(|&x| x - lse).collect()
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// `softmax(z / T)`.
pub fn softmax_temperature(z: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    if z.iter().any(|v| !v.is_finite()) || !temperature.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|&x| ((x - max) / temperature).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn symmetric_logits_split_evenly() {
        assert_eq!(
            softmax_temperature(&[0.0, 0.0], 1.0).unwrap(),
            vec![0.5, 0.5]
        );
    }

    #[test]
    fn two_logits_at_temperature_two() {
        // e / (e + 1)
        let e = std::f64::consts::E;
        let p = softmax_temperature(&[2.0, 0.0], 2.0).unwrap();
        assert_abs_diff_eq!(p[0], e / (e + 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(p[0], 0.7311, epsilon = 1e-4);
        assert_abs_diff_eq!(p[1], 0.2689, epsilon = 1e-4);
    }

    #[test]
    fn softened_overconfident_row() {
        let z: Vec<f64> = [0.998f64, 1e-3, 1e-5, 9.9e-4]
            .iter()
            .map(|p| p.ln())
            .collect();
        let p = softmax_temperature(&z, 10.0).unwrap();
        // direct formula: p_i^(1/T) / sum_j p_j^(1/T)
        let powered: Vec<f64> = [0.998f64, 1e-3, 1e-5, 9.9e-4]
            .iter()
            .map(|p| p.powf(0.1))
            .collect();
        let total: f64 = powered.iter().sum();
        for (got, w) in p.iter().zip(&powered) {
            assert_abs_diff_eq!(*got, w / total, epsilon = 1e-12);
        }
        for (got, want) in p.iter().zip([0.4315, 0.2163, 0.1362, 0.2161]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(
            softmax_temperature(&[1.0], 0.0),
            Err(Error::NonPositiveTemperature(0.0))
        );
        assert_eq!(
            softmax_temperature(&[1.0], -2.0),
            Err(Error::NonPositiveTemperature(-2.0))
        );
        assert_eq!(
            softmax_temperature(&[f64::INFINITY], 1.0),
            Err(Error::NonFiniteInput)
        );
        assert_eq!(
            softmax_temperature(&[f64::NAN, 0.0], 1.0),
            Err(Error::NonFiniteInput)
        );
    }

    #[test]
    fn log_add_handles_neg_infinity() {
        assert_eq!(log_add(f64::NEG_INFINITY, 0.5), 0.5);
        assert_abs_diff_eq!(log_add(0.0, 0.0), 2f64.ln(), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn rows_sum_to_one(z in prop::collection::vec(-50.0f64..50.0, 1..12), log_t in -3.0f64..6.0) {
            let t = 10f64.powf(log_t);
            let p = softmax_temperature(&z, t).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }

        #[test]
        fn argmax_is_temperature_invariant(z in prop::collection::vec(-20.0f64..20.0, 1..10), t in 0.01f64..1e4) {
            let p = softmax_temperature(&z, t).unwrap();
            prop_assert_eq!(argmax(&p), argmax(&z));
        }

        #[test]
        fn ratio_identity(z in prop::collection::vec(-20.0f64..20.0, 1..10), t in 0.5f64..100.0) {
            let p = softmax_temperature(&z, t).unwrap();
            let top = argmax(&z);
            for i in 0..z.len() {
                let want = ((z[i] - z[top]) / t).exp();
                prop_assert!((p[i] / p[top] - want).abs() < 1e-9);
            }
        }
    }
}
