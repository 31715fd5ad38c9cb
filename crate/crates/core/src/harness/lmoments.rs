//! Unbiased sample L-moments.
//!
//! `l_r` is a fixed linear combination of the order statistics. The
//! weights are computed once per `(n, m)` in exact integer arithmetic
//! (the usual probability-weighted-moment expansion cancels
//! catastrophically for high orders in floating point) and cached.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

type Weights = Arc<Vec<Vec<f64>>>;

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn falling(x: i64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k as i64 {
        acc *= BigInt::from(x - i);
    }
    acc
}

/// `weights[r - 1][j]`: coefficient of the (j+1)-th smallest value in `l_r`.
fn compute_weights(n: usize, m: usize) -> Vec<Vec<f64>> {
    let n64 = n as i64;
    (1..=m as u64)
        .map(|r| {
            let coef: Vec<BigInt> = (0..r)
                .map(|k| {
                    let c = binomial(r - 1, k) * binomial(r - 1 + k, k);
                    if (r - 1 - k) % 2 == 1 {
                        -c
                    } else {
                        c
                    }
                })
                .collect();
            let tails: Vec<BigInt> = (0..r).map(|k| falling(n64 - 1 - k as i64, r - 1 - k)).collect();
            let denom = BigInt::from(n) * falling(n64 - 1, r - 1);
            (1..=n64)
                .map(|j| {
                    let mut num = BigInt::zero();
                    for k in 0..r {
                        let f = falling(j - 1, k);
                        if !f.is_zero() {
                            num += &coef[k as usize] * f * &tails[k as usize];
                        }
                    }
                    BigRational::new(num, denom.clone())
                        .to_f64()
                        .expect("finite weight")
                })
                .collect()
        })
        .collect()
}

fn weights(n: usize, m: usize) -> Weights {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Weights>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(w) = cache.lock().expect("weights cache").get(&(n, m)) {
        return Arc::clone(w);
    }
    let w = Arc::new(compute_weights(n, m));
    cache
        .lock()
        .expect("weights cache")
        .entry((n, m))
        .or_insert(w)
        .clone()
}

/// First `m` sample L-moments in the usual summary layout:
/// `(l1, l2, t3, ..., tm)` with `t_r = l_r / l2`.
pub fn sample_lmoments(z: &[f64], m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Spec("need at least one L-moment".into()));
    }
    if z.len() < m {
        return Err(Error::Size(format!(
            "{m} L-moments need at least {m} values, got {}",
            z.len()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Spec("sample contains non-finite values".into()));
    }
    let mut x = z.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    let l1 = x.iter().sum::<f64>() / n as f64;
    let mut out = Vec::with_capacity(m);
    out.push(l1);
    if m == 1 {
        return Ok(out);
    }
    // higher orders are shift invariant; centering keeps them accurate
    x.iter_mut().for_each(|v| *v -= l1);
    let w = weights(n, m);
    let lr = |r: usize| -> f64 { w[r - 1].iter().zip(&x).map(|(a, b)| a * b).sum() };
    let l2 = lr(2);
    out.push(l2);
    if m >= 3 && l2 <= 0.0 {
        return Err(Error::Degenerate(
            "constant sample: L-moment ratios undefined".into(),
        ));
    }
    for r in 3..=m {
        out.push(lr(r) / l2);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn choose(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    // Definition by enumeration over all r-subsets of the sorted sample.
    fn lmoment_oracle(z: &[f64], r: usize) -> f64 {
        let mut x = z.to_vec();
        x.sort_by(f64::total_cmp);
        let n = x.len();
        let mut total = 0.0;
        let mut idx: Vec<usize> = (0..r).collect();
        loop {
            let mut s = 0.0;
            for k in 0..r {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * choose(r - 1, k) * x[idx[r - 1 - k]];
            }
            total += s / r as f64;
            // next combination
            let mut i = r;
            loop {
                if i == 0 {
                    return total / choose(n, r);
                }
                i -= 1;
                if idx[i] != i + n - r {
                    break;
                }
                if i == 0 {
                    return total / choose(n, r);
                }
            }
            idx[i] += 1;
            for j in i + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    #[test]
    fn three_points() {
        assert_eq!(sample_lmoments(&[1.0, 2.0, 3.0], 2).unwrap(), vec![2.0, 2.0 / 3.0]);
        assert_eq!(sample_lmoments(&[3.0, 1.0, 2.0], 2).unwrap(), vec![2.0, 2.0 / 3.0]);
        // half the mean absolute pairwise difference
        let l2 = sample_lmoments(&[1.0, 2.0, 3.0], 2).unwrap()[1];
        let pairwise = ((2.0 - 1.0) + (3.0 - 1.0) + (3.0 - 2.0)) / 3.0;
        assert_eq!(l2, pairwise / 2.0);
    }

    #[test]
    fn matches_subset_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let z: Vec<f64> = (0..11).map(|_| rng.gen_range(-3.0..7.0f64).powi(3)).collect();
            let l = sample_lmoments(&z, 6).unwrap();
            let l2 = lmoment_oracle(&z, 2);
            assert!((l[0] - lmoment_oracle(&z, 1)).abs() < 1e-10);
            assert!((l[1] - l2).abs() < 1e-10 * l2.abs().max(1.0));
            for r in 3..=6 {
                assert!((l[r - 1] - lmoment_oracle(&z, r) / l2).abs() < 1e-10, "r = {r}");
            }
        }
    }

    #[test]
    fn symmetric_sample() {
        let z = [-3.0, -1.0, 0.5, 2.0, 2.5, 4.0, 5.5, 7.0];
        // reflect about c = 2
        let mut s: Vec<f64> = z.iter().map(|v| v - 2.0).collect();
        s.extend(z.iter().map(|v| 2.0 - v));
        let s: Vec<f64> = s.iter().map(|v| v + 2.0).collect();
        let l = sample_lmoments(&s, 5).unwrap();
        assert!((l[0] - 2.0).abs() < 1e-14);
        assert!(l[2].abs() < 1e-14);
        assert!(l[4].abs() < 1e-14);
    }

    #[test]
    fn errors() {
        assert!(matches!(sample_lmoments(&[1.0; 10], 3), Err(Error::Degenerate(_))));
        assert_eq!(sample_lmoments(&[1.0; 10], 2).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(sample_lmoments(&[1.0, 2.0], 3), Err(Error::Size(_))));
        assert!(sample_lmoments(&[1.0], 0).is_err());
    }

    #[test]
    fn weights_sum_to_zero_beyond_first_order() {
        let w = weights(350, 20);
        assert!((w[0].iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for r in 2..=20 {
            assert!(w[r - 1].iter().sum::<f64>().abs() < 1e-13, "r = {r}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn ratios_are_affine_invariant(seed: u64, a in -100.0f64..100.0, b in 0.01f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z: Vec<f64> = (0..350).map(|_| rng.gen_range(-1.0f64..1.0).powi(3) * 4.0).collect();
            let mapped: Vec<f64> = z.iter().map(|v| a + b * v).collect();
            let l = sample_lmoments(&z, 20).unwrap();
            let lm = sample_lmoments(&mapped, 20).unwrap();
            prop_assert!((lm[0] - (a + b * l[0])).abs() < 1e-10 * (a.abs() + b));
            prop_assert!((lm[1] - b * l[1]).abs() < 1e-12 * b * l[1].max(1.0));
            for r in 2..20 {
                prop_assert!((lm[r] - l[r]).abs() < 1e-12, "t{} {} vs {}", r + 1, lm[r], l[r]);
            }
        }
    }
}
