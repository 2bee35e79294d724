use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::MadStats;
use crate::error::{param, Error, Result};

/// Sparse binary fingerprint of one window: ascending positions of the set bits in `[0, dim)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub index: u64,
    pub start_epoch_s: f64,
    pub dim: u32,
    pub bits: Vec<u32>,
}

impl Fingerprint {
    pub fn popcount(&self) -> usize {
        self.bits.len()
    }

    /// Checks ordering, range and the one-bit-per-coefficient rule.
    pub fn validate(&self) -> Result<()> {
        for w in self.bits.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Invariant(format!("fingerprint {} bits not strictly ascending", self.index)));
            }
            if w[0] % 2 == 0 && w[1] == w[0] + 1 {
                return Err(Error::Invariant(format!(
                    "fingerprint {} sets both sign bits of coefficient {}",
                    self.index,
                    w[0] / 2
                )));
            }
        }
        if let Some(&last) = self.bits.last() {
            if last >= self.dim {
                return Err(Error::Invariant(format!("fingerprint {} bit {last} >= dim {}", self.index, self.dim)));
            }
        }
        Ok(())
    }
}

/// Sign of a selected coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

/// The `k` most anomalous coefficients after `(v - median) / mad`, ascending by index.
///
/// Ranking is by `|v'|` descending, ties to the lower index. Coefficients with zero MAD are
/// never selected. An exactly-zero `v'` is given a positive sign.
pub fn normalize_topk(coeffs: &[f64], stats: &MadStats, k: usize) -> Result<Vec<(u32, Sign)>> {
    if coeffs.len() != stats.len() {
        return param(format!(
            "{} coefficients but MAD statistics cover {}",
            coeffs.len(),
            stats.len()
        ));
    }
    let mut scored: Vec<(f64, u32)> = coeffs
        .iter()
        .zip(stats.median.iter().zip(&stats.mad))
        .enumerate()
        .filter(|(_, (_, (_, &mad)))| mad > 0.0)
        .map(|(i, (&v, (&med, &mad)))| ((v - med) / mad, i as u32))
        .collect();
    if k > scored.len() {
        return param(format!(
            "top-K of {k} requested but only {} coefficients have nonzero MAD",
            scored.len()
        ));
    }
    let rank = |a: &(f64, u32), b: &(f64, u32)| -> Ordering {
        b.0.abs().total_cmp(&a.0.abs()).then(a.1.cmp(&b.1))
    };
    if k == 0 {
        return Ok(Vec::new());
    }
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, rank);
        scored.truncate(k);
    }
    let mut out: Vec<(u32, Sign)> = scored
        .into_iter()
        .map(|(v, i)| (i, if v < 0.0 { Sign::Negative } else { Sign::Positive }))
        .collect();
    out.sort_unstable_by_key(|&(i, _)| i);
    Ok(out)
}

/// Two bits per coefficient: positive sets bit `2j`, negative sets `2j + 1`.
pub fn binarize(topk: &[(u32, Sign)], dim: u32, index: u64, start_epoch_s: f64) -> Result<Fingerprint> {
    let mut bits: Vec<u32> = Vec::with_capacity(topk.len());
    for &(j, s) in topk {
        if (j as u64) * 2 >= dim as u64 {
            return param(format!("coefficient index {j} out of range for dimension {dim}"));
        }
        bits.push(2 * j + u32::from(s == Sign::Negative));
    }
    bits.sort_unstable();
    if bits.windows(2).any(|w| w[0] / 2 == w[1] / 2) {
        return Err(Error::Invariant("duplicate coefficient index in top-K selection".into()));
    }
    Ok(Fingerprint { index, start_epoch_s, dim, bits })
}

/// Size of the intersection of two ascending lists.
pub fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn jaccard(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    if a.dim != b.dim {
        return param(format!("fingerprint dimensions differ: {} vs {}", a.dim, b.dim));
    }
    let inter = intersection_size(&a.bits, &b.bits);
    let union = a.bits.len() + b.bits.len() - inter;
    if union == 0 {
        return param("Jaccard similarity of two empty fingerprints is undefined");
    }
    Ok(inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};

    fn stats(median: Vec<f64>, mad: Vec<f64>) -> MadStats {
        MadStats { median, mad, sample_count: 1, sampling_rate: 1.0, rng_seed: 0 }
    }

    fn fp(bits: Vec<u32>, dim: u32) -> Fingerprint {
        Fingerprint { index: 0, start_epoch_s: 0.0, dim, bits }
    }

    #[test]
    fn all_at_median_picks_lowest_indices_positive() {
        let s = stats(vec![1.0; 10], vec![1.0; 10]);
        let out = normalize_topk(&[1.0; 10], &s, 3).unwrap();
        assert_eq!(out, vec![(0, Sign::Positive), (1, Sign::Positive), (2, Sign::Positive)]);
    }

    #[test]
    fn single_outlier() {
        let s = stats(vec![0.0; 6], vec![2.0; 6]);
        let mut c = vec![0.0; 6];
        c[4] = -20.0;
        assert_eq!(normalize_topk(&c, &s, 1).unwrap(), vec![(4, Sign::Negative)]);
    }

    #[test]
    fn zero_mad_excluded_and_k_checked() {
        let s = stats(vec![0.0; 4], vec![0.0, 1.0, 1.0, 0.0]);
        let c = [100.0, 1.0, -2.0, 50.0];
        assert_eq!(normalize_topk(&c, &s, 2).unwrap(), vec![(1, Sign::Positive), (2, Sign::Negative)]);
        assert!(matches!(normalize_topk(&c, &s, 3), Err(Error::Parameter(_))));
    }

    #[test]
    fn selection_matches_full_sort() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let n = rng.gen_range(10..400);
            let k = rng.gen_range(1..=n);
            // coarse values force plenty of ties
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-8i32..8) as f64).collect();
            let med: Vec<f64> = (0..n).map(|_| rng.gen_range(-2i32..2) as f64).collect();
            let mad: Vec<f64> = (0..n).map(|_| rng.gen_range(1i32..3) as f64).collect();
            let got = normalize_topk(&c, &stats(med.clone(), mad.clone()), k).unwrap();
            let mut all: Vec<(f64, usize)> = (0..n).map(|i| ((c[i] - med[i]) / mad[i], i)).collect();
            all.sort_by(|a, b| b.0.abs().partial_cmp(&a.0.abs()).unwrap().then(a.1.cmp(&b.1)));
            let mut want: Vec<(u32, Sign)> = all[..k]
                .iter()
                .map(|&(v, i)| (i as u32, if v < 0.0 { Sign::Negative } else { Sign::Positive }))
                .collect();
            want.sort_by_key(|p| p.0);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn sign_code_mapping() {
        let f = binarize(&[(0, Sign::Positive), (1, Sign::Negative)], 8, 0, 0.0).unwrap();
        assert_eq!(f.bits, vec![0, 3]);
        assert!(binarize(&[], 8, 0, 0.0).unwrap().bits.is_empty());
        assert!(matches!(
            binarize(&[(1, Sign::Positive), (1, Sign::Negative)], 8, 0, 0.0),
            Err(Error::Invariant(_))
        ));
        assert!(binarize(&[(4, Sign::Positive)], 8, 0, 0.0).is_err());
    }

    #[test]
    fn popcount_equals_k() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let mut idx: Vec<u32> = (0..4096).collect();
            idx.shuffle(&mut rng);
            let k = rng.gen_range(0..900);
            let sel: Vec<(u32, Sign)> = idx[..k]
                .iter()
                .map(|&i| (i, if rng.gen() { Sign::Positive } else { Sign::Negative }))
                .collect();
            let f = binarize(&sel, 8192, 0, 0.0).unwrap();
            assert_eq!(f.popcount(), k);
            f.validate().unwrap();
        }
    }

    #[test]
    fn jaccard_values() {
        let a = fp(vec![1, 5, 9], 16);
        assert_eq!(jaccard(&a, &a).unwrap(), 1.0);
        assert_eq!(jaccard(&a, &fp(vec![0, 2], 16)).unwrap(), 0.0);
        let shared: Vec<u32> = (0..400).map(|i| 2 * i).collect();
        let mut x = shared.clone();
        x.extend((400..800).map(|i| 2 * i));
        let mut y = shared;
        y.extend((800..1200).map(|i| 2 * i));
        assert!((jaccard(&fp(x, 8192), &fp(y, 8192)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(jaccard(&a, &fp(vec![1], 32)).is_err());
    }
}
