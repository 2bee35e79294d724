//! Synthetic fingerprint sets with controlled similarity structure.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{param, Result};
use crate::fingerprint::Fingerprint;

fn to_bits(rng: &mut impl Rng, coeffs: impl IntoIterator<Item = u32>) -> Vec<u32> {
    let mut bits: Vec<u32> = coeffs.into_iter().map(|j| 2 * j + rng.gen_range(0..2)).collect();
    bits.sort_unstable();
    bits
}

fn fingerprint(index: u64, dim: u32, bits: Vec<u32>) -> Fingerprint {
    Fingerprint { index, start_epoch_s: index as f64, dim, bits }
}

/// Uniformly random fingerprint with `k` set bits over `dim / 2` coefficients.
pub fn random_fingerprint(rng: &mut impl Rng, dim: u32, k: usize, index: u64) -> Fingerprint {
    let coeffs = sample(rng, dim as usize / 2, k).into_iter().map(|c| c as u32);
    fingerprint(index, dim, to_bits(rng, coeffs))
}

/// Shared bits between two `k`-bit sets that gives Jaccard closest to `s`.
pub fn shared_bits_for(k: usize, s: f64) -> usize {
    ((2 * k) as f64 * s / (1.0 + s)).round().min(k as f64) as usize
}

/// Two `k`-bit fingerprints sharing exactly `shared` bits.
pub fn fingerprint_pair(rng: &mut impl Rng, dim: u32, k: usize, shared: usize, index: u64) -> Result<(Fingerprint, Fingerprint)> {
    let half = dim as usize / 2;
    if shared > k || 2 * k - shared > half {
        return param(format!("cannot place a pair with k={k}, shared={shared} in {half} coefficients"));
    }
    let coeffs: Vec<u32> = sample(rng, half, 2 * k - shared).into_iter().map(|c| c as u32).collect();
    let bits: Vec<u32> = to_bits(rng, coeffs.iter().copied());
    // bits is sorted by coefficient; reshuffle the roles with a second sample
    let order = sample(rng, bits.len(), bits.len()).into_vec();
    let pick = |r: std::ops::Range<usize>| {
        let mut v: Vec<u32> = order[r].iter().map(|&i| bits[i]).collect();
        v.sort_unstable();
        v
    };
    let common = pick(0..shared);
    let mut a = common.clone();
    a.extend(pick(shared..k));
    let mut b = common;
    b.extend(pick(k..2 * k - shared));
    a.sort_unstable();
    b.sort_unstable();
    Ok((fingerprint(index, dim, a), fingerprint(index + 1, dim, b)))
}

/// `n` independent random fingerprints plus `pairs` planted near-copies at random offsets.
pub fn planted_dataset(n: usize, dim: u32, k: usize, pairs: usize, similarity: f64, seed: u64) -> Result<Vec<Fingerprint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fps: Vec<Fingerprint> = (0..n as u64).map(|i| random_fingerprint(&mut rng, dim, k, i)).collect();
    let shared = shared_bits_for(k, similarity);
    for _ in 0..pairs {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let (a, b) = fingerprint_pair(&mut rng, dim, k, shared, 0)?;
        fps[i].bits = a.bits;
        fps[j].bits = b.bits;
    }
    Ok(fps)
}

/// Fingerprints whose coefficients co-occur in popular blocks: each fingerprint draws most
/// of its coefficients from a few blocks picked by a skewed distribution, so unrelated
/// fingerprints overlap far more than uniform ones would.
pub fn correlated_fingerprints(n: usize, dim: u32, k: usize, seed: u64) -> Vec<Fingerprint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = dim / 2;
    let block = 16u32;
    let blocks = half / block;
    let from_blocks = k * 3 / 4;
    (0..n as u64)
        .map(|i| {
            let mut coeffs = std::collections::BTreeSet::new();
            while coeffs.len() < from_blocks {
                // Zipf-like block popularity
                let b = ((blocks as f64).powf(rng.gen::<f64>().powi(3)) as u32).min(blocks - 1);
                let c = b * block + rng.gen_range(0..block);
                coeffs.insert(c);
            }
            while coeffs.len() < k {
                coeffs.insert(rng.gen_range(0..half));
            }
            // popular coefficients also prefer one sign
            let bits = {
                let mut v: Vec<u32> =
                    coeffs.into_iter().map(|c| 2 * c + u32::from(rng.gen_bool(if c % 2 == 0 { 0.1 } else { 0.5 }))).collect();
                v.sort_unstable();
                v
            };
            fingerprint(i, dim, bits)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingerprint::{intersection_size, jaccard};

    #[test]
    fn pair_has_exact_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for shared in [0, 10, 46, 100] {
            let (a, b) = fingerprint_pair(&mut rng, 4096, 100, shared, 0).unwrap();
            a.validate().unwrap();
            b.validate().unwrap();
            assert_eq!(intersection_size(&a.bits, &b.bits), shared);
            assert_eq!((a.bits.len(), b.bits.len()), (100, 100));
        }
        assert!(fingerprint_pair(&mut rng, 64, 30, 0, 0).is_err());
    }

    #[test]
    fn shared_bits_targets() {
        assert_eq!(shared_bits_for(100, 1.0), 100);
        assert_eq!(shared_bits_for(100, 0.0), 0);
        let c = shared_bits_for(100, 0.5);
        assert!((c as f64 / (200 - c) as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn correlated_set_is_valid_and_overlapping() {
        let fps = correlated_fingerprints(200, 4096, 100, 3);
        fps.iter().for_each(|f| f.validate().unwrap());
        let mean: f64 = (1..200).map(|i| jaccard(&fps[0], &fps[i]).unwrap()).sum::<f64>() / 199.0;
        assert!(mean > 0.03, "{mean}");
        let planted = planted_dataset(100, 4096, 50, 5, 0.8, 1).unwrap();
        planted.iter().for_each(|f| f.validate().unwrap());
    }
}
