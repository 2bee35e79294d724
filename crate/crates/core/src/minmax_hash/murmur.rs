//! The two 64-bit mixers the signature format is defined over.
//!
//! * [`murmur64a`] is MurmurHash64A applied to the 8-byte little-endian encoding of a `u64`
//!   key. It fills the hash mapping: `values[x][j] = murmur64a(x, seed + j)`.
//! * [`fmix64`] is the MurmurHash3 64-bit finaliser, used to diffuse each word before it is
//!   folded into a table signature by [`combine`].
//!
//! Both are normative for the signature file: any change breaks stored signatures.

const M: u64 = 0xc6a4_a793_5bd1_e995;
const R: u32 = 47;

/// Fibonacci-hashing constant used by [`combine`].
pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn murmur64a(key: u64, seed: u64) -> u64 {
    let mut h = seed ^ 8u64.wrapping_mul(M);
    let mut k = key.wrapping_mul(M);
    k ^= k >> R;
    k = k.wrapping_mul(M);
    h ^= k;
    h = h.wrapping_mul(M);
    h ^= h >> R;
    h = h.wrapping_mul(M);
    h ^= h >> R;
    h
}

#[inline]
pub fn fmix64(mut k: u64) -> u64 {
    k ^= k >> 33;
    k = k.wrapping_mul(0xff51_afd7_ed55_8ccd);
    k ^= k >> 33;
    k = k.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    k ^= k >> 33;
    k
}

/// Order-sensitive fold: `acc ^= fmix64(w) + GOLDEN + (acc << 6) + (acc >> 2)`, starting at 0.
#[inline]
pub fn combine(words: impl IntoIterator<Item = u64>) -> u64 {
    words.into_iter().fold(0u64, |acc, w| {
        acc ^ fmix64(w).wrapping_add(GOLDEN).wrapping_add(acc << 6).wrapping_add(acc >> 2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn murmur64a_reference_vectors() {
        // reference C implementation over the 8 little-endian key bytes
        assert_eq!(murmur64a(0, 0), 0x7208_f7fa_198a_2d81);
        assert_eq!(murmur64a(1, 0), 0x8fbb_8d81_5c9e_092e);
        assert_eq!(murmur64a(12345, 7), 0x4485_0c42_a098_ff91);
        assert_eq!(murmur64a(u64::MAX, 42), 0x4725_4b72_fc96_c6bb);
        assert_eq!(murmur64a(8191, 1000), 0x3875_2fb3_4934_dd71);
    }

    #[test]
    fn fmix64_reference_vectors() {
        assert_eq!(fmix64(0), 0);
        assert_eq!(fmix64(1), 0xb456_bcfc_34c2_cb2c);
        assert_eq!(fmix64(0x0123_4567_89ab_cdef), 0x87cb_fbfe_8902_2cea);
    }

    #[test]
    fn combine_single_word_is_deterministic_and_mixed() {
        let w = 0x0123_4567_89ab_cdef;
        assert_eq!(combine([w]), combine([w]));
        assert_ne!(combine([w]), w);
        assert_eq!(combine([w]), fmix64(w).wrapping_add(GOLDEN));
    }

    #[test]
    fn combine_is_order_sensitive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let trials = 100_000;
        let mut same = 0;
        for _ in 0..trials {
            let (a, b): (u64, u64) = (rng.gen(), rng.gen());
            if a != b && combine([a, b]) == combine([b, a]) {
                same += 1;
            }
        }
        assert!(same as f64 / trials as f64 <= 0.001);
    }

    #[test]
    fn combine_avalanche() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let trials = 20_000;
        let mut flipped = 0u64;
        for _ in 0..trials {
            let words: Vec<u64> = (0..rng.gen_range(1..9)).map(|_| rng.gen()).collect();
            let pos = rng.gen_range(0..words.len());
            let bit = rng.gen_range(0..64);
            let mut other = words.clone();
            other[pos] ^= 1 << bit;
            flipped += (combine(words) ^ combine(other)).count_ones() as u64;
        }
        let mean = flipped as f64 / trials as f64;
        assert!((24.0..=40.0).contains(&mean), "mean flipped bits {mean}");
    }
}
