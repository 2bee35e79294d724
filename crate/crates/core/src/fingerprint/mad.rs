//! Per-coefficient median and MAD, exact or from a random sample of windows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Anything that can produce the wavelet coefficients of window `i` on demand.
///
/// Sources are re-read once per coefficient slab, so the sampled windows never
/// have to be resident all at once.
pub trait CoefficientSource: Sync {
    fn window_count(&self) -> usize;
    fn coefficient_count(&self) -> usize;
    fn coefficients_into(&self, window: usize, out: &mut [f64]);
}

impl CoefficientSource for [Vec<f64>] {
    fn window_count(&self) -> usize {
        self.len()
    }

    fn coefficient_count(&self) -> usize {
        self.first().map_or(0, Vec::len)
    }

    fn coefficients_into(&self, window: usize, out: &mut [f64]) {
        out.copy_from_slice(&self[window]);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MadStats {
    pub median: Vec<f64>,
    pub mad: Vec<f64>,
    /// Windows that contributed.
    pub sample_count: u64,
    pub sampling_rate: f64,
    pub rng_seed: u64,
}

impl MadStats {
    pub fn len(&self) -> usize {
        self.median.len()
    }

    pub fn is_empty(&self) -> bool {
        self.median.is_empty()
    }

    /// Coefficients that never vary in the sample; they are skipped by top-K selection.
    pub fn zero_mad_indices(&self) -> Vec<usize> {
        self.mad.iter().enumerate().filter(|(_, &m)| m == 0.0).map(|(i, _)| i).collect()
    }

    pub fn eligible_count(&self) -> usize {
        self.mad.iter().filter(|&&m| m > 0.0).count()
    }
}

/// Median of `values` (mean of the middle pair for even lengths). Reorders the slice.
pub fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    assert!(n > 0, "median of empty slice");
    let (_, &mut hi, _) = values.select_nth_unstable_by(n / 2, f64::total_cmp);
    if n % 2 == 1 {
        hi
    } else {
        let lo = values[..n / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo + hi) / 2.0
    }
}

/// `(median, median(|x - median|))`. Reorders and overwrites `values`.
pub fn median_and_mad(values: &mut [f64]) -> (f64, f64) {
    let med = median_in_place(values);
    values.iter_mut().for_each(|v| *v = (*v - med).abs());
    (med, median_in_place(values))
}

/// Bernoulli window sample; a rate of 1 selects every window without touching the RNG.
pub fn sample_windows(n: usize, rate: f64, seed: u64) -> Vec<usize> {
    if rate >= 1.0 {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).filter(|_| rng.gen_bool(rate)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MadEstimator {
    pub sampling_rate: f64,
    pub seed: u64,
    /// Upper bound on the sampled-coefficient buffer held at once.
    pub memory_budget_bytes: usize,
}

impl MadEstimator {
    pub fn new(sampling_rate: f64, seed: u64) -> Self {
        Self { sampling_rate, seed, memory_budget_bytes: 512 << 20 }
    }

    pub fn estimate<S: CoefficientSource + ?Sized>(&self, source: &S) -> Result<MadStats> {
        if !(self.sampling_rate > 0.0 && self.sampling_rate <= 1.0) {
            return param(format!("MAD sampling rate must be in (0, 1], got {}", self.sampling_rate));
        }
        let picked = sample_windows(source.window_count(), self.sampling_rate, self.seed);
        if picked.is_empty() {
            return param(format!(
                "MAD sample is empty ({} windows at rate {}); use a larger sampling rate",
                source.window_count(),
                self.sampling_rate
            ));
        }
        let dim = source.coefficient_count();
        let n = picked.len();
        let slab = (self.memory_budget_bytes / (8 * n)).clamp(1, dim.max(1));
        let mut median = vec![0.0; dim];
        let mut mad = vec![0.0; dim];
        let mut block = vec![0.0; n * slab];
        for lo in (0..dim).step_by(slab) {
            let hi = (lo + slab).min(dim);
            let width = hi - lo;
            block[..n * width]
                .par_chunks_mut(width)
                .zip(picked.par_iter())
                .for_each_init(
                    || vec![0.0; dim],
                    |full, (dst, &w)| {
                        source.coefficients_into(w, full);
                        dst.copy_from_slice(&full[lo..hi]);
                    },
                );
            let block = &block[..n * width];
            let stats: Vec<(f64, f64)> = (0..width)
                .into_par_iter()
                .map(|c| {
                    let mut col: Vec<f64> = (0..n).map(|s| block[s * width + c]).collect();
                    median_and_mad(&mut col)
                })
                .collect();
            for (c, (m, d)) in stats.into_iter().enumerate() {
                median[lo + c] = m;
                mad[lo + c] = d;
            }
        }
        Ok(MadStats {
            median,
            mad,
            sample_count: n as u64,
            sampling_rate: self.sampling_rate,
            rng_seed: self.seed,
        })
    }
}

/// Median/MAD over a sampled subset of the windows in `source`.
pub fn estimate_mad<S: CoefficientSource + ?Sized>(source: &S, sampling_rate: f64, seed: u64) -> Result<MadStats> {
    MadEstimator::new(sampling_rate, seed).estimate(source)
}
