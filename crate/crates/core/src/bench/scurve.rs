use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::synthetic::{fingerprint_pair, shared_bits_for};
use crate::error::{param, Result};
use crate::lsh_search::{detection_probability, partitioned_search, SearchConfig};
use crate::minmax_hash::{gen_hash_mappings, minmax_signatures};

/// Wilson score interval for `hits` of `n`, at `z` standard deviations.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScurveSpec {
    /// `(k, m)` pairs, all over `tables` tables.
    pub configs: Vec<(usize, usize)>,
    pub tables: usize,
    pub similarities: Vec<f64>,
    pub trials: usize,
    /// Set bits per synthetic fingerprint.
    pub bits: usize,
    pub dim: u32,
    pub seed: u64,
}

impl Default for ScurveSpec {
    fn default() -> Self {
        Self {
            configs: vec![(6, 5), (8, 2)],
            tables: 100,
            similarities: vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            trials: 10_000,
            bits: 100,
            dim: 4096,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScurvePoint {
    pub k: usize,
    pub m: usize,
    pub t: usize,
    pub target_similarity: f64,
    /// Exact Jaccard of every generated pair.
    pub similarity: f64,
    pub trials: u64,
    pub reported: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub analytic: f64,
    /// Triplets between fingerprints of different pairs.
    pub cross_reports: u64,
}

/// Monte Carlo report rate of the full search path on planted pairs, against the analytic curve.
pub fn scurve_experiment(spec: &ScurveSpec) -> Result<Vec<ScurvePoint>> {
    if spec.trials == 0 {
        return param("scurve_experiment needs at least one trial");
    }
    let mut out = Vec::new();
    for (ci, &(k, m)) in spec.configs.iter().enumerate() {
        let cfg = SearchConfig {
            tables: spec.tables,
            k,
            m,
            num_partitions: 1,
            near_repeat_exclusion_s: 0.0,
            occurrence_threshold: None,
            mapping_seed: spec.seed ^ (ci as u64 + 1).wrapping_mul(0x9E37_79B9),
        };
        cfg.validate()?;
        let mapping = gen_hash_mappings(spec.dim as usize, cfg.tables, cfg.k, cfg.mapping_seed)?;
        for (si, &s) in spec.similarities.iter().enumerate() {
            let shared = shared_bits_for(spec.bits, s);
            let similarity = shared as f64 / (2 * spec.bits - shared) as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(1000 * ci as u64 + si as u64));
            let mut fps = Vec::with_capacity(2 * spec.trials);
            for i in 0..spec.trials {
                let (a, b) = fingerprint_pair(&mut rng, spec.dim, spec.bits, shared, 2 * i as u64)?;
                fps.push(a);
                fps.push(b);
            }
            let sigs = minmax_signatures(&fps, &mapping)?;
            let found = partitioned_search(&sigs, &cfg, 1.0)?;
            let reported = found.triplets.iter().filter(|t| t.dt == 1 && t.idx1 % 2 == 0).count() as u64;
            let (wilson_lo, wilson_hi) = wilson_interval(reported, spec.trials as u64, 1.96);
            out.push(ScurvePoint {
                k,
                m,
                t: cfg.tables,
                target_similarity: s,
                similarity,
                trials: spec.trials as u64,
                reported,
                rate: reported as f64 / spec.trials as f64,
                wilson_lo,
                wilson_hi,
                analytic: detection_probability(similarity, k, m, cfg.tables)?,
                cross_reports: found.triplets.len() as u64 - reported,
            });
        }
    }
    Ok(out)
}
