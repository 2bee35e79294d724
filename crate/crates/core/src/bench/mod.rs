//! Oracles and experiment harness.

mod eval;
mod scurve;
mod synthetic;

pub use eval::{
    detection_is_event_backed, detection_matches, end_to_end_eval, factor_analysis, label_windows, low_snr_params, paired_event_spec, score_output, station_inputs, synthetic_band,
    true_pairs, variants_csv, EvalReport, TruePair, VariantReport, WindowLabel,
};
pub use scurve::{scurve_experiment, wilson_interval, ScurvePoint, ScurveSpec};
pub use synthetic::{correlated_fingerprints, fingerprint_pair, planted_dataset, random_fingerprint, shared_bits_for};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::fingerprint::{intersection_size, Fingerprint};

/// Largest input [`brute_force_pairs`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarPair {
    pub idx1: u64,
    pub idx2: u64,
    pub jaccard: f64,
}

/// Exact all-pairs Jaccard join, `O(n^2)`; pairs in `(idx1, idx2)` order.
pub fn brute_force_pairs(fps: &[Fingerprint], threshold: f64) -> Result<Vec<SimilarPair>> {
    if fps.len() > BRUTE_FORCE_LIMIT {
        return param(format!("brute force refuses {} fingerprints (limit {BRUTE_FORCE_LIMIT})", fps.len()));
    }
    Ok((0..fps.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = &fps[i];
            fps[i + 1..].iter().enumerate().filter_map(move |(o, b)| {
                let inter = intersection_size(&a.bits, &b.bits);
                let union = a.bits.len() + b.bits.len() - inter;
                let j = if union == 0 { 1.0 } else { inter as f64 / union as f64 };
                (j >= threshold).then_some(SimilarPair { idx1: i as u64, idx2: (i + 1 + o) as u64, jaccard: j })
            })
        })
        .collect())
}

/// CSV table of an S-curve experiment.
pub fn scurve_csv(points: &[ScurvePoint]) -> String {
    let mut s = String::from("k,m,t,target_s,s,trials,reported,rate,wilson_lo,wilson_hi,analytic,cross_reports\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{},{:.3},{:.6},{},{},{:.6},{:.6},{:.6},{:.6},{}\n",
            p.k, p.m, p.t, p.target_similarity, p.similarity, p.trials, p.reported, p.rate, p.wilson_lo, p.wilson_hi, p.analytic, p.cross_reports
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn brute_force_trivia() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = random_fingerprint(&mut rng, 256, 10, 0);
        let b = Fingerprint { index: 1, ..a.clone() };
        assert_eq!(brute_force_pairs(&[a.clone(), b], 1.0).unwrap().len(), 1);
        let many: Vec<Fingerprint> = (0..20).map(|i| random_fingerprint(&mut rng, 256, 10, i)).collect();
        assert_eq!(brute_force_pairs(&many, 0.0).unwrap().len(), 190);
        let huge = vec![a; BRUTE_FORCE_LIMIT + 1];
        assert!(brute_force_pairs(&huge, 0.5).is_err());
    }
}
