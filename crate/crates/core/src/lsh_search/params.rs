use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Search parameters. `k` is the effective number of hash values per signature; Min-Max
/// hashing realises it with `ceil(k / 2)` mapping functions per table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub tables: usize,
    pub k: usize,
    pub m: usize,
    pub num_partitions: usize,
    pub near_repeat_exclusion_s: f64,
    pub occurrence_threshold: Option<f64>,
    pub mapping_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

impl SearchConfig {
    /// `k = 6`, `m = 5` of 100 tables.
    pub fn baseline() -> Self {
        Self {
            tables: 100,
            k: 6,
            m: 5,
            num_partitions: 1,
            near_repeat_exclusion_s: 30.0,
            occurrence_threshold: None,
            mapping_seed: 0,
        }
    }

    /// `k = 8`, `m = 2` of 100 tables: nearly the same S-curve with far smaller buckets.
    pub fn optimized() -> Self {
        Self { k: 8, m: 2, ..Self::baseline() }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "baseline" => Ok(Self::baseline()),
            "optimized" => Ok(Self::optimized()),
            other => param(format!("unknown search profile {other:?} (expected baseline or optimized)")),
        }
    }

    pub fn k_half(&self) -> usize {
        crate::minmax_hash::k_half_for(self.k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tables == 0 || self.k == 0 {
            return param(format!("search needs t >= 1 and k >= 1, got t={} k={}", self.tables, self.k));
        }
        if self.m == 0 || self.m > self.tables {
            return param(format!("m must lie in 1..={}, got {}", self.tables, self.m));
        }
        if self.tables > u16::MAX as usize {
            return param(format!("at most {} tables supported, got {}", u16::MAX, self.tables));
        }
        if self.num_partitions == 0 {
            return param("num_partitions must be at least 1");
        }
        if !(self.near_repeat_exclusion_s >= 0.0 && self.near_repeat_exclusion_s.is_finite()) {
            return param(format!("near_repeat_exclusion_s must be >= 0, got {}", self.near_repeat_exclusion_s));
        }
        if let Some(th) = self.occurrence_threshold {
            if !(th > 0.0 && th <= 1.0) {
                return param(format!("occurrence_threshold must lie in (0, 1], got {th}"));
            }
        }
        Ok(())
    }

    /// Pairs with `dt` at or below this many windows are treated as self-matches.
    pub fn exclusion_windows(&self, window_lag_s: f64) -> u64 {
        if window_lag_s <= 0.0 {
            return 0;
        }
        (self.near_repeat_exclusion_s / window_lag_s + 1e-9).floor() as u64
    }
}

/// Probability that a pair of Jaccard similarity `s` collides in at least `m` of `t` tables
/// when each table signature uses `k` hash values.
pub fn detection_probability(s: f64, k: usize, m: usize, t: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return param(format!("similarity must lie in [0, 1], got {s}"));
    }
    if m == 0 || m > t {
        return param(format!("need 1 <= m <= t, got m={m} t={t}"));
    }
    let p = s.powi(k as i32);
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut ln_binom = 0.0;
    let (mut lower, mut upper) = (0.0, 0.0);
    for i in 0..=t {
        if i > 0 {
            ln_binom += ((t - i + 1) as f64).ln() - (i as f64).ln();
        }
        let pmf = (ln_binom + i as f64 * lp + (t - i) as f64 * lq).exp();
        if i < m {
            lower += pmf;
        } else {
            upper += pmf;
        }
    }
    // the smaller tail carries no cancellation error
    Ok(if upper < 0.5 { upper } else { 1.0 - lower })
}

/// The `m` for `k` whose S-curve is closest, in max deviation over `grid`, to `(k_ref, m_ref)`.
pub fn matching_threshold(k: usize, t: usize, k_ref: usize, m_ref: usize, grid: &[f64]) -> Result<(usize, f64)> {
    let reference = grid.iter().map(|&s| detection_probability(s, k_ref, m_ref, t)).collect::<Result<Vec<_>>>()?;
    let mut best = (1, f64::INFINITY);
    for m in 1..=t {
        let mut dev: f64 = 0.0;
        for (&s, &r) in grid.iter().zip(&reference) {
            dev = dev.max((detection_probability(s, k, m, t)? - r).abs());
        }
        if dev < best.1 {
            best = (m, dev);
        }
    }
    Ok(best)
}
