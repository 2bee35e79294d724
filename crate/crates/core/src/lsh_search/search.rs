use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tables::{build_tables_filtered, HashTables};
use super::SearchConfig;
use crate::error::{param, Result};
use crate::minmax_hash::SignatureSet;

/// A non-zero similarity-matrix entry: fingerprints `idx1` and `idx1 + dt` collide in `sim` tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triplet {
    pub dt: u64,
    pub idx1: u64,
    pub sim: u32,
}

impl Triplet {
    pub fn idx2(&self) -> u64 {
        self.idx1 + self.dt
    }
}

/// Per-query collision counters indexed by position within the partition.
struct Counter {
    counts: Vec<u16>,
    touched: Vec<u32>,
}

impl Counter {
    fn new(n: usize) -> Self {
        Self { counts: vec![0; n], touched: Vec::new() }
    }

    #[inline]
    fn hit(&mut self, slot: usize) {
        if self.counts[slot] == 0 {
            self.touched.push(slot as u32);
        }
        self.counts[slot] += 1;
    }

    fn drain(&mut self, mut f: impl FnMut(usize, u16)) {
        for &slot in &self.touched {
            f(slot as usize, self.counts[slot as usize]);
            self.counts[slot as usize] = 0;
        }
        self.touched.clear();
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct QueryCounts {
    pub queries: u64,
    pub lookups: u64,
    pub candidate_pairs: u64,
}

impl QueryCounts {
    fn add(mut self, o: Self) -> Self {
        self.queries += o.queries;
        self.lookups += o.lookups;
        self.candidate_pairs += o.candidate_pairs;
        self
    }
}

fn is_excluded(excluded: &[bool], i: usize) -> bool {
    excluded.get(i).copied().unwrap_or(false)
}

/// Emits every pair `(c, q)` with `c` in the partition, `c + exclusion < q`, colliding in at
/// least `m` tables. Fingerprints flagged in `excluded` take part in neither role.
pub fn query_partition(
    sigs: &SignatureSet,
    tables: &HashTables,
    m: usize,
    exclusion: u64,
    excluded: &[bool],
) -> (Vec<Triplet>, QueryCounts) {
    let lo = tables.range.start;
    let width = tables.range.len();
    if width == 0 {
        return (Vec::new(), QueryCounts::default());
    }
    let m = m as u16;
    let chunks: Vec<(Vec<Triplet>, QueryCounts)> = (lo + 1..sigs.len())
        .into_par_iter()
        .with_min_len(64)
        .fold(
            || (Counter::new(width), Vec::new(), QueryCounts::default()),
            |(mut ctr, mut out, mut qc), q| {
                if is_excluded(excluded, q) {
                    return (ctr, out, qc);
                }
                qc.queries += 1;
                let sig = sigs.get(q);
                for (t, &s) in sig.iter().enumerate() {
                    let bucket = tables.table(t).bucket(s);
                    let end = bucket.partition_point(|&c| c as u64 + exclusion < q as u64);
                    qc.lookups += end as u64;
                    for &c in &bucket[..end] {
                        if !is_excluded(excluded, c as usize) {
                            ctr.hit(c as usize - lo);
                        }
                    }
                }
                qc.candidate_pairs += ctr.touched.len() as u64;
                ctr.drain(|slot, n| {
                    if n >= m {
                        let c = (lo + slot) as u64;
                        out.push(Triplet { dt: q as u64 - c, idx1: c, sim: n as u32 });
                    }
                });
                (ctr, out, qc)
            },
        )
        .map(|(_, out, qc)| (out, qc))
        .collect();
    let mut counts = QueryCounts::default();
    let mut triplets = Vec::with_capacity(chunks.iter().map(|c| c.0.len()).sum());
    for (out, qc) in chunks {
        triplets.extend(out);
        counts = counts.add(qc);
    }
    (triplets, counts)
}

/// Neighbours of `q` inside the partition with at least `m` collisions, both directions.
fn partition_neighbours(
    sigs: &SignatureSet,
    tables: &HashTables,
    q: usize,
    m: u16,
    exclusion: u64,
    ctr: &mut Counter,
    mut f: impl FnMut(usize),
) {
    let lo = tables.range.start;
    for (t, &s) in sigs.get(q).iter().enumerate() {
        for &c in tables.table(t).bucket(s) {
            if (c as u64).abs_diff(q as u64) > exclusion {
                ctr.hit(c as usize - lo);
            }
        }
    }
    ctr.drain(|slot, n| {
        if n >= m {
            f(lo + slot);
        }
    });
}

/// Two-pass occurrence filter for one partition. Returns the newly excluded positions.
///
/// Pass 1 counts, for each live fingerprint of the partition, its matches inside the
/// partition. Fingerprints whose count exceeds `threshold * partition size` are excluded
/// together with their matched neighbours.
pub fn occurrence_filter(
    sigs: &SignatureSet,
    tables: &HashTables,
    m: usize,
    exclusion: u64,
    threshold: f64,
    excluded: &[bool],
) -> Result<Vec<usize>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return param(format!("occurrence threshold must lie in (0, 1], got {threshold}"));
    }
    let range = tables.range.clone();
    let limit = threshold * range.len() as f64;
    let m = m as u16;
    let flagged: Vec<usize> = range
        .clone()
        .into_par_iter()
        .map_init(
            || Counter::new(range.len()),
            |ctr, q| {
                if is_excluded(excluded, q) {
                    return None;
                }
                let mut count = 0usize;
                partition_neighbours(sigs, tables, q, m, exclusion, ctr, |_| count += 1);
                (count as f64 > limit).then_some(q)
            },
        )
        .flatten()
        .collect();
    let mut out = vec![false; range.len()];
    let mut ctr = Counter::new(range.len());
    for &q in &flagged {
        out[q - range.start] = true;
        partition_neighbours(sigs, tables, q, m, exclusion, &mut ctr, |c| {
            if !is_excluded(excluded, c) {
                out[c - range.start] = true;
            }
        });
    }
    Ok(out.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| range.start + i).collect())
}

/// Bucket-size distribution over all tables of all partitions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    pub buckets: u64,
    pub entries: u64,
    pub p50: u32,
    pub p90: u32,
    pub p99: u32,
    pub p999: u32,
    pub max: u32,
    /// Share of all entries held by the largest 0.1% of buckets.
    pub top_0_1pct_mass: f64,
    /// `log2_histogram[i]` counts buckets with size in `[2^i, 2^(i+1))`.
    pub log2_histogram: Vec<u64>,
}

impl BucketStats {
    pub fn from_sizes(mut sizes: Vec<u32>) -> Self {
        if sizes.is_empty() {
            return Self::default();
        }
        sizes.sort_unstable();
        let n = sizes.len();
        let pick = |q: f64| sizes[(((n - 1) as f64) * q).round() as usize];
        let entries: u64 = sizes.iter().map(|&s| s as u64).sum();
        let top = n.div_ceil(1000);
        let top_mass: u64 = sizes[n - top..].iter().map(|&s| s as u64).sum();
        let mut log2_histogram = vec![0u64; 32 - sizes[n - 1].leading_zeros() as usize];
        for &s in &sizes {
            log2_histogram[31 - s.leading_zeros() as usize] += 1;
        }
        Self {
            buckets: n as u64,
            entries,
            p50: pick(0.5),
            p90: pick(0.9),
            p99: pick(0.99),
            p999: pick(0.999),
            max: sizes[n - 1],
            top_0_1pct_mass: top_mass as f64 / entries as f64,
            log2_histogram,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub fingerprints: u64,
    pub partitions: usize,
    pub queries: u64,
    pub lookups: u64,
    pub lookups_per_query: f64,
    pub candidate_pairs: u64,
    /// Distinct candidate pairs over all `n (n - 1) / 2` pairs.
    pub selectivity: f64,
    pub triplets: u64,
    pub filtered_fingerprints: u64,
    pub peak_table_entries: u64,
    pub buckets: BucketStats,
}

#[derive(Debug, Clone)]
pub struct SearchOutput {
    /// Sorted by `(dt, idx1)`.
    pub triplets: Vec<Triplet>,
    pub stats: SearchStats,
    /// Positions removed by the occurrence filter, ascending.
    pub excluded: Vec<usize>,
}

/// `p` contiguous, near-equal partitions covering `0..n`.
pub fn partition_ranges(n: usize, p: usize) -> Vec<Range<usize>> {
    let p = p.clamp(1, n.max(1));
    (0..p).map(|i| i * n / p..(i + 1) * n / p).collect()
}

/// Builds and queries each partition in turn. Each pair is emitted once, by the partition
/// that holds its lower index, so the result does not depend on the partition count unless
/// the occurrence filter is enabled.
pub fn partitioned_search(sigs: &SignatureSet, cfg: &SearchConfig, window_lag_s: f64) -> Result<SearchOutput> {
    cfg.validate()?;
    if sigs.tables != cfg.tables {
        return param(format!("signatures have {} tables, config expects {}", sigs.tables, cfg.tables));
    }
    let n = sigs.len();
    let exclusion = cfg.exclusion_windows(window_lag_s);
    let mut excluded = vec![false; if cfg.occurrence_threshold.is_some() { n } else { 0 }];
    let mut triplets = Vec::new();
    let mut counts = QueryCounts::default();
    let mut sizes = Vec::new();
    let mut peak = 0u64;
    let mut excluded_list = Vec::new();
    for range in partition_ranges(n, cfg.num_partitions) {
        let tables = build_tables_filtered(sigs, range, |i| is_excluded(&excluded, i));
        peak = peak.max(tables.entry_count() as u64);
        if let Some(th) = cfg.occurrence_threshold {
            for i in occurrence_filter(sigs, &tables, cfg.m, exclusion, th, &excluded)? {
                excluded[i] = true;
                excluded_list.push(i);
            }
        }
        let (out, qc) = query_partition(sigs, &tables, cfg.m, exclusion, &excluded);
        triplets.extend(out);
        counts = counts.add(qc);
        sizes.extend(tables.bucket_sizes());
    }
    triplets.par_sort_unstable();
    excluded_list.sort_unstable();
    let all_pairs = n as f64 * n.saturating_sub(1) as f64 / 2.0;
    let stats = SearchStats {
        fingerprints: n as u64,
        partitions: cfg.num_partitions.clamp(1, n.max(1)),
        queries: counts.queries,
        lookups: counts.lookups,
        lookups_per_query: if n == 0 { 0.0 } else { counts.lookups as f64 / n as f64 },
        candidate_pairs: counts.candidate_pairs,
        selectivity: if all_pairs > 0.0 { counts.candidate_pairs as f64 / all_pairs } else { 0.0 },
        triplets: triplets.len() as u64,
        filtered_fingerprints: excluded_list.len() as u64,
        peak_table_entries: peak,
        buckets: BucketStats::from_sizes(sizes),
    };
    Ok(SearchOutput { triplets, stats, excluded: excluded_list })
}
