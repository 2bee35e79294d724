use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::lsh_search::Triplet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams {
    /// Largest idx1 step, in windows, between neighbouring entries of one cluster.
    pub gap: u64,
    /// Largest `dt_max - dt_min` of a cluster.
    pub max_width: u64,
    /// Clusters with fewer pairs are dropped.
    pub min_size: u64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self { gap: 15, max_width: 3, min_size: 3 }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_size == 0 {
            return param("min_size must be at least 1");
        }
        Ok(())
    }

    /// Diagonal distance beyond which two entries can never share a cluster.
    pub fn reach(&self) -> u64 {
        self.max_width.max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalCluster {
    pub dt_min: u64,
    pub dt_max: u64,
    pub idx1_min: u64,
    pub idx1_max: u64,
    pub pair_count: u64,
    pub sim_sum: u64,
    /// Similarity-weighted mean offset.
    pub centroid_dt: f64,
    /// Similarity-weighted mean lower index.
    pub centroid_idx1: f64,
}

impl DiagonalCluster {
    fn from_members(members: &[Triplet]) -> Self {
        let mut c = DiagonalCluster {
            dt_min: u64::MAX,
            dt_max: 0,
            idx1_min: u64::MAX,
            idx1_max: 0,
            pair_count: members.len() as u64,
            sim_sum: 0,
            centroid_dt: 0.0,
            centroid_idx1: 0.0,
        };
        let (mut wdt, mut widx) = (0u128, 0u128);
        for t in members {
            c.dt_min = c.dt_min.min(t.dt);
            c.dt_max = c.dt_max.max(t.dt);
            c.idx1_min = c.idx1_min.min(t.idx1);
            c.idx1_max = c.idx1_max.max(t.idx1);
            c.sim_sum += t.sim as u64;
            wdt += t.dt as u128 * t.sim as u128;
            widx += t.idx1 as u128 * t.sim as u128;
        }
        c.centroid_dt = wdt as f64 / c.sim_sum as f64;
        c.centroid_idx1 = widx as f64 / c.sim_sum as f64;
        c
    }

    fn sort_key(&self) -> (u64, u64, u64, u64) {
        (self.dt_min, self.idx1_min, self.dt_max, self.idx1_max)
    }
}

pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }

    /// Groups of element indices, each ascending, ordered by smallest member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }
}

/// Maximal idx1-runs on one diagonal: `(dt, first entry, end entry, idx1 lo, idx1 hi)`.
struct Run {
    dt: u64,
    start: usize,
    end: usize,
    lo: u64,
    hi: u64,
}

fn runs_of(triplets: &[Triplet], gap: u64) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for (i, t) in triplets.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if r.dt == t.dt && t.idx1 - r.hi <= gap => {
                r.end = i + 1;
                r.hi = t.idx1;
            }
            _ => runs.push(Run { dt: t.dt, start: i, end: i + 1, lo: t.idx1, hi: t.idx1 }),
        }
    }
    runs
}

/// Connected components of `triplets` (sorted by `(dt, idx1)`) under the adjacency
/// `|d dt| <= 1 and |d idx1| <= gap`, as lists of entry indices.
fn components(triplets: &[Triplet], gap: u64) -> Vec<Vec<usize>> {
    let runs = runs_of(triplets, gap);
    let mut uf = UnionFind::new(runs.len());
    // runs of diagonal dt occupy one contiguous, idx-sorted block
    let mut block_start = 0;
    let mut prev_block: Option<(usize, usize)> = None;
    while block_start < runs.len() {
        let dt = runs[block_start].dt;
        let mut block_end = block_start;
        while block_end < runs.len() && runs[block_end].dt == dt {
            block_end += 1;
        }
        if let Some((ps, pe)) = prev_block.filter(|&(ps, _)| runs[ps].dt + 1 == dt) {
            let mut j = ps;
            for i in block_start..block_end {
                let r = &runs[i];
                while j < pe && runs[j].hi + gap < r.lo {
                    j += 1;
                }
                let mut k = j;
                while k < pe && runs[k].lo <= r.hi + gap {
                    uf.union(i, k);
                    k += 1;
                }
            }
        }
        prev_block = Some((block_start, block_end));
        block_start = block_end;
    }
    uf.groups()
        .into_iter()
        .map(|g| g.into_iter().flat_map(|r| runs[r].start..runs[r].end).collect())
        .collect()
}

fn cluster_into(triplets: &[Triplet], params: &ClusterParams, out: &mut Vec<DiagonalCluster>) {
    for comp in components(triplets, params.gap) {
        let dt_min = comp.iter().map(|&i| triplets[i].dt).min().unwrap();
        let dt_max = comp.iter().map(|&i| triplets[i].dt).max().unwrap();
        if dt_max - dt_min <= params.max_width {
            if comp.len() as u64 >= params.min_size {
                let members: Vec<Triplet> = comp.iter().map(|&i| triplets[i]).collect();
                out.push(DiagonalCluster::from_members(&members));
            }
            continue;
        }
        // too wide: cut into slabs of max_width + 1 diagonals and re-cluster each
        let slab = params.max_width + 1;
        let mut members: Vec<Triplet> = comp.iter().map(|&i| triplets[i]).collect();
        members.sort_unstable();
        let mut start = 0;
        while start < members.len() {
            let s = (members[start].dt - dt_min) / slab;
            let mut end = start;
            while end < members.len() && (members[end].dt - dt_min) / slab == s {
                end += 1;
            }
            let part = &members[start..end];
            for sub in components(part, params.gap) {
                if sub.len() as u64 >= params.min_size {
                    let m: Vec<Triplet> = sub.iter().map(|&i| part[i]).collect();
                    out.push(DiagonalCluster::from_members(&m));
                }
            }
            start = end;
        }
    }
}

fn check_sorted(triplets: &[Triplet]) -> Result<()> {
    if let Some(w) = triplets.windows(2).find(|w| (w[0].dt, w[0].idx1) >= (w[1].dt, w[1].idx1)) {
        return Err(Error::Format(format!(
            "triplets must be strictly sorted by (dt, idx1); found {:?} before {:?}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Diagonal clusters of one station's combined triplets, ordered by `(dt_min, idx1_min)`.
pub fn cluster_station(triplets: &[Triplet], params: &ClusterParams) -> Result<Vec<DiagonalCluster>> {
    params.validate()?;
    check_sorted(triplets)?;
    let mut out = Vec::new();
    cluster_into(triplets, params, &mut out);
    out.sort_by_key(DiagonalCluster::sort_key);
    Ok(out)
}

/// `dt` values at which the sorted triplets may be cut without splitting a cluster: each
/// boundary `b` is an occupied diagonal with no occupied diagonal in `b - reach..b`.
pub fn find_partition_points(triplets: &[Triplet], params: &ClusterParams, sample_rate: f64) -> Result<Vec<u64>> {
    if !(sample_rate > 0.0 && sample_rate <= 1.0) {
        return param(format!("sample_rate must lie in (0, 1], got {sample_rate}"));
    }
    if triplets.len() < 2 {
        return Ok(Vec::new());
    }
    let reach = params.reach();
    let stride = ((1.0 / sample_rate).round() as usize).max(1);
    let mut samples: Vec<usize> = (0..triplets.len()).step_by(stride).collect();
    if *samples.last().unwrap() != triplets.len() - 1 {
        samples.push(triplets.len() - 1);
    }
    let mut bounds = Vec::new();
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        if triplets[b].dt - triplets[a].dt <= reach {
            continue;
        }
        let mut i = a;
        while triplets[i].dt < triplets[b].dt {
            // first entry of the next occupied diagonal
            let next = i + triplets[i..=b].partition_point(|t| t.dt == triplets[i].dt);
            if triplets[next].dt - triplets[i].dt > reach {
                bounds.push(triplets[next].dt);
                break;
            }
            i = next;
        }
    }
    Ok(bounds)
}

/// Clusters each dt-partition in parallel; equals [`cluster_station`] when `bounds` come
/// from [`find_partition_points`].
pub fn cluster_station_partitioned(triplets: &[Triplet], params: &ClusterParams, bounds: &[u64]) -> Result<Vec<DiagonalCluster>> {
    params.validate()?;
    check_sorted(triplets)?;
    let mut cuts = vec![0];
    cuts.extend(bounds.iter().map(|&b| triplets.partition_point(|t| t.dt < b)));
    cuts.push(triplets.len());
    let mut out: Vec<DiagonalCluster> = cuts
        .par_windows(2)
        .flat_map_iter(|w| {
            let mut part = Vec::new();
            cluster_into(&triplets[w[0]..w[1]], params, &mut part);
            part
        })
        .collect();
    out.sort_by_key(DiagonalCluster::sort_key);
    Ok(out)
}

/// Serial partition search followed by parallel clustering.
pub fn cluster_station_parallel(triplets: &[Triplet], params: &ClusterParams, sample_rate: f64) -> Result<Vec<DiagonalCluster>> {
    let bounds = find_partition_points(triplets, params, sample_rate)?;
    cluster_station_partitioned(triplets, params, &bounds)
}
