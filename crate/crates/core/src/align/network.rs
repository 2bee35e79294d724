use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::cluster::{DiagonalCluster, UnionFind};
use crate::error::{param, Error, Result};

/// Index-to-time mapping of one channel's fingerprint stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintStream {
    pub station_id: String,
    pub start_epoch_s: f64,
    pub window_lag_s: f64,
    pub count: u64,
}

impl FingerprintStream {
    pub fn epoch_of(&self, idx: f64) -> f64 {
        self.start_epoch_s + idx * self.window_lag_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationEventPair {
    pub station_id: String,
    pub event1_epoch_s: f64,
    pub event2_epoch_s: f64,
    pub inter_event_dt_s: f64,
    pub score: u64,
    pub pair_count: u64,
}

pub fn to_station_pairs(clusters: &[DiagonalCluster], stream: &FingerprintStream) -> Result<Vec<StationEventPair>> {
    clusters
        .iter()
        .map(|c| {
            // the box corner (idx1_max, dt_max) need not be an entry; its opposite corner is bounded by one
            let low_corner = c.idx1_min.checked_add(c.dt_min);
            if c.dt_min == 0 || c.idx1_max >= stream.count || low_corner.is_none_or(|last| last >= stream.count) {
                return Err(Error::Consistency(format!(
                    "cluster dt {}..={} idx1 {}..={} outside the {} fingerprints of {}",
                    c.dt_min, c.dt_max, c.idx1_min, c.idx1_max, stream.count, stream.station_id
                )));
            }
            let event1 = stream.epoch_of(c.centroid_idx1);
            let dt = c.centroid_dt * stream.window_lag_s;
            Ok(StationEventPair {
                station_id: stream.station_id.clone(),
                event1_epoch_s: event1,
                event2_epoch_s: event1 + dt,
                inter_event_dt_s: dt,
                score: c.sim_sum,
                pair_count: c.pair_count,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssociationParams {
    pub min_stations: usize,
    pub dt_tol_s: f64,
    pub start_tol_s: f64,
}

impl Default for AssociationParams {
    fn default() -> Self {
        Self::for_lag(2.0)
    }
}

impl AssociationParams {
    /// Two stations, tolerances of three window lags.
    pub fn for_lag(window_lag_s: f64) -> Self {
        Self { min_stations: 2, dt_tol_s: 3.0 * window_lag_s, start_tol_s: 3.0 * window_lag_s }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_tol_s >= 0.0 && self.start_tol_s >= 0.0) {
            return param(format!("association tolerances must be >= 0, got {} / {}", self.dt_tol_s, self.start_tol_s));
        }
        if self.min_stations == 0 {
            return param("min_stations must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationArrivals {
    pub station_id: String,
    pub arrival1_epoch_s: f64,
    pub arrival2_epoch_s: f64,
    pub score: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDetection {
    pub station_count: usize,
    pub score: u64,
    /// Score-weighted mean inter-event time of the members.
    pub delta_t_s: f64,
    /// Best-scoring member per station, by station id.
    pub arrivals: Vec<StationArrivals>,
    pub members: Vec<StationEventPair>,
}

fn canonical(a: &StationEventPair, b: &StationEventPair) -> Ordering {
    a.inter_event_dt_s
        .total_cmp(&b.inter_event_dt_s)
        .then(a.event1_epoch_s.total_cmp(&b.event1_epoch_s))
        .then_with(|| a.station_id.cmp(&b.station_id))
        .then(b.score.cmp(&a.score))
        .then(a.pair_count.cmp(&b.pair_count))
        .then(a.event2_epoch_s.total_cmp(&b.event2_epoch_s))
}

/// Groups pairs from all stations whose inter-event times and first-event epochs agree within
/// the tolerances (transitively) and keeps groups seen at `min_stations` distinct stations.
pub fn network_associate(pairs: &[StationEventPair], params: &AssociationParams) -> Result<Vec<NetworkDetection>> {
    params.validate()?;
    let mut sorted: Vec<&StationEventPair> = pairs.iter().collect();
    sorted.sort_by(|a, b| canonical(a, b));
    let mut uf = UnionFind::new(sorted.len());
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if sorted[j].inter_event_dt_s - sorted[i].inter_event_dt_s > params.dt_tol_s {
                break;
            }
            if (sorted[j].event1_epoch_s - sorted[i].event1_epoch_s).abs() <= params.start_tol_s {
                uf.union(i, j);
            }
        }
    }
    let mut out = Vec::new();
    for group in uf.groups() {
        let members: Vec<StationEventPair> = group.iter().map(|&i| sorted[i].clone()).collect();
        let mut arrivals: Vec<StationArrivals> = Vec::new();
        let mut by_station: Vec<&StationEventPair> = members.iter().collect();
        by_station.sort_by(|a, b| {
            a.station_id
                .cmp(&b.station_id)
                .then(b.score.cmp(&a.score))
                .then(a.event1_epoch_s.total_cmp(&b.event1_epoch_s))
        });
        for m in by_station {
            if arrivals.last().is_some_and(|a| a.station_id == m.station_id) {
                continue;
            }
            arrivals.push(StationArrivals {
                station_id: m.station_id.clone(),
                arrival1_epoch_s: m.event1_epoch_s,
                arrival2_epoch_s: m.event2_epoch_s,
                score: m.score,
            });
        }
        if arrivals.len() < params.min_stations {
            continue;
        }
        let score: u64 = members.iter().map(|m| m.score).sum();
        let weight = score.max(1) as f64;
        let delta_t_s = members.iter().map(|m| m.inter_event_dt_s * m.score as f64).sum::<f64>() / weight;
        out.push(NetworkDetection { station_count: arrivals.len(), score, delta_t_s, arrivals, members });
    }
    out.sort_by(|a, b| {
        let first = |d: &NetworkDetection| d.arrivals.iter().map(|a| a.arrival1_epoch_s).fold(f64::INFINITY, f64::min);
        first(a).total_cmp(&first(b)).then(a.delta_t_s.total_cmp(&b.delta_t_s)).then(b.score.cmp(&a.score))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};

    fn pair(st: &str, e1: f64, dt: f64, score: u64) -> StationEventPair {
        StationEventPair {
            station_id: st.into(),
            event1_epoch_s: e1,
            event2_epoch_s: e1 + dt,
            inter_event_dt_s: dt,
            score,
            pair_count: 1,
        }
    }

    fn cluster(dt: f64, idx: f64, dt_max: u64, idx_max: u64) -> DiagonalCluster {
        DiagonalCluster {
            dt_min: dt as u64,
            dt_max,
            idx1_min: idx as u64,
            idx1_max: idx_max,
            pair_count: 4,
            sim_sum: 20,
            centroid_dt: dt,
            centroid_idx1: idx,
        }
    }

    #[test]
    fn unit_conversion() {
        let stream = FingerprintStream { station_id: "ST00".into(), start_epoch_s: 0.0, window_lag_s: 2.0, count: 1000 };
        let p = to_station_pairs(&[cluster(30.0, 100.0, 30, 100)], &stream).unwrap();
        assert_eq!(p[0].inter_event_dt_s, 60.0);
        assert_eq!(p[0].event1_epoch_s, 200.0);
        assert_eq!(p[0].event2_epoch_s, 260.0);
        // far corner past the end while every entry fits
        assert!(to_station_pairs(&[cluster(30.0, 100.0, 40, 965)], &stream).is_ok());
        assert!(matches!(to_station_pairs(&[cluster(30.0, 975.0, 30, 980)], &stream), Err(Error::Consistency(_))));
    }

    #[test]
    fn two_stations_one_detection() {
        let pairs = vec![pair("A", 100.0, 500.0, 10), pair("B", 103.0, 501.0, 7)];
        let d = network_associate(&pairs, &AssociationParams::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].station_count, d[0].score), (2, 17));
        assert!((d[0].delta_t_s - (500.0 * 10.0 + 501.0 * 7.0) / 17.0).abs() < 1e-12);
        let single = network_associate(&pairs[..1], &AssociationParams::default()).unwrap();
        assert!(single.is_empty());
    }

    #[test]
    fn tolerances_separate_groups() {
        let pairs = vec![pair("A", 100.0, 500.0, 1), pair("B", 100.0, 520.0, 1), pair("C", 300.0, 500.0, 1)];
        assert!(network_associate(&pairs, &AssociationParams::default()).unwrap().is_empty());
        assert!(network_associate(&pairs, &AssociationParams { dt_tol_s: -1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn permutation_invariant_and_monotone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let mut pairs: Vec<StationEventPair> = (0..200)
            .map(|_| {
                let st = format!("ST{:02}", rng.gen_range(0..4));
                pair(&st, rng.gen_range(0..50).into(), rng.gen_range(0..20).into(), rng.gen_range(1..50))
            })
            .collect();
        let params = AssociationParams::default();
        let reference = network_associate(&pairs, &params).unwrap();
        assert!(!reference.is_empty());
        for _ in 0..10 {
            pairs.shuffle(&mut rng);
            assert_eq!(network_associate(&pairs, &params).unwrap(), reference);
        }
        let mut prev = reference.len();
        for min_stations in 3..=5 {
            let n = network_associate(&pairs, &AssociationParams { min_stations, ..params.clone() }).unwrap().len();
            assert!(n <= prev);
            prev = n;
        }
    }
}
