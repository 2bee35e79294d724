//! Triplets to candidate events.
//!
//! * channel level: per-channel triplet files of a station are externally sorted by
//!   `(dt, idx1)`, merged and summed;
//! * station level: entries forming thin diagonals are clustered, one cluster per event pair;
//! * network level: station pairs that agree on inter-event time and start time are grouped.

mod cluster;
mod combine;
mod network;
mod report;
mod sort;

pub use cluster::{
    cluster_station, cluster_station_parallel, cluster_station_partitioned, find_partition_points, ClusterParams,
    DiagonalCluster,
};
pub use combine::{channel_combine, combine_streams, combine_triplets, CombineSummary};
pub use network::{
    network_associate, to_station_pairs, AssociationParams, FingerprintStream, NetworkDetection, StationArrivals,
    StationEventPair,
};
pub use report::{parse_report_csv, report_csv, write_report, DetectionSummary, ReportRow, REPORT_HEADER};
pub use sort::{external_sort, SortConfig, SortedStream};

use serde::{Deserialize, Serialize};

/// All alignment knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignParams {
    /// Combined channel similarity a row needs to survive.
    pub station_threshold: u32,
    pub cluster: ClusterParams,
    pub association: AssociationParams,
    pub partition_sample_rate: f64,
    pub sort: SortConfig,
}

impl Default for AlignParams {
    fn default() -> Self {
        Self {
            station_threshold: 0,
            cluster: ClusterParams::default(),
            association: AssociationParams::default(),
            partition_sample_rate: 0.01,
            sort: SortConfig::default(),
        }
    }
}

impl AlignParams {
    pub fn validate(&self) -> crate::Result<()> {
        self.cluster.validate()?;
        self.association.validate()?;
        self.sort.validate()?;
        if !(self.partition_sample_rate > 0.0 && self.partition_sample_rate <= 1.0) {
            return crate::error::param(format!(
                "partition_sample_rate must lie in (0, 1], got {}",
                self.partition_sample_rate
            ));
        }
        Ok(())
    }
}
