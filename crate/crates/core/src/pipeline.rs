//! In-process end-to-end run: fingerprint, hash, search and align every channel.

use std::borrow::Cow;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::align::{
    cluster_station_parallel, combine_triplets, network_associate, to_station_pairs, AlignParams, FingerprintStream,
    NetworkDetection, StationEventPair,
};
use crate::error::{Error, Result};
use crate::fingerprint::{fingerprint_series, Fingerprint, FingerprintParams};
use crate::ingest::{bandpass, BandpassSpec, TimeSeries};
use crate::lsh_search::{partitioned_search, SearchConfig, SearchStats, Triplet};
use crate::minmax_hash::{gen_hash_mappings, minmax_signatures, HashMapping};

/// One station's channels; `band` filters them and truncates their spectrograms.
#[derive(Debug, Clone)]
pub struct StationInput {
    pub station_id: String,
    pub channels: Vec<TimeSeries>,
    pub band: Option<BandpassSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub fingerprint: FingerprintParams,
    pub search: SearchConfig,
    pub align: AlignParams,
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.fingerprint.validate()?;
        self.search.validate()?;
        self.align.validate()
    }
}

/// Wall time per stage in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub fingerprint_s: f64,
    pub hash_s: f64,
    pub search_s: f64,
    pub align_s: f64,
}

impl StageTimings {
    pub fn total_s(&self) -> f64 {
        self.fingerprint_s + self.hash_s + self.search_s + self.align_s
    }
}

#[derive(Debug, Clone)]
pub struct ChannelResult {
    pub station_id: String,
    pub channel_id: String,
    pub fingerprints: Vec<Fingerprint>,
    pub triplets: Vec<Triplet>,
    pub stats: SearchStats,
    /// Fingerprint positions removed by the occurrence filter.
    pub excluded: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub channels: Vec<ChannelResult>,
    pub station_pairs: Vec<StationEventPair>,
    pub detections: Vec<NetworkDetection>,
    pub timings: StageTimings,
}

impl PipelineOutput {
    pub fn triplet_count(&self) -> u64 {
        self.channels.iter().map(|c| c.triplets.len() as u64).sum()
    }
}

fn mapping_for(params: &PipelineParams) -> Result<HashMapping> {
    gen_hash_mappings(
        params.fingerprint.dim() as usize,
        params.search.tables,
        params.search.k,
        params.search.mapping_seed,
    )
}

pub fn run_pipeline(stations: &[StationInput], params: &PipelineParams) -> Result<PipelineOutput> {
    params.validate()?;
    let mut timings = StageTimings::default();
    let clock = Instant::now();
    let mapping = mapping_for(params)?;
    timings.hash_s += clock.elapsed().as_secs_f64();

    let lag = params.fingerprint.window_lag_s;
    let mut channels = Vec::new();
    let mut station_pairs = Vec::new();
    for st in stations {
        let mut per_channel = Vec::new();
        let mut stream: Option<FingerprintStream> = None;
        for ts in &st.channels {
            if ts.station_id != st.station_id {
                return Err(Error::Consistency(format!(
                    "channel {} belongs to {}, listed under {}",
                    ts.channel_id, ts.station_id, st.station_id
                )));
            }
            let clock = Instant::now();
            let filtered = match &st.band {
                Some(b) => Cow::Owned(bandpass(ts, b)?),
                None => Cow::Borrowed(ts),
            };
            let set = fingerprint_series(&filtered, &params.fingerprint, st.band.as_ref())?;
            timings.fingerprint_s += clock.elapsed().as_secs_f64();

            let clock = Instant::now();
            let sigs = minmax_signatures(&set.fingerprints, &mapping)?;
            timings.hash_s += clock.elapsed().as_secs_f64();

            let clock = Instant::now();
            let out = partitioned_search(&sigs, &params.search, lag)?;
            timings.search_s += clock.elapsed().as_secs_f64();

            let count = set.fingerprints.len() as u64;
            let start = set.fingerprints.first().map_or(ts.start_epoch_s, |f| f.start_epoch_s);
            stream = Some(match stream {
                Some(s) if s.count <= count => s,
                _ => FingerprintStream { station_id: st.station_id.clone(), start_epoch_s: start, window_lag_s: lag, count },
            });
            per_channel.push(out.triplets.clone());
            channels.push(ChannelResult {
                station_id: st.station_id.clone(),
                channel_id: ts.channel_id.clone(),
                fingerprints: set.fingerprints,
                triplets: out.triplets,
                stats: out.stats,
                excluded: out.excluded,
            });
        }
        let Some(stream) = stream else { continue };
        let clock = Instant::now();
        let combined = combine_triplets(per_channel, params.align.station_threshold, &params.align.sort)?;
        let clusters = cluster_station_parallel(&combined, &params.align.cluster, params.align.partition_sample_rate)?;
        station_pairs.extend(to_station_pairs(&clusters, &stream)?);
        timings.align_s += clock.elapsed().as_secs_f64();
    }
    let clock = Instant::now();
    let detections = network_associate(&station_pairs, &params.align.association)?;
    timings.align_s += clock.elapsed().as_secs_f64();
    Ok(PipelineOutput { channels, station_pairs, detections, timings })
}
