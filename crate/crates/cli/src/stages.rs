//! File-backed pipeline stages: fingerprint, search, align.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use quakescan::align::{
    channel_combine, cluster_station_parallel, network_associate, to_station_pairs, write_report, DetectionSummary,
    FingerprintStream,
};
use quakescan::fingerprint::{fingerprint_series, read_fingerprints, write_fingerprints, write_mad_stats, FingerprintHeader};
use quakescan::ingest::{bandpass, load_waveform_base, parse_sidecar, waveform_paths};
use quakescan::lsh_search::{partitioned_search, read_triplets, write_triplets, TripletHeader, TripletReader};
use quakescan::minmax_hash::{gen_hash_mappings, minmax_signatures};

use crate::config::{Loaded, StationConfig};
use crate::error::CliError;

/// One configured channel, identified by its sidecar.
#[derive(Debug, Clone)]
pub struct ChannelRef {
    pub station: String,
    pub channel: String,
    pub base: PathBuf,
}

impl ChannelRef {
    fn stem(&self) -> String {
        format!("{}.{}", self.station, self.channel)
    }
}

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, S: Serialize> {
    stage: &'a str,
    config_hash: String,
    seeds: S,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn digest(path: &Path, root: &Path) -> Result<FileDigest> {
    let shown = path.strip_prefix(root).unwrap_or(path);
    Ok(FileDigest { path: shown.display().to_string(), sha256: sha256_file(path)? })
}

fn write_manifest<S: Serialize>(cfg: &Loaded, name: &str, stage: &str, seeds: S, inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<()> {
    let out = cfg.out_dir();
    let manifest = Manifest {
        stage,
        config_hash: cfg.hash_hex(),
        seeds,
        inputs: inputs.iter().map(|p| digest(p, &out)).collect::<Result<_>>()?,
        outputs: outputs.iter().map(|p| digest(p, &out)).collect::<Result<_>>()?,
    };
    let dir = out.join("manifests");
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

pub fn fingerprint_path(cfg: &Loaded, c: &ChannelRef) -> PathBuf {
    cfg.out_dir().join("fingerprints").join(format!("{}.fp", c.stem()))
}

pub fn mad_path(cfg: &Loaded, c: &ChannelRef) -> PathBuf {
    cfg.out_dir().join("fingerprints").join(format!("{}.mad", c.stem()))
}

pub fn triplet_path(cfg: &Loaded, c: &ChannelRef) -> PathBuf {
    cfg.out_dir().join("triplets").join(format!("{}.bin", c.stem()))
}

pub fn stats_path(cfg: &Loaded, c: &ChannelRef) -> PathBuf {
    cfg.out_dir().join("triplets").join(format!("{}.stats.json", c.stem()))
}

/// Channels of the configured stations, optionally narrowed to one station and channel.
pub fn channels(cfg: &Loaded, station: Option<&str>, channel: Option<&str>) -> Result<Vec<ChannelRef>> {
    if cfg.config.stations.is_empty() {
        return Err(CliError::Config("no stations configured".into()).into());
    }
    let mut out = Vec::new();
    for st in &cfg.config.stations {
        if station.is_some_and(|s| s != st.id) {
            continue;
        }
        for rel in &st.channels {
            let base = cfg.resolve(rel);
            let (data, sidecar) = waveform_paths(&base);
            if !data.is_file() || !sidecar.is_file() {
                return Err(CliError::Config(format!("station {}: waveform {} not found", st.id, base.display())).into());
            }
            let side = parse_sidecar(&fs::read(&sidecar)?)?;
            if side.station != st.id {
                return Err(CliError::Data(format!("{} holds station {}, configured as {}", base.display(), side.station, st.id)).into());
            }
            if channel.is_some_and(|c| c != side.channel) {
                continue;
            }
            out.push(ChannelRef { station: st.id.clone(), channel: side.channel, base });
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("no configured channel matches the selection".into()).into());
    }
    Ok(out)
}

fn station_config<'a>(cfg: &'a Loaded, id: &str) -> &'a StationConfig {
    cfg.config.stations.iter().find(|s| s.id == id).expect("channel refs come from the config")
}

fn check_hash(cfg: &Loaded, found: u64, path: &Path) -> Result<()> {
    if found != cfg.hash {
        return Err(CliError::Data(format!(
            "{} was written under config {found:016x}, current config is {}",
            path.display(),
            cfg.hash_hex()
        ))
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct FingerprintSeeds {
    mad_seed: u64,
    mad_sampling_rate: f64,
}

pub fn fingerprint(cfg: &Loaded, c: &ChannelRef) -> Result<usize> {
    let params = &cfg.config.fingerprint;
    let band = station_config(cfg, &c.station).band;
    let ts = load_waveform_base(&c.base).with_context(|| format!("loading {}", c.base.display()))?;
    let ts = match &band {
        Some(b) => bandpass(&ts, b)?,
        None => ts,
    };
    let set = fingerprint_series(&ts, params, band.as_ref())?;
    let header = FingerprintHeader {
        dim: params.dim(),
        top_k: params.top_k as u32,
        window_len_s: params.window_len_s,
        window_lag_s: params.window_lag_s,
        config_hash: cfg.hash,
        station: c.station.clone(),
        channel: c.channel.clone(),
    };
    let fp = fingerprint_path(cfg, c);
    fs::create_dir_all(fp.parent().expect("has a parent"))?;
    write_fingerprints(&fp, &header, &set.fingerprints)?;
    let mut outputs = vec![fp];
    if let Some(stats) = &set.mad {
        let mad = mad_path(cfg, c);
        write_mad_stats(&mad, stats, cfg.hash)?;
        outputs.push(mad);
    }
    let (data, sidecar) = waveform_paths(&c.base);
    let seeds = FingerprintSeeds { mad_seed: params.mad_seed, mad_sampling_rate: params.mad_sampling_rate };
    write_manifest(cfg, &format!("fingerprint-{}", c.stem()), "fingerprint", seeds, &[data, sidecar], &outputs)?;
    Ok(set.fingerprints.len())
}

#[derive(Serialize)]
struct SearchSeeds {
    mapping_seed: u64,
}

pub fn search(cfg: &Loaded, c: &ChannelRef) -> Result<u64> {
    let sc = &cfg.config.search;
    let fp = fingerprint_path(cfg, c);
    if !fp.is_file() {
        return Err(CliError::Data(format!("fingerprint file {} is missing; run the fingerprint stage first", fp.display())).into());
    }
    let (header, fps) = read_fingerprints(&fp).with_context(|| format!("reading {}", fp.display()))?;
    check_hash(cfg, header.config_hash, &fp)?;
    let mapping = gen_hash_mappings(header.dim as usize, sc.tables, sc.k, sc.mapping_seed)?;
    let sigs = minmax_signatures(&fps, &mapping)?;
    let out = partitioned_search(&sigs, sc, header.window_lag_s)?;
    let th = TripletHeader {
        config_hash: cfg.hash,
        tables: sc.tables as u32,
        k: sc.k as u32,
        m: sc.m as u32,
        station: c.station.clone(),
        channel: c.channel.clone(),
    };
    let tp = triplet_path(cfg, c);
    fs::create_dir_all(tp.parent().expect("has a parent"))?;
    write_triplets(&tp, &th, &out.triplets)?;
    let sp = stats_path(cfg, c);
    fs::write(&sp, serde_json::to_string_pretty(&out.stats)? + "\n")?;
    write_manifest(cfg, &format!("search-{}", c.stem()), "search", SearchSeeds { mapping_seed: sc.mapping_seed }, &[fp], &[tp, sp])?;
    Ok(out.stats.triplets)
}

/// Fingerprint stream of a station: the shortest of its channels.
fn station_stream(cfg: &Loaded, station: &str, chans: &[&ChannelRef]) -> Result<FingerprintStream> {
    let mut stream: Option<FingerprintStream> = None;
    for c in chans {
        let path = fingerprint_path(cfg, c);
        let (h, fps) = read_fingerprints(&path).with_context(|| format!("reading {}", path.display()))?;
        check_hash(cfg, h.config_hash, &path)?;
        let count = fps.len() as u64;
        if stream.as_ref().is_some_and(|s| s.count <= count) {
            continue;
        }
        let start = fps.first().map_or(0.0, |f| f.start_epoch_s);
        stream = Some(FingerprintStream { station_id: station.to_string(), start_epoch_s: start, window_lag_s: h.window_lag_s, count });
    }
    Ok(stream.expect("every station has a channel"))
}

pub fn align(cfg: &Loaded) -> Result<DetectionSummary> {
    let ap = &cfg.config.align;
    let all = channels(cfg, None, None)?;
    let out = cfg.out_dir();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut station_pairs = Vec::new();
    for st in &cfg.config.stations {
        let chans: Vec<&ChannelRef> = all.iter().filter(|c| c.station == st.id).collect();
        if chans.is_empty() {
            continue;
        }
        let paths: Vec<PathBuf> = chans.iter().map(|c| triplet_path(cfg, c)).collect();
        for p in &paths {
            if !p.is_file() {
                return Err(CliError::Data(format!("triplet file {} is missing; run the search stage first", p.display())).into());
            }
            check_hash(cfg, TripletReader::open(p)?.header.config_hash, p)?;
        }
        let combined = out.join("align").join(format!("{}.combined.bin", st.id));
        fs::create_dir_all(combined.parent().expect("has a parent"))?;
        channel_combine(&paths, ap.station_threshold, &ap.sort, &combined)?;
        let (_, triplets) = read_triplets(&combined)?;
        let clusters = cluster_station_parallel(&triplets, &ap.cluster, ap.partition_sample_rate)?;
        let stream = station_stream(cfg, &st.id, &chans)?;
        station_pairs.extend(to_station_pairs(&clusters, &stream)?);
        inputs.extend(paths);
        inputs.extend(chans.iter().map(|c| fingerprint_path(cfg, c)));
        outputs.push(combined);
    }
    let detections = network_associate(&station_pairs, &ap.association)?;
    let summary = DetectionSummary {
        config_hash: cfg.hash_hex(),
        min_stations: ap.association.min_stations,
        station_pairs: station_pairs.len(),
        detection_count: detections.len(),
        detections,
    };
    write_report(&out, &summary)?;
    outputs.push(out.join("detections.csv"));
    outputs.push(out.join("detections.json"));
    write_manifest(cfg, "align", "align", (), &inputs, &outputs)?;
    Ok(summary)
}
