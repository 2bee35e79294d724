//! Declarative run configuration and its hash.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use quakescan::align::AlignParams;
use quakescan::bench::ScurveSpec;
use quakescan::fingerprint::FingerprintParams;
use quakescan::ingest::{BandpassSpec, SynthSpec};
use quakescan::lsh_search::SearchConfig;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationConfig {
    pub id: String,
    /// Waveform base paths (`<base>.f32le` + `<base>.json`), relative to the config file.
    pub channels: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<BandpassSpec>,
}

/// `pairs` repeating sources over `stations` stations, placed by the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairedEvents {
    pub pairs: usize,
    pub stations: usize,
    pub duration_s: f64,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub data_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paired: Option<PairedEvents>,
    pub spec: SynthSpec,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { data_dir: PathBuf::from("data"), paired: None, spec: SynthSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub scurve: ScurveSpec,
    pub eval: PairedEvents,
    pub occurrence_threshold: f64,
    pub runs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            scurve: ScurveSpec::default(),
            eval: PairedEvents { pairs: 20, stations: 3, duration_s: 3600.0, snr: 2.0 },
            occurrence_threshold: 0.01,
            runs: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Overrides the MAD, mapping and synthesis seeds when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub stations: Vec<StationConfig>,
    pub fingerprint: FingerprintParams,
    pub search: SearchConfig,
    pub align: AlignParams,
    pub synth: SynthConfig,
    pub bench: BenchConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            workers: None,
            seed: None,
            stations: Vec::new(),
            fingerprint: FingerprintParams::default(),
            search: SearchConfig::default(),
            align: AlignParams::default(),
            synth: SynthConfig::default(),
            bench: BenchConfig::default(),
        }
    }
}

/// Parts of the configuration that can change a stage output.
#[derive(Serialize)]
struct Hashed<'a> {
    stations: &'a [StationConfig],
    fingerprint: &'a FingerprintParams,
    search: SearchConfig,
    station_threshold: u32,
    cluster: &'a quakescan::align::ClusterParams,
    association: &'a quakescan::align::AssociationParams,
}

/// A loaded configuration with paths resolved against its file and seeds applied.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: PipelineConfig,
    pub base_dir: PathBuf,
    pub hash: u64,
}

impl Loaded {
    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.hash)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.config.out_dir)
    }
}

pub fn parse(text: &str) -> Result<PipelineConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
}

/// Overrides the seeds, validates, and hashes.
pub fn finish(mut config: PipelineConfig, base_dir: PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<Loaded, CliError> {
    if let Some(s) = seed.or(config.seed) {
        config.seed = Some(s);
        config.fingerprint.mad_seed = s;
        config.search.mapping_seed = s;
        config.synth.spec.rng_seed = s;
        config.bench.scurve.seed = s;
    }
    if let Some(o) = out {
        config.out_dir = o;
    }
    config.fingerprint.validate().map_err(|e| CliError::Config(e.to_string()))?;
    config.search.validate().map_err(|e| CliError::Config(e.to_string()))?;
    config.align.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut ids: Vec<&str> = config.stations.iter().map(|s| s.id.as_str()).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Config("station ids must be unique".into()));
    }
    let hash = config_hash(&config)?;
    Ok(Loaded { config, base_dir, hash })
}

pub fn load(path: Option<&Path>, seed: Option<u64>, out: Option<PathBuf>) -> Result<Loaded, CliError> {
    let Some(path) = path else {
        return finish(PipelineConfig::default(), PathBuf::from("."), seed, out);
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    finish(parse(&text)?, if base.as_os_str().is_empty() { PathBuf::from(".") } else { base }, seed, out)
}

/// First 8 bytes (big-endian) of SHA-256 over the canonical TOML of the output-relevant fields.
pub fn config_hash(config: &PipelineConfig) -> Result<u64, CliError> {
    let mut search = config.search.clone();
    // partitioning only changes results when the occurrence filter is on
    if search.occurrence_threshold.is_none() {
        search.num_partitions = 1;
    }
    let view = Hashed {
        stations: &config.stations,
        fingerprint: &config.fingerprint,
        search,
        station_threshold: config.align.station_threshold,
        cluster: &config.align.cluster,
        association: &config.align.association,
    };
    let canonical = toml::to_string(&view).map_err(|e| CliError::Config(format!("config serialization: {e}")))?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(u64::from_be_bytes(digest[..8].try_into().expect("sha256 is 32 bytes")))
}
