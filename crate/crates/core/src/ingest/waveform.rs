use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Gapless single-channel recording.
///
/// Sample `i` is taken at `start_epoch_s + i / sample_rate_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub station_id: String,
    pub channel_id: String,
    pub sample_rate_hz: f64,
    pub start_epoch_s: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(
        station_id: impl Into<String>,
        channel_id: impl Into<String>,
        sample_rate_hz: f64,
        start_epoch_s: f64,
        samples: Vec<f64>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return param(format!("sample rate must be positive, got {sample_rate_hz}"));
        }
        if !start_epoch_s.is_finite() {
            return param("start epoch must be finite");
        }
        Ok(Self {
            station_id: station_id.into(),
            channel_id: channel_id.into(),
            sample_rate_hz,
            start_epoch_s,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn epoch_of_sample(&self, i: usize) -> f64 {
        self.start_epoch_s + i as f64 / self.sample_rate_hz
    }

    /// Same metadata, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            station_id: self.station_id.clone(),
            channel_id: self.channel_id.clone(),
            sample_rate_hz: self.sample_rate_hz,
            start_epoch_s: self.start_epoch_s,
            samples,
        }
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.samples.is_empty() {
            return param(format!(
                "time series {}.{} has no samples",
                self.station_id, self.channel_id
            ));
        }
        Ok(())
    }
}

/// JSON descriptor stored next to a `.f32le` sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub station: String,
    pub channel: String,
    pub sample_rate_hz: f64,
    pub start_epoch_s: f64,
    pub n_samples: u64,
}

impl Sidecar {
    pub fn from_series(ts: &TimeSeries) -> Self {
        Self {
            station: ts.station_id.clone(),
            channel: ts.channel_id.clone(),
            sample_rate_hz: ts.sample_rate_hz,
            start_epoch_s: ts.start_epoch_s,
            n_samples: ts.samples.len() as u64,
        }
    }
}

pub fn parse_sidecar(bytes: &[u8]) -> Result<Sidecar> {
    let sidecar: Sidecar = serde_json::from_slice(bytes)
        .map_err(|e| Error::Format(format!("waveform sidecar: {e}")))?;
    if !(sidecar.sample_rate_hz.is_finite() && sidecar.sample_rate_hz > 0.0) {
        return Err(Error::Format(format!(
            "waveform sidecar: sample_rate_hz must be positive, got {}",
            sidecar.sample_rate_hz
        )));
    }
    if !sidecar.start_epoch_s.is_finite() {
        return Err(Error::Format("waveform sidecar: start_epoch_s must be finite".into()));
    }
    Ok(sidecar)
}

/// Decode raw little-endian `f32` samples, checking the count against the sidecar.
pub fn decode_samples(bytes: &[u8], expected: u64) -> Result<Vec<f64>> {
    if bytes.len() % 4 != 0 {
        return Err(Error::CorruptInput(format!(
            "sample file length {} is not a multiple of 4",
            bytes.len()
        )));
    }
    let found = (bytes.len() / 4) as u64;
    if found != expected {
        return Err(Error::CorruptInput(format!(
            "sidecar declares {expected} samples, file holds {found}"
        )));
    }
    bytes
        .chunks_exact(4)
        .enumerate()
        .map(|(i, c)| {
            let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            if v.is_finite() {
                Ok(v as f64)
            } else {
                Err(Error::CorruptInput(format!("non-finite sample at index {i}")))
            }
        })
        .collect()
}

pub fn encode_samples(samples: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 4);
    for &s in samples {
        out.extend_from_slice(&(s as f32).to_le_bytes());
    }
    out
}

/// `<base>.f32le` and `<base>.json`.
pub fn waveform_paths(base: &Path) -> (PathBuf, PathBuf) {
    let mut data = base.as_os_str().to_owned();
    data.push(".f32le");
    let mut meta = base.as_os_str().to_owned();
    meta.push(".json");
    (PathBuf::from(data), PathBuf::from(meta))
}

pub fn load_waveform(data_path: &Path, sidecar_path: &Path) -> Result<TimeSeries> {
    let meta_bytes = fs::read(sidecar_path)?;
    let meta = parse_sidecar(&meta_bytes)?;
    let bytes = fs::read(data_path)?;
    let samples = decode_samples(&bytes, meta.n_samples)?;
    TimeSeries::new(meta.station, meta.channel, meta.sample_rate_hz, meta.start_epoch_s, samples)
}

/// Load `<base>.f32le` using the descriptor in `<base>.json`.
pub fn load_waveform_base(base: &Path) -> Result<TimeSeries> {
    let (data, meta) = waveform_paths(base);
    load_waveform(&data, &meta)
}

/// Write `<base>.f32le` + `<base>.json`. Samples are stored as `f32`.
pub fn save_waveform(ts: &TimeSeries, base: &Path) -> Result<()> {
    let (data, meta) = waveform_paths(base);
    if let Some(dir) = data.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(&data, encode_samples(&ts.samples))?;
    let json = serde_json::to_vec_pretty(&Sidecar::from_series(ts))
        .map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&meta, json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn zeros_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("sta.hhz");
        let ts = TimeSeries::new("STA", "HHZ", 100.0, 0.0, vec![0.0; 1000]).unwrap();
        save_waveform(&ts, &base).unwrap();
        let back = load_waveform_base(&base).unwrap();
        assert_eq!(back.len(), 1000);
        assert!(back.samples.iter().all(|&s| s == 0.0));
        assert_eq!(back.station_id, "STA");
    }

    #[test]
    fn short_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("x");
        let (data, meta) = waveform_paths(&base);
        fs::write(&data, encode_samples(&vec![0.0; 999])).unwrap();
        fs::write(
            &meta,
            r#"{"station":"A","channel":"Z","sample_rate_hz":100.0,"start_epoch_s":0.0,"n_samples":1000}"#,
        )
        .unwrap();
        assert!(matches!(load_waveform(&data, &meta), Err(Error::CorruptInput(_))));
    }

    #[test]
    fn unreadable_sidecar_is_format_error() {
        assert!(matches!(parse_sidecar(b"{not json"), Err(Error::Format(_))));
        // extra key
        let extra = br#"{"station":"A","channel":"Z","sample_rate_hz":100.0,"start_epoch_s":0.0,"n_samples":1,"gain":2}"#;
        assert!(matches!(parse_sidecar(extra), Err(Error::Format(_))));
    }

    #[test]
    fn random_bytes_roundtrip_bit_identical() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dir = tempfile::tempdir().unwrap();
        for trial in 0..5 {
            let n = rng.gen_range(1..5000);
            let mut raw = Vec::with_capacity(n * 4);
            while raw.len() < n * 4 {
                let v: f32 = f32::from_bits(rng.gen());
                if v.is_finite() {
                    raw.extend_from_slice(&v.to_le_bytes());
                }
            }
            let base = dir.path().join(format!("r{trial}"));
            let (data, meta) = waveform_paths(&base);
            fs::write(&data, &raw).unwrap();
            let side = Sidecar {
                station: "S".into(),
                channel: "C".into(),
                sample_rate_hz: 100.0,
                start_epoch_s: 12.5,
                n_samples: n as u64,
            };
            fs::write(&meta, serde_json::to_vec(&side).unwrap()).unwrap();
            let ts = load_waveform(&data, &meta).unwrap();
            let out = dir.path().join(format!("w{trial}"));
            save_waveform(&ts, &out).unwrap();
            let (data2, _) = waveform_paths(&out);
            assert_eq!(fs::read(&data2).unwrap(), raw);
        }
    }
}
