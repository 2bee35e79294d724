//! Spectrogram → spectral image → Haar coefficients → MAD-normalised top-K → binary fingerprint.

mod haar;
mod io;
mod mad;
mod topk;

pub use haar::{haar2d, haar2d_in_place, inverse_haar2d, inverse_haar2d_in_place};
pub use io::{
    decode_fingerprints, decode_mad_stats, encode_fingerprints, encode_mad_stats, read_fingerprints, read_mad_stats,
    write_fingerprints, write_mad_stats, FingerprintHeader, MadHeader, FINGERPRINT_MAGIC,
};
pub use mad::{estimate_mad, median_and_mad, median_in_place, sample_windows, CoefficientSource, MadEstimator, MadStats};
pub use topk::{binarize, intersection_size, jaccard, normalize_topk, Fingerprint, Sign};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::ingest::{BandpassSpec, SpectralScale, Stft, StftParams, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FingerprintParams {
    pub window_len_s: f64,
    pub window_lag_s: f64,
    pub freq_bins: usize,
    pub time_bins: usize,
    pub top_k: usize,
    /// STFT frame length; Hann taper.
    pub frame_len_s: f64,
    pub frame_lag_s: f64,
    pub spectral_scale: SpectralScale,
    pub mad_sampling_rate: f64,
    pub mad_seed: u64,
}

impl Default for FingerprintParams {
    fn default() -> Self {
        Self {
            window_len_s: 30.0,
            window_lag_s: 2.0,
            freq_bins: 32,
            time_bins: 128,
            top_k: 800,
            frame_len_s: 2.0,
            frame_lag_s: 0.2,
            spectral_scale: SpectralScale::Power,
            mad_sampling_rate: 0.1,
            mad_seed: 0,
        }
    }
}

/// Sample-domain geometry of the sliding windows for one sample rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowGeometry {
    pub window_len: usize,
    pub window_lag: usize,
    pub stft: StftParams,
    pub frames_per_window: usize,
    pub frames_per_lag: usize,
}

impl WindowGeometry {
    pub fn window_count(&self, n_samples: usize) -> usize {
        if n_samples < self.window_len {
            0
        } else {
            (n_samples - self.window_len) / self.window_lag + 1
        }
    }
}

impl FingerprintParams {
    pub fn dim(&self) -> u32 {
        (2 * self.freq_bins * self.time_bins) as u32
    }

    pub fn coefficient_count(&self) -> usize {
        self.freq_bins * self.time_bins
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_len_s > 0.0 && self.window_lag_s > 0.0 && self.window_lag_s < self.window_len_s) {
            return param(format!(
                "need 0 < window_lag_s < window_len_s, got lag {} len {}",
                self.window_lag_s, self.window_len_s
            ));
        }
        if !self.freq_bins.is_power_of_two() || !self.time_bins.is_power_of_two() {
            return param(format!(
                "spectral image shape {}x{} must be powers of two",
                self.freq_bins, self.time_bins
            ));
        }
        if self.top_k == 0 || self.top_k > self.coefficient_count() {
            return param(format!("top_k {} outside 1..={}", self.top_k, self.coefficient_count()));
        }
        if !(self.frame_len_s > 0.0 && self.frame_lag_s > 0.0) {
            return param("STFT frame length and lag must be positive");
        }
        if !(self.mad_sampling_rate > 0.0 && self.mad_sampling_rate <= 1.0) {
            return param(format!("mad_sampling_rate must be in (0, 1], got {}", self.mad_sampling_rate));
        }
        Ok(())
    }

    pub fn geometry(&self, sample_rate_hz: f64) -> Result<WindowGeometry> {
        self.validate()?;
        let to_samples = |s: f64| (s * sample_rate_hz).round() as usize;
        let window_len = to_samples(self.window_len_s);
        let window_lag = to_samples(self.window_lag_s);
        let stft = StftParams { frame_len: to_samples(self.frame_len_s), frame_lag: to_samples(self.frame_lag_s) };
        stft.validate()?;
        if window_lag == 0 || stft.frame_len > window_len {
            return param("window shorter than one STFT frame at this sample rate");
        }
        if window_lag % stft.frame_lag != 0 {
            return param(format!(
                "window lag ({window_lag} samples) must be a multiple of the STFT frame lag ({})",
                stft.frame_lag
            ));
        }
        Ok(WindowGeometry {
            window_len,
            window_lag,
            stft,
            frames_per_window: (window_len - stft.frame_len) / stft.frame_lag + 1,
            frames_per_lag: window_lag / stft.frame_lag,
        })
    }
}

/// Area-weighted resampling of `input` onto `out.len()` equal bins.
pub fn resample_area(input: &[f64], out: &mut [f64]) {
    let (n, m) = (input.len(), out.len());
    if n == m {
        out.copy_from_slice(input);
        return;
    }
    // bin b of the output spans [b*n/m, (b+1)*n/m) in input units
    for (b, o) in out.iter_mut().enumerate() {
        let lo = b as f64 * n as f64 / m as f64;
        let hi = (b + 1) as f64 * n as f64 / m as f64;
        let mut acc = 0.0;
        let mut i = lo.floor() as usize;
        while (i as f64) < hi && i < n {
            let overlap = (hi.min((i + 1) as f64) - lo.max(i as f64)).max(0.0);
            acc += overlap * input[i];
            i += 1;
        }
        *o = acc / (hi - lo);
    }
}

/// One window's `freq_bins x time_bins` spectral matrix, row-major by frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralImage {
    pub freq_bins: usize,
    pub time_bins: usize,
    pub values: Vec<f64>,
    pub window_start_epoch_s: f64,
}

impl SpectralImage {
    pub fn haar(&self) -> Result<Vec<f64>> {
        haar2d(&self.values, self.freq_bins, self.time_bins)
    }
}

/// Spectrogram of a whole channel, band-limited and resampled to `freq_bins` per frame,
/// from which per-window spectral images are cut on demand.
pub struct SpectralImages {
    params: FingerprintParams,
    geometry: WindowGeometry,
    /// `frame x freq_bins`
    frames: Vec<f32>,
    window_count: usize,
    start_epoch_s: f64,
    sample_rate_hz: f64,
}

impl SpectralImages {
    /// `band` truncates the spectrogram rows to its corners; `None` keeps 0..Nyquist.
    pub fn compute(ts: &TimeSeries, params: &FingerprintParams, band: Option<&BandpassSpec>) -> Result<Self> {
        ts.require_nonempty()?;
        let geometry = params.geometry(ts.sample_rate_hz)?;
        let stft = Stft::with_scale(geometry.stft, params.spectral_scale)?;
        let df = ts.sample_rate_hz / geometry.stft.frame_len as f64;
        let bins = geometry.stft.bins();
        let (lo, hi) = match band {
            Some(b) => {
                b.validate(ts.sample_rate_hz)?;
                let lo = (b.low_hz / df).ceil() as usize;
                let hi = ((b.high_hz / df).floor() as usize).min(bins - 1);
                (lo, hi.max(lo))
            }
            None => (0, bins - 1),
        };
        let window_count = geometry.window_count(ts.len());
        let used = if window_count == 0 {
            0
        } else {
            (window_count - 1) * geometry.window_lag + geometry.window_len
        };
        let fb = params.freq_bins;
        let flat = stft.map_frames(&ts.samples[..used], fb, |row, dst| resample_area(&row[lo..=hi], dst));
        Ok(Self {
            params: *params,
            geometry,
            frames: flat.into_iter().map(|v| v as f32).collect(),
            window_count,
            start_epoch_s: ts.start_epoch_s,
            sample_rate_hz: ts.sample_rate_hz,
        })
    }

    pub fn len(&self) -> usize {
        self.window_count
    }

    pub fn is_empty(&self) -> bool {
        self.window_count == 0
    }

    pub fn geometry(&self) -> WindowGeometry {
        self.geometry
    }

    pub fn window_start_epoch_s(&self, w: usize) -> f64 {
        self.start_epoch_s + (w * self.geometry.window_lag) as f64 / self.sample_rate_hz
    }

    pub fn image_into(&self, w: usize, out: &mut [f64]) {
        let (fb, tb) = (self.params.freq_bins, self.params.time_bins);
        let first = w * self.geometry.frames_per_lag;
        let nf = self.geometry.frames_per_window;
        let mut row = vec![0.0; nf];
        for f in 0..fb {
            for (t, r) in row.iter_mut().enumerate() {
                *r = self.frames[(first + t) * fb + f] as f64;
            }
            resample_area(&row, &mut out[f * tb..(f + 1) * tb]);
        }
    }

    pub fn image(&self, w: usize) -> SpectralImage {
        let mut values = vec![0.0; self.params.coefficient_count()];
        self.image_into(w, &mut values);
        SpectralImage {
            freq_bins: self.params.freq_bins,
            time_bins: self.params.time_bins,
            values,
            window_start_epoch_s: self.window_start_epoch_s(w),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = SpectralImage> + '_ {
        (0..self.window_count).map(|w| self.image(w))
    }
}

impl CoefficientSource for SpectralImages {
    fn window_count(&self) -> usize {
        self.window_count
    }

    fn coefficient_count(&self) -> usize {
        self.params.coefficient_count()
    }

    fn coefficients_into(&self, window: usize, out: &mut [f64]) {
        self.image_into(window, out);
        haar2d_in_place(out, self.params.freq_bins, self.params.time_bins)
            .expect("shape validated by FingerprintParams");
    }
}

/// All sliding-window spectral images of a channel.
pub fn compute_spectral_images(
    ts: &TimeSeries,
    params: &FingerprintParams,
    band: Option<&BandpassSpec>,
) -> Result<SpectralImages> {
    SpectralImages::compute(ts, params, band)
}

/// Fingerprints for every window given fixed MAD statistics; output is in window order.
pub fn fingerprints_with_stats<S: CoefficientSource>(
    source: &S,
    stats: &MadStats,
    top_k: usize,
    dim: u32,
    start_epoch: impl Fn(usize) -> f64 + Sync,
) -> Result<Vec<Fingerprint>> {
    let n = source.coefficient_count();
    (0..source.window_count())
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, w| {
                source.coefficients_into(w, buf);
                let top = normalize_topk(buf, stats, top_k)?;
                binarize(&top, dim, w as u64, start_epoch(w))
            },
        )
        .collect()
}

#[derive(Debug, Clone)]
pub struct FingerprintSet {
    pub params: FingerprintParams,
    pub fingerprints: Vec<Fingerprint>,
    /// `None` when the series was shorter than one window.
    pub mad: Option<MadStats>,
    pub short_series: bool,
}

/// Full fingerprint extraction for one channel.
pub fn fingerprint_series(
    ts: &TimeSeries,
    params: &FingerprintParams,
    band: Option<&BandpassSpec>,
) -> Result<FingerprintSet> {
    let images = SpectralImages::compute(ts, params, band)?;
    if images.is_empty() {
        return Ok(FingerprintSet { params: *params, fingerprints: Vec::new(), mad: None, short_series: true });
    }
    let stats = estimate_mad(&images, params.mad_sampling_rate, params.mad_seed)?;
    let fingerprints = fingerprints_with_stats(&images, &stats, params.top_k, params.dim(), |w| {
        images.window_start_epoch_s(w)
    })?;
    Ok(FingerprintSet { params: *params, fingerprints, mad: Some(stats), short_series: false })
}
