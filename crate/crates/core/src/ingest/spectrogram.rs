use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{param, Result};

/// Power floor applied before taking logs; an all-zero frame maps to `10 * log10(POWER_FLOOR)`.
pub const POWER_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftParams {
    /// Samples per frame; Hann-tapered.
    pub frame_len: usize,
    /// Samples between consecutive frame starts.
    pub frame_lag: usize,
}

impl StftParams {
    /// Two-second frames with 50% overlap.
    pub fn preview_default(sample_rate_hz: f64) -> Self {
        let frame_len = (2.0 * sample_rate_hz).round().max(2.0) as usize;
        Self { frame_len, frame_lag: (frame_len / 2).max(1) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len < 2 || self.frame_lag == 0 {
            return param(format!(
                "STFT frame_len must be >= 2 and frame_lag >= 1, got {}/{}",
                self.frame_len, self.frame_lag
            ));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.frame_len / 2 + 1
    }

    pub fn frame_count(&self, n_samples: usize) -> usize {
        if n_samples < self.frame_len {
            0
        } else {
            (n_samples - self.frame_len) / self.frame_lag + 1
        }
    }
}

fn hann(n: usize) -> Vec<f64> {
    // periodic Hann
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Units of STFT cell values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralScale {
    /// `|X|^2`.
    #[default]
    Power,
    /// `10 log10 |X|^2`, floored at `POWER_FLOOR`.
    Decibel,
}

/// Short-time power spectrum. Frames are rows; each row holds `bins()` values.
pub struct Stft {
    params: StftParams,
    scale: SpectralScale,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl Stft {
    /// Decibel-valued transform.
    pub fn new(params: StftParams) -> Result<Self> {
        Self::with_scale(params, SpectralScale::Decibel)
    }

    pub fn with_scale(params: StftParams, scale: SpectralScale) -> Result<Self> {
        params.validate()?;
        let fft = FftPlanner::new().plan_fft_forward(params.frame_len);
        Ok(Self { params, scale, window: hann(params.frame_len), fft })
    }

    pub fn params(&self) -> StftParams {
        self.params
    }

    /// Spectrum of one frame starting at `samples[0]`, written into `out` (length `bins()`).
    pub fn frame_into(&self, samples: &[f64], buf: &mut [Complex<f64>], scratch: &mut [Complex<f64>], out: &mut [f64]) {
        for ((b, &s), &w) in buf.iter_mut().zip(samples).zip(&self.window) {
            *b = Complex::new(s * w, 0.0);
        }
        self.fft.process_with_scratch(buf, scratch);
        match self.scale {
            SpectralScale::Power => out.iter_mut().zip(buf.iter()).for_each(|(o, c)| *o = c.norm_sqr()),
            SpectralScale::Decibel => {
                for (o, c) in out.iter_mut().zip(buf.iter()) {
                    *o = 10.0 * c.norm_sqr().max(POWER_FLOOR).log10();
                }
            }
        }
    }

    /// All frames of `samples`, applying `reduce` to each frame's row.
    ///
    /// `reduce` maps the `bins()` row to `row_out.len() == width` values.
    pub fn map_frames<F>(&self, samples: &[f64], width: usize, reduce: F) -> Vec<f64>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let p = self.params;
        let frames = p.frame_count(samples.len());
        let mut out = vec![0.0; frames * width];
        let scratch_len = self.fft.get_inplace_scratch_len();
        out.par_chunks_mut(width.max(1))
            .enumerate()
            .for_each_init(
                || {
                    (
                        vec![Complex::new(0.0, 0.0); p.frame_len],
                        vec![Complex::new(0.0, 0.0); scratch_len],
                        vec![0.0; p.bins()],
                    )
                },
                |(buf, scratch, row), (f, dst)| {
                    let start = f * p.frame_lag;
                    self.frame_into(&samples[start..start + p.frame_len], buf, scratch, row);
                    reduce(row, dst);
                },
            );
        out
    }
}

/// Frequency-by-time log-power matrix produced for visual band selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramMatrix {
    pub freqs_hz: Vec<f64>,
    /// Epoch of each frame centre.
    pub times_s: Vec<f64>,
    /// `values[f][t]`, dB.
    pub values: Vec<Vec<f64>>,
}

impl SpectrogramMatrix {
    /// Row means over time.
    pub fn mean_per_frequency(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|r| r.iter().sum::<f64>() / r.len().max(1) as f64)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("freq_hz");
        for t in &self.times_s {
            write!(s, ",{t}").unwrap();
        }
        s.push('\n');
        for (f, row) in self.freqs_hz.iter().zip(&self.values) {
            write!(s, "{f}").unwrap();
            for v in row {
                write!(s, ",{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Heatmap with low frequencies at the bottom. Columns are averaged down to at most 800.
    pub fn to_svg(&self) -> String {
        let rows = self.values.len();
        let cols_in = self.times_s.len();
        let cols = cols_in.min(800);
        let (lo, hi) = self
            .values
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        let (cw, ch) = (2.0, 4.0);
        let width = cols as f64 * cw;
        let height = rows as f64 * ch;
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            width + 60.0,
            height + 30.0,
            width + 60.0,
            height + 30.0
        )
        .unwrap();
        for (r, row) in self.values.iter().enumerate() {
            let y = height - (r + 1) as f64 * ch;
            for c in 0..cols {
                let a = c * cols_in / cols;
                let b = ((c + 1) * cols_in / cols).max(a + 1);
                let v = row[a..b].iter().sum::<f64>() / (b - a) as f64;
                let (cr, cg, cb) = colormap((v - lo) / span);
                writeln!(
                    s,
                    r#"<rect x="{}" y="{y}" width="{cw}" height="{ch}" fill="rgb({cr},{cg},{cb})"/>"#,
                    60.0 + c as f64 * cw
                )
                .unwrap();
            }
        }
        if let (Some(f0), Some(f1)) = (self.freqs_hz.first(), self.freqs_hz.last()) {
            writeln!(s, r#"<text x="2" y="{}" font-size="10">{f0:.1} Hz</text>"#, height).unwrap();
            writeln!(s, r#"<text x="2" y="10" font-size="10">{f1:.1} Hz</text>"#).unwrap();
        }
        if let (Some(t0), Some(t1)) = (self.times_s.first(), self.times_s.last()) {
            writeln!(s, r#"<text x="60" y="{}" font-size="10">{t0:.1} s</text>"#, height + 20.0).unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{t1:.1} s</text>"#,
                width + 60.0,
                height + 20.0
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn colormap(x: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let x = x.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let t = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * t).round() as u8;
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Spectrogram of `window_s` seconds starting `offset_s` into the series.
pub fn spectrogram(ts: &TimeSeries, offset_s: f64, window_s: f64, params: StftParams) -> Result<SpectrogramMatrix> {
    ts.require_nonempty()?;
    let stft = Stft::new(params)?;
    if !(window_s > 0.0) || !(offset_s >= 0.0) || offset_s + window_s > ts.duration_s() + 1e-9 {
        return param(format!(
            "preview section {offset_s}+{window_s} s exceeds series duration {} s",
            ts.duration_s()
        ));
    }
    let start = (offset_s * ts.sample_rate_hz).round() as usize;
    let len = ((window_s * ts.sample_rate_hz).round() as usize).min(ts.len() - start);
    if len < params.frame_len {
        return param(format!(
            "preview section of {len} samples is shorter than one STFT frame ({})",
            params.frame_len
        ));
    }
    let section = &ts.samples[start..start + len];
    let bins = params.bins();
    let flat = stft.map_frames(section, bins, |row, dst| dst.copy_from_slice(row));
    let frames = flat.len() / bins;
    let mut values = vec![Vec::with_capacity(frames); bins];
    for f in 0..frames {
        for b in 0..bins {
            values[b].push(flat[f * bins + b]);
        }
    }
    let freqs_hz = (0..bins)
        .map(|b| b as f64 * ts.sample_rate_hz / params.frame_len as f64)
        .collect();
    let times_s = (0..frames)
        .map(|f| ts.epoch_of_sample(start + f * params.frame_lag) + params.frame_len as f64 / (2.0 * ts.sample_rate_hz))
        .collect();
    Ok(SpectrogramMatrix { freqs_hz, times_s, values })
}

/// Write `<out>.csv` and `<out>.svg` for a section; returns the matrix.
pub fn spectrogram_preview(ts: &TimeSeries, offset_s: f64, window_s: f64, out: &Path) -> Result<SpectrogramMatrix> {
    let m = spectrogram(ts, offset_s, window_s, StftParams::preview_default(ts.sample_rate_hz))?;
    let with_ext = |ext: &str| {
        let mut p = out.as_os_str().to_owned();
        p.push(ext);
        PathBuf::from(p)
    };
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(with_ext(".csv"), m.to_csv())?;
    fs::write(with_ext(".svg"), m.to_svg())?;
    Ok(m)
}
