//! Deterministic synthetic multi-station recordings with injected repeating events.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{param, Result};

/// Damped-oscillation event waveform: a Ricker onset followed by a decaying coda,
/// with a second, larger phase `s_minus_p_s` later. Each (source, station) path scales the
/// dominant frequency, S-P time and coda decay by factors drawn from `1 ± source_spread`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventTemplate {
    pub dominant_hz: f64,
    pub duration_s: f64,
    pub s_minus_p_s: f64,
    pub s_to_p_ratio: f64,
    pub source_spread: f64,
}

impl Default for EventTemplate {
    fn default() -> Self {
        Self { dominant_hz: 8.0, duration_s: 12.0, s_minus_p_s: 3.0, s_to_p_ratio: 1.8, source_spread: 0.3 }
    }
}

/// Repeating non-seismic pattern: a three-spike motif every `period_s` over `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBurst {
    pub start_epoch_s: f64,
    pub duration_s: f64,
    pub period_s: f64,
    /// Peak amplitude in units of the noise sigma.
    pub amplitude: f64,
    /// Station index; `None` injects on every station.
    #[serde(default)]
    pub station: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub start_epoch_s: f64,
    pub num_stations: usize,
    pub noise_sigma: f64,
    pub event_template: EventTemplate,
    /// Origin times (epoch seconds).
    pub event_times: Vec<f64>,
    /// Source id per event; events sharing a source share a waveform. Empty means one source.
    pub event_sources: Vec<u32>,
    /// Fixed travel time from every source to each station.
    pub per_station_delay_s: Vec<f64>,
    /// Event peak amplitude over noise sigma.
    pub snr: f64,
    pub bursts: Vec<NoiseBurst>,
    pub rng_seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            duration_s: 600.0,
            sample_rate_hz: 100.0,
            start_epoch_s: 0.0,
            num_stations: 1,
            noise_sigma: 1.0,
            event_template: EventTemplate::default(),
            event_times: Vec::new(),
            event_sources: Vec::new(),
            per_station_delay_s: vec![0.0],
            snr: 2.0,
            bursts: Vec::new(),
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub event: usize,
    pub source: u32,
    pub station: usize,
    pub station_id: String,
    pub epoch_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstWindow {
    pub station: usize,
    pub start_epoch_s: f64,
    pub end_epoch_s: f64,
}

/// What was injected where.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InjectionLog {
    pub arrivals: Vec<Arrival>,
    pub bursts: Vec<BurstWindow>,
}

impl InjectionLog {
    pub fn arrivals_of_event(&self, event: usize) -> impl Iterator<Item = &Arrival> {
        self.arrivals.iter().filter(move |a| a.event == event)
    }
}

pub fn station_name(i: usize) -> String {
    format!("ST{i:02}")
}

pub const SYNTH_CHANNEL: &str = "HHZ";

fn mix_seed(a: u64, b: u64) -> u64 {
    // splitmix64 step over a combined word
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Waveform of `source` as recorded at `station`, peak-normalised to 1.
pub fn event_waveform(t: &EventTemplate, fs: f64, seed: u64, source: u32, station: usize) -> Vec<f64> {
    let n = (t.duration_s * fs).round().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(mix_seed(seed, source as u64 + 1), station as u64 + 0x51));
    let spread = t.source_spread.clamp(0.0, 0.9);
    let mut factor = || 1.0 + if spread > 0.0 { rng.gen_range(-spread..spread) } else { 0.0 };
    let (f_scale, sp_scale, decay_scale) = (factor(), factor(), factor());
    let f0 = t.dominant_hz * f_scale;
    let s_minus_p = t.s_minus_p_s * sp_scale;
    let decay = (t.duration_s / 5.0 * decay_scale).max(0.1);
    let mut phase = |w: &mut [f64], onset_s: f64, amp: f64| {
        let t0 = 1.0 / f0;
        let comps: Vec<(f64, f64, f64, f64)> = (0..8)
            .map(|_| {
                (
                    f0 * rng.gen_range(0.6..1.6),
                    rng.gen_range(0.0..2.0 * PI),
                    rng.gen_range(0.4..1.0),
                    rng.gen_range(0.0..0.6),
                )
            })
            .collect();
        for (i, v) in w.iter_mut().enumerate() {
            let u = i as f64 / fs - onset_s;
            if u < 0.0 {
                continue;
            }
            let a = PI * f0 * (u - t0);
            let ricker = (1.0 - 2.0 * a * a) * (-a * a).exp();
            let mut coda = 0.0;
            for &(f, ph, ca, delay) in &comps {
                let uc = u - delay;
                if uc > 0.0 {
                    coda += ca * (1.0 - (-uc / 0.1).exp()) * (-uc / decay).exp() * (2.0 * PI * f * uc + ph).sin();
                }
            }
            *v += amp * (ricker + 0.5 * coda);
        }
    };
    let mut w = vec![0.0; n];
    phase(&mut w, 0.0, 1.0);
    if s_minus_p > 0.0 && s_minus_p < t.duration_s {
        phase(&mut w, s_minus_p, t.s_to_p_ratio);
    }
    // taper the last second so the template ends at zero
    let taper = ((fs as usize).min(n / 4)).max(1);
    for i in 0..taper {
        w[n - 1 - i] *= 0.5 - 0.5 * (PI * i as f64 / taper as f64).cos();
    }
    let peak = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        w.iter_mut().for_each(|v| *v /= peak);
    }
    w
}

fn burst_motif(fs: f64) -> Vec<f64> {
    // three narrow 9 Hz spikes a quarter second apart
    let n = (0.8 * fs).round() as usize;
    (0..n)
        .map(|i| {
            let u = i as f64 / fs;
            [0.1, 0.35, 0.6]
                .iter()
                .map(|&c| {
                    let d = (u - c) / 0.03;
                    (-d * d).exp() * (2.0 * PI * 9.0 * (u - c)).cos()
                })
                .sum()
        })
        .collect()
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.sample_rate_hz > 0.0) {
            return param("synthetic duration and sample rate must be positive");
        }
        if self.num_stations == 0 {
            return param("need at least one station");
        }
        if self.per_station_delay_s.len() != self.num_stations {
            return param(format!(
                "per_station_delay_s has {} entries for {} stations",
                self.per_station_delay_s.len(),
                self.num_stations
            ));
        }
        if !self.event_sources.is_empty() && self.event_sources.len() != self.event_times.len() {
            return param("event_sources must be empty or match event_times");
        }
        if !(self.noise_sigma >= 0.0 && self.snr >= 0.0) {
            return param("noise_sigma and snr must be non-negative");
        }
        let end = self.start_epoch_s + self.duration_s;
        for (j, &t) in self.event_times.iter().enumerate() {
            for (i, &d) in self.per_station_delay_s.iter().enumerate() {
                let a = t + d;
                if a < self.start_epoch_s || a + self.event_template.duration_s > end {
                    return param(format!(
                        "event {j} arrives at station {i} at {a} s, outside [{}, {end})",
                        self.start_epoch_s
                    ));
                }
            }
        }
        for b in &self.bursts {
            if !(b.period_s > 0.0) || b.start_epoch_s < self.start_epoch_s || b.start_epoch_s + b.duration_s > end {
                return param("noise burst outside the synthetic duration or with non-positive period");
            }
            if b.station.is_some_and(|s| s >= self.num_stations) {
                return param("noise burst references an unknown station");
            }
        }
        Ok(())
    }

    fn source_of(&self, event: usize) -> u32 {
        self.event_sources.get(event).copied().unwrap_or(0)
    }
}

/// Gaussian noise plus injected events and bursts, one series per station.
pub fn synthesize(spec: &SynthSpec) -> Result<(Vec<TimeSeries>, InjectionLog)> {
    spec.validate()?;
    let fs = spec.sample_rate_hz;
    let n = (spec.duration_s * fs).round() as usize;
    let amp = spec.snr * spec.noise_sigma;
    let motif = burst_motif(fs);
    let mut log = InjectionLog::default();
    let mut out = Vec::with_capacity(spec.num_stations);
    for st in 0..spec.num_stations {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.rng_seed, st as u64));
        let mut samples: Vec<f64> = (0..n)
            .map(|_| spec.noise_sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        for (j, &t) in spec.event_times.iter().enumerate() {
            let source = spec.source_of(j);
            let arrival = t + spec.per_station_delay_s[st];
            if amp > 0.0 {
                let w = event_waveform(&spec.event_template, fs, spec.rng_seed, source, st);
                let at = ((arrival - spec.start_epoch_s) * fs).round() as usize;
                for (k, v) in w.iter().enumerate() {
                    if let Some(s) = samples.get_mut(at + k) {
                        *s += amp * v;
                    }
                }
            }
            log.arrivals.push(Arrival {
                event: j,
                source,
                station: st,
                station_id: station_name(st),
                epoch_s: arrival,
            });
        }
        for b in spec.bursts.iter().filter(|b| b.station.map_or(true, |s| s == st)) {
            let a = b.amplitude * spec.noise_sigma;
            let mut t = b.start_epoch_s;
            while t + motif.len() as f64 / fs <= b.start_epoch_s + b.duration_s + 1e-9 {
                let at = ((t - spec.start_epoch_s) * fs).round() as usize;
                for (k, v) in motif.iter().enumerate() {
                    if let Some(s) = samples.get_mut(at + k) {
                        *s += a * v;
                    }
                }
                t += b.period_s;
            }
            log.bursts.push(BurstWindow {
                station: st,
                start_epoch_s: b.start_epoch_s,
                end_epoch_s: b.start_epoch_s + b.duration_s,
            });
        }
        out.push(TimeSeries::new(station_name(st), SYNTH_CHANNEL, fs, spec.start_epoch_s, samples)?);
    }
    Ok((out, log))
}
