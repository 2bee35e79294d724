//! Zero-phase Butterworth bandpass.
//!
//! The band is realised as an order-`n` Butterworth high-pass at `low_hz`
//! cascaded with an order-`n` Butterworth low-pass at `high_hz`, both obtained
//! from the analog prototype by the prewarped bilinear transform and stored as
//! second-order sections. Zero phase comes from running the cascade forward and
//! then backward over an odd extension of the signal, with section states
//! initialised to the step-response steady state.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandpassSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    #[serde(default = "default_order")]
    pub order: u32,
}

fn default_order() -> u32 {
    4
}

impl BandpassSpec {
    pub fn new(low_hz: f64, high_hz: f64) -> Self {
        Self { low_hz, high_hz, order: default_order() }
    }

    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        let nyquist = sample_rate_hz / 2.0;
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz && self.high_hz < nyquist) {
            return param(format!(
                "bandpass needs 0 < low < high < nyquist ({nyquist} Hz), got {}..{} Hz",
                self.low_hz, self.high_hz
            ));
        }
        if self.order == 0 || self.order > 16 {
            return param(format!("bandpass order must be in 1..=16, got {}", self.order));
        }
        Ok(())
    }
}

/// One biquad in direct form II transposed: `[b0, b1, b2, a1, a2]` with `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Section {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State after an infinitely long unit step.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[1] * g;
        let z1 = self.b[1] - self.a[0] * g + z2;
        [z1, z2]
    }

    fn run(&self, data: &mut [f64], mut z: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for x in data.iter_mut() {
            let input = *x;
            let y = b0 * input + z[0];
            z[0] = b1 * input - a1 * y + z[1];
            z[1] = b2 * input - a2 * y;
            *x = y;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    LowPass,
    HighPass,
}

fn butterworth_sections(order: u32, cutoff_hz: f64, fs: f64, kind: Kind) -> Vec<Section> {
    let k = 2.0 * fs;
    let wc = k * (PI * cutoff_hz / fs).tan();
    let n = order as usize;
    let mut out = Vec::with_capacity(n.div_ceil(2));
    for i in 0..n / 2 {
        // conjugate pole pair on the circle of radius wc
        let theta = PI * (2 * i + n + 1) as f64 / (2 * n) as f64;
        let a = -2.0 * wc * theta.cos();
        let b = wc * wc;
        let a0 = k * k + a * k + b;
        let d1 = (2.0 * b - 2.0 * k * k) / a0;
        let d2 = (k * k - a * k + b) / a0;
        let num = match kind {
            Kind::LowPass => [b / a0, 2.0 * b / a0, b / a0],
            Kind::HighPass => [k * k / a0, -2.0 * k * k / a0, k * k / a0],
        };
        out.push(Section { b: num, a: [d1, d2] });
    }
    if n % 2 == 1 {
        let a0 = k + wc;
        let d1 = (wc - k) / a0;
        let num = match kind {
            Kind::LowPass => [wc / a0, wc / a0, 0.0],
            Kind::HighPass => [k / a0, -k / a0, 0.0],
        };
        out.push(Section { b: num, a: [d1, 0.0] });
    }
    out
}

/// Second-order sections of the bandpass cascade.
pub fn design_bandpass(spec: &BandpassSpec, sample_rate_hz: f64) -> Result<Vec<Section>> {
    spec.validate(sample_rate_hz)?;
    let mut sos = butterworth_sections(spec.order, spec.low_hz, sample_rate_hz, Kind::HighPass);
    sos.extend(butterworth_sections(spec.order, spec.high_hz, sample_rate_hz, Kind::LowPass));
    Ok(sos)
}

fn run_cascade(sos: &[Section], zi: &[[f64; 2]], data: &mut [f64]) {
    let x0 = data[0];
    for (s, z) in sos.iter().zip(zi) {
        s.run(data, [z[0] * x0, z[1] * x0]);
    }
}

/// Steady-state initial conditions for the whole cascade, per unit input.
fn cascade_zi(sos: &[Section]) -> Vec<[f64; 2]> {
    let mut scale = 1.0;
    sos.iter()
        .map(|s| {
            let z = s.step_state();
            let out = [z[0] * scale, z[1] * scale];
            scale *= s.dc_gain();
            out
        })
        .collect()
}

/// Forward-backward filtering with odd-extension padding of `pad` samples.
pub fn filtfilt(sos: &[Section], x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let pad = pad.min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }
    let zi = cascade_zi(sos);
    run_cascade(sos, &zi, &mut ext);
    ext.reverse();
    run_cascade(sos, &zi, &mut ext);
    ext.reverse();
    ext[pad..pad + n].to_vec()
}

/// Zero-phase bandpass; output has the input's length and metadata.
pub fn bandpass(ts: &TimeSeries, spec: &BandpassSpec) -> Result<TimeSeries> {
    ts.require_nonempty()?;
    let sos = design_bandpass(spec, ts.sample_rate_hz)?;
    // a few periods of the lowest corner, never less than the classic 3*(2*sections+1)
    let pad = ((3.0 * ts.sample_rate_hz / spec.low_hz).ceil() as usize).max(3 * (2 * sos.len() + 1));
    Ok(ts.with_samples(filtfilt(&sos, &ts.samples, pad)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn sine(freq: f64, fs: f64, n: usize) -> TimeSeries {
        let s = (0..n).map(|i| (2.0 * PI * freq * i as f64 / fs).sin()).collect();
        TimeSeries::new("S", "Z", fs, 0.0, s).unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    fn db(ratio: f64) -> f64 {
        20.0 * ratio.log10()
    }

    #[test]
    fn stopband_one_hz_attenuated() {
        let ts = sine(1.0, 100.0, 6000);
        let out = bandpass(&ts, &BandpassSpec::new(3.0, 20.0)).unwrap();
        let mid = 1000..5000;
        let att = db(rms(&out.samples[mid.clone()]) / rms(&ts.samples[mid]));
        assert!(att <= -20.0, "attenuation {att} dB");
    }

    #[test]
    fn one_octave_outside_both_edges() {
        let spec = BandpassSpec::new(3.0, 20.0);
        for f in [1.5, 40.0] {
            let ts = sine(f, 100.0, 8000);
            let out = bandpass(&ts, &spec).unwrap();
            let att = db(rms(&out.samples[2000..6000]) / rms(&ts.samples[2000..6000]));
            assert!(att <= -20.0, "{f} Hz attenuated only {att} dB");
        }
    }

    #[test]
    fn passband_within_one_db() {
        let ts = sine(10.0, 100.0, 6000);
        let out = bandpass(&ts, &BandpassSpec::new(3.0, 20.0)).unwrap();
        let gain = db(rms(&out.samples[500..5500]) / rms(&ts.samples[500..5500]));
        assert!(gain.abs() <= 1.0, "passband gain {gain} dB");
    }

    #[test]
    fn zeros_stay_zero() {
        let ts = TimeSeries::new("S", "Z", 100.0, 0.0, vec![0.0; 2000]).unwrap();
        let out = bandpass(&ts, &BandpassSpec::new(3.0, 20.0)).unwrap();
        assert!(out.samples.iter().all(|&v| v == 0.0));
        assert_eq!(out.len(), 2000);
    }

    #[test]
    fn nyquist_violation_rejected() {
        let ts = sine(10.0, 100.0, 100);
        for spec in [
            BandpassSpec::new(3.0, 50.0),
            BandpassSpec::new(20.0, 3.0),
            BandpassSpec::new(0.0, 10.0),
        ] {
            assert!(matches!(bandpass(&ts, &spec), Err(crate::Error::Parameter(_))));
        }
    }

    #[test]
    fn linear_within_tolerance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 3000;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (a, b) = (2.5, -0.75);
        let spec = BandpassSpec::new(2.0, 20.0);
        let f = |v: Vec<f64>| bandpass(&TimeSeries::new("S", "Z", 100.0, 0.0, v).unwrap(), &spec).unwrap().samples;
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = f(combo);
        let fx = f(x);
        let fy = f(y);
        let scale = lhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for i in 0..n {
            let rhs = a * fx[i] + b * fy[i];
            assert!((lhs[i] - rhs).abs() <= 1e-6 * scale, "index {i}");
        }
    }

    #[test]
    fn zero_phase_peak_at_lag_zero() {
        let ts = sine(7.0, 100.0, 4000);
        let out = bandpass(&ts, &BandpassSpec::new(3.0, 20.0)).unwrap();
        let range = 1000..3000;
        let xc = |lag: i64| -> f64 {
            range
                .clone()
                .map(|i| ts.samples[i] * out.samples[(i as i64 + lag) as usize])
                .sum()
        };
        let best = (-20..=20).max_by(|&a, &b| xc(a).total_cmp(&xc(b))).unwrap();
        assert_eq!(best, 0);
    }

    #[test]
    fn odd_order_designs() {
        let spec = BandpassSpec { low_hz: 3.0, high_hz: 20.0, order: 3 };
        let ts = sine(10.0, 100.0, 4000);
        let out = bandpass(&ts, &spec).unwrap();
        let gain = db(rms(&out.samples[500..3500]) / rms(&ts.samples[500..3500]));
        assert!(gain.abs() <= 1.0);
    }
}
