//! Waveform loading, filtering, synthesis and spectrogram previews.

mod filter;
mod spectrogram;
mod synth;
mod waveform;

pub use filter::{bandpass, design_bandpass, filtfilt, BandpassSpec, Section};
pub use spectrogram::{spectrogram, spectrogram_preview, SpectralScale, SpectrogramMatrix, Stft, StftParams, POWER_FLOOR};
pub use synth::{
    event_waveform, station_name, synthesize, Arrival, BurstWindow, EventTemplate, InjectionLog, NoiseBurst,
    SynthSpec, SYNTH_CHANNEL,
};
pub use waveform::{
    decode_samples, encode_samples, load_waveform, load_waveform_base, parse_sidecar, save_waveform,
    waveform_paths, Sidecar, TimeSeries,
};
