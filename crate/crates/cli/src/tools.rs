//! Synthesis, spectrogram preview and benchmark commands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use quakescan::bench::{
    end_to_end_eval, factor_analysis, low_snr_params, paired_event_spec, scurve_csv, scurve_experiment, synthetic_band,
    variants_csv, EvalReport,
};
use quakescan::ingest::{load_waveform_base, save_waveform, spectrogram_preview, synthesize, InjectionLog, SynthSpec};

use crate::config::{Loaded, PairedEvents};

#[derive(Serialize)]
struct Injections<'a> {
    spec: &'a SynthSpec,
    log: &'a InjectionLog,
}

pub fn synth_spec(cfg: &Loaded) -> Result<SynthSpec> {
    let s = &cfg.config.synth;
    Ok(match &s.paired {
        Some(p) => paired_event_spec(p.pairs, p.stations, p.duration_s, p.snr, s.spec.rng_seed)?,
        None => s.spec.clone(),
    })
}

/// Writes one waveform per station plus `injections.json`; returns the waveform bases.
pub fn synth(cfg: &Loaded, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    let spec = synth_spec(cfg)?;
    let dir = out.map_or_else(|| cfg.resolve(&cfg.config.synth.data_dir), Path::to_path_buf);
    let (series, log) = synthesize(&spec)?;
    fs::create_dir_all(&dir)?;
    let mut bases = Vec::new();
    for ts in &series {
        let base = dir.join(format!("{}.{}", ts.station_id, ts.channel_id));
        save_waveform(ts, &base)?;
        bases.push(base);
    }
    let json = serde_json::to_string_pretty(&Injections { spec: &spec, log: &log })?;
    fs::write(dir.join("injections.json"), json + "\n")?;
    Ok(bases)
}

pub fn spectrogram(input: &Path, offset_s: f64, window_s: Option<f64>, out: &Path) -> Result<PathBuf> {
    let ts = load_waveform_base(input).with_context(|| format!("loading {}", input.display()))?;
    let window = window_s.unwrap_or(ts.duration_s() - offset_s);
    spectrogram_preview(&ts, offset_s, window, out)?;
    let mut csv = out.as_os_str().to_owned();
    csv.push(".csv");
    Ok(PathBuf::from(csv))
}

fn eval_spec(cfg: &Loaded, e: &PairedEvents) -> Result<SynthSpec> {
    Ok(paired_event_spec(e.pairs, e.stations, e.duration_s, e.snr, cfg.config.seed.unwrap_or(11))?)
}

fn write_eval(dir: &Path, name: &str, report: &EvalReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(report)? + "\n")?;
    fs::write(dir.join(format!("{name}.csv")), variants_csv(report))?;
    Ok(())
}

pub fn bench_scurve(cfg: &Loaded, trials: Option<usize>) -> Result<PathBuf> {
    let mut spec = cfg.config.bench.scurve.clone();
    if let Some(t) = trials {
        spec.trials = t;
    }
    let points = scurve_experiment(&spec)?;
    let dir = cfg.out_dir().join("bench");
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("scurve.json"), serde_json::to_string_pretty(&points)? + "\n")?;
    let csv = dir.join("scurve.csv");
    fs::write(&csv, scurve_csv(&points))?;
    Ok(csv)
}

/// End-to-end recall on paired synthetic events with the low-SNR profile.
pub fn bench_eval(cfg: &Loaded) -> Result<EvalReport> {
    let b = &cfg.config.bench;
    let (report, _) = end_to_end_eval(&eval_spec(cfg, &b.eval)?, Some(synthetic_band()), &low_snr_params(), b.runs)?;
    write_eval(&cfg.out_dir().join("bench"), "eval", &report)?;
    Ok(report)
}

/// Cumulative baseline / optimised LSH / occurrence filter runs.
pub fn bench_factors(cfg: &Loaded) -> Result<EvalReport> {
    let b = &cfg.config.bench;
    let report = factor_analysis(&eval_spec(cfg, &b.eval)?, Some(synthetic_band()), &low_snr_params(), b.runs, b.occurrence_threshold)?;
    write_eval(&cfg.out_dir().join("bench"), "factors", &report)?;
    Ok(report)
}
