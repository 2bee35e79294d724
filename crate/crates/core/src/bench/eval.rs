use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::{AssociationParams, NetworkDetection};
use crate::error::{param, Result};
use crate::fingerprint::Fingerprint;
use crate::ingest::{synthesize, BandpassSpec, InjectionLog, SynthSpec, TimeSeries};
use crate::lsh_search::SearchConfig;
use crate::pipeline::{run_pipeline, PipelineOutput, PipelineParams, StageTimings, StationInput};

/// Two occurrences of one source, as seen at every station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruePair {
    pub source: u32,
    pub event_a: usize,
    pub event_b: usize,
    pub delta_t_s: f64,
    /// `(station id, arrival of a, arrival of b)`.
    pub arrivals: Vec<(String, f64, f64)>,
}

/// Every pair of injected events sharing a source, ordered by first arrival.
pub fn true_pairs(spec: &SynthSpec, log: &InjectionLog) -> Vec<TruePair> {
    let source = |e: usize| spec.event_sources.get(e).copied().unwrap_or(0);
    let mut events: Vec<usize> = (0..spec.event_times.len()).collect();
    events.sort_by(|&a, &b| spec.event_times[a].total_cmp(&spec.event_times[b]));
    let mut out = Vec::new();
    for (i, &a) in events.iter().enumerate() {
        for &b in &events[i + 1..] {
            if source(a) != source(b) {
                continue;
            }
            let arrivals = log
                .arrivals_of_event(a)
                .filter_map(|x| {
                    log.arrivals_of_event(b)
                        .find(|y| y.station == x.station)
                        .map(|y| (x.station_id.clone(), x.epoch_s, y.epoch_s))
                })
                .collect();
            out.push(TruePair {
                source: source(a),
                event_a: a,
                event_b: b,
                delta_t_s: spec.event_times[b] - spec.event_times[a],
                arrivals,
            });
        }
    }
    out
}

/// Whether a detection describes `pair`: inter-event time within `tol_s`, and at some
/// station the true first arrival falls inside the detected first window (padded by `tol_s`).
pub fn detection_matches(d: &NetworkDetection, pair: &TruePair, window_len_s: f64, tol_s: f64) -> bool {
    if (d.delta_t_s - pair.delta_t_s).abs() > tol_s {
        return false;
    }
    d.arrivals.iter().any(|a| {
        pair.arrivals.iter().any(|(st, ta, _)| {
            *st == a.station_id && *ta >= a.arrival1_epoch_s - tol_s && *ta <= a.arrival1_epoch_s + window_len_s + tol_s
        })
    })
}

/// Whether both windows of a detection hold an injected arrival at one of its stations,
/// whatever their sources.
pub fn detection_is_event_backed(d: &NetworkDetection, log: &InjectionLog, window_len_s: f64, tol_s: f64) -> bool {
    let hit = |station: &str, start: f64| {
        log.arrivals
            .iter()
            .filter(|x| x.station_id == station && x.epoch_s >= start - tol_s && x.epoch_s <= start + window_len_s + tol_s)
            .map(|x| x.event)
            .collect::<Vec<_>>()
    };
    d.arrivals.iter().any(|a| {
        let first = hit(&a.station_id, a.arrival1_epoch_s);
        let second = hit(&a.station_id, a.arrival2_epoch_s);
        first.iter().any(|e| second.iter().any(|f| f != e))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowLabel {
    Event,
    Burst,
    Background,
}

/// Labels each fingerprint window of `station` by what was injected into it.
pub fn label_windows(fps: &[Fingerprint], log: &InjectionLog, station: usize, window_len_s: f64, event_len_s: f64) -> Vec<WindowLabel> {
    fps.iter()
        .map(|f| {
            let (lo, hi) = (f.start_epoch_s, f.start_epoch_s + window_len_s);
            let overlaps = |a: f64, b: f64| a < hi && b > lo;
            if log.arrivals.iter().any(|a| a.station == station && overlaps(a.epoch_s, a.epoch_s + event_len_s)) {
                WindowLabel::Event
            } else if log.bursts.iter().any(|b| b.station == station && overlaps(b.start_epoch_s, b.end_epoch_s)) {
                WindowLabel::Burst
            } else {
                WindowLabel::Background
            }
        })
        .collect()
}

/// Synthetic run with `pairs` repeating sources, each occurring twice, spread over the record.
pub fn paired_event_spec(pairs: usize, stations: usize, duration_s: f64, snr: f64, seed: u64) -> Result<SynthSpec> {
    let events = 2 * pairs;
    let margin = 40.0;
    let usable = duration_s - 2.0 * margin;
    if events > 0 && usable / events as f64 <= 45.0 {
        return param(format!("{pairs} event pairs do not fit into {duration_s} s"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slot = if events > 0 { usable / events as f64 } else { 0.0 };
    let event_times: Vec<f64> =
        (0..events).map(|j| (margin + slot * j as f64 + rng.gen_range(0.0..slot * 0.2)).round()).collect();
    let mut event_sources: Vec<u32> = (0..events as u32).map(|j| j / 2).collect();
    event_sources.shuffle(&mut rng);
    // distinct fixed travel times, rounded to 0.1 s
    let per_station_delay_s: Vec<f64> = (0..stations)
        .map(|i| {
            let jitter = if i == 0 { 0.0 } else { rng.gen_range(0.0..0.6) };
            ((i as f64 * 1.4 + jitter) * 10.0).round() / 10.0
        })
        .collect();
    Ok(SynthSpec {
        duration_s,
        num_stations: stations,
        event_times,
        event_sources,
        per_station_delay_s,
        snr,
        rng_seed: seed,
        ..SynthSpec::default()
    })
}

/// Band used for the synthetic records: it spans the event energy and cuts most of the white noise.
pub fn synthetic_band() -> BandpassSpec {
    BandpassSpec::new(4.0, 14.0)
}

/// Pipeline tuned for peak SNR around 2: one-second lag, sparse fingerprints, wide LSH
/// acceptance, and a start tolerance that covers inter-station travel time spread.
pub fn low_snr_params() -> PipelineParams {
    let lag = 1.0;
    let mut p = PipelineParams::default();
    p.fingerprint.window_lag_s = lag;
    p.fingerprint.top_k = 100;
    p.search = SearchConfig { k: 2, m: 3, ..SearchConfig::default() };
    p.align.association = AssociationParams { start_tol_s: 10.0, ..AssociationParams::for_lag(lag) };
    p
}

/// One single-channel station per series, all filtered with `band`.
pub fn station_inputs(series: Vec<TimeSeries>, band: Option<BandpassSpec>) -> Vec<StationInput> {
    series
        .into_iter()
        .map(|ts| StationInput { station_id: ts.station_id.clone(), channels: vec![ts], band })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub name: String,
    pub recall: f64,
    pub matched_pairs: usize,
    pub injected_pairs: usize,
    /// Detections not backed by injected arrivals in both windows.
    pub false_positives: usize,
    /// Detections linking injected events of different sources.
    pub cross_source: usize,
    pub detections: usize,
    pub station_pairs: usize,
    pub triplets: u64,
    pub filtered_fingerprints: u64,
    pub mean_lookups_per_query: f64,
    /// Medians over the runs.
    pub timings: StageTimings,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub synth: SynthSpec,
    pub band: Option<BandpassSpec>,
    pub params: PipelineParams,
    pub variants: Vec<VariantReport>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return 0.0;
    }
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Scores one pipeline output against the ground truth.
pub fn score_output(
    name: &str,
    out: &PipelineOutput,
    truth: &[TruePair],
    log: &InjectionLog,
    params: &PipelineParams,
    timings: Vec<StageTimings>,
) -> VariantReport {
    let tol = 2.0 * params.fingerprint.window_lag_s;
    let wl = params.fingerprint.window_len_s;
    let matched = truth.iter().filter(|p| out.detections.iter().any(|d| detection_matches(d, p, wl, tol))).count();
    let unmatched: Vec<&NetworkDetection> =
        out.detections.iter().filter(|d| !truth.iter().any(|p| detection_matches(d, p, wl, tol))).collect();
    let cross_source = unmatched.iter().filter(|d| detection_is_event_backed(d, log, wl, tol)).count();
    let false_positives = unmatched.len() - cross_source;
    let (lookups, fps) = out.channels.iter().fold((0.0, 0.0), |(l, n), c| {
        (l + c.stats.lookups as f64, n + c.stats.fingerprints as f64)
    });
    let pick = |f: fn(&StageTimings) -> f64| median(timings.iter().map(f).collect());
    VariantReport {
        name: name.to_string(),
        recall: if truth.is_empty() { 1.0 } else { matched as f64 / truth.len() as f64 },
        matched_pairs: matched,
        injected_pairs: truth.len(),
        false_positives,
        cross_source,
        detections: out.detections.len(),
        station_pairs: out.station_pairs.len(),
        triplets: out.triplet_count(),
        filtered_fingerprints: out.channels.iter().map(|c| c.stats.filtered_fingerprints).sum(),
        mean_lookups_per_query: if fps > 0.0 { lookups / fps } else { 0.0 },
        timings: StageTimings {
            fingerprint_s: pick(|t| t.fingerprint_s),
            hash_s: pick(|t| t.hash_s),
            search_s: pick(|t| t.search_s),
            align_s: pick(|t| t.align_s),
        },
        runs: timings.len(),
    }
}

/// Runs the pipeline `runs` times on freshly synthesised data and scores the first run.
pub fn end_to_end_eval(
    spec: &SynthSpec,
    band: Option<BandpassSpec>,
    params: &PipelineParams,
    runs: usize,
) -> Result<(EvalReport, PipelineOutput)> {
    let (series, log) = synthesize(spec)?;
    let truth = true_pairs(spec, &log);
    let inputs = station_inputs(series, band);
    let (variant, out) = run_variant("configured", &inputs, &truth, &log, params, runs)?;
    Ok((EvalReport { synth: spec.clone(), band, params: params.clone(), variants: vec![variant] }, out))
}

fn run_variant(
    name: &str,
    inputs: &[StationInput],
    truth: &[TruePair],
    log: &InjectionLog,
    params: &PipelineParams,
    runs: usize,
) -> Result<(VariantReport, PipelineOutput)> {
    let mut timings = Vec::new();
    let mut first = None;
    for _ in 0..runs.max(1) {
        let out = run_pipeline(inputs, params)?;
        timings.push(out.timings);
        first.get_or_insert(out);
    }
    let out = first.expect("at least one run");
    Ok((score_output(name, &out, truth, log, params, timings), out))
}

/// Cumulative optimisations: baseline search, then the optimised LSH profile, then the
/// occurrence filter on top.
pub fn factor_analysis(
    spec: &SynthSpec,
    band: Option<BandpassSpec>,
    params: &PipelineParams,
    runs: usize,
    occurrence_threshold: f64,
) -> Result<EvalReport> {
    let (series, log) = synthesize(spec)?;
    let truth = true_pairs(spec, &log);
    let inputs = station_inputs(series, band);
    let keep = |s: SearchConfig| SearchConfig {
        num_partitions: params.search.num_partitions,
        near_repeat_exclusion_s: params.search.near_repeat_exclusion_s,
        mapping_seed: params.search.mapping_seed,
        tables: params.search.tables,
        ..s
    };
    let variants = [
        ("baseline", keep(SearchConfig::baseline())),
        ("optimized_lsh", keep(SearchConfig::optimized())),
        ("occurrence_filter", SearchConfig { occurrence_threshold: Some(occurrence_threshold), ..keep(SearchConfig::optimized()) }),
    ];
    let mut reports = Vec::new();
    for (name, search) in variants {
        let p = PipelineParams { search, ..params.clone() };
        reports.push(run_variant(name, &inputs, &truth, &log, &p, runs)?.0);
    }
    Ok(EvalReport { synth: spec.clone(), band, params: params.clone(), variants: reports })
}

/// One CSV row per variant.
pub fn variants_csv(report: &EvalReport) -> String {
    let mut s = String::from(
        "variant,recall,matched,injected,false_positives,cross_source,detections,triplets,filtered,lookups_per_query,fingerprint_s,hash_s,search_s,align_s,runs\n",
    );
    for v in &report.variants {
        s.push_str(&format!(
            "{},{:.4},{},{},{},{},{},{},{},{:.3},{:.4},{:.4},{:.4},{:.4},{}\n",
            v.name,
            v.recall,
            v.matched_pairs,
            v.injected_pairs,
            v.false_positives,
            v.cross_source,
            v.detections,
            v.triplets,
            v.filtered_fingerprints,
            v.mean_lookups_per_query,
            v.timings.fingerprint_s,
            v.timings.hash_s,
            v.timings.search_s,
            v.timings.align_s,
            v.runs
        ));
    }
    s
}
