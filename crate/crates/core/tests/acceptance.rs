//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::time::Instant;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use quakescan::align::{
    channel_combine, cluster_station, cluster_station_parallel, cluster_station_partitioned, find_partition_points,
    report_csv, ClusterParams, SortConfig,
};
use quakescan::bench::{
    correlated_fingerprints, detection_matches, end_to_end_eval, fingerprint_pair, label_windows, low_snr_params, paired_event_spec,
    planted_dataset, random_fingerprint, scurve_experiment, shared_bits_for, station_inputs, synthetic_band,
    true_pairs, ScurveSpec, WindowLabel,
};
use quakescan::fingerprint::{
    binarize, estimate_mad, haar2d, intersection_size, inverse_haar2d, normalize_topk,
    CoefficientSource, Fingerprint, FingerprintParams, SpectralImages,
};
use quakescan::ingest::{bandpass, synthesize, NoiseBurst, SynthSpec};
use quakescan::lsh_search::{
    detection_probability, matching_threshold, partitioned_search, read_triplets, write_triplets, SearchConfig,
    Triplet, TripletHeader,
};
use quakescan::minmax_hash::{
    combine, gen_hash_mappings, minmax_signatures, minmax_signatures_with_workers, minmax_words, HashMapping,
};
use quakescan::pipeline::run_pipeline;

type Outcome = quakescan::Result<(bool, String)>;

/// `ACCEPTANCE_ONLY=3,7` runs a subset.
fn selected(id: u32) -> bool {
    std::env::var("ACCEPTANCE_ONLY").map_or(true, |v| v.split(',').any(|s| s.trim().parse() == Ok(id)))
}

fn check(results: &mut Vec<bool>, id: u32, name: &str, f: impl FnOnce() -> Outcome) {
    if !selected(id) {
        println!("SKIP [{id:>2}] {name}");
        return;
    }
    let clock = Instant::now();
    let (ok, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("{verdict} [{id:>2}] {name} ({:.1} s): {detail}", clock.elapsed().as_secs_f64());
    results.push(ok);
}

fn scurve_fidelity() -> Outcome {
    let spec = ScurveSpec { similarities: vec![0.3, 0.5, 0.7], ..ScurveSpec::default() };
    let clock = Instant::now();
    let points = scurve_experiment(&spec)?;
    let elapsed = clock.elapsed().as_secs_f64();
    let mut ok = elapsed < 120.0;
    let mut worst_fit: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for p in &points {
        worst_fit = worst_fit.max((p.rate - p.analytic).abs());
    }
    for &s in &spec.similarities {
        let rate = |k: usize| points.iter().find(|p| p.k == k && p.target_similarity == s).map(|p| p.rate);
        if let (Some(a), Some(b)) = (rate(6), rate(8)) {
            worst_gap = worst_gap.max((a - b).abs());
        } else {
            ok = false;
        }
    }
    ok &= worst_fit <= 0.05 && worst_gap <= 0.05;
    let rates: Vec<String> = points.iter().map(|p| format!("k{}m{}@{:.1}={:.3}/{:.3}", p.k, p.m, p.target_similarity, p.rate, p.analytic)).collect();
    Ok((ok, format!("max |empirical-analytic| {worst_fit:.4}, max config gap {worst_gap:.4}, search {elapsed:.1} s; {}", rates.join(" "))))
}

fn partition_identity() -> Outcome {
    let clock = Instant::now();
    let fps = planted_dataset(100_000, 8192, 200, 3000, 0.7, 2)?;
    let cfg = SearchConfig::optimized();
    let mapping = gen_hash_mappings(8192, cfg.tables, cfg.k, cfg.mapping_seed)?;
    let sigs = minmax_signatures(&fps, &mapping)?;
    let run = |p: usize| -> quakescan::Result<Vec<Triplet>> {
        let mut t = partitioned_search(&sigs, &SearchConfig { num_partitions: p, ..cfg.clone() }, 2.0)?.triplets;
        t.sort_unstable();
        Ok(t)
    };
    let reference = run(1)?;
    let mut ok = !reference.is_empty();
    let mut counts = vec![reference.len()];
    for p in [2, 8, 32] {
        let t = run(p)?;
        counts.push(t.len());
        ok &= t == reference;
    }
    let elapsed = clock.elapsed().as_secs_f64();
    ok &= elapsed < 300.0;
    Ok((ok, format!("triplets per p=1,2,8,32: {counts:?}, total {elapsed:.1} s")))
}

fn minmax_unbiased() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ok = true;
    let mut parts = Vec::new();
    for target in [0.2, 0.5, 0.8] {
        let shared = shared_bits_for(200, target);
        let (a, b) = fingerprint_pair(&mut rng, 8192, 200, shared, 0)?;
        let exact = shared as f64 / (400 - shared) as f64;
        let (mut min_hits, mut max_hits, mut trials) = (0u64, 0u64, 0u64);
        let per_seed: Vec<(u64, u64, u64)> = (0..1000u64)
            .into_par_iter()
            .map(|seed| {
                let m = gen_hash_mappings(8192, 8, 8, seed * 7919 + 1).expect("valid mapping shape");
                let (amin, amax) = minmax_words(&a, &m).expect("dims match");
                let (bmin, bmax) = minmax_words(&b, &m).expect("dims match");
                let lo = amin.iter().zip(&bmin).filter(|(x, y)| x == y).count() as u64;
                let hi = amax.iter().zip(&bmax).filter(|(x, y)| x == y).count() as u64;
                (lo, hi, amin.len() as u64)
            })
            .collect();
        for (lo, hi, n) in per_seed {
            min_hits += lo;
            max_hits += hi;
            trials += n;
        }
        let (fmin, fmax) = (min_hits as f64 / trials as f64, max_hits as f64 / trials as f64);
        ok &= (fmin - exact).abs() <= 0.02 && (fmax - exact).abs() <= 0.02;
        parts.push(format!("J={exact:.4}: min {fmin:.4} max {fmax:.4}"));
    }
    Ok((ok, format!("{} over 1000 seeds x 32 functions", parts.join(", "))))
}

/// Function-major reference: one pass over the set bits per (table, function).
fn reference_signature(fp: &Fingerprint, m: &HashMapping) -> Vec<u64> {
    (0..m.tables)
        .map(|t| {
            let mut words = Vec::with_capacity(2 * m.k_half);
            for j in 0..m.k_half {
                let lo = fp.bits.iter().map(|&x| m.value(x as usize, t, j)).min().expect("non-empty");
                let hi = fp.bits.iter().map(|&x| m.value(x as usize, t, j)).max().expect("non-empty");
                words.push(lo);
                words.push(hi);
            }
            words.truncate(m.k);
            combine(words)
        })
        .collect()
}

fn blocked_equals_naive() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fps: Vec<Fingerprint> = (0..10_000).map(|i| random_fingerprint(&mut rng, 8192, 200, i)).collect();
    let mut mismatches = 0usize;
    for (k, n) in [(8usize, 10_000usize), (5, 2_000)] {
        let mapping = gen_hash_mappings(8192, 100, k, 99 + k as u64)?;
        let blocked = minmax_signatures(&fps[..n], &mapping)?;
        mismatches += fps[..n]
            .par_iter()
            .enumerate()
            .filter(|(i, fp)| blocked.get(*i) != reference_signature(fp, &mapping).as_slice())
            .count();
    }
    Ok((mismatches == 0, format!("{mismatches} mismatching signatures (10^4 at k=8, 2000 at k=5, t=100)")))
}

fn mad_sampling() -> Outcome {
    let duration = 100_100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let event_times: Vec<f64> = (0..400).map(|i| 50.0 + i as f64 * 249.0 + rng.gen_range(0.0..100.0)).collect();
    let event_sources = (0..400u32).map(|i| i % 40).collect();
    let spec = SynthSpec { duration_s: duration, event_times, event_sources, snr: 4.0, rng_seed: 5, ..SynthSpec::default() };
    let (series, _) = synthesize(&spec)?;
    let band = synthetic_band();
    let ts = bandpass(&series[0], &band)?;
    let params = FingerprintParams { window_lag_s: 1.0, ..FingerprintParams::default() };
    let images = SpectralImages::compute(&ts, &params, Some(&band))?;
    let windows = images.len();
    let exact = estimate_mad(&images, 1.0, 0)?;
    let exact_again = estimate_mad(&images, 1.0, 12345)?;
    let sampled = estimate_mad(&images, 0.1, 7)?;
    let k = params.top_k;
    let dim = params.dim();
    let n = images.coefficient_count();
    let (sum10, sum100) = (0..windows)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, w| {
                images.coefficients_into(w, buf);
                let bits = |stats| {
                    let top = normalize_topk(buf, stats, k).expect("stats cover the image");
                    binarize(&top, dim, w as u64, 0.0).expect("indices within dim").bits
                };
                let base = bits(&exact);
                let a10 = intersection_size(&base, &bits(&sampled)) as f64 / k as f64;
                let a100 = intersection_size(&base, &bits(&exact_again)) as f64 / k as f64;
                (a10, a100)
            },
        )
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    let (agree10, agree100) = (sum10 / windows as f64, sum100 / windows as f64);
    let ok = windows >= 100_000 && agree10 >= 0.985 && agree100 == 1.0;
    Ok((ok, format!("{windows} windows; agreement at 10% {:.3}%, at 100% {:.3}%", 100.0 * agree10, 100.0 * agree100)))
}

fn selectivity_vs_k() -> Outcome {
    let fps = correlated_fingerprints(50_000, 8192, 200, 6);
    let t = 100;
    let grid: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
    let (m4, dev) = matching_threshold(4, t, 8, 2, &grid)?;
    let run = |k: usize, m: usize| -> quakescan::Result<quakescan::lsh_search::SearchStats> {
        let cfg = SearchConfig { k, m, tables: t, near_repeat_exclusion_s: 0.0, ..SearchConfig::default() };
        let mapping = gen_hash_mappings(8192, t, k, cfg.mapping_seed)?;
        let sigs = minmax_signatures(&fps, &mapping)?;
        Ok(partitioned_search(&sigs, &cfg, 1.0)?.stats)
    };
    let s8 = run(8, 2)?;
    let s4 = run(4, m4)?;
    let s6 = run(6, 5)?;
    let ok = s8.lookups_per_query <= s4.lookups_per_query / 5.0;
    Ok((
        ok,
        format!(
            "lookups/query k=8,m=2 {:.1} vs k=4,m={m4} {:.1} (ratio {:.1}x, curve dev {dev:.3}); top-0.1% bucket mass k=4 {:.1}% k=6 {:.1}% k=8 {:.1}%",
            s8.lookups_per_query,
            s4.lookups_per_query,
            s4.lookups_per_query / s8.lookups_per_query.max(1e-12),
            100.0 * s4.buckets.top_0_1pct_mass,
            100.0 * s6.buckets.top_0_1pct_mass,
            100.0 * s8.buckets.top_0_1pct_mass
        ),
    ))
}

fn occurrence_filter() -> Outcome {
    let mut spec = paired_event_spec(5, 1, 3600.0, 6.0, 21)?;
    let mut times = spec.event_times.clone();
    times.sort_by(f64::total_cmp);
    // two 90 s bursts of a 1 s periodic motif, well clear of any event
    let mut bursts = Vec::new();
    for w in times.windows(2) {
        if bursts.len() < 2 && w[1] - w[0] > 320.0 {
            bursts.push(NoiseBurst { start_epoch_s: w[0] + 120.0, duration_s: 90.0, period_s: 1.0, amplitude: 10.0, station: None });
        }
    }
    spec.bursts = bursts;
    let (series, log) = synthesize(&spec)?;
    let mut params = low_snr_params();
    params.search.num_partitions = 1;
    let wl = params.fingerprint.window_len_s;
    let inputs = station_inputs(series, Some(synthetic_band()));
    let off = run_pipeline(&inputs, &params)?;
    params.search.occurrence_threshold = Some(0.01);
    let on = run_pipeline(&inputs, &params)?;
    let ch = &on.channels[0];
    let labels = label_windows(&ch.fingerprints, &log, 0, wl, spec.event_template.duration_s);
    let mut excluded = vec![false; labels.len()];
    for &i in &ch.excluded {
        excluded[i] = true;
    }
    // a noise-burst fingerprint spends at least half its window inside a burst
    let in_burst: Vec<bool> = ch
        .fingerprints
        .iter()
        .zip(&labels)
        .map(|(f, &l)| {
            let (lo, hi) = (f.start_epoch_s, f.start_epoch_s + wl);
            let covered: f64 = log.bursts.iter().map(|b| (hi.min(b.end_epoch_s) - lo.max(b.start_epoch_s)).max(0.0)).sum();
            l != WindowLabel::Event && covered >= wl / 2.0
        })
        .collect();
    let burst = in_burst.iter().filter(|&&b| b).count();
    let burst_hit = in_burst.iter().zip(&excluded).filter(|(&b, &e)| b && e).count();
    let event = labels.iter().filter(|&&l| l == WindowLabel::Event).count();
    let event_hit = labels.iter().zip(&excluded).filter(|(&l, &e)| l == WindowLabel::Event && e).count();
    let burst_frac = burst as f64 / labels.len() as f64;
    let burst_excl = burst_hit as f64 / burst.max(1) as f64;
    let (t_off, t_on) = (off.triplet_count(), on.triplet_count());
    let ratio = t_off as f64 / t_on.max(1) as f64;
    let ok = burst > 0 && burst_excl >= 0.9 && event_hit == 0 && ratio >= 10.0;
    Ok((
        ok,
        format!(
            "noise-burst windows {:.1}% of {}, {:.1}% of them excluded ({} excluded in total); {event_hit} of {event} event windows excluded; triplets {t_off} -> {t_on} ({ratio:.1}x)",
            100.0 * burst_frac,
            labels.len(),
            100.0 * burst_excl,
            ch.excluded.len()
        ),
    ))
}

fn random_triplets(rng: &mut ChaCha8Rng, n: usize) -> Vec<Triplet> {
    (0..n)
        .map(|_| Triplet { dt: rng.gen_range(1..200), idx1: rng.gen_range(0..500), sim: rng.gen_range(1..20) })
        .collect()
}

fn diagonal_triplets(rng: &mut ChaCha8Rng) -> Vec<Triplet> {
    let mut set = BTreeMap::new();
    for _ in 0..rng.gen_range(1..30) {
        let (dt, idx) = (rng.gen_range(1..3000u64), rng.gen_range(0..5000u64));
        for s in 0..rng.gen_range(1..25u64) {
            let jitter = rng.gen_range(0..3u64);
            set.insert((dt + jitter, idx + s * rng.gen_range(1..4)), rng.gen_range(1..100u32));
        }
    }
    for _ in 0..rng.gen_range(0..300) {
        set.insert((rng.gen_range(1..3000), rng.gen_range(0..5000)), rng.gen_range(1..100));
    }
    set.into_iter().map(|((dt, idx1), sim)| Triplet { dt, idx1, sim }).collect()
}

fn alignment_oracles() -> Outcome {
    let dir = tempfile::tempdir()?;
    let mut combine_bad = 0;
    let mut cluster_bad = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let channels = rng.gen_range(1..4);
        let threshold = rng.gen_range(0..25);
        let mut paths = Vec::new();
        let mut oracle: BTreeMap<(u64, u64), u32> = BTreeMap::new();
        for c in 0..channels {
            let trips = {
                let n = rng.gen_range(0..3000);
                random_triplets(&mut rng, n)
            };
            for t in &trips {
                *oracle.entry((t.dt, t.idx1)).or_default() += t.sim;
            }
            let ext = if c % 2 == 0 { "bin" } else { "csv" };
            let path = dir.path().join(format!("s{seed}_c{c}.{ext}"));
            let header = TripletHeader { config_hash: 7, tables: 100, k: 8, m: 2, station: "ST00".into(), channel: format!("C{c}") };
            write_triplets(&path, &header, &trips)?;
            paths.push(path);
        }
        let sort = SortConfig { run_bytes: 24 * rng.gen_range(1..400), fan_in: rng.gen_range(2..5), tmp_dir: Some(dir.path().to_path_buf()) };
        let out = dir.path().join(format!("s{seed}_out.bin"));
        channel_combine(&paths, threshold, &sort, &out)?;
        let (_, got) = read_triplets(&out)?;
        let want: Vec<Triplet> = oracle
            .into_iter()
            .filter(|&(_, sim)| sim >= threshold)
            .map(|((dt, idx1), sim)| Triplet { dt, idx1, sim })
            .collect();
        combine_bad += usize::from(got != want);

        let trips = diagonal_triplets(&mut rng);
        let params = ClusterParams { gap: rng.gen_range(1..20), max_width: rng.gen_range(0..5), min_size: rng.gen_range(1..4) };
        let serial = cluster_station(&trips, &params)?;
        let rate = [0.01, 0.1, 0.5, 1.0][seed as usize % 4];
        let bounds = find_partition_points(&trips, &params, rate)?;
        let split = cluster_station_partitioned(&trips, &params, &bounds)?;
        let parallel = cluster_station_parallel(&trips, &params, rate)?;
        cluster_bad += usize::from(split != serial || parallel != serial);
    }
    Ok((
        combine_bad == 0 && cluster_bad == 0,
        format!("channel_combine mismatches {combine_bad}/100, partitioned clustering mismatches {cluster_bad}/100"),
    ))
}

fn inter_event_invariance() -> Outcome {
    let mut spec = paired_event_spec(5, 4, 1200.0, 6.0, 8)?;
    spec.per_station_delay_s = vec![0.0, 1.7, 3.9, 6.3];
    let (series, log) = synthesize(&spec)?;
    let truth = true_pairs(&spec, &log);
    let params = low_snr_params();
    let lag = params.fingerprint.window_lag_s;
    let inputs = station_inputs(series, Some(synthetic_band()));
    let forward = run_pipeline(&inputs, &params)?;
    let mut reversed_inputs = inputs.clone();
    reversed_inputs.reverse();
    let reversed = run_pipeline(&reversed_inputs, &params)?;
    let permutation_ok = report_csv(&forward.detections) == report_csv(&reversed.detections);
    let mut grouped = 0;
    let mut worst_spread: f64 = 0.0;
    for p in &truth {
        let wl = params.fingerprint.window_len_s;
        let matching = forward.detections.iter().filter(|d| detection_matches(d, p, wl, 2.0 * lag));
        let Some(d) = matching.max_by_key(|d| d.score) else {
            continue;
        };
        if d.station_count == spec.num_stations {
            grouped += 1;
        }
        let dts: Vec<f64> = d.arrivals.iter().map(|a| a.arrival2_epoch_s - a.arrival1_epoch_s).collect();
        let spread = dts.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - dts.iter().cloned().fold(f64::INFINITY, f64::min);
        worst_spread = worst_spread.max(spread);
    }
    let ok = permutation_ok && grouped == truth.len() && worst_spread <= lag;
    Ok((
        ok,
        format!(
            "{grouped}/{} pairs grouped across all {} stations, max per-station dt spread {worst_spread:.2} s (lag {lag} s), permutation invariant: {permutation_ok}",
            truth.len(),
            spec.num_stations
        ),
    ))
}

fn end_to_end_recall() -> Outcome {
    let spec = paired_event_spec(20, 3, 3600.0, 2.0, 11)?;
    let clock = Instant::now();
    let (report, _) = end_to_end_eval(&spec, Some(synthetic_band()), &low_snr_params(), 3)?;
    let elapsed = clock.elapsed().as_secs_f64();
    let v = &report.variants[0];
    let ok = v.recall >= 0.9 && v.false_positives <= 2 && elapsed < 300.0;
    Ok((
        ok,
        format!(
            "recall {:.2} ({}/{}), false detections {}, cross-source detections {}, {} detections from {} triplets, {elapsed:.1} s",
            v.recall, v.matched_pairs, v.injected_pairs, v.false_positives, v.cross_source, v.detections, v.triplets
        ),
    ))
}

fn exact_detection_probability(s: f64, k: usize, m: usize, t: usize) -> BigRational {
    let s = BigRational::from_float(s).expect("finite");
    let p = (0..k).fold(BigRational::one(), |acc, _| acc * &s);
    let q = BigRational::one() - &p;
    let mut q_pow = vec![BigRational::one()];
    for i in 1..=t {
        let next = &q_pow[i - 1] * &q;
        q_pow.push(next);
    }
    let mut miss = BigRational::zero();
    let mut binom = BigInt::one();
    let mut p_pow = BigRational::one();
    for i in 0..m.min(t + 1) {
        miss += BigRational::from_integer(binom.clone()) * &p_pow * &q_pow[t - i];
        binom = binom * BigInt::from(t - i) / BigInt::from(i + 1);
        p_pow *= &p;
    }
    BigRational::one() - miss
}

fn numeric_kernels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_round: f64 = 0.0;
    let mut worst_energy: f64 = 0.0;
    for &(r, c) in &[(32usize, 128usize), (1, 64), (16, 1), (8, 8), (64, 32), (2, 2)] {
        for _ in 0..20 {
            let x: Vec<f64> = (0..r * c).map(|_| rng.gen_range(-1e3..1e3)).collect();
            let h = haar2d(&x, r, c)?;
            let back = inverse_haar2d(&h, r, c)?;
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / norm;
            let energy = (h.iter().map(|v| v * v).sum::<f64>() - norm * norm).abs() / (norm * norm);
            worst_round = worst_round.max(err);
            worst_energy = worst_energy.max(energy);
        }
    }
    let mut worst_prob: f64 = 0.0;
    for &(k, m, t) in &[(6usize, 5usize, 100usize), (8, 2, 100), (4, 13, 100), (2, 3, 100), (5, 1, 20), (3, 7, 50)] {
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            let got = detection_probability(s, k, m, t)?;
            let want = exact_detection_probability(s, k, m, t).to_f64().expect("representable");
            worst_prob = worst_prob.max((got - want).abs());
        }
    }
    let ok = worst_round <= 1e-9 && worst_energy <= 1e-9 && worst_prob <= 1e-12;
    Ok((
        ok,
        format!("haar roundtrip {worst_round:.2e}, energy {worst_energy:.2e}, detection_probability vs exact {worst_prob:.2e}"),
    ))
}

fn parallel_scaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let fps: Vec<Fingerprint> = (0..100_000).map(|i| random_fingerprint(&mut rng, 8192, 100, i)).collect();
    let mapping = gen_hash_mappings(8192, 100, 8, 1)?;
    let time = |w: usize| -> quakescan::Result<f64> {
        let clock = Instant::now();
        minmax_signatures_with_workers(&fps, &mapping, w)?;
        Ok(clock.elapsed().as_secs_f64())
    };
    time(1)?;
    let one = time(1)?;
    let four = time(4)?;
    let speedup = one / four;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    Ok((
        speedup >= 3.0,
        format!(
            "1 worker {:.0} fp/s, 4 workers {:.0} fp/s, speedup {speedup:.2}x on {cores} available core(s)",
            fps.len() as f64 / one,
            fps.len() as f64 / four
        ),
    ))
}

fn main() {
    let mut results = Vec::new();
    check(&mut results, 1, "S-curve fidelity", scurve_fidelity);
    check(&mut results, 2, "partition identity", partition_identity);
    check(&mut results, 3, "Min-Max unbiasedness", minmax_unbiased);
    check(&mut results, 4, "blocked = naive signatures", blocked_equals_naive);
    check(&mut results, 5, "MAD sampling accuracy", mad_sampling);
    check(&mut results, 6, "selectivity vs k", selectivity_vs_k);
    check(&mut results, 7, "occurrence filter", occurrence_filter);
    check(&mut results, 8, "alignment oracles", alignment_oracles);
    check(&mut results, 9, "inter-event-time invariance", inter_event_invariance);
    check(&mut results, 10, "end-to-end recall", end_to_end_recall);
    check(&mut results, 11, "numeric kernels", numeric_kernels);
    check(&mut results, 12, "parallel scaling", parallel_scaling);
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
