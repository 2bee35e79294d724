//! `quakescan`: reoccurring-event detection over continuous waveforms.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use quakescan_cli::config::{self, Loaded};
use quakescan_cli::error::exit_code;
use quakescan_cli::{stages, tools};

#[derive(Parser)]
#[command(name = "quakescan", version, about = "Fingerprint, search and align continuous waveforms for repeating events")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the parallel stages.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for MAD sampling, hash mappings and synthesis.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output location (a directory, or a file prefix for `spectrogram`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Selection {
    #[arg(long)]
    station: Option<String>,
    #[arg(long)]
    channel: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic waveforms and their injection log.
    Synth,
    /// Spectrogram CSV and SVG of a waveform section.
    Spectrogram {
        /// Waveform base path (without `.f32le` / `.json`).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
        /// Section length in seconds; defaults to the rest of the series.
        #[arg(long)]
        window: Option<f64>,
    },
    /// Fingerprint files for the configured channels.
    Fingerprint(Selection),
    /// Triplet files and search statistics from fingerprint files.
    Search(Selection),
    /// Detection report from triplet files.
    Align,
    /// Fingerprint, search and align in sequence.
    Detect,
    /// Experiments on synthetic data.
    Bench {
        #[command(subcommand)]
        which: BenchCommand,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Empirical report rate against the analytic S-curve.
    Scurve {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// End-to-end recall on paired synthetic events.
    Eval,
    /// Cumulative optimisation variants.
    Factors,
}

fn load(g: &Global, with_out: bool) -> Result<Loaded> {
    Ok(config::load(g.config.as_deref(), g.seed, if with_out { g.out.clone() } else { None })?)
}

fn fingerprint_all(cfg: &Loaded, sel: &Selection) -> Result<()> {
    for c in stages::channels(cfg, sel.station.as_deref(), sel.channel.as_deref())? {
        let clock = Instant::now();
        let n = stages::fingerprint(cfg, &c)?;
        eprintln!("fingerprint {}.{}: {n} fingerprints in {:.2} s", c.station, c.channel, clock.elapsed().as_secs_f64());
    }
    Ok(())
}

fn search_all(cfg: &Loaded, sel: &Selection) -> Result<()> {
    for c in stages::channels(cfg, sel.station.as_deref(), sel.channel.as_deref())? {
        let clock = Instant::now();
        let n = stages::search(cfg, &c)?;
        eprintln!("search {}.{}: {n} triplets in {:.2} s", c.station, c.channel, clock.elapsed().as_secs_f64());
    }
    Ok(())
}

fn align(cfg: &Loaded) -> Result<()> {
    let clock = Instant::now();
    let s = stages::align(cfg)?;
    eprintln!(
        "align: {} station events, {} detections in {:.2} s -> {}",
        s.station_pairs,
        s.detection_count,
        clock.elapsed().as_secs_f64(),
        cfg.out_dir().join("detections.csv").display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Spectrogram { input, offset, window } => {
            let out = g.out.clone().unwrap_or_else(|| PathBuf::from("spectrogram"));
            let csv = tools::spectrogram(input, *offset, *window, &out)?;
            eprintln!("spectrogram -> {}", csv.display());
            Ok(())
        }
        Command::Synth => {
            let cfg = load(g, false)?;
            let bases = tools::synth(&cfg, g.out.as_deref())?;
            eprintln!("synth: {} waveforms", bases.len());
            Ok(())
        }
        cmd => {
            let cfg = load(g, true)?;
            let workers = g.workers.or(cfg.config.workers);
            quakescan::pool::with_workers(workers, || dispatch(cmd, &cfg))?
        }
    }
}

fn dispatch(cmd: &Command, cfg: &Loaded) -> Result<()> {
    let all = Selection { station: None, channel: None };
    match cmd {
        Command::Fingerprint(sel) => fingerprint_all(cfg, sel),
        Command::Search(sel) => search_all(cfg, sel),
        Command::Align => align(cfg),
        Command::Detect => {
            fingerprint_all(cfg, &all)?;
            search_all(cfg, &all)?;
            align(cfg)
        }
        Command::Bench { which } => match which {
            BenchCommand::Scurve { trials } => {
                let csv = tools::bench_scurve(cfg, *trials)?;
                eprintln!("bench scurve -> {}", csv.display());
                Ok(())
            }
            BenchCommand::Eval => {
                let r = tools::bench_eval(cfg)?;
                for v in &r.variants {
                    eprintln!("bench eval: recall {:.2}, false detections {}", v.recall, v.false_positives);
                }
                Ok(())
            }
            BenchCommand::Factors => {
                let r = tools::bench_factors(cfg)?;
                for v in &r.variants {
                    eprintln!("bench factors {}: recall {:.2}, triplets {}", v.name, v.recall, v.triplets);
                }
                Ok(())
            }
        },
        Command::Synth | Command::Spectrogram { .. } => unreachable!("handled before the worker pool"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
