//! Bounded-memory external sort of triplets by `(dt, idx1)`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::slice::ParallelSliceMut;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::lsh_search::Triplet;

const RECORD: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SortConfig {
    /// In-memory run buffer in bytes; inputs larger than this spill to sorted runs on disk.
    pub run_bytes: usize,
    /// Maximum number of runs merged at once.
    pub fan_in: usize,
    pub tmp_dir: Option<PathBuf>,
}

impl Default for SortConfig {
    fn default() -> Self {
        Self { run_bytes: 256 << 20, fan_in: 64, tmp_dir: None }
    }
}

impl SortConfig {
    pub fn run_capacity(&self) -> usize {
        (self.run_bytes / std::mem::size_of::<Triplet>()).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fan_in < 2 {
            return param(format!("sort fan_in must be at least 2, got {}", self.fan_in));
        }
        Ok(())
    }
}

fn key(t: &Triplet) -> (u64, u64) {
    (t.dt, t.idx1)
}

fn write_run(path: &Path, items: &[Triplet]) -> Result<()> {
    let mut w = BufWriter::with_capacity(1 << 16, File::create(path)?);
    for t in items {
        w.write_all(&t.dt.to_le_bytes())?;
        w.write_all(&t.idx1.to_le_bytes())?;
        w.write_all(&t.sim.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

struct RunReader(BufReader<File>);

impl RunReader {
    fn open(path: &Path) -> Result<Self> {
        Ok(Self(BufReader::with_capacity(1 << 16, File::open(path)?)))
    }

    fn next(&mut self) -> Result<Option<Triplet>> {
        let mut rec = [0u8; RECORD];
        match self.0.read_exact(&mut rec) {
            Ok(()) => Ok(Some(Triplet {
                dt: u64::from_le_bytes(rec[0..8].try_into().unwrap()),
                idx1: u64::from_le_bytes(rec[8..16].try_into().unwrap()),
                sim: u32::from_le_bytes(rec[16..20].try_into().unwrap()),
            })),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}

enum Source {
    Memory(std::vec::IntoIter<Triplet>),
    Runs { readers: Vec<RunReader>, heap: BinaryHeap<Reverse<((u64, u64), u32, usize)>> },
}

/// Triplets in `(dt, idx1, sim)` order, from memory or merged from spilled runs.
pub struct SortedStream {
    source: Source,
    _dir: Option<tempfile::TempDir>,
    pub runs: usize,
}

impl SortedStream {
    pub fn next_triplet(&mut self) -> Result<Option<Triplet>> {
        match &mut self.source {
            Source::Memory(it) => Ok(it.next()),
            Source::Runs { readers, heap } => {
                let Some(Reverse(((dt, idx1), sim, run))) = heap.pop() else { return Ok(None) };
                if let Some(t) = readers[run].next()? {
                    heap.push(Reverse((key(&t), t.sim, run)));
                }
                Ok(Some(Triplet { dt, idx1, sim }))
            }
        }
    }
}

impl Iterator for SortedStream {
    type Item = Result<Triplet>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_triplet().transpose()
    }
}

fn merge_into(paths: &[PathBuf], out: &Path) -> Result<()> {
    let mut stream = open_merge(paths)?;
    let mut w = BufWriter::with_capacity(1 << 16, File::create(out)?);
    while let Some(t) = stream.next_triplet()? {
        w.write_all(&t.dt.to_le_bytes())?;
        w.write_all(&t.idx1.to_le_bytes())?;
        w.write_all(&t.sim.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn open_merge(paths: &[PathBuf]) -> Result<SortedStream> {
    let mut readers = paths.iter().map(|p| RunReader::open(p)).collect::<Result<Vec<_>>>()?;
    let mut heap = BinaryHeap::with_capacity(readers.len());
    for (i, r) in readers.iter_mut().enumerate() {
        if let Some(t) = r.next()? {
            heap.push(Reverse((key(&t), t.sim, i)));
        }
    }
    Ok(SortedStream { source: Source::Runs { readers, heap }, _dir: None, runs: paths.len() })
}

/// Sorts an arbitrarily long triplet stream holding at most `run_capacity` triplets in memory.
pub fn external_sort(input: impl Iterator<Item = Result<Triplet>>, cfg: &SortConfig) -> Result<SortedStream> {
    cfg.validate()?;
    let cap = cfg.run_capacity();
    let mut buf = Vec::with_capacity(cap.min(1 << 20));
    let mut dir: Option<tempfile::TempDir> = None;
    let mut runs: Vec<PathBuf> = Vec::new();
    let mut input = input.peekable();
    loop {
        buf.clear();
        while buf.len() < cap {
            match input.next() {
                Some(t) => buf.push(t?),
                None => break,
            }
        }
        let done = input.peek().is_none();
        if runs.is_empty() && done {
            buf.par_sort_unstable();
            let items = std::mem::take(&mut buf);
            return Ok(SortedStream { source: Source::Memory(items.into_iter()), _dir: None, runs: 1 });
        }
        if !buf.is_empty() {
            buf.par_sort_unstable();
            let d = match &dir {
                Some(d) => d,
                None => dir.insert(match &cfg.tmp_dir {
                    Some(p) => tempfile::tempdir_in(p)?,
                    None => tempfile::tempdir()?,
                }),
            };
            let path = d.path().join(format!("run{:06}", runs.len()));
            write_run(&path, &buf)?;
            runs.push(path);
        }
        if done {
            break;
        }
    }
    let d = dir.ok_or_else(|| Error::Invariant("external sort spilled without a directory".into()))?;
    let mut level = 0;
    while runs.len() > cfg.fan_in {
        let mut next = Vec::new();
        for (i, chunk) in runs.chunks(cfg.fan_in).enumerate() {
            let path = d.path().join(format!("merge{level:03}_{i:06}"));
            merge_into(chunk, &path)?;
            for p in chunk {
                std::fs::remove_file(p)?;
            }
            next.push(path);
        }
        runs = next;
        level += 1;
    }
    let mut stream = open_merge(&runs)?;
    stream._dir = Some(d);
    Ok(stream)
}
