use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sort::{external_sort, SortConfig};
use crate::error::{param, Error, Result};
use crate::lsh_search::{Triplet, TripletFormat, TripletHeader, TripletReader, TripletWriter};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombineSummary {
    pub input_rows: u64,
    pub output_rows: u64,
    pub input_sim: u64,
    pub output_sim: u64,
    pub runs: usize,
}

/// Sorts the union of `inputs`, sums `sim` over equal `(dt, idx1)` rows and keeps rows whose
/// summed similarity reaches `threshold`.
pub fn combine_streams<I>(
    inputs: Vec<I>,
    threshold: u32,
    sort: &SortConfig,
    mut emit: impl FnMut(Triplet) -> Result<()>,
) -> Result<CombineSummary>
where
    I: Iterator<Item = Result<Triplet>>,
{
    let mut summary = CombineSummary::default();
    let counted = inputs.into_iter().flatten().inspect(|t| {
        if let Ok(t) = t {
            summary.input_rows += 1;
            summary.input_sim += t.sim as u64;
        }
    });
    let mut stream = external_sort(counted, sort)?;
    let runs = stream.runs;
    let mut out = CombineSummary { runs, ..CombineSummary::default() };
    let mut flush = |cur: Triplet, out: &mut CombineSummary| -> Result<()> {
        if cur.sim >= threshold {
            out.output_rows += 1;
            out.output_sim += cur.sim as u64;
            emit(cur)?;
        }
        Ok(())
    };
    let mut cur: Option<Triplet> = None;
    while let Some(t) = stream.next_triplet()? {
        match &mut cur {
            Some(c) if (c.dt, c.idx1) == (t.dt, t.idx1) => {
                c.sim = c
                    .sim
                    .checked_add(t.sim)
                    .ok_or_else(|| Error::CorruptInput(format!("similarity overflow at dt={} idx1={}", t.dt, t.idx1)))?;
            }
            _ => {
                if let Some(c) = cur.replace(t) {
                    flush(c, &mut out)?;
                }
            }
        }
    }
    if let Some(c) = cur {
        flush(c, &mut out)?;
    }
    drop(stream);
    out.input_rows = summary.input_rows;
    out.input_sim = summary.input_sim;
    Ok(out)
}

/// In-memory convenience form of [`combine_streams`].
pub fn combine_triplets(inputs: Vec<Vec<Triplet>>, threshold: u32, sort: &SortConfig) -> Result<Vec<Triplet>> {
    let mut out = Vec::new();
    combine_streams(inputs.into_iter().map(|v| v.into_iter().map(Ok)).collect(), threshold, sort, |t| {
        out.push(t);
        Ok(())
    })?;
    Ok(out)
}

/// Combines the per-channel triplet files of one station into one sorted file.
pub fn channel_combine(inputs: &[PathBuf], threshold: u32, sort: &SortConfig, out: &Path) -> Result<(TripletHeader, CombineSummary)> {
    if inputs.is_empty() {
        return param("channel_combine needs at least one input file");
    }
    let readers = inputs.iter().map(|p| TripletReader::open(p)).collect::<Result<Vec<_>>>()?;
    let first = readers[0].header.clone();
    for (p, r) in inputs.iter().zip(&readers) {
        let h = &r.header;
        if h.station != first.station || h.config_hash != first.config_hash {
            return Err(Error::Consistency(format!(
                "{} is from station {} / config {:016x}, expected {} / {:016x}",
                p.display(),
                h.station,
                h.config_hash,
                first.station,
                first.config_hash
            )));
        }
    }
    let mut channels: Vec<&str> = readers.iter().map(|r| r.header.channel.as_str()).collect();
    channels.sort_unstable();
    channels.dedup();
    let header = TripletHeader { channel: channels.join("+"), ..first };
    let mut w = TripletWriter::create(out, &header, TripletFormat::for_path(out))?;
    let summary = combine_streams(readers, threshold, sort, |t| w.write(&t))?;
    w.finish()?;
    Ok((header, summary))
}
