//! Triplet files.
//!
//! Binary, little-endian, written as a stream:
//!
//! ```text
//! magic        8 bytes  "QSTRIPL1"
//! config_hash  u64
//! tables       u32
//! k            u32
//! m            u32
//! station      u16 length + UTF-8
//! channel      u16 length + UTF-8
//! { dt u64, idx1 u64, sim u32 } until end of file
//! ```
//!
//! CSV: one `# quakescan-triplets key=value ...` line carrying the same header fields, then
//! `dt,idx1,sim` and one row per triplet.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Triplet;
use crate::codec::{put_string, put_u32, put_u64, Reader};
use crate::error::{Error, Result};

pub const TRIPLET_MAGIC: &[u8; 8] = b"QSTRIPL1";
const RECORD: usize = 20;
const CSV_TAG: &str = "# quakescan-triplets";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TripletHeader {
    pub config_hash: u64,
    pub tables: u32,
    pub k: u32,
    pub m: u32,
    pub station: String,
    pub channel: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripletFormat {
    Binary,
    Csv,
}

impl TripletFormat {
    /// CSV for `.csv` paths, binary otherwise.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Binary,
        }
    }
}

fn check(t: &Triplet, what: &str) -> Result<()> {
    if t.dt == 0 || t.sim == 0 || t.idx1.checked_add(t.dt).is_none() {
        return Err(Error::CorruptInput(format!("{what}: invalid triplet {t:?}")));
    }
    Ok(())
}

fn header_bytes(h: &TripletHeader) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(64);
    out.extend_from_slice(TRIPLET_MAGIC);
    put_u64(&mut out, h.config_hash);
    put_u32(&mut out, h.tables);
    put_u32(&mut out, h.k);
    put_u32(&mut out, h.m);
    put_string(&mut out, &h.station)?;
    put_string(&mut out, &h.channel)?;
    Ok(out)
}

fn csv_header_line(h: &TripletHeader) -> Result<String> {
    for id in [&h.station, &h.channel] {
        if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == '=' || c == ',') {
            return Err(Error::Parameter(format!("identifier {id:?} cannot be written to a CSV header")));
        }
    }
    Ok(format!(
        "{CSV_TAG} config_hash={:016x} tables={} k={} m={} station={} channel={}\n",
        h.config_hash, h.tables, h.k, h.m, h.station, h.channel
    ))
}

fn parse_csv_header(line: &str) -> Result<TripletHeader> {
    let rest = line
        .trim_end()
        .strip_prefix(CSV_TAG)
        .ok_or_else(|| Error::Format("triplet CSV: missing header line".into()))?;
    let mut h = TripletHeader::default();
    let mut seen = 0u8;
    let bad = |k: &str| Error::Format(format!("triplet CSV: bad header field {k}"));
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(kv))?;
        let bit = match k {
            "config_hash" => {
                h.config_hash = u64::from_str_radix(v, 16).map_err(|_| bad(k))?;
                1
            }
            "tables" => {
                h.tables = v.parse().map_err(|_| bad(k))?;
                2
            }
            "k" => {
                h.k = v.parse().map_err(|_| bad(k))?;
                4
            }
            "m" => {
                h.m = v.parse().map_err(|_| bad(k))?;
                8
            }
            "station" => {
                h.station = v.to_string();
                16
            }
            "channel" => {
                h.channel = v.to_string();
                32
            }
            _ => return Err(bad(k)),
        };
        if seen & bit != 0 {
            return Err(bad(k));
        }
        seen |= bit;
    }
    if seen != 63 {
        return Err(Error::Format("triplet CSV: incomplete header".into()));
    }
    Ok(h)
}

fn parse_csv_row(line: &str, lineno: usize) -> Result<Triplet> {
    let bad = || Error::CorruptInput(format!("triplet CSV line {lineno}: malformed row {line:?}"));
    let mut it = line.trim_end().split(',');
    let mut field = || it.next().ok_or_else(bad);
    let dt = field()?.parse().map_err(|_| bad())?;
    let idx1 = field()?.parse().map_err(|_| bad())?;
    let sim = field()?.parse().map_err(|_| bad())?;
    if it.next().is_some() {
        return Err(bad());
    }
    let t = Triplet { dt, idx1, sim };
    check(&t, "triplet CSV")?;
    Ok(t)
}

/// Streaming writer for either format.
pub struct TripletWriter {
    out: BufWriter<File>,
    format: TripletFormat,
    count: u64,
}

impl TripletWriter {
    pub fn create(path: &Path, header: &TripletHeader, format: TripletFormat) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        match format {
            TripletFormat::Binary => out.write_all(&header_bytes(header)?)?,
            TripletFormat::Csv => {
                out.write_all(csv_header_line(header)?.as_bytes())?;
                out.write_all(b"dt,idx1,sim\n")?;
            }
        }
        Ok(Self { out, format, count: 0 })
    }

    pub fn write(&mut self, t: &Triplet) -> Result<()> {
        match self.format {
            TripletFormat::Binary => {
                self.out.write_all(&t.dt.to_le_bytes())?;
                self.out.write_all(&t.idx1.to_le_bytes())?;
                self.out.write_all(&t.sim.to_le_bytes())?;
            }
            TripletFormat::Csv => writeln!(self.out, "{},{},{}", t.dt, t.idx1, t.sim)?,
        }
        self.count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<u64> {
        self.out.flush()?;
        Ok(self.count)
    }
}

pub fn write_triplets(path: &Path, header: &TripletHeader, triplets: &[Triplet]) -> Result<()> {
    let mut w = TripletWriter::create(path, header, TripletFormat::for_path(path))?;
    for t in triplets {
        w.write(t)?;
    }
    w.finish()?;
    Ok(())
}

enum Body {
    Binary(Box<dyn Read + Send>),
    Csv(Box<dyn BufRead + Send>, usize),
}

/// Streaming reader; the format is detected from the first bytes.
pub struct TripletReader {
    pub header: TripletHeader,
    body: Body,
    line: String,
}

impl TripletReader {
    pub fn open(path: &Path) -> Result<Self> {
        Self::new(BufReader::with_capacity(1 << 16, File::open(path)?))
    }

    pub fn new(mut input: impl BufRead + Send + 'static) -> Result<Self> {
        let peek = input.fill_buf()?;
        if peek.first() == Some(&b'#') {
            let mut line = String::new();
            input.read_line(&mut line).map_err(|_| Error::Format("triplet CSV: header is not UTF-8".into()))?;
            let header = parse_csv_header(&line)?;
            line.clear();
            input.read_line(&mut line).map_err(|_| Error::Format("triplet CSV: column line is not UTF-8".into()))?;
            if line.trim_end() != "dt,idx1,sim" {
                return Err(Error::Format("triplet CSV: expected column line dt,idx1,sim".into()));
            }
            return Ok(Self { header, body: Body::Csv(Box::new(input), 2), line });
        }
        let mut fixed = [0u8; 8 + 8 + 12 + 2];
        read_exact_or(&mut input, &mut fixed, Error::Format("triplet file: missing header".into()))?;
        let mut r = Reader::new(&fixed, "triplet file");
        r.magic(TRIPLET_MAGIC)?;
        let config_hash = r.u64()?;
        let (tables, k, m) = (r.u32()?, r.u32()?, r.u32()?);
        let station = read_string(&mut input, r.u16()?)?;
        let mut len = [0u8; 2];
        read_exact_or(&mut input, &mut len, Error::CorruptInput("triplet file: truncated header".into()))?;
        let channel = read_string(&mut input, u16::from_le_bytes(len))?;
        let header = TripletHeader { config_hash, tables, k, m, station, channel };
        Ok(Self { header, body: Body::Binary(Box::new(input)), line: String::new() })
    }

    pub fn next_triplet(&mut self) -> Result<Option<Triplet>> {
        match &mut self.body {
            Body::Binary(input) => {
                let mut rec = [0u8; RECORD];
                let mut got = 0;
                while got < RECORD {
                    match input.read(&mut rec[got..])? {
                        0 if got == 0 => return Ok(None),
                        0 => return Err(Error::CorruptInput(format!("triplet file: {got}-byte partial record"))),
                        n => got += n,
                    }
                }
                let t = Triplet {
                    dt: u64::from_le_bytes(rec[0..8].try_into().unwrap()),
                    idx1: u64::from_le_bytes(rec[8..16].try_into().unwrap()),
                    sim: u32::from_le_bytes(rec[16..20].try_into().unwrap()),
                };
                check(&t, "triplet file")?;
                Ok(Some(t))
            }
            Body::Csv(input, lineno) => loop {
                self.line.clear();
                *lineno += 1;
                if input
                    .read_line(&mut self.line)
                    .map_err(|_| Error::CorruptInput(format!("triplet CSV line {lineno}: not UTF-8")))?
                    == 0
                {
                    return Ok(None);
                }
                if self.line.trim().is_empty() {
                    continue;
                }
                return parse_csv_row(&self.line, *lineno).map(Some);
            },
        }
    }

    pub fn read_all(mut self) -> Result<(TripletHeader, Vec<Triplet>)> {
        let mut out = Vec::new();
        while let Some(t) = self.next_triplet()? {
            out.push(t);
        }
        Ok((self.header, out))
    }
}

impl Iterator for TripletReader {
    type Item = Result<Triplet>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_triplet().transpose()
    }
}

fn read_exact_or(input: &mut impl Read, buf: &mut [u8], err: Error) -> Result<()> {
    let mut got = 0;
    while got < buf.len() {
        match input.read(&mut buf[got..])? {
            0 => return Err(err),
            n => got += n,
        }
    }
    Ok(())
}

fn read_string(input: &mut impl Read, len: u16) -> Result<String> {
    let mut buf = vec![0u8; len as usize];
    read_exact_or(input, &mut buf, Error::CorruptInput("triplet file: truncated header".into()))?;
    String::from_utf8(buf).map_err(|_| Error::Format("triplet file: identifier is not UTF-8".into()))
}

/// Decodes a whole triplet file of either format held in memory.
pub fn decode_triplets(bytes: &[u8]) -> Result<(TripletHeader, Vec<Triplet>)> {
    TripletReader::new(std::io::Cursor::new(bytes.to_vec()))?.read_all()
}

pub fn read_triplets(path: &Path) -> Result<(TripletHeader, Vec<Triplet>)> {
    TripletReader::open(path)?.read_all()
}

/// In-memory binary encoding, used for tests and corpus seeds.
pub fn encode_triplets(header: &TripletHeader, triplets: &[Triplet], format: TripletFormat) -> Result<Vec<u8>> {
    match format {
        TripletFormat::Binary => {
            let mut out = header_bytes(header)?;
            for t in triplets {
                put_u64(&mut out, t.dt);
                put_u64(&mut out, t.idx1);
                put_u32(&mut out, t.sim);
            }
            Ok(out)
        }
        TripletFormat::Csv => {
            let mut s = csv_header_line(header)?;
            s.push_str("dt,idx1,sim\n");
            for t in triplets {
                s.push_str(&format!("{},{},{}\n", t.dt, t.idx1, t.sim));
            }
            Ok(s.into_bytes())
        }
    }
}
