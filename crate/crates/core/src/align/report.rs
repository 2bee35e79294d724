//! Detection report.
//!
//! CSV, one detection per row after the header, arrivals in station order:
//!
//! ```text
//! station_count,score,delta_t_s,station_id:arrival1:arrival2,...
//! 2,17,500.412,ST00:100.000:600.000,ST01:103.000:604.000
//! ```
//!
//! Epochs and `delta_t_s` are written with millisecond precision. The JSON summary embeds the
//! full detections, including every member station pair.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::NetworkDetection;
use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "station_count,score,delta_t_s,station_id:arrival1:arrival2,...";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub station_count: usize,
    pub score: u64,
    pub delta_t_s: f64,
    pub arrivals: Vec<(String, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSummary {
    pub config_hash: String,
    pub min_stations: usize,
    pub station_pairs: usize,
    pub detection_count: usize,
    pub detections: Vec<NetworkDetection>,
}

pub fn report_csv(detections: &[NetworkDetection]) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for d in detections {
        s.push_str(&format!("{},{},{:.3}", d.station_count, d.score, d.delta_t_s));
        for a in &d.arrivals {
            s.push_str(&format!(",{}:{:.3}:{:.3}", a.station_id, a.arrival1_epoch_s, a.arrival2_epoch_s));
        }
        s.push('\n');
    }
    s
}

pub fn parse_report_csv(text: &[u8]) -> Result<Vec<ReportRow>> {
    let text = std::str::from_utf8(text).map_err(|_| Error::Format("detection report is not UTF-8".into()))?;
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_HEADER) {
        return Err(Error::Format("detection report: missing header".into()));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let bad = || Error::CorruptInput(format!("detection report row {}: {line:?}", n + 1));
        let mut f = line.split(',');
        let station_count: usize = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let score = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let delta_t_s = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let arrivals = f
            .map(|a| {
                let mut p = a.split(':');
                let st = p.next().filter(|s| !s.is_empty()).ok_or_else(bad)?;
                let a1 = p.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                let a2 = p.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                if p.next().is_some() {
                    return Err(bad());
                }
                Ok((st.to_string(), a1, a2))
            })
            .collect::<Result<Vec<_>>>()?;
        if arrivals.len() != station_count {
            return Err(bad());
        }
        rows.push(ReportRow { station_count, score, delta_t_s, arrivals });
    }
    Ok(rows)
}

pub fn write_report(dir: &Path, summary: &DetectionSummary) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("detections.csv"), report_csv(&summary.detections))?;
    let json = serde_json::to_string_pretty(summary).map_err(|e| Error::Invariant(e.to_string()))?;
    fs::write(dir.join("detections.json"), json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{network_associate, AssociationParams, StationEventPair};

    #[test]
    fn csv_roundtrip() {
        let pairs: Vec<StationEventPair> = ["ST00", "ST01"]
            .iter()
            .enumerate()
            .map(|(i, s)| StationEventPair {
                station_id: s.to_string(),
                event1_epoch_s: 100.0 + 3.0 * i as f64,
                event2_epoch_s: 600.0 + 4.0 * i as f64,
                inter_event_dt_s: 500.0 + i as f64,
                score: 10,
                pair_count: 3,
            })
            .collect();
        let d = network_associate(&pairs, &AssociationParams::default()).unwrap();
        let csv = report_csv(&d);
        assert_eq!(csv.lines().nth(1), Some("2,20,500.500,ST00:100.000:600.000,ST01:103.000:604.000"));
        let rows = parse_report_csv(csv.as_bytes()).unwrap();
        assert_eq!(rows[0].arrivals[1], ("ST01".to_string(), 103.0, 604.0));
        assert!(parse_report_csv(b"nope\n").is_err());
        assert!(parse_report_csv(format!("{REPORT_HEADER}\n3,1,2.0,A:1:2\n").as_bytes()).is_err());
    }
}
