//! Result rows and their CSV encodings.
//!
//! CSVs are RFC-4180 with a mandatory header row; floats carry 17
//! significant digits so a parse reproduces the exact bits. The raw results
//! file holds only run-deterministic columns; per-row wall times go to a
//! separate timings file that is outside the byte-reproducibility contract.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

/// Float formatting used in every CSV: 17 significant digits round-trip
/// through `f64` exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One replication of a two-sample distance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub replication: usize,
    pub stream_a: u64,
    pub stream_b: u64,
    pub value: f64,
    /// Wall time of the replication; reported in timings.csv only.
    pub runtime_ms: f64,
}

/// Per-grid-point aggregate with bound annotations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub mean_w: f64,
    pub stderr: f64,
    pub upper_rate: f64,
    pub upper_rate_poisson: f64,
    pub lower_rate: f64,
    /// Whether the lower bound's finite-n validity condition held at this n.
    pub lower_rate_valid: bool,
}

pub const RAW_HEADER: [&str; 5] = ["n", "replication", "stream_a", "stream_b", "value"];
pub const AGGREGATE_HEADER: [&str; 7] = [
    "n",
    "mean_w",
    "stderr",
    "upper_rate",
    "upper_rate_poisson",
    "lower_rate",
    "lower_rate_valid",
];

pub fn write_raw_csv(out: &mut impl Write, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RAW_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.replication.to_string(),
            r.stream_a.to_string(),
            r.stream_b.to_string(),
            fmt_f64(r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings_csv(out: &mut impl Write, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "replication", "runtime_ms"])?;
    for r in rows {
        w.write_record([r.n.to_string(), r.replication.to_string(), fmt_f64(r.runtime_ms)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv(out: &mut impl Write, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.mean_w),
            fmt_f64(r.stderr),
            fmt_f64(r.upper_rate),
            fmt_f64(r.upper_rate_poisson),
            fmt_f64(r.lower_rate),
            r.lower_rate_valid.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(ResultRow {
            n: parse(&record, 0)?,
            replication: parse(&record, 1)?,
            stream_a: parse(&record, 2)?,
            stream_b: parse(&record, 3)?,
            value: parse(&record, 4)?,
            runtime_ms: f64::NAN,
        });
    }
    Ok(rows)
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(AggregateRow {
            n: parse(&record, 0)?,
            mean_w: parse(&record, 1)?,
            stderr: parse(&record, 2)?,
            upper_rate: parse(&record, 3)?,
            upper_rate_poisson: parse(&record, 4)?,
            lower_rate: parse(&record, 5)?,
            lower_rate_valid: parse(&record, 6)?,
        });
    }
    Ok(rows)
}

fn parse<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let cell = record
        .get(idx)
        .ok_or_else(|| HarnessError::Config(format!("CSV row is missing column {idx}")))?;
    cell.parse()
        .map_err(|e| HarnessError::Config(format!("bad CSV value {cell:?} in column {idx}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_exactly() {
        for v in [0.1, 1.0 / 3.0, 8.2, f64::MIN_POSITIVE, 1e300, -0.0] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn raw_and_aggregate_round_trip() {
        let dir = std::env::temp_dir().join("ppwass_rows_test");
        std::fs::create_dir_all(&dir).unwrap();
        let raw = vec![ResultRow {
            n: 16,
            replication: 3,
            stream_a: 6,
            stream_b: 7,
            value: 0.12345678901234567,
            runtime_ms: 5.0,
        }];
        let raw_path = dir.join("raw.csv");
        let mut buf = Vec::new();
        write_raw_csv(&mut buf, &raw).unwrap();
        std::fs::write(&raw_path, &buf).unwrap();
        let back = read_raw_csv(&raw_path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].value.to_bits(), raw[0].value.to_bits());
        assert_eq!(back[0].stream_b, 7);

        let agg = vec![AggregateRow {
            n: 16,
            mean_w: 0.5,
            stderr: 0.01,
            upper_rate: 0.9,
            upper_rate_poisson: 0.8,
            lower_rate: 1e-3,
            lower_rate_valid: false,
        }];
        let agg_path = dir.join("agg.csv");
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &agg).unwrap();
        std::fs::write(&agg_path, &buf).unwrap();
        let back = read_aggregate_csv(&agg_path).unwrap();
        assert_eq!(back[0].n, 16);
        assert_eq!(back[0].lower_rate.to_bits(), (1e-3f64).to_bits());
        assert!(!back[0].lower_rate_valid);
    }
}
