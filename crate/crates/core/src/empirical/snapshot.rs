use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use flate2::read::MultiGzDecoder;
use log::{debug, warn};

use super::volume_price;
use crate::{Error, Result};

pub(crate) const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// One row of the snapshot CSV (`timestamp,ticker,price,volume`).
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub timestamp: DateTime<Utc>,
    pub ticker: String,
    pub price: f64,
    pub volume: u64,
}

/// All volume-prices observed in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSnapshot {
    pub window_start: DateTime<Utc>,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSnapshots {
    /// Chronological.
    pub windows: Vec<WindowSnapshot>,
    pub records: usize,
    pub dropped_zero_volume: usize,
    pub dropped_bad_price: usize,
}

pub(crate) fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT)
        .ok()
        .map(|t| t.and_utc())
}

pub(crate) fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

/// Reads a snapshot CSV (gzip when the name ends in `.gz`) and groups
/// records into `window_minutes`-wide windows.
pub fn load_snapshots(path: &Path, window_minutes: u32) -> Result<LoadedSnapshots> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let gz = path.extension().is_some_and(|e| e == "gz");
    let reader: Box<dyn Read> = if gz {
        Box::new(MultiGzDecoder::new(BufReader::new(file)))
    } else {
        Box::new(BufReader::new(file))
    };
    let loaded = read_snapshots(reader, window_minutes).map_err(|e| match e {
        Error::EmptyInput(_) => Error::EmptyInput(path.display().to_string()),
        other => other,
    })?;
    debug!(
        "{}: {} records in {} windows",
        path.display(),
        loaded.records,
        loaded.windows.len()
    );
    Ok(loaded)
}

pub fn read_snapshots<R: Read>(reader: R, window_minutes: u32) -> Result<LoadedSnapshots> {
    if window_minutes == 0 {
        return Err(Error::Config("window_minutes must be at least 1".into()));
    }
    let width_secs = i64::from(window_minutes) * 60;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header_err = |message: String| Error::Parse { line: 1, message };
    let headers = rdr
        .headers()
        .map_err(|e| header_err(e.to_string()))?
        .clone();
    let expected = ["timestamp", "ticker", "price", "volume"];
    if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(header_err(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut groups: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    let mut loaded = LoadedSnapshots {
        windows: Vec::new(),
        records: 0,
        dropped_zero_volume: 0,
        dropped_bad_price: 0,
    };

    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let record = parse_record(&row).map_err(|message| Error::Parse { line, message })?;
        loaded.records += 1;

        if !(record.price > 0.0) {
            loaded.dropped_bad_price += 1;
            continue;
        }
        if record.volume == 0 {
            loaded.dropped_zero_volume += 1;
            continue;
        }
        let s = volume_price(record.price, record.volume as f64)?;
        let key = record.timestamp.timestamp().div_euclid(width_secs);
        groups.entry(key).or_default().push(s);
    }

    if loaded.dropped_zero_volume > 0 || loaded.dropped_bad_price > 0 {
        warn!(
            "dropped {} zero-volume and {} non-positive-price records",
            loaded.dropped_zero_volume, loaded.dropped_bad_price
        );
    }
    if groups.is_empty() {
        return Err(Error::EmptyInput("input".into()));
    }

    loaded.windows = groups
        .into_iter()
        .map(|(key, samples)| WindowSnapshot {
            window_start: DateTime::from_timestamp(key * width_secs, 0)
                .expect("window start comes from a parsed timestamp"),
            samples,
        })
        .collect();
    Ok(loaded)
}

fn parse_record(row: &csv::StringRecord) -> std::result::Result<SnapshotRecord, String> {
    if row.len() != 4 {
        return Err(format!("expected 4 fields, found {}", row.len()));
    }
    let timestamp = parse_timestamp(&row[0])
        .ok_or_else(|| format!("bad timestamp {:?}, expected YYYY-MM-DDTHH:MM:SSZ", &row[0]))?;
    let ticker = row[1].to_string();
    if ticker.is_empty() {
        return Err("empty ticker".into());
    }
    let price: f64 = row[2]
        .parse()
        .map_err(|_| format!("bad price {:?}", &row[2]))?;
    if !price.is_finite() {
        return Err(format!("bad price {:?}", &row[2]));
    }
    let volume: u64 = row[3]
        .parse()
        .map_err(|_| format!("bad volume {:?}, expected a non-negative integer", &row[3]))?;
    Ok(SnapshotRecord {
        timestamp,
        ticker,
        price,
        volume,
    })
}

/// Writes windows in the snapshot CSV format with synthetic tickers
/// `S0001, S0002, ...`, encoding each value as `price = s, volume = 1` so the
/// file reads back to the identical samples.
pub fn write_snapshots<W: Write>(writer: W, windows: &[WindowSnapshot]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["timestamp", "ticker", "price", "volume"])?;
    for w in windows {
        let ts = format_timestamp(&w.window_start);
        for (i, s) in w.samples.iter().enumerate() {
            wtr.write_record([ts.as_str(), &format!("S{:04}", i + 1), &s.to_string(), "1"])?;
        }
    }
    wtr.flush()
}
