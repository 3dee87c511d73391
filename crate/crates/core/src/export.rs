//! Run artifacts: parameter time series, histograms of relative errors and
//! distances, per-window rankings and `summary.json`.
//!
//! Every float is written with 17 significant digits (see
//! [`crate::format_float`]) so the tables re-read to identical values.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::distributions::{ModelKind, ModelParams};
use crate::empirical::snapshot::{format_timestamp, parse_timestamp};
use crate::fitting::FitResult;
use crate::format_float;
use crate::pipeline::{RunOutput, RunSummary, WindowStatus};
use crate::ranking::{RankEntry, RankedWindow, Variant};
use crate::{Error, Result};

pub const DEFAULT_HIST_BINS: usize = 64;
pub const SUMMARY_FILE: &str = "summary.json";

pub fn params_file(kind: ModelKind) -> String {
    format!("params_{}.csv", kind.name())
}

pub fn errors_file(kind: ModelKind) -> String {
    format!("errors_{}.csv", kind.name())
}

pub fn dist_file(v: Variant) -> String {
    format!("dist_{}.csv", v.name())
}

pub fn ranks_file(v: Variant) -> String {
    format!("ranks_{}.csv", v.name())
}

/// Equal-width histogram over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Non-finite values are skipped. When every value is the same the range
    /// is widened by ±0.5 (relative, or absolute around zero) so they all
    /// fall into one bin.
    pub fn from_values(values: &[f64], bins: usize) -> Histogram {
        let bins = bins.max(1);
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return Histogram {
                lo: 0.0,
                hi: 0.0,
                counts: vec![0; bins],
            };
        }
        let mut lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            let half = 0.5 * lo.abs().max(1.0);
            lo -= half;
            hi += half;
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0; bins];
        for v in finite {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Histogram { lo, hi, counts }
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + width * i as f64, self.lo + width * (i + 1) as f64)
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<fs::File>>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Writes every artifact of a run into `dir`, creating it if needed.
pub fn write_run(
    dir: &Path,
    output: &RunOutput,
    summary: &RunSummary,
    hist_bins: usize,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    for kind in ModelKind::ALL {
        let fits: Vec<(DateTime<Utc>, &FitResult)> = output
            .windows
            .iter()
            .flat_map(|w| w.fits.iter().map(move |f| (w.window_start, f)))
            .filter(|(_, f)| f.kind == kind)
            .collect();
        write_params(&dir.join(params_file(kind)), &fits)?;

        let converged: Vec<&FitResult> = fits
            .iter()
            .map(|(_, f)| *f)
            .filter(|f| f.converged)
            .collect();
        let phi: Vec<f64> = converged.iter().map(|f| f.rel_err_phi).collect();
        let theta: Vec<f64> = converged.iter().map(|f| f.rel_err_theta).collect();
        write_histograms(
            &dir.join(errors_file(kind)),
            "quantity",
            &[
                ("rel_err_phi", Histogram::from_values(&phi, hist_bins)),
                ("rel_err_theta", Histogram::from_values(&theta, hist_bins)),
            ],
        )?;
    }

    for variant in summary.rankings.iter().map(|r| r.variant) {
        let Some(table) = output.table(variant) else {
            continue;
        };
        let hists: Vec<(&str, Histogram)> = ModelKind::ALL
            .iter()
            .map(|&kind| {
                let values: Vec<f64> = table
                    .windows
                    .iter()
                    .map(|w| {
                        let d = w.distance_of(kind);
                        match variant {
                            Variant::Standard => d,
                            Variant::Tail => d.abs(),
                        }
                    })
                    .collect();
                (kind.name(), Histogram::from_values(&values, hist_bins))
            })
            .collect();
        write_histograms(&dir.join(dist_file(variant)), "model", &hists)?;
        write_ranks(&dir.join(ranks_file(variant)), &table.windows)?;
    }

    let path = dir.join(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    debug_assert!(output
        .windows
        .iter()
        .all(|w| w.status != WindowStatus::Fitted || w.reports.len() == 4));
    Ok(())
}

const PARAMS_HEADER: [&str; 8] = [
    "window_start",
    "phi",
    "theta",
    "rel_err_phi",
    "rel_err_theta",
    "sse",
    "n_eval",
    "converged",
];

fn write_params(path: &Path, fits: &[(DateTime<Utc>, &FitResult)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(PARAMS_HEADER)
        .map_err(|e| csv_err(path, e))?;
    for (t, f) in fits {
        w.write_record([
            format_timestamp(t),
            format_float(f.params.phi),
            format_float(f.params.theta),
            format_float(f.rel_err_phi),
            format_float(f.rel_err_theta),
            format_float(f.sse),
            f.n_eval.to_string(),
            f.converged.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_histograms(path: &Path, label: &str, hists: &[(&str, Histogram)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([label, "bin", "left", "right", "count"])
        .map_err(|e| csv_err(path, e))?;
    for (name, h) in hists {
        for (i, c) in h.counts.iter().enumerate() {
            let (l, r) = h.edges(i);
            w.write_record([
                name.to_string(),
                i.to_string(),
                format_float(l),
                format_float(r),
                c.to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn ranks_header() -> Vec<String> {
    let mut h = vec!["window_start".to_string()];
    h.extend(ModelKind::ALL.iter().map(|k| format!("d_{}", k.name())));
    h.extend(ModelKind::ALL.iter().map(|k| format!("rank_{}", k.name())));
    h.push("winner".into());
    h
}

fn write_ranks(path: &Path, windows: &[RankedWindow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(ranks_header())
        .map_err(|e| csv_err(path, e))?;
    for rw in windows {
        let mut row = vec![format_timestamp(&rw.window_start)];
        row.extend(
            ModelKind::ALL
                .iter()
                .map(|&k| format_float(rw.distance_of(k))),
        );
        row.extend(ModelKind::ALL.iter().map(|&k| rw.rank_of(k).to_string()));
        row.push(rw.winner().name().to_string());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row of `params_<model>.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRow {
    pub window_start: DateTime<Utc>,
    pub params: ModelParams,
    pub rel_err_phi: f64,
    pub rel_err_theta: f64,
    pub sse: f64,
    pub n_eval: usize,
    pub converged: bool,
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Reader::from_reader(file))
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    row.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("bad field {i}: {:?}", row.get(i)),
        })
}

fn time_field(row: &csv::StringRecord, line: u64) -> Result<DateTime<Utc>> {
    row.get(0)
        .and_then(parse_timestamp)
        .ok_or_else(|| Error::Parse {
            line,
            message: "bad window_start".into(),
        })
}

pub fn read_params(path: &Path) -> Result<Vec<ParamRow>> {
    let mut rdr = open_csv(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push(ParamRow {
            window_start: time_field(&rec, line)?,
            params: ModelParams::new(field(&rec, 1, line)?, field(&rec, 2, line)?),
            rel_err_phi: field(&rec, 3, line)?,
            rel_err_theta: field(&rec, 4, line)?,
            sse: field(&rec, 5, line)?,
            n_eval: field(&rec, 6, line)?,
            converged: field(&rec, 7, line)?,
        });
    }
    Ok(rows)
}

pub fn read_ranks(path: &Path) -> Result<Vec<RankedWindow>> {
    let mut rdr = open_csv(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let window_start = time_field(&rec, line)?;
        let mut entries = Vec::with_capacity(4);
        for kind in ModelKind::ALL {
            entries.push(RankEntry {
                kind,
                distance: field(&rec, 1 + kind.index(), line)?,
                rank: field(&rec, 5 + kind.index(), line)?,
            });
        }
        entries.sort_by_key(|e| e.rank);
        out.push(RankedWindow {
            window_start,
            entries,
        });
    }
    Ok(out)
}

pub fn read_summary(dir: &Path) -> Result<RunSummary> {
    let path: PathBuf = dir.join(SUMMARY_FILE);
    if !path.exists() {
        return Err(Error::MissingArtifact(path));
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path, source })
}
