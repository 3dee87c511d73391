//! Seeded synthetic volume-price windows drawn from known models.
//!
//! Randomness contract: window `w` of a spec with seed `seed` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `w`. Streams are
//! independent, so windows can be generated in any order or in parallel
//! and still produce identical output.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Model, ModelKind, ModelParams};
use crate::empirical::snapshot::{format_timestamp, parse_timestamp};
use crate::empirical::{write_snapshots, WindowSnapshot, MIN_SAMPLES};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_110_127;
pub const DEFAULT_START: &str = "2011-01-27T14:30:00Z";
pub const SNAPSHOT_FILE: &str = "snapshots.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub kind: ModelKind,
    pub params: ModelParams,
}

/// Description of a synthetic stream. Either `kind` + `params` (constant
/// generator) or a per-window `schedule` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<ScheduleEntry>>,
    pub windows: usize,
    pub samples_per_window: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start: String,
    #[serde(default = "default_window_minutes")]
    pub window_minutes: u32,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_start() -> String {
    DEFAULT_START.to_string()
}

fn default_window_minutes() -> u32 {
    10
}

impl SynthSpec {
    pub fn constant(
        kind: ModelKind,
        params: ModelParams,
        windows: usize,
        samples_per_window: usize,
        seed: u64,
    ) -> Self {
        SynthSpec {
            kind: Some(kind),
            params: Some(params),
            schedule: None,
            windows,
            samples_per_window,
            seed,
            start: default_start(),
            window_minutes: default_window_minutes(),
        }
    }

    pub fn scheduled(schedule: Vec<ScheduleEntry>, samples_per_window: usize, seed: u64) -> Self {
        SynthSpec {
            kind: None,
            params: None,
            windows: schedule.len(),
            schedule: Some(schedule),
            samples_per_window,
            seed,
            start: default_start(),
            window_minutes: default_window_minutes(),
        }
    }

    /// Validates the spec and expands it to one entry per window.
    pub fn entries(&self) -> Result<Vec<ScheduleEntry>> {
        if self.windows == 0 {
            return Err(Error::Config("windows must be at least 1".into()));
        }
        if self.samples_per_window < MIN_SAMPLES {
            return Err(Error::Config(format!(
                "samples_per_window must be at least {MIN_SAMPLES}"
            )));
        }
        if self.window_minutes == 0 {
            return Err(Error::Config("window_minutes must be at least 1".into()));
        }
        let entries = match (&self.schedule, self.kind, self.params) {
            (Some(schedule), _, _) => {
                if schedule.len() != self.windows {
                    return Err(Error::ScheduleMismatch {
                        windows: self.windows,
                        schedule: schedule.len(),
                    });
                }
                schedule.clone()
            }
            (None, Some(kind), Some(params)) => vec![ScheduleEntry { kind, params }; self.windows],
            _ => {
                return Err(Error::Config(
                    "spec needs either `schedule` or both `kind` and `params`".into(),
                ))
            }
        };
        for e in &entries {
            Model::new(e.kind, e.params)?;
        }
        Ok(entries)
    }

    fn start_time(&self) -> Result<DateTime<Utc>> {
        let t = parse_timestamp(&self.start).ok_or_else(|| {
            Error::Config(format!(
                "bad start {:?}, expected YYYY-MM-DDTHH:MM:SSZ",
                self.start
            ))
        })?;
        let width = i64::from(self.window_minutes) * 60;
        let aligned = t.timestamp().div_euclid(width) * width;
        Ok(DateTime::from_timestamp(aligned, 0).expect("aligned start is in range"))
    }
}

pub fn load_spec(path: &Path) -> Result<SynthSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// The RNG for window `window` of a stream seeded with `seed`.
pub fn window_rng(seed: u64, window: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(window);
    rng
}

/// Draws `n` values from `kind(params)` using stream 0 of `seed`.
pub fn sample(kind: ModelKind, params: ModelParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    let model = Model::new(kind, params)?;
    Ok(sample_from(&model, n, &mut window_rng(seed, 0)))
}

/// Inverse-transform draws: Weibull by its closed-form inverse, log-normal
/// by exponentiating a Gaussian draw, the gamma family by bisection on the
/// CDF.
pub fn sample_from<R: Rng + ?Sized>(model: &Model, n: usize, rng: &mut R) -> Vec<f64> {
    let ModelParams { phi, theta } = model.params();
    (0..n)
        .map(|_| match model.kind() {
            ModelKind::LogNormal => {
                let z: f64 = rng.sample(StandardNormal);
                (phi + theta * z).exp()
            }
            _ => {
                let u: f64 = rng.sample(Open01);
                model
                    .quantile(u)
                    .expect("Open01 draws lie strictly inside (0, 1)")
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub window: usize,
    pub window_start: String,
    pub kind: ModelKind,
    pub params: ModelParams,
}

/// True generating model per window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub window_minutes: u32,
    pub samples_per_window: usize,
    pub windows: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub windows: Vec<WindowSnapshot>,
    pub manifest: Manifest,
}

pub fn generate(spec: &SynthSpec) -> Result<Synthesized> {
    let entries = spec.entries()?;
    let start = spec.start_time()?;
    let step = Duration::minutes(i64::from(spec.window_minutes));

    let windows: Vec<WindowSnapshot> = entries
        .par_iter()
        .enumerate()
        .map(|(w, e)| {
            let model = Model::new(e.kind, e.params).expect("validated by entries()");
            let mut rng = window_rng(spec.seed, w as u64);
            WindowSnapshot {
                window_start: start + step * w as i32,
                samples: sample_from(&model, spec.samples_per_window, &mut rng),
            }
        })
        .collect();

    let manifest = Manifest {
        seed: spec.seed,
        window_minutes: spec.window_minutes,
        samples_per_window: spec.samples_per_window,
        windows: entries
            .iter()
            .zip(&windows)
            .enumerate()
            .map(|(w, (e, snap))| ManifestEntry {
                window: w,
                window_start: format_timestamp(&snap.window_start),
                kind: e.kind,
                params: e.params,
            })
            .collect(),
    };
    Ok(Synthesized { windows, manifest })
}

/// Writes `snapshots.csv` and `manifest.json` into `dir`.
pub fn write_synth(dir: &Path, synth: &Synthesized) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(SNAPSHOT_FILE);
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_snapshots(BufWriter::new(file), &synth.windows).map_err(|e| Error::io(&csv_path, e))?;

    let manifest_path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&synth.manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))
}
