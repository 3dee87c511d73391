//! End-to-end run: load → per-window empirical distribution → four fits →
//! distances → rankings → exported artifacts.
//!
//! Windows are processed on a bounded rayon pool; results are collected in
//! window order, so the worker count never changes any output.

use std::path::PathBuf;

use chrono::{DateTime, Utc};
use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::ModelKind;
use crate::divergence::{standard_distance, tail_distance, DistanceReport};
use crate::empirical::{
    build_empirical_with_min, load_snapshots, WindowSnapshot, DEFAULT_BINS_PER_DECADE, MIN_SAMPLES,
};
use crate::export::{self, DEFAULT_HIST_BINS};
use crate::fitting::{fit_cdf_with, FitOptions, FitResult, DEFAULT_FIT_SEED};
use crate::ranking::{aggregate, rank_window, RankMatrix, RankedWindow, RankingTable, Variant};
use crate::{Error, Error::Config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantSelection {
    Standard,
    Tail,
    Both,
}

impl VariantSelection {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            VariantSelection::Standard => vec![Variant::Standard],
            VariantSelection::Tail => vec![Variant::Tail],
            VariantSelection::Both => vec![Variant::Standard, Variant::Tail],
        }
    }

    pub fn includes(self, v: Variant) -> bool {
        self.variants().contains(&v)
    }
}

impl std::str::FromStr for VariantSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(VariantSelection::Standard),
            "tail" => Ok(VariantSelection::Tail),
            "both" => Ok(VariantSelection::Both),
            other => Err(Config(format!(
                "unknown variant {other:?} (expected standard, tail or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub window_minutes: u32,
    pub bins_per_decade: usize,
    pub min_samples: usize,
    pub variants: VariantSelection,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
    pub seed: u64,
    pub hist_bins: usize,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            out: out.into(),
            window_minutes: 10,
            bins_per_decade: DEFAULT_BINS_PER_DECADE,
            min_samples: MIN_SAMPLES,
            variants: VariantSelection::Both,
            jobs: None,
            seed: DEFAULT_FIT_SEED,
            hist_bins: DEFAULT_HIST_BINS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_minutes < 1 {
            return Err(Config("window_minutes must be at least 1".into()));
        }
        if self.bins_per_decade < 2 {
            return Err(Config("bins_per_decade must be at least 2".into()));
        }
        if self.min_samples < 2 {
            return Err(Config("min_samples must be at least 2".into()));
        }
        if self.jobs == Some(0) {
            return Err(Config("jobs must be at least 1".into()));
        }
        if self.hist_bins == 0 {
            return Err(Config("hist_bins must be at least 1".into()));
        }
        Ok(())
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions {
            seed: self.seed,
            ..FitOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowStatus {
    Fitted,
    InsufficientSamples,
    Degenerate,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub window_start: DateTime<Utc>,
    pub n_samples: usize,
    pub status: WindowStatus,
    /// One per model in [`ModelKind::ALL`] order once fitting ran.
    pub fits: Vec<FitResult>,
    /// Present only when all four fits converged.
    pub reports: Vec<DistanceReport>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionCounts {
    pub insufficient_samples: usize,
    pub degenerate: usize,
    pub non_converged: usize,
    /// Fitted windows with no usable tail distance for some model.
    pub tail_unavailable: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub windows: Vec<WindowResult>,
    pub standard: Option<RankingTable>,
    pub tail: Option<RankingTable>,
    pub excluded: ExclusionCounts,
}

impl RunOutput {
    pub fn table(&self, v: Variant) -> Option<&RankingTable> {
        match v {
            Variant::Standard => self.standard.as_ref(),
            Variant::Tail => self.tail.as_ref(),
        }
    }

    pub fn fits(&self) -> impl Iterator<Item = &FitResult> {
        self.windows.iter().flat_map(|w| w.fits.iter())
    }

    pub fn reports(&self) -> impl Iterator<Item = &DistanceReport> {
        self.windows.iter().flat_map(|w| w.reports.iter())
    }
}

/// Fits and scores one window.
pub fn process_window(window: &WindowSnapshot, config: &RunConfig) -> WindowResult {
    let mut result = WindowResult {
        window_start: window.window_start,
        n_samples: window.samples.len(),
        status: WindowStatus::Fitted,
        fits: Vec::new(),
        reports: Vec::new(),
    };
    let emp = match build_empirical_with_min(
        &window.samples,
        config.bins_per_decade,
        config.min_samples.max(MIN_SAMPLES),
    ) {
        Ok(emp) => emp,
        Err(Error::InsufficientSamples { .. }) => {
            debug!(
                "{}: {} samples, skipped",
                window.window_start,
                window.samples.len()
            );
            result.status = WindowStatus::InsufficientSamples;
            return result;
        }
        Err(_) => {
            debug!("{}: degenerate sample, skipped", window.window_start);
            result.status = WindowStatus::Degenerate;
            return result;
        }
    };

    let opts = config.fit_options();
    for kind in ModelKind::ALL {
        match fit_cdf_with(kind, &emp, &opts) {
            Ok(fit) => result.fits.push(fit),
            Err(e) => {
                debug!("{}: {kind} fit failed: {e}", window.window_start);
                result.status = WindowStatus::Degenerate;
                return result;
            }
        }
    }
    if result.fits.iter().any(|f| !f.converged) {
        result.status = WindowStatus::NotConverged;
        return result;
    }

    let want_tail = config.variants.includes(Variant::Tail);
    for fit in &result.fits {
        let standard = standard_distance(fit.kind, fit.params, &emp);
        let tail = if want_tail {
            tail_distance(fit.kind, fit.params, &emp).ok()
        } else {
            None
        };
        // the standard distance only fails when the histogram is empty
        let Ok(standard) = standard else {
            result.status = WindowStatus::Degenerate;
            result.reports.clear();
            return result;
        };
        result.reports.push(DistanceReport {
            window_start: window.window_start,
            kind: fit.kind,
            d_standard: standard.value,
            bins_used_standard: standard.bins_used,
            d_tail: tail.map(|d| d.value),
            bins_used_tail: tail.map_or(0, |d| d.bins_used),
        });
    }
    result
}

/// Processes all windows and builds the ranking tables.
pub fn analyze(windows: &[WindowSnapshot], config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = config.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<WindowResult> = pool.install(|| {
        windows
            .par_iter()
            .map(|w| process_window(w, config))
            .collect()
    });

    let mut excluded = ExclusionCounts::default();
    for r in &results {
        match r.status {
            WindowStatus::Fitted => {}
            WindowStatus::InsufficientSamples => excluded.insufficient_samples += 1,
            WindowStatus::Degenerate => excluded.degenerate += 1,
            WindowStatus::NotConverged => excluded.non_converged += 1,
        }
    }

    let mut table_for = |variant: Variant| -> Option<RankingTable> {
        if !config.variants.includes(variant) {
            return None;
        }
        let mut ranked: Vec<RankedWindow> = Vec::new();
        let mut skipped = 0;
        for r in &results {
            if r.status != WindowStatus::Fitted {
                skipped += 1;
                continue;
            }
            match rank_window(&r.reports, variant) {
                Ok(w) => ranked.push(w),
                Err(_) => {
                    skipped += 1;
                    if variant == Variant::Tail {
                        excluded.tail_unavailable += 1;
                    }
                }
            }
        }
        let matrix = aggregate(&ranked).unwrap_or(RankMatrix {
            percent: [[0.0; 4]; 4],
            windows: 0,
        });
        Some(RankingTable {
            variant,
            windows: ranked,
            matrix,
            excluded: skipped,
        })
    };
    let standard = table_for(Variant::Standard);
    let tail = table_for(Variant::Tail);

    Ok(RunOutput {
        windows: results,
        standard,
        tail,
        excluded,
    })
}

/// Metadata written to `summary.json`. Holds nothing that depends on the
/// worker count or output location, so repeated runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tool: String,
    pub version: String,
    pub config: ConfigEcho,
    pub records: usize,
    pub dropped_zero_volume: usize,
    pub dropped_bad_price: usize,
    pub windows_total: usize,
    pub windows_fitted: usize,
    pub excluded: ExclusionCounts,
    pub rankings: Vec<RankingSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: String,
    pub window_minutes: u32,
    pub bins_per_decade: usize,
    pub min_samples: usize,
    pub variant: VariantSelection,
    pub seed: u64,
    pub hist_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingSummary {
    pub variant: Variant,
    pub windows_ranked: usize,
    pub windows_excluded: usize,
    /// `rank_percent[model][rank - 1]` in [`ModelKind::ALL`] order.
    pub rank_percent: [[f64; 4]; 4],
}

impl RunSummary {
    pub fn ranking(&self, v: Variant) -> Option<&RankingSummary> {
        self.rankings.iter().find(|r| r.variant == v)
    }

    /// Human-readable summary for standard output.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let ex = &self.excluded;
        out.push_str(&format!(
            "windows: {} total, {} fitted, {} excluded ({} too small, {} degenerate, {} not converged)\n",
            self.windows_total,
            self.windows_fitted,
            self.windows_total - self.windows_fitted,
            ex.insufficient_samples,
            ex.degenerate,
            ex.non_converged,
        ));
        for r in &self.rankings {
            out.push_str(&format!(
                "{} ranking: {} windows ranked, {} excluded\n  rank-1 %:",
                r.variant, r.windows_ranked, r.windows_excluded
            ));
            for kind in ModelKind::ALL {
                out.push_str(&format!(" {}={:.1}", kind, r.rank_percent[kind.index()][0]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn summarize(
    config: &RunConfig,
    output: &RunOutput,
    records: usize,
    dropped_zero_volume: usize,
    dropped_bad_price: usize,
) -> RunSummary {
    let rankings = config
        .variants
        .variants()
        .into_iter()
        .filter_map(|v| output.table(v))
        .map(|t| RankingSummary {
            variant: t.variant,
            windows_ranked: t.windows.len(),
            windows_excluded: t.excluded,
            rank_percent: t.matrix.percent,
        })
        .collect();
    RunSummary {
        tool: "volmodel".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: ConfigEcho {
            input: config.input.display().to_string(),
            window_minutes: config.window_minutes,
            bins_per_decade: config.bins_per_decade,
            min_samples: config.min_samples,
            variant: config.variants,
            seed: config.seed,
            hist_bins: config.hist_bins,
        },
        records,
        dropped_zero_volume,
        dropped_bad_price,
        windows_total: output.windows.len(),
        windows_fitted: output
            .windows
            .iter()
            .filter(|w| w.status == WindowStatus::Fitted)
            .count(),
        excluded: output.excluded,
        rankings,
    }
}

/// Runs the whole pipeline and writes every artifact into `config.out`.
///
/// Artifacts are written even when nothing could be fitted; that case then
/// returns [`Error::NoFittedWindows`].
pub fn run(config: &RunConfig) -> Result<(RunSummary, RunOutput)> {
    config.validate()?;
    let loaded = load_snapshots(&config.input, config.window_minutes)?;
    info!(
        "{}: {} windows from {} records",
        config.input.display(),
        loaded.windows.len(),
        loaded.records
    );
    let output = analyze(&loaded.windows, config)?;
    let summary = summarize(
        config,
        &output,
        loaded.records,
        loaded.dropped_zero_volume,
        loaded.dropped_bad_price,
    );
    export::write_run(&config.out, &output, &summary, config.hist_bins)?;
    if summary.windows_fitted == 0 {
        return Err(Error::NoFittedWindows {
            excluded: summary.windows_total,
        });
    }
    Ok((summary, output))
}
