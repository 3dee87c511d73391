//! Condensed text report of a completed run directory.

use std::fmt::Write;
use std::path::Path;

use crate::distributions::ModelKind;
use crate::export::{ranks_file, read_ranks, read_summary};
use crate::ranking::aggregate;
use crate::Result;

/// Renders the rank matrices and distance statistics of the run in `dir`.
///
/// Fails with [`crate::Error::MissingArtifact`] naming the first absent file.
pub fn render(dir: &Path) -> Result<String> {
    let summary = read_summary(dir)?;
    let mut out = String::new();
    writeln!(
        out,
        "run: {} ({} windows, {} fitted)",
        summary.config.input, summary.windows_total, summary.windows_fitted
    )
    .unwrap();

    for ranking in &summary.rankings {
        let windows = read_ranks(&dir.join(ranks_file(ranking.variant)))?;
        writeln!(
            out,
            "\n[{}] {} windows ranked",
            ranking.variant,
            windows.len()
        )
        .unwrap();
        if windows.is_empty() {
            continue;
        }
        let matrix = aggregate(&windows)?;
        writeln!(
            out,
            "{:<14}{:>9}{:>9}{:>9}{:>9}",
            "model", "rank 1", "rank 2", "rank 3", "rank 4"
        )
        .unwrap();
        for kind in ModelKind::ALL {
            let row = matrix.percent[kind.index()];
            writeln!(
                out,
                "{:<14}{:>8.1}%{:>8.1}%{:>8.1}%{:>8.1}%",
                kind.name(),
                row[0],
                row[1],
                row[2],
                row[3]
            )
            .unwrap();
        }

        writeln!(
            out,
            "{:<14}{:>12}{:>12}{:>12}{:>12}{:>12}",
            "distance", "mean", "median", "min", "max", "mean |d|"
        )
        .unwrap();
        for kind in ModelKind::ALL {
            let mut d: Vec<f64> = windows.iter().map(|w| w.distance_of(kind)).collect();
            let stats = Stats::of(&mut d);
            writeln!(
                out,
                "{:<14}{:>12.4e}{:>12.4e}{:>12.4e}{:>12.4e}{:>12.4e}",
                kind.name(),
                stats.mean,
                stats.median,
                stats.min,
                stats.max,
                stats.mean_abs
            )
            .unwrap();
        }
    }
    Ok(out)
}

struct Stats {
    mean: f64,
    median: f64,
    min: f64,
    max: f64,
    mean_abs: f64,
}

impl Stats {
    fn of(values: &mut [f64]) -> Stats {
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let mean_abs = values.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        Stats {
            mean,
            median,
            min: values[0],
            max: values[n - 1],
            mean_abs,
        }
    }
}
