//! Per-window samples and their empirical distributions.

pub(crate) mod snapshot;

pub use snapshot::{
    load_snapshots, read_snapshots, write_snapshots, LoadedSnapshots, SnapshotRecord,
    WindowSnapshot,
};

use crate::{Error, Result};

/// Smallest window that will be fitted.
pub const MIN_SAMPLES: usize = 32;
pub const DEFAULT_BINS_PER_DECADE: usize = 8;

/// Volume-price `s = p V`.
pub fn volume_price(price: f64, volume: f64) -> Result<f64> {
    if !(price > 0.0) || !price.is_finite() {
        return Err(Error::Domain {
            name: "price",
            value: price,
        });
    }
    if !(volume >= 0.0) || !volume.is_finite() {
        return Err(Error::Domain {
            name: "volume",
            value: volume,
        });
    }
    Ok(price * volume)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcdfPoint {
    pub s: f64,
    pub f: f64,
}

/// One histogram bin `[left, right)`; the last bin is closed on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    /// count / (n * width)
    pub density: f64,
    pub width: f64,
}

impl Bin {
    pub fn geometric_mid(&self) -> f64 {
        (self.left * self.right).sqrt()
    }

    pub fn is_empty(&self) -> bool {
        self.density == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    /// ECDF at the sorted unique sample values.
    pub ecdf: Vec<EcdfPoint>,
    /// Log-spaced histogram spanning [min, max].
    pub bins: Vec<Bin>,
    pub n: usize,
    pub median: f64,
}

/// Builds the ECDF and log-binned histogram of a window, requiring
/// [`MIN_SAMPLES`] samples.
pub fn build_empirical(samples: &[f64], bins_per_decade: usize) -> Result<EmpiricalDistribution> {
    build_empirical_with_min(samples, bins_per_decade, MIN_SAMPLES)
}

pub fn build_empirical_with_min(
    samples: &[f64],
    bins_per_decade: usize,
    min_samples: usize,
) -> Result<EmpiricalDistribution> {
    if bins_per_decade == 0 {
        return Err(Error::Config("bins_per_decade must be positive".into()));
    }
    let n = samples.len();
    if n < min_samples.max(1) {
        return Err(Error::InsufficientSamples {
            needed: min_samples.max(1),
            got: n,
        });
    }
    if let Some(&bad) = samples.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
        return Err(Error::Domain {
            name: "s",
            value: bad,
        });
    }

    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[n - 1]);
    if min == max {
        return Err(Error::Degenerate);
    }

    Ok(EmpiricalDistribution {
        ecdf: ecdf_of_sorted(&sorted),
        bins: log_histogram(&sorted, bins_per_decade),
        n,
        median: median_of_sorted(&sorted),
    })
}

/// Ties take the highest step: F(s) = #{x <= s} / n.
fn ecdf_of_sorted(sorted: &[f64]) -> Vec<EcdfPoint> {
    let n = sorted.len() as f64;
    let mut points = Vec::new();
    for (k, &s) in sorted.iter().enumerate() {
        let f = (k + 1) as f64 / n;
        match points.last_mut() {
            Some(EcdfPoint { s: last, f: lf }) if *last == s => *lf = f,
            _ => points.push(EcdfPoint { s, f }),
        }
    }
    points
}

fn log_histogram(sorted: &[f64], bins_per_decade: usize) -> Vec<Bin> {
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);
    let decades = (max / min).log10();
    let nbins = ((decades * bins_per_decade as f64 - 1e-9).ceil() as usize).max(1);
    let (ln_min, ln_max) = (min.ln(), max.ln());
    let step = (ln_max - ln_min) / nbins as f64;

    let mut edges: Vec<f64> = (0..=nbins)
        .map(|i| (ln_min + step * i as f64).exp())
        .collect();
    edges[0] = min;
    edges[nbins] = max;

    let mut counts = vec![0usize; nbins];
    for &s in sorted {
        let mut i = (((s.ln() - ln_min) / step) as usize).min(nbins - 1);
        // the float index can land one off an edge
        while i > 0 && s < edges[i] {
            i -= 1;
        }
        while i + 1 < nbins && s >= edges[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }

    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let (left, right) = (edges[i], edges[i + 1]);
            let width = right - left;
            Bin {
                left,
                right,
                count,
                density: count as f64 / (n as f64 * width),
                width,
            }
        })
        .collect()
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Order-statistic median; the mean of the two middle values for even counts.
pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(median_of_sorted(&sorted))
}
