//! Generalized Kullback-Leibler distance between a model density and a
//! binned empirical density:
//!
//! ```text
//! D(F) = Σ_i ln|P(i) / Q(i)| · F(i) · Δx(i)
//! ```
//!
//! `F = P` gives the standard weighting; `F = 1/P`, restricted to bins
//! above the sample median, gives the tail weighting. The sum is not
//! guaranteed to be non-negative, so rankings compare `|D|`.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::distributions::{Model, ModelKind, ModelParams};
use crate::empirical::{Bin, EmpiricalDistribution};
use crate::{Error, Result};

/// Floor applied to the model density before taking the ratio.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Distances of one fitted model in one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub window_start: DateTime<Utc>,
    pub kind: ModelKind,
    pub d_standard: f64,
    pub bins_used_standard: usize,
    /// `None` when the tail distance could not be formed for this window.
    pub d_tail: Option<f64>,
    pub bins_used_tail: usize,
}

/// A distance value and the number of bins that contributed to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub bins_used: usize,
}

/// Evaluates the generalized distance over bins with `Q(i) > 0`.
pub fn generalized_kl(
    model: &[f64],
    empirical: &[f64],
    widths: &[f64],
    weight: &[f64],
) -> Result<f64> {
    kl_sum(model, empirical, widths, weight).map(|d| d.value)
}

fn kl_sum(p: &[f64], q: &[f64], dx: &[f64], f: &[f64]) -> Result<Distance> {
    if p.len() != q.len() || q.len() != dx.len() || dx.len() != f.len() {
        return Err(Error::MismatchedBins {
            model: p.len(),
            empirical: q.len(),
            widths: dx.len(),
            weights: f.len(),
        });
    }
    let mut value = 0.0;
    let mut bins_used = 0;
    for i in 0..p.len() {
        if q[i] == 0.0 {
            continue;
        }
        if !(dx[i] > 0.0) {
            return Err(Error::Domain {
                name: "bin width",
                value: dx[i],
            });
        }
        let ratio = p[i].max(DENSITY_FLOOR) / q[i];
        value += ratio.abs().ln() * f[i] * dx[i];
        bins_used += 1;
    }
    if bins_used == 0 {
        return Err(Error::AllBinsExcluded);
    }
    Ok(Distance { value, bins_used })
}

/// Full-spectrum distance, `F(i) = P(i)`, with `P(i)` the model density at
/// each bin's geometric midpoint.
pub fn standard_distance(
    kind: ModelKind,
    params: ModelParams,
    emp: &EmpiricalDistribution,
) -> Result<Distance> {
    let model = Model::new(kind, params)?;
    let bins: Vec<&Bin> = emp.bins.iter().filter(|b| !b.is_empty()).collect();
    let p: Vec<f64> = bins.iter().map(|b| model.pdf(b.geometric_mid())).collect();
    let q: Vec<f64> = bins.iter().map(|b| b.density).collect();
    let dx: Vec<f64> = bins.iter().map(|b| b.width).collect();
    kl_sum(&p, &q, &dx, &p)
}

/// Tail distance, `F(i) = 1/P(i)`, over the non-empty bins whose left edge
/// is at or above the median.
///
/// Both sides are renormalized to unit mass over exactly those bins: `Q` by
/// its retained histogram mass and `P` by the model's midpoint mass on the
/// same bins, so both are densities conditioned on the retained tail.
pub fn tail_distance(
    kind: ModelKind,
    params: ModelParams,
    emp: &EmpiricalDistribution,
) -> Result<Distance> {
    let model = Model::new(kind, params)?;
    let bins: Vec<&Bin> = emp
        .bins
        .iter()
        .filter(|b| !b.is_empty() && b.left >= emp.median)
        .collect();
    if bins.is_empty() {
        return Err(Error::NoTailBins { median: emp.median });
    }
    let dx: Vec<f64> = bins.iter().map(|b| b.width).collect();

    let q_mass: f64 = bins.iter().map(|b| b.density * b.width).sum();
    let q: Vec<f64> = bins.iter().map(|b| b.density / q_mass).collect();

    let raw: Vec<f64> = bins.iter().map(|b| model.pdf(b.geometric_mid())).collect();
    let p_mass: f64 = raw.iter().zip(&dx).map(|(p, w)| p * w).sum();
    let p: Vec<f64> = if p_mass > 0.0 {
        raw.iter()
            .map(|x| (x / p_mass).max(DENSITY_FLOOR))
            .collect()
    } else {
        vec![DENSITY_FLOOR; raw.len()]
    };
    let weight: Vec<f64> = p.iter().map(|x| x.recip()).collect();
    kl_sum(&p, &q, &dx, &weight)
}
