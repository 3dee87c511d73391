//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::excessive_precision)]

use volmodel::empirical::{Bin, EmpiricalDistribution};
use volmodel::{Model, ModelKind, ModelParams};

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let pair = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`: repeatedly
/// bisects the interval with the largest error estimate until the summed
/// estimate drops below `tol` or 4000 intervals are in use.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_capped(&f, a, b, tol, 4000)
}

fn integrate_capped<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_parts: usize) -> f64 {
    let (est, err) = gk15(f, a, b);
    let mut parts = vec![(a, b, est, err)];
    while parts.len() < max_parts {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= tol {
            break;
        }
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (e1, r1) = gk15(f, lo, mid);
        let (e2, r2) = gk15(f, mid, hi);
        parts.push((lo, mid, e1, r1));
        parts.push((mid, hi, e2, r2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// `∫ g(s) ds` over `[lo, hi]` (both > 0) after substituting `s = e^u`.
/// The log range is cut into pieces of width 1/4 first so narrow peaks are
/// never missed by a coarse first pass.
pub fn integrate_log<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let (a, b) = (lo.ln(), hi.min(f64::MAX).ln());
    let pieces = ((b - a) * 4.0).ceil().max(1.0) as usize;
    let step = (b - a) / pieces as f64;
    let h = |u: f64| {
        let s = u.exp();
        g(s) * s
    };
    (0..pieces)
        .map(|i| {
            let u0 = a + step * i as f64;
            integrate_capped(&h, u0, u0 + step, tol / pieces as f64, 64)
        })
        .sum()
}

/// Five parameter sets per model spanning shapes from strongly skewed to
/// near-symmetric.
pub fn parameter_sets(kind: ModelKind) -> [ModelParams; 5] {
    let p = ModelParams::new;
    match kind {
        ModelKind::Gamma => [
            p(0.5, 2.0),
            p(1.0, 1.0),
            p(2.5, 0.3),
            p(7.0, 40.0),
            p(30.0, 0.05),
        ],
        ModelKind::InverseGamma => [
            p(0.7, 1.0),
            p(1.5, 3.0),
            p(3.0, 2.0),
            p(6.0, 500.0),
            p(20.0, 0.1),
        ],
        ModelKind::LogNormal => [
            p(0.0, 1.0),
            p(-2.0, 0.3),
            p(3.0, 2.0),
            p(8.0, 1.5),
            p(1.0, 0.05),
        ],
        ModelKind::Weibull => [
            p(0.5, 1.0),
            p(1.0, 5.0),
            p(1.5, 3.0),
            p(3.0, 0.2),
            p(8.0, 100.0),
        ],
    }
}

/// `n` samples placed exactly at the model quantiles `(i - 1/2) / n`.
pub fn quantile_grid(model: &Model, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| model.quantile((i as f64 + 0.5) / n as f64).unwrap())
        .collect()
}

/// An empirical distribution whose histogram densities equal the model pdf
/// at each bin's geometric midpoint, on log-spaced bins over `[lo, hi]`.
pub fn model_histogram(model: &Model, lo: f64, hi: f64, nbins: usize) -> EmpiricalDistribution {
    let step = (hi / lo).ln() / nbins as f64;
    let bins: Vec<Bin> = (0..nbins)
        .map(|i| {
            let left = lo * (step * i as f64).exp();
            let right = lo * (step * (i + 1) as f64).exp();
            Bin {
                left,
                right,
                count: 1,
                density: model.pdf((left * right).sqrt()),
                width: right - left,
            }
        })
        .collect();
    EmpiricalDistribution {
        ecdf: Vec::new(),
        bins,
        n: nbins,
        median: model.quantile(0.5).unwrap(),
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
