//! Least-squares fitting of a model CDF to a window's ECDF.
//!
//! The objective is `SSE(φ, θ) = Σ_k (cdf(s_k) - F̂(s_k))²` over the ECDF
//! points. It is minimized with Nelder-Mead in transformed coordinates
//! (`ln θ`, and `ln φ` except for the log-normal location) from a
//! method-of-moments start plus two perturbed restarts.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{Model, ModelKind, ModelParams};
use crate::empirical::{EcdfPoint, EmpiricalDistribution};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const DEFAULT_FIT_SEED: u64 = 0x5eed_2011_0127;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: ModelKind,
    pub params: ModelParams,
    /// Relative asymptotic standard error of φ; +inf when unidentifiable.
    pub rel_err_phi: f64,
    /// Relative asymptotic standard error of θ; +inf when unidentifiable.
    pub rel_err_theta: f64,
    pub sse: f64,
    pub n_eval: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Seeds the signs of the restart perturbations.
    pub seed: u64,
    /// Relative size of the restart perturbations.
    pub restart_fraction: f64,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            seed: DEFAULT_FIT_SEED,
            restart_fraction: 0.25,
            nelder_mead: NelderMeadOptions::default(),
        }
    }
}

/// Sample moments feeding the method-of-moments estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Moments {
    mean: f64,
    var: f64,
    log_mean: f64,
    log_sd: f64,
}

impl Moments {
    fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: samples.len(),
            });
        }
        if let Some(&bad) = samples.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
            return Err(Error::Domain {
                name: "s",
                value: bad,
            });
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let log_mean = samples.iter().map(|s| s.ln()).sum::<f64>() / n;
        let log_var = samples
            .iter()
            .map(|s| (s.ln() - log_mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        Ok(Moments {
            mean,
            var,
            log_mean,
            log_sd: log_var.sqrt(),
        })
    }

    /// Moments of the ECDF's step masses. For an ECDF built from raw samples
    /// this reproduces [`Moments::from_samples`] up to rounding.
    fn from_ecdf(ecdf: &[EcdfPoint], n: usize) -> Result<Self> {
        let total = ecdf.last().map_or(0.0, |p| p.f);
        if ecdf.len() < 2 || !(total > 0.0) {
            return Err(Error::Degenerate);
        }
        let mut prev = 0.0;
        let weights: Vec<f64> = ecdf
            .iter()
            .map(|p| {
                let w = (p.f - prev) / total;
                prev = p.f;
                w
            })
            .collect();
        let weighted = |g: &dyn Fn(f64) -> f64| -> f64 {
            ecdf.iter().zip(&weights).map(|(p, w)| w * g(p.s)).sum()
        };
        let bessel = if n > 1 {
            n as f64 / (n as f64 - 1.0)
        } else {
            1.0
        };
        let mean = weighted(&|s| s);
        let var = weighted(&|s| (s - mean).powi(2)) * bessel;
        let log_mean = weighted(&|s| s.ln());
        let log_var = weighted(&|s| (s.ln() - log_mean).powi(2)) * bessel;
        Ok(Moments {
            mean,
            var,
            log_mean,
            log_sd: log_var.sqrt(),
        })
    }

    fn params_for(&self, kind: ModelKind) -> Result<ModelParams> {
        if !(self.var > 0.0) || !(self.log_sd > 0.0) {
            return Err(Error::Degenerate);
        }
        let Moments {
            mean: m,
            var: v,
            log_mean,
            log_sd,
        } = *self;
        let params = match kind {
            ModelKind::Gamma => ModelParams::new(m * m / v, v / m),
            ModelKind::InverseGamma => {
                let phi = m * m / v + 2.0;
                ModelParams::new(phi, m * (phi - 1.0))
            }
            ModelKind::LogNormal => ModelParams::new(log_mean, log_sd),
            ModelKind::Weibull => {
                // sd(ln s) = π / (φ √6) for a Weibull variable
                let phi = PI / (log_sd * 6f64.sqrt());
                ModelParams::new(phi, (log_mean + EULER_GAMMA / phi).exp())
            }
        };
        if params.is_valid_for(kind) {
            Ok(params)
        } else {
            Err(Error::Degenerate)
        }
    }
}

/// Method-of-moments starting point for `kind` from raw samples.
pub fn initial_params(kind: ModelKind, samples: &[f64]) -> Result<ModelParams> {
    Moments::from_samples(samples)?.params_for(kind)
}

/// Method-of-moments starting point computed from the ECDF step masses;
/// this is the start [`fit_cdf`] uses.
pub fn initial_params_from_ecdf(
    kind: ModelKind,
    emp: &EmpiricalDistribution,
) -> Result<ModelParams> {
    Moments::from_ecdf(&emp.ecdf, emp.n)?.params_for(kind)
}

/// Residual sum of squares of `kind(params)` against the ECDF points.
pub fn sse(kind: ModelKind, params: ModelParams, ecdf: &[EcdfPoint]) -> Result<f64> {
    let model = Model::new(kind, params)?;
    Ok(sse_of(&model, ecdf))
}

fn sse_of(model: &Model, ecdf: &[EcdfPoint]) -> f64 {
    ecdf.iter()
        .map(|p| {
            let r = model.cdf(p.s) - p.f;
            r * r
        })
        .sum()
}

fn to_coords(kind: ModelKind, p: ModelParams) -> [f64; 2] {
    let phi = if kind.phi_is_positive() {
        p.phi.ln()
    } else {
        p.phi
    };
    [phi, p.theta.ln()]
}

fn from_coords(kind: ModelKind, x: &[f64]) -> ModelParams {
    let phi = if kind.phi_is_positive() {
        x[0].exp()
    } else {
        x[0]
    };
    ModelParams::new(phi, x[1].exp())
}

fn check_ecdf(emp: &EmpiricalDistribution) -> Result<()> {
    if emp.ecdf.is_empty() {
        return Err(Error::Precondition("empty ECDF".into()));
    }
    let mut prev = EcdfPoint { s: 0.0, f: 0.0 };
    for p in &emp.ecdf {
        let ok = p.s.is_finite() && p.s > 0.0 && p.f > 0.0 && p.f <= 1.0;
        if !ok || p.s < prev.s || p.f < prev.f {
            return Err(Error::Precondition(format!(
                "invalid ECDF point (s = {}, F = {})",
                p.s, p.f
            )));
        }
        prev = *p;
    }
    Ok(())
}

/// Restart points around `init`: each coordinate moves by ±`fraction`, with
/// seeded signs, and the second restart mirrors the first.
fn restarts(kind: ModelKind, init: ModelParams, opts: &FitOptions) -> [ModelParams; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(kind.index() as u64);
    let signs: [f64; 2] = [
        if rng.random::<bool>() { 1.0 } else { -1.0 },
        if rng.random::<bool>() { 1.0 } else { -1.0 },
    ];
    let f = opts.restart_fraction;
    let perturb = |dir: f64| {
        let phi = if kind.phi_is_positive() {
            init.phi * (1.0 + dir * signs[0] * f)
        } else {
            // a location has no natural relative size; scale by θ when |φ| is small
            init.phi + dir * signs[0] * f * init.phi.abs().max(init.theta)
        };
        ModelParams::new(phi, init.theta * (1.0 + dir * signs[1] * f))
    };
    [perturb(1.0), perturb(-1.0)]
}

/// Fits `kind` to the ECDF of `emp` with default options.
pub fn fit_cdf(kind: ModelKind, emp: &EmpiricalDistribution) -> Result<FitResult> {
    fit_cdf_with(kind, emp, &FitOptions::default())
}

pub fn fit_cdf_with(
    kind: ModelKind,
    emp: &EmpiricalDistribution,
    opts: &FitOptions,
) -> Result<FitResult> {
    check_ecdf(emp)?;
    let init = initial_params_from_ecdf(kind, emp)
        .map_err(|e| Error::Precondition(format!("no moment start for {kind}: {e}")))?;

    let objective = |x: &[f64]| -> f64 {
        match Model::new(kind, from_coords(kind, x)) {
            Ok(m) => sse_of(&m, &emp.ecdf),
            Err(_) => f64::INFINITY,
        }
    };

    let mut n_eval = 0;
    let mut best: Option<(ModelParams, f64, bool)> = None;
    let [r1, r2] = restarts(kind, init, opts);
    for start in [init, r1, r2] {
        let x0 = to_coords(kind, start);
        let steps = [
            if kind.phi_is_positive() {
                opts.nelder_mead.initial_step
            } else {
                opts.nelder_mead.initial_step * start.theta
            },
            opts.nelder_mead.initial_step,
        ];
        let m = nelder_mead(objective, &x0, &steps, &opts.nelder_mead);
        n_eval += m.evals;
        if best.as_ref().is_none_or(|b| m.value < b.1) {
            best = Some((from_coords(kind, &m.x), m.value, m.converged));
        }
    }
    let (params, sse, converged) = best.expect("three starts ran");

    let (rel_err_phi, rel_err_theta) =
        relative_errors(kind, params, emp).unwrap_or((f64::INFINITY, f64::INFINITY));
    Ok(FitResult {
        kind,
        params,
        rel_err_phi,
        rel_err_theta,
        sse,
        n_eval,
        converged,
    })
}

/// Relative asymptotic least-squares standard errors `(Δφ, Δθ)`.
///
/// The residual Jacobian is taken by central differences (step 1e-5
/// relative), `C = s² (JᵀJ)⁻¹` with `s² = SSE / (K - 2)`, and
/// `Δφ = √C₁₁ / |φ|`, `Δθ = √C₂₂ / |θ|`.
pub fn relative_errors(
    kind: ModelKind,
    params: ModelParams,
    emp: &EmpiricalDistribution,
) -> Result<(f64, f64)> {
    const REL_STEP: f64 = 1e-5;
    let model = Model::new(kind, params)?;
    let k = emp.ecdf.len();
    if k <= 2 {
        return Err(Error::Unidentifiable(format!(
            "{k} ECDF points leave no residual degrees of freedom"
        )));
    }

    let step = |v: f64| {
        if v.abs() > 1e-8 {
            REL_STEP * v.abs()
        } else {
            REL_STEP
        }
    };
    let h_phi = step(params.phi);
    let h_theta = step(params.theta);
    let shifted = |dphi: f64, dtheta: f64| {
        Model::new(
            kind,
            ModelParams::new(params.phi + dphi, params.theta + dtheta),
        )
    };
    let (phi_hi, phi_lo) = (shifted(h_phi, 0.0)?, shifted(-h_phi, 0.0)?);
    let (theta_hi, theta_lo) = (shifted(0.0, h_theta)?, shifted(0.0, -h_theta)?);

    let (mut a, mut b, mut d, mut sse) = (0.0, 0.0, 0.0, 0.0);
    for p in &emp.ecdf {
        let j_phi = (phi_hi.cdf(p.s) - phi_lo.cdf(p.s)) / (2.0 * h_phi);
        let j_theta = (theta_hi.cdf(p.s) - theta_lo.cdf(p.s)) / (2.0 * h_theta);
        a += j_phi * j_phi;
        b += j_phi * j_theta;
        d += j_theta * j_theta;
        let r = model.cdf(p.s) - p.f;
        sse += r * r;
    }
    let det = a * d - b * b;
    if !(a > 0.0 && d > 0.0 && det > 1e-10 * a * d) {
        return Err(Error::Unidentifiable(format!(
            "JᵀJ is singular (det = {det:e})"
        )));
    }
    let s2 = sse / (k - 2) as f64;
    let var_phi = s2 * d / det;
    let var_theta = s2 * a / det;
    Ok((
        var_phi.sqrt() / params.phi.abs(),
        var_theta.sqrt() / params.theta.abs(),
    ))
}
