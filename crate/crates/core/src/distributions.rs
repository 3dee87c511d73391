//! The four candidate volume-price models and their closed-form densities.
//!
//! Parameters follow one fixed convention for every model:
//!
//! | model         | density                                             |
//! |---------------|-----------------------------------------------------|
//! | Gamma         | s^(φ-1) e^(-s/θ) / (θ^φ Γ(φ))                      |
//! | inverse Gamma | θ^φ s^(-φ-1) e^(-θ/s) / Γ(φ)                       |
//! | log-normal    | exp(-(ln s - φ)² / 2θ²) / (sqrt(2π) θ s)           |
//! | Weibull       | (φ/θ^φ) s^(φ-1) exp(-(s/θ)^φ)                      |
//!
//! All densities are evaluated as logs and exponentiated last.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::special::{gamma_pq, ln_gamma, normal_cdf};
use crate::{Error, Result};

/// ln sqrt(2π)
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;

/// Identity of a candidate model. Declaration order is the tie-break order
/// used by rankings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gamma,
    InverseGamma,
    #[serde(rename = "lognormal")]
    LogNormal,
    Weibull,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Gamma,
        ModelKind::InverseGamma,
        ModelKind::LogNormal,
        ModelKind::Weibull,
    ];

    /// Position in [`ModelKind::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Stable lowercase name used in file names and column headers.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gamma => "gamma",
            ModelKind::InverseGamma => "inverse_gamma",
            ModelKind::LogNormal => "lognormal",
            ModelKind::Weibull => "weibull",
        }
    }

    /// Whether φ must be strictly positive. Log-normal φ is a log-location.
    pub fn phi_is_positive(self) -> bool {
        !matches!(self, ModelKind::LogNormal)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "gamma" => Ok(ModelKind::Gamma),
            "inverse_gamma" | "inversegamma" | "invgamma" => Ok(ModelKind::InverseGamma),
            "lognormal" | "log_normal" => Ok(ModelKind::LogNormal),
            "weibull" => Ok(ModelKind::Weibull),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

/// The (φ, θ) pair shared by all four models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub phi: f64,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(phi: f64, theta: f64) -> Self {
        ModelParams { phi, theta }
    }

    pub fn is_valid_for(&self, kind: ModelKind) -> bool {
        let theta_ok = self.theta > 0.0 && self.theta.is_finite();
        let phi_ok = if kind.phi_is_positive() {
            self.phi > 0.0 && self.phi.is_finite()
        } else {
            self.phi.is_finite()
        };
        theta_ok && phi_ok
    }
}

/// A validated model with its normalizing constants precomputed, for
/// evaluating many points under one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    kind: ModelKind,
    params: ModelParams,
    ln_theta: f64,
    /// ln Γ(φ) for the gamma family, unused otherwise.
    ln_gamma_phi: f64,
    /// Log of the density's constant factor.
    ln_norm: f64,
}

impl Model {
    pub fn new(kind: ModelKind, params: ModelParams) -> Result<Self> {
        if !params.is_valid_for(kind) {
            return Err(Error::InvalidParams {
                kind,
                phi: params.phi,
                theta: params.theta,
            });
        }
        let ModelParams { phi, theta } = params;
        let ln_theta = theta.ln();
        let (ln_gamma_phi, ln_norm) = match kind {
            ModelKind::Gamma => {
                let lg = ln_gamma(phi);
                (lg, -phi * ln_theta - lg)
            }
            ModelKind::InverseGamma => {
                let lg = ln_gamma(phi);
                (lg, phi * ln_theta - lg)
            }
            ModelKind::LogNormal => (0.0, -LN_SQRT_2PI - ln_theta),
            ModelKind::Weibull => (0.0, phi.ln() - phi * ln_theta),
        };
        Ok(Model {
            kind,
            params,
            ln_theta,
            ln_gamma_phi,
            ln_norm,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// A characteristic volume-price for the model: θ, or e^φ for log-normal.
    pub fn scale(&self) -> f64 {
        match self.kind {
            ModelKind::LogNormal => self.params.phi.exp(),
            _ => self.params.theta,
        }
    }

    /// Log density. `s` must be positive.
    pub fn ln_pdf(&self, s: f64) -> f64 {
        let ModelParams { phi, theta } = self.params;
        let ln_s = s.ln();
        match self.kind {
            ModelKind::Gamma => self.ln_norm + (phi - 1.0) * ln_s - s / theta,
            ModelKind::InverseGamma => self.ln_norm - (phi + 1.0) * ln_s - theta / s,
            ModelKind::LogNormal => {
                let z = (ln_s - phi) / theta;
                self.ln_norm - ln_s - 0.5 * z * z
            }
            ModelKind::Weibull => self.ln_norm + (phi - 1.0) * ln_s - (s / theta).powf(phi),
        }
    }

    pub fn pdf(&self, s: f64) -> f64 {
        self.ln_pdf(s).exp()
    }

    pub fn cdf(&self, s: f64) -> f64 {
        let ModelParams { phi, theta } = self.params;
        match self.kind {
            ModelKind::Gamma => gamma_pq(phi, s / theta, self.ln_gamma_phi).0,
            ModelKind::InverseGamma => gamma_pq(phi, theta / s, self.ln_gamma_phi).1,
            ModelKind::LogNormal => normal_cdf((s.ln() - phi) / theta),
            ModelKind::Weibull => -(-(s / theta).powf(phi)).exp_m1(),
        }
    }

    /// Survival function 1 - cdf, computed without cancellation.
    pub fn sf(&self, s: f64) -> f64 {
        let ModelParams { phi, theta } = self.params;
        match self.kind {
            ModelKind::Gamma => gamma_pq(phi, s / theta, self.ln_gamma_phi).1,
            ModelKind::InverseGamma => gamma_pq(phi, theta / s, self.ln_gamma_phi).0,
            ModelKind::LogNormal => normal_cdf(-(s.ln() - phi) / theta),
            ModelKind::Weibull => (-(s / theta).powf(phi)).exp(),
        }
    }

    /// Inverse CDF for `u` in (0, 1). Weibull uses its closed form; the other
    /// models bisect on ln s until the CDF is within 1e-12 of `u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain {
                name: "u",
                value: u,
            });
        }
        if self.kind == ModelKind::Weibull {
            let ModelParams { phi, theta } = self.params;
            return Ok(theta * (-(-u).ln_1p()).powf(phi.recip()));
        }
        Ok(self.bisect_quantile(u))
    }

    fn bisect_quantile(&self, u: f64) -> f64 {
        const LN_MIN: f64 = -740.0;
        const LN_MAX: f64 = 709.0;
        const TOL: f64 = 1e-12;
        let at = |ln_s: f64| self.cdf(ln_s.exp());

        let center = match self.kind {
            ModelKind::LogNormal => self.params.phi,
            _ => self.ln_theta,
        }
        .clamp(LN_MIN, LN_MAX);
        let (mut lo, mut hi) = (center, center);
        let mut step = 1.0;
        while lo > LN_MIN && at(lo) > u {
            lo = (lo - step).max(LN_MIN);
            step *= 2.0;
        }
        step = 1.0;
        while hi < LN_MAX && at(hi) < u {
            hi = (hi + step).min(LN_MAX);
            step *= 2.0;
        }

        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let f = at(mid);
            if (f - u).abs() <= TOL {
                break;
            }
            if f < u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
                break;
            }
        }
        mid.exp()
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "s",
            value: s,
        })
    }
}

/// Density of `kind` with `params` at volume-price `s > 0`.
pub fn pdf(kind: ModelKind, params: ModelParams, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(Model::new(kind, params)?.pdf(s))
}

/// CDF of `kind` with `params` at volume-price `s > 0`.
pub fn cdf(kind: ModelKind, params: ModelParams, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(Model::new(kind, params)?.cdf(s))
}
