//! Numeric kernels for the offloading-delay model.
//!
//! A single offloaded task takes `theta = t_c + t_0`, where the processing
//! time `t_c` follows a normal distribution truncated to `(0, t_upper)` and
//! the round-trip transmission delay is `t_0 = 2(a h + b)` with `h`
//! exponential of rate `nu`. This module provides the moments of `theta`,
//! the central-limit tail probability that a batch of `k` tasks misses a
//! deadline, and a deterministic sampling oracle for `theta`.

pub mod special;
mod truncated;

pub use special::{erf, erf_inv, erfc, std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use truncated::{trunc_normal_moments, TruncatedNormal};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("erf_inv argument {0} outside (-1, 1)")]
    InverseErfDomain(f64),
    #[error("quantile argument {0} outside (0, 1)")]
    QuantileDomain(f64),
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
    #[error("truncation window ({lo}, {hi}) carries no probability mass")]
    DegenerateTruncation { lo: f64, hi: f64 },
}

/// Parameters of the single-task delay model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayParams {
    /// Mean of the untruncated processing time.
    pub mu: f64,
    /// Standard deviation of the processing time (> 0).
    pub sigma: f64,
    /// Upper truncation bound of the processing time (> 0).
    pub t_upper: f64,
    /// Rate of the exponential channel gain (> 0).
    pub nu: f64,
    /// Channel-to-delay slope (negative in the reference setup).
    pub a: f64,
    /// Channel-to-delay offset (> 0).
    pub b: f64,
}

impl DelayParams {
    pub fn new(mu: f64, sigma: f64, t_upper: f64, nu: f64, a: f64, b: f64) -> Result<Self, StatsError> {
        let p = Self { mu, sigma, t_upper, nu, a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(StatsError::InvalidParams("sigma must be finite and > 0"));
        }
        if !(self.t_upper > 0.0) || !self.t_upper.is_finite() {
            return Err(StatsError::InvalidParams("t_upper must be finite and > 0"));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(StatsError::InvalidParams("nu must be finite and > 0"));
        }
        if !self.mu.is_finite() || !self.a.is_finite() || !self.b.is_finite() {
            return Err(StatsError::InvalidParams("mu, a, b must be finite"));
        }
        Ok(())
    }
}

/// Mean and variance of the single-task delay `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayMoments {
    pub mean_theta: f64,
    pub var_theta: f64,
}

/// Closed-form moments of `theta = t_c + t_0`.
///
/// The truncated-normal part contributes its own mean and variance; the
/// transmission part adds `2(a + b nu)/nu` to the mean and `4 a^2 / nu^2`
/// to the variance (mean and variance of `2(a h + b)` with `h ~ Exp(nu)`).
pub fn theta_moments(p: &DelayParams) -> Result<DelayMoments, StatsError> {
    p.validate()?;
    let (tm, tv) = trunc_normal_moments(p.mu, p.sigma, 0.0, p.t_upper)?;
    Ok(DelayMoments {
        mean_theta: tm + 2.0 * (p.a + p.b * p.nu) / p.nu,
        var_theta: tv + 4.0 * p.a * p.a / (p.nu * p.nu),
    })
}

/// Normal-approximation tail probability that the total service time of
/// `k` tasks exceeds `deadline`:
///
/// ```text
/// Pr[tau > T] = 1 - Phi((T - k mu_theta) / (sqrt(k) sigma_theta))
/// ```
pub fn tau_tail_prob(k: f64, dm: &DelayMoments, deadline: f64) -> f64 {
    debug_assert!(k > 0.0, "tau_tail_prob requires k > 0");
    let z = (deadline - k * dm.mean_theta) / (k.sqrt() * dm.var_theta.sqrt());
    special::std_normal_tail(z)
}

/// One-shot sampler for `theta`; see [`ThetaSampler`] for repeated draws.
pub fn sample_theta<R: Rng + ?Sized>(p: &DelayParams, rng: &mut R) -> Result<f64, StatsError> {
    Ok(ThetaSampler::new(p, false)?.sample(rng))
}

/// Draws `theta = t_c + 2(a h + b)` deterministically from a caller-owned
/// stream; identical streams give identical sequences.
#[derive(Clone, Copy, Debug)]
pub struct ThetaSampler {
    proc_time: TruncatedNormal,
    nu: f64,
    a: f64,
    b: f64,
    clamp_t0: bool,
}

impl ThetaSampler {
    /// `clamp_t0` truncates negative transmission delays to zero; this
    /// departs from the analytic model and is off in every closed-form path.
    pub fn new(p: &DelayParams, clamp_t0: bool) -> Result<Self, StatsError> {
        p.validate()?;
        Ok(Self {
            proc_time: TruncatedNormal::new(p.mu, p.sigma, 0.0, p.t_upper)?,
            nu: p.nu,
            a: p.a,
            b: p.b,
            clamp_t0,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let t_c = self.proc_time.sample(rng);
        let u: f64 = rng.gen();
        let h = -(1.0 - u).ln() / self.nu;
        let mut t_0 = 2.0 * (self.a * h + self.b);
        if self.clamp_t0 && t_0 < 0.0 {
            t_0 = 0.0;
        }
        t_c + t_0
    }
}
