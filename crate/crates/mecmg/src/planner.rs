//! Closed-form derivation of the activation thresholds and the service
//! price.
//!
//! An active server handling `k` jobs earns `R = k(e_p - e_j) - e_f`, so the
//! reward floor `R_th` pins the fewest jobs worth activating for
//! (`k_min`). The QoE constraint `Pr[tau > T] <= beta` pins the most jobs a
//! server may take (`k_max`). Equating the two yields the price `e_p*` and
//! the activation cut-off `c_th = K_T / k_max` that the game enforces.

use crate::sim::SystemParams;
use crate::stats::{self, DelayMoments, StatsError};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use thiserror::Error;

/// Server-side economics: reward floor and energy costs, with an optional
/// externally imposed price.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EconomicParams {
    /// Minimum desired reward per active server (`R_th`).
    pub reward_threshold: f64,
    /// Fixed activation energy cost (`e_f`).
    pub activation_cost: f64,
    /// Per-job energy cost (`e_j`).
    pub job_cost: f64,
    /// Per-job reimbursement (`e_p`); `None` until set or derived.
    pub price: Option<f64>,
}

impl EconomicParams {
    pub fn new(
        reward_threshold: f64,
        activation_cost: f64,
        job_cost: f64,
        price: Option<f64>,
    ) -> Result<Self, PlanError> {
        if !(reward_threshold >= 0.0) || !reward_threshold.is_finite() {
            return Err(PlanError::InvalidParam("reward_threshold must be >= 0"));
        }
        if !(activation_cost >= 0.0) || !activation_cost.is_finite() {
            return Err(PlanError::InvalidParam("activation_cost must be >= 0"));
        }
        if !(job_cost >= 0.0) || !job_cost.is_finite() {
            return Err(PlanError::InvalidParam("job_cost must be >= 0"));
        }
        if let Some(p) = price {
            if !(p > job_cost) {
                return Err(PlanError::PriceNotAboveJobCost { price: p, job_cost });
            }
        }
        Ok(Self {
            reward_threshold,
            activation_cost,
            job_cost,
            price,
        })
    }

    pub fn with_price(mut self, price: f64) -> Self {
        self.price = Some(price);
        self
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
    #[error("price {price} does not exceed the per-job cost {job_cost}")]
    PriceNotAboveJobCost { price: f64, job_cost: f64 },
    #[error("price is not set and was not derived")]
    PriceUnset,
    #[error("beta {0} outside (0, 0.5]")]
    BetaDomain(f64),
    #[error("mean single-task delay must be positive, got {0}")]
    NonPositiveMeanDelay(f64),
    #[error("plan infeasible: {reason}")]
    Infeasible {
        /// The full derived record; every quantity is still well defined,
        /// the cut-off just cannot be realized by the configured pool.
        result: Box<PlanResult>,
        reason: String,
    },
}

/// Everything the planner derives from one parameter set.
///
/// `c_th` is the integer cut-off the game runs with, `ceil(K_T / k_max)`,
/// which keeps `k(t) <= k_max` whenever at least `c_th` servers activate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub beta: f64,
    pub mu_theta: f64,
    pub var_theta: f64,
    pub k_max: f64,
    pub k_min: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub c_th_real: f64,
    pub c_th: u32,
    pub e_p_star: f64,
}

impl PlanResult {
    /// Non-fatal caveats worth surfacing next to the numbers.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.k_max < 30.0 {
            out.push(format!(
                "k_max = {:.4} is below 30; the central-limit approximation \
                 behind the QoE tail is shaky at this load",
                self.k_max
            ));
        }
        if self.k_min == 0.0 {
            out.push("k_min = 0: reward threshold and activation cost are both zero".into());
        }
        if self.c_th_real.floor() != self.c_th as f64 {
            out.push(format!(
                "integer cut-off: floor(c_th_real) = {} but the game uses ceil = {} \
                 to keep the QoE guarantee",
                self.c_th_real.floor(),
                self.c_th
            ));
        }
        out
    }
}

/// Total reward of an active server processing `k` jobs:
/// `R = k (e_p - e_j) - e_f`.
pub fn reward(k: f64, econ: &EconomicParams) -> Result<f64, PlanError> {
    let price = econ.price.ok_or(PlanError::PriceUnset)?;
    Ok(k * (price - econ.job_cost) - econ.activation_cost)
}

/// Fewest jobs that still reach the reward floor:
/// `k_min = (R_th + e_f) / (e_p - e_j)`.
pub fn k_min(econ: &EconomicParams) -> Result<f64, PlanError> {
    let price = econ.price.ok_or(PlanError::PriceUnset)?;
    if !(price > econ.job_cost) {
        return Err(PlanError::PriceNotAboveJobCost {
            price,
            job_cost: econ.job_cost,
        });
    }
    Ok((econ.reward_threshold + econ.activation_cost) / (price - econ.job_cost))
}

/// Most jobs a server may take while `Pr[tau > T] <= beta`:
///
/// ```text
/// k_max = ((-sqrt(2) sigma_theta g + sqrt(Delta)) / (2 mu_theta))^2
/// Delta = 2 sigma_theta^2 g^2 + 4 mu_theta T,   g = erf_inv(1 - 2 beta)
/// ```
///
/// `beta` must lie in (0, 0.5]; there `g >= 0` and the positive quadratic
/// root is the binding one.
pub fn k_max(dm: &DelayMoments, deadline: f64, beta: f64) -> Result<f64, PlanError> {
    if !(beta > 0.0 && beta <= 0.5) {
        return Err(PlanError::BetaDomain(beta));
    }
    if !(dm.mean_theta > 0.0) {
        return Err(PlanError::NonPositiveMeanDelay(dm.mean_theta));
    }
    if !(deadline > 0.0) {
        return Err(PlanError::InvalidParam("deadline must be > 0"));
    }
    let g = stats::erf_inv(1.0 - 2.0 * beta)?;
    let sigma_theta = dm.var_theta.sqrt();
    let delta = 2.0 * dm.var_theta * g * g + 4.0 * dm.mean_theta * deadline;
    let root = (-SQRT_2 * sigma_theta * g + delta.sqrt()) / (2.0 * dm.mean_theta);
    let k = root * root;
    if !(k > 0.0) || !k.is_finite() {
        return Err(PlanError::InvalidParam(
            "k_max collapsed to zero; no positive load satisfies the QoE constraint",
        ));
    }
    Ok(k)
}

/// `(c_min, c_max) = (K_T / k_max, K_T / k_min)`, real-valued.
pub fn c_bounds(total_jobs: f64, k_min: f64, k_max: f64) -> Result<(f64, f64), PlanError> {
    if !(k_min > 0.0) || !(k_max > 0.0) {
        return Err(PlanError::InvalidParam("k_min and k_max must be > 0"));
    }
    Ok((total_jobs / k_max, total_jobs / k_min))
}

/// Full derivation: delay moments, `k_max`, the price `e_p*` that makes
/// `k_min = k_max`, and the integer cut-off.
pub fn plan(params: &SystemParams) -> Result<PlanResult, PlanError> {
    let dm = stats::theta_moments(&params.delay_params()?)?;
    if !(dm.mean_theta > 0.0) {
        return Err(PlanError::NonPositiveMeanDelay(dm.mean_theta));
    }
    let kmax = k_max(&dm, params.deadline, params.beta)?;
    let e_p_star =
        (params.reward_threshold + params.activation_cost) / kmax + params.job_cost;
    let econ = EconomicParams::new(
        params.reward_threshold,
        params.activation_cost,
        params.job_cost,
        Some(e_p_star),
    )?;
    let kmin = k_min(&econ)?;
    let total_jobs = params.total_jobs as f64;
    let (c_min, c_max) = c_bounds(total_jobs, kmin, kmax)?;
    let c_th_real = total_jobs / kmax;
    let c_th = c_th_real.ceil() as u32;
    let result = PlanResult {
        beta: params.beta,
        mu_theta: dm.mean_theta,
        var_theta: dm.var_theta,
        k_max: kmax,
        k_min: kmin,
        c_min,
        c_max,
        c_th_real,
        c_th,
        e_p_star,
    };
    if c_th < 1 {
        return Err(PlanError::Infeasible {
            result: Box::new(result),
            reason: "cut-off below one server".into(),
        });
    }
    if c_th > params.servers {
        return Err(PlanError::Infeasible {
            result: Box::new(result),
            reason: format!(
                "cut-off c_th = {} exceeds the pool size M = {} (c_th_real = {:.4})",
                c_th, params.servers, c_th_real
            ),
        });
    }
    Ok(result)
}

/// One row of a QoE sweep; infeasible rows keep their derived numbers.
#[derive(Debug)]
pub struct SweepRow {
    pub beta: f64,
    pub plan: Result<PlanResult, PlanError>,
}

impl SweepRow {
    /// The derived record regardless of feasibility, when one exists.
    pub fn derived(&self) -> Option<&PlanResult> {
        match &self.plan {
            Ok(r) => Some(r),
            Err(PlanError::Infeasible { result, .. }) => Some(result),
            Err(_) => None,
        }
    }

    pub fn feasible(&self) -> bool {
        self.plan.is_ok()
    }
}

/// Re-plans once per `beta`, keeping row order; per-row failures are
/// recorded, not fatal.
pub fn beta_sweep(params: &SystemParams, betas: &[f64]) -> Vec<SweepRow> {
    betas
        .iter()
        .map(|&beta| {
            let mut p = params.clone();
            p.beta = beta;
            SweepRow {
                beta,
                plan: plan(&p),
            }
        })
        .collect()
}
