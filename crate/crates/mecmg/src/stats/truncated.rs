//! Moments and inverse-CDF sampling for a normal distribution truncated to
//! an interval.
//!
//! Everything is arranged so that intervals lying deep in one tail (the
//! regime the delay model actually runs in) keep full relative accuracy:
//! interval masses are computed in the smaller tail via `erfc`, and sampling
//! inverts the CDF instead of rejecting, so acceptance never underflows.

use super::special::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_tail};
use super::StatsError;

/// Mean and variance of `Normal(mu, sigma^2)` truncated to `(lo, hi)`.
///
/// With `alpha = (lo-mu)/sigma`, `beta = (hi-mu)/sigma` and
/// `Z = Phi(beta) - Phi(alpha)`:
///
/// ```text
/// mean = mu + sigma * (phi(alpha) - phi(beta)) / Z
/// var  = sigma^2 * (1 + (alpha phi(alpha) - beta phi(beta)) / Z
///                     - ((phi(alpha) - phi(beta)) / Z)^2)
/// ```
pub fn trunc_normal_moments(
    mu: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64), StatsError> {
    if !(sigma > 0.0) {
        return Err(StatsError::InvalidParams("sigma must be > 0"));
    }
    if !(lo < hi) {
        return Err(StatsError::InvalidParams("lo must be < hi"));
    }
    let alpha = (lo - mu) / sigma;
    let beta = (hi - mu) / sigma;
    let mass = interval_mass(alpha, beta);
    if !(mass > 0.0) {
        return Err(StatsError::DegenerateTruncation { lo, hi });
    }
    let pa = std_normal_pdf(alpha);
    let pb = std_normal_pdf(beta);
    let shift = (pa - pb) / mass;
    let mean = mu + sigma * shift;
    let var_unit = 1.0 + (alpha * pa - beta * pb) / mass - shift * shift;
    if !(var_unit > 0.0) || !var_unit.is_finite() {
        // the formula cancelled to nothing: the window carries too little mass
        return Err(StatsError::DegenerateTruncation { lo, hi });
    }
    Ok((mean, sigma * sigma * var_unit))
}

/// `Phi(beta) - Phi(alpha)` evaluated in whichever tail is smaller so the
/// difference keeps relative accuracy.
fn interval_mass(alpha: f64, beta: f64) -> f64 {
    if alpha >= 0.0 {
        std_normal_tail(alpha) - std_normal_tail(beta)
    } else if beta <= 0.0 {
        std_normal_cdf(beta) - std_normal_cdf(alpha)
    } else {
        // interval straddles zero; both CDFs are O(1) and of the same sign
        std_normal_cdf(beta) - std_normal_cdf(alpha)
    }
}

/// A standard normal truncated to `(lo, hi)` with the CDF endpoints
/// precomputed, for repeated inverse-CDF sampling.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedNormal {
    mu: f64,
    sigma: f64,
    alpha: f64,
    beta: f64,
    // endpoints of the standardized interval in CDF space, after the
    // reflection that moves the interval into the lower half-line
    p_lo: f64,
    p_hi: f64,
    reflected: bool,
}

impl TruncatedNormal {
    pub fn new(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self, StatsError> {
        if !(sigma > 0.0) {
            return Err(StatsError::InvalidParams("sigma must be > 0"));
        }
        if !(lo < hi) {
            return Err(StatsError::InvalidParams("lo must be < hi"));
        }
        let alpha = (lo - mu) / sigma;
        let beta = (hi - mu) / sigma;
        // reflect intervals on the positive axis so that quantile inputs stay
        // far from 1, where Phi is flat in floating point
        let reflected = alpha >= 0.0;
        let (a, b) = if reflected { (-beta, -alpha) } else { (alpha, beta) };
        let p_lo = std_normal_cdf(a);
        let p_hi = std_normal_cdf(b);
        if !(p_hi - p_lo > 0.0) {
            return Err(StatsError::DegenerateTruncation { lo, hi });
        }
        Ok(Self {
            mu,
            sigma,
            alpha,
            beta,
            p_lo,
            p_hi,
            reflected,
        })
    }

    /// Maps `u` in [0, 1) to the truncated-normal quantile.
    pub fn inv_cdf(&self, u: f64) -> f64 {
        let q = (self.p_lo + u * (self.p_hi - self.p_lo)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        // q lies in (0, 1) by construction
        let z = std_normal_quantile(q).expect("quantile argument clamped to (0, 1)");
        let z = if self.reflected { -z } else { z };
        self.mu + self.sigma * z.clamp(self.alpha, self.beta)
    }

    /// Draws one sample using the caller's stream.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inv_cdf(rng.gen::<f64>())
    }
}
