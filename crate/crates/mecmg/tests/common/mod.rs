//! Independent oracles shared by the integration suites.
//!
//! Everything here deliberately avoids the crate's own numeric kernels:
//! quadrature works on the raw Gaussian density, roots come from bisection,
//! and discrete expectations from exact binomial sums, so a bug in the
//! implementation cannot hide in its own oracle.

#![allow(dead_code)]

/// Standard normal density, written out locally.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Adaptive Simpson quadrature with Richardson acceptance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Quadrature over [a, b] in fixed panels so narrow features cannot slip
/// between the probe points of a single adaptive pass.
pub fn paneled_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 32;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let lo = a + i as f64 * h;
            adaptive_simpson(f, lo, lo + h, tol / PANELS as f64)
        })
        .sum()
}

/// Mean and variance of Normal(mu, sigma^2) truncated to (lo, hi), by
/// quadrature of the standardized density. The weight is rescaled by the
/// largest density in the window so deep-tail windows never underflow.
pub fn trunc_moments_oracle(mu: f64, sigma: f64, lo: f64, hi: f64) -> (f64, f64) {
    let alpha = (lo - mu) / sigma;
    let beta = (hi - mu) / sigma;
    let z0 = if alpha > 0.0 {
        alpha
    } else if beta < 0.0 {
        beta
    } else {
        0.0
    };
    let w = move |z: f64| (-0.5 * (z * z - z0 * z0)).exp();
    let mass = paneled_simpson(&w, alpha, beta, 1e-14);
    let m1 = paneled_simpson(&|z| z * w(z), alpha, beta, 1e-14) / mass;
    let m2 = paneled_simpson(&|z| (z - m1) * (z - m1) * w(z), alpha, beta, 1e-14) / mass;
    (mu + sigma * m1, sigma * sigma * m2)
}

/// Root of a monotone increasing `f` by bisection on [lo, hi]; the caller
/// guarantees a sign change.
pub fn bisect_increasing(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: u32) -> f64 {
    assert!(f(lo) <= 0.0 && f(hi) >= 0.0, "no bracket");
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact per-round expected utility of a server playing a fair coin among
/// `m` coin-flipping servers with cut-off `cutoff`: conditioning on one
/// player's action, the other `m-1` attendances are Binomial(m-1, 1/2).
pub fn random_policy_expected_utility(m: u32, cutoff: u32) -> f64 {
    let n = m - 1;
    assert!(n < 120, "binomial sums computed in u128");
    let mut le = 0u128; // P(B <= cutoff - 1) numerator
    let mut gt = 0u128; // P(B > cutoff) numerator
    let mut binom: u128 = 1;
    for j in 0..=n {
        if cutoff > 0 && j <= cutoff - 1 {
            le += binom;
        }
        if j > cutoff {
            gt += binom;
        }
        if j < n {
            binom = binom * (n - j) as u128 / (j + 1) as u128;
        }
    }
    (le + gt) as f64 / (1u128 << (n + 1)) as f64
}

pub fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
    let err = ((got - want) / want).abs();
    assert!(
        err <= tol,
        "{what}: got {got:e}, want {want:e} (rel {err:e}, tol {tol:e})"
    );
}
