//! Cross-run aggregation.
//!
//! All reductions run in a fixed order over run indices and use compensated
//! summation, so aggregate output is bit-stable no matter how the runs were
//! scheduled.

use super::{RunResult, SimError};
use crate::game::RoundRecord;

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Mean and standard error of the mean; the stderr of fewer than two
/// observations is zero.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = kahan_sum(xs.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = kahan_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    let var = ss / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Sample variance (n-1 in the denominator).
fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = kahan_sum(xs.iter().copied()) / xs.len() as f64;
    kahan_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (xs.len() - 1) as f64
}

/// Per-policy cross-run statistics.
///
/// Attendance statistics are taken over the tail window; utilities are
/// reported both over the full horizon and over the tail window, since the
/// reference results do not state a burn-in.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyMetrics {
    /// Cross-run mean of per-run tail-window attendance means.
    pub mean_attendance: f64,
    pub attendance_stderr: f64,
    /// Cross-run mean of per-run tail-window attendance variances.
    pub attendance_variance: f64,
    /// Cross-run mean of per-run tail-window QoE-tail means.
    pub mean_qoe_tail: f64,
    /// Per-server per-round utility over the full horizon.
    pub mean_utility: f64,
    pub utility_stderr: f64,
    /// Per-server per-round utility over the tail window.
    pub mean_utility_tail: f64,
    pub utility_tail_stderr: f64,
    /// Round-by-round QoE tail averaged across runs.
    pub qoe_series: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateMetrics {
    pub rounds: u32,
    pub runs: u32,
    /// First round index (0-based) inside the tail window.
    pub tail_start: u32,
    pub mg: PolicyMetrics,
    pub random: PolicyMetrics,
    pub optimal: PolicyMetrics,
}

pub(super) fn policy_metrics(
    policy: &str,
    runs: &[RunResult],
    rounds: usize,
    players: usize,
    tail_start: usize,
) -> Result<PolicyMetrics, SimError> {
    let mut run_att_mean = Vec::with_capacity(runs.len());
    let mut run_att_var = Vec::with_capacity(runs.len());
    let mut run_qoe_tail = Vec::with_capacity(runs.len());
    let mut run_util_full = Vec::with_capacity(runs.len());
    let mut run_util_tail = Vec::with_capacity(runs.len());
    let mut qoe_series = vec![KahanSum::default(); rounds];

    for (i, run) in runs.iter().enumerate() {
        if run.records.len() != rounds {
            return Err(SimError::LengthMismatch {
                policy: policy.to_string(),
                run: i as u32,
                expected: rounds,
                actual: run.records.len(),
            });
        }
        let tail = &run.records[tail_start..];
        let att: Vec<f64> = tail.iter().map(|r| r.attendance as f64).collect();
        run_att_mean.push(kahan_sum(att.iter().copied()) / att.len() as f64);
        run_att_var.push(sample_variance(&att));
        run_qoe_tail.push(kahan_sum(tail.iter().map(|r| r.qoe_tail)) / tail.len() as f64);
        run_util_full.push(mean_utility(&run.records, players));
        run_util_tail.push(mean_utility(tail, players));
        for (acc, r) in qoe_series.iter_mut().zip(run.records.iter()) {
            acc.add(r.qoe_tail);
        }
    }

    let (mean_attendance, attendance_stderr) = mean_and_stderr(&run_att_mean);
    let (attendance_variance, _) = mean_and_stderr(&run_att_var);
    let (mean_qoe_tail, _) = mean_and_stderr(&run_qoe_tail);
    let (mean_utility, utility_stderr) = mean_and_stderr(&run_util_full);
    let (mean_utility_tail, utility_tail_stderr) = mean_and_stderr(&run_util_tail);
    let n_runs = runs.len() as f64;
    Ok(PolicyMetrics {
        mean_attendance,
        attendance_stderr,
        attendance_variance,
        mean_qoe_tail,
        mean_utility,
        utility_stderr,
        mean_utility_tail,
        utility_tail_stderr,
        qoe_series: qoe_series.iter().map(|s| s.value() / n_runs).collect(),
    })
}

fn mean_utility(records: &[RoundRecord], players: usize) -> f64 {
    let total = kahan_sum(
        records
            .iter()
            .map(|r| r.utilities.iter().map(|&u| u as u32).sum::<u32>() as f64),
    );
    total / (records.len() as f64 * players as f64)
}
