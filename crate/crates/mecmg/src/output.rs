//! Machine-readable emission: CSV tables and JSON reports.
//!
//! Every floating-point value is rendered with 17 significant digits (full
//! f64 round-trip precision) and every map is emitted in a fixed key order,
//! so regenerating an artifact from the same parameters is byte-identical
//! and diff-stable.

use crate::planner::{PlanResult, SweepRow};
use crate::sim::{AggregateMetrics, PolicyMetrics, RunResult};
use serde_json::{Map, Number, Value};
use std::fmt::Write as _;
use std::str::FromStr;

/// 17-significant-digit scientific rendering of a finite double, with an
/// explicit exponent sign so it matches serde_json's number writer byte for
/// byte.
pub fn g17(v: f64) -> String {
    let s = format!("{v:.16e}");
    match s.find('e') {
        Some(i) if !matches!(s.as_bytes()[i + 1], b'-' | b'+') => {
            format!("{}e+{}", &s[..i], &s[i + 1..])
        }
        _ => s,
    }
}

/// A JSON number carrying the exact 17-digit rendering (the
/// `arbitrary_precision` feature passes the literal through verbatim).
fn num(v: f64) -> Value {
    match Number::from_str(&g17(v)) {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null, // non-finite; never produced by validated paths
    }
}

fn int(v: impl Into<i64>) -> Value {
    Value::Number(Number::from(v.into()))
}

pub const PLAN_COLUMNS: [&str; 10] = [
    "beta", "mu_theta", "var_theta", "k_max", "k_min", "c_min", "c_max", "c_th_real", "c_th",
    "e_p_star",
];

fn plan_fields(p: &PlanResult) -> Vec<(&'static str, Value)> {
    vec![
        ("beta", num(p.beta)),
        ("mu_theta", num(p.mu_theta)),
        ("var_theta", num(p.var_theta)),
        ("k_max", num(p.k_max)),
        ("k_min", num(p.k_min)),
        ("c_min", num(p.c_min)),
        ("c_max", num(p.c_max)),
        ("c_th_real", num(p.c_th_real)),
        ("c_th", int(p.c_th)),
        ("e_p_star", num(p.e_p_star)),
    ]
}

fn ordered(fields: Vec<(&'static str, Value)>) -> Value {
    // the preserve_order feature keeps insertion order in emitted objects
    let mut m = Map::new();
    for (k, v) in fields {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

/// Flat JSON record of a plan.
pub fn plan_json(p: &PlanResult) -> String {
    let mut s = serde_json::to_string_pretty(&ordered(plan_fields(p))).expect("static structure");
    s.push('\n');
    s
}

fn plan_csv_row(p: &PlanResult) -> Vec<String> {
    plan_fields(p)
        .into_iter()
        .map(|(_, v)| match v {
            Value::Number(n) => n.to_string(),
            _ => String::new(),
        })
        .collect()
}

/// Single-row CSV of a plan with the stable column set.
pub fn plan_csv(p: &PlanResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PLAN_COLUMNS).expect("in-memory write");
    w.write_record(plan_csv_row(p)).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flushed")).expect("utf8")
}

/// Sweep CSV: the plan columns plus a trailing feasibility marker; rows the
/// planner could not derive at all keep only `beta`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = PLAN_COLUMNS.to_vec();
    header.push("feasible");
    w.write_record(&header).expect("in-memory write");
    for row in rows {
        let mut rec: Vec<String> = match row.derived() {
            Some(p) => plan_csv_row(p),
            None => {
                let mut empty = vec![String::new(); PLAN_COLUMNS.len()];
                empty[0] = g17(row.beta);
                empty
            }
        };
        rec.push(row.feasible().to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flushed")).expect("utf8")
}

/// Sweep as a JSON array mirroring the CSV.
pub fn sweep_json(rows: &[SweepRow]) -> String {
    let arr: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut fields = match row.derived() {
                Some(p) => plan_fields(p),
                None => vec![("beta", num(row.beta))],
            };
            fields.push(("feasible", Value::Bool(row.feasible())));
            ordered(fields)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(arr)).expect("static structure");
    s.push('\n');
    s
}

/// Per-run CSV: `t, attendance, winning_bit, jobs_per_server, qoe_tail,
/// mean_utility`; undefined loads are empty cells.
pub fn run_csv(run: &RunResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "t",
        "attendance",
        "winning_bit",
        "jobs_per_server",
        "qoe_tail",
        "mean_utility",
    ])
    .expect("in-memory write");
    for r in &run.records {
        w.write_record([
            r.t.to_string(),
            r.attendance.to_string(),
            r.winning_bit.to_string(),
            r.jobs_per_server.map(g17).unwrap_or_default(),
            g17(r.qoe_tail),
            g17(r.mean_utility()),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flushed")).expect("utf8")
}

fn policy_value(m: &PolicyMetrics) -> Value {
    ordered(vec![
        ("mean_attendance", num(m.mean_attendance)),
        ("attendance_stderr", num(m.attendance_stderr)),
        ("attendance_variance", num(m.attendance_variance)),
        ("mean_qoe_tail", num(m.mean_qoe_tail)),
        ("mean_utility", num(m.mean_utility)),
        ("utility_stderr", num(m.utility_stderr)),
        ("mean_utility_tail", num(m.mean_utility_tail)),
        ("utility_tail_stderr", num(m.utility_tail_stderr)),
        (
            "qoe_series",
            Value::Array(m.qoe_series.iter().map(|&q| num(q)).collect()),
        ),
    ])
}

/// The aggregate report for one experiment.
pub fn aggregate_json(agg: &AggregateMetrics) -> String {
    let root = ordered(vec![
        ("rounds", int(agg.rounds)),
        ("runs", int(agg.runs)),
        ("tail_start", int(agg.tail_start)),
        ("mg", policy_value(&agg.mg)),
        ("random", policy_value(&agg.random)),
        ("optimal", policy_value(&agg.optimal)),
    ]);
    let mut s = serde_json::to_string_pretty(&root).expect("static structure");
    s.push('\n');
    s
}

/// Ordering report for `compare`.
pub fn comparison_json(agg: &AggregateMetrics) -> (String, bool) {
    let gap_mg_random = agg.mg.mean_utility - agg.random.mean_utility;
    let gap_opt_mg = agg.optimal.mean_utility - agg.mg.mean_utility;
    let se_mg_random = (agg.mg.utility_stderr.powi(2) + agg.random.utility_stderr.powi(2)).sqrt();
    let se_opt_mg = (agg.optimal.utility_stderr.powi(2) + agg.mg.utility_stderr.powi(2)).sqrt();
    let holds = gap_opt_mg > 0.0 && gap_mg_random > 0.0;
    let separated = gap_opt_mg > 2.0 * se_opt_mg && gap_mg_random > 2.0 * se_mg_random;
    let root = ordered(vec![
        ("utility_optimal", num(agg.optimal.mean_utility)),
        ("utility_mg", num(agg.mg.mean_utility)),
        ("utility_random", num(agg.random.mean_utility)),
        ("gap_optimal_minus_mg", num(gap_opt_mg)),
        ("gap_mg_minus_random", num(gap_mg_random)),
        ("combined_stderr_optimal_mg", num(se_opt_mg)),
        ("combined_stderr_mg_random", num(se_mg_random)),
        ("ordering_holds", Value::Bool(holds)),
        ("gaps_exceed_two_stderr", Value::Bool(separated)),
    ]);
    let mut s = serde_json::to_string_pretty(&root).expect("static structure");
    s.push('\n');
    (s, holds)
}

/// Human-readable one-screen plan summary.
pub fn plan_summary(p: &PlanResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "delay moments: mu_theta = {:.6}, var_theta = {:.6}", p.mu_theta, p.var_theta);
    let _ = writeln!(out, "job bounds:    k_min = {:.6}, k_max = {:.6}", p.k_min, p.k_max);
    let _ = writeln!(out, "server bounds: c_min = {:.6}, c_max = {:.6}", p.c_min, p.c_max);
    let _ = writeln!(
        out,
        "cut-off:       c_th_real = {:.6} (floor {}, ceil {}; the game uses {})",
        p.c_th_real,
        p.c_th_real.floor() as i64,
        p.c_th_real.ceil() as i64,
        p.c_th
    );
    let _ = writeln!(out, "price:         e_p_star = {:.6}", p.e_p_star);
    out
}
