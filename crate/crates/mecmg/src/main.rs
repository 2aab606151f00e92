//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 infeasible plan,
//! 4 runtime failure (I/O, or a failed ordering assertion in `compare`).

use clap::{Args, Parser, Subcommand, ValueEnum};
use mecmg::config::{self, ConfigError, Overrides};
use mecmg::game::ScoringMode;
use mecmg::output;
use mecmg::planner::{self, PlanError};
use mecmg::sim::{Experiment, ExecMode, Policy, SimError, SystemParams};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(
    name = "mecmg",
    version,
    about = "Minority-game activation planner and simulator for edge compute pools"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive delay moments, job bounds, the activation cut-off, and the price
    Plan(CommonArgs),
    /// Tabulate the plan over a grid of QoE levels
    SweepBeta {
        #[command(flatten)]
        common: CommonArgs,
        /// Lowest beta (exclusive of 0)
        #[arg(long)]
        from: f64,
        /// Highest beta (must stay below 0.5)
        #[arg(long)]
        to: f64,
        /// Number of grid points
        #[arg(long)]
        steps: u32,
    },
    /// Run the minority game plus both baselines and aggregate the metrics
    Simulate(CommonArgs),
    /// Simulate, then assert the utility ordering optimal > mg > random
    Compare(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key-value parameter file
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<u32>,
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long)]
    beta: Option<f64>,
    /// History length m
    #[arg(long)]
    memory: Option<u32>,
    #[arg(long, value_enum)]
    scoring: Option<ScoringArg>,
    /// Output directory (default: $MECMG_OUT, then ./out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable format for sweep tables
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoringArg {
    Literal,
    Virtual,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            runs: self.runs,
            rounds: self.rounds,
            beta: self.beta,
            memory: self.memory,
            scoring: self.scoring.map(|s| match s {
                ScoringArg::Literal => ScoringMode::Literal,
                ScoringArg::Virtual => ScoringMode::Virtual,
            }),
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os("MECMG_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    fn params(&self) -> Result<SystemParams, CliError> {
        let params = config::load_params(&self.config, &self.overrides())?;
        params.validate().map_err(|e| match e {
            SimError::InvalidParam { field, message } => {
                CliError::config(format!("invalid {field}: {message}"))
            }
            other => CliError::config(other.to_string()),
        })?;
        Ok(params)
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INFEASIBLE,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_plan(args: &CommonArgs) -> Result<(), CliError> {
    let params = args.params()?;
    let dir = args.out_dir();
    let (result, infeasible_reason) = match planner::plan(&params) {
        Ok(r) => (r, None),
        Err(PlanError::Infeasible { result, reason }) => (*result, Some(reason)),
        Err(e) => return Err(CliError::config(e.to_string())),
    };
    print!("{}", output::plan_summary(&result));
    for w in result.warnings() {
        eprintln!("warning: {w}");
    }
    write_file(&dir, "plan.json", &output::plan_json(&result))?;
    write_file(&dir, "plan.csv", &output::plan_csv(&result))?;
    if let Some(reason) = infeasible_reason {
        eprintln!("infeasible: {reason}");
        return Err(CliError::infeasible(format!(
            "the derived numbers are written above; {reason}"
        )));
    }
    Ok(())
}

fn cmd_sweep(args: &CommonArgs, from: f64, to: f64, steps: u32) -> Result<(), CliError> {
    if steps < 1 {
        return Err(CliError::config("steps must be at least 1"));
    }
    if !(from > 0.0 && from < 0.5) || !(to > 0.0 && to < 0.5) {
        return Err(CliError::config("beta grid must lie inside (0, 0.5)"));
    }
    if steps > 1 && !(from < to) {
        return Err(CliError::config("reversed range: --from must be below --to"));
    }
    let params = args.params()?;
    let betas: Vec<f64> = if steps == 1 {
        vec![from]
    } else {
        (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    let rows = planner::beta_sweep(&params, &betas);
    let feasible = rows.iter().filter(|r| r.feasible()).count();
    println!("{} rows ({} feasible)", rows.len(), feasible);
    let dir = args.out_dir();
    match args.format {
        FormatArg::Csv => write_file(&dir, "beta_sweep.csv", &output::sweep_csv(&rows))?,
        FormatArg::Json => write_file(&dir, "beta_sweep.json", &output::sweep_json(&rows))?,
    }
    Ok(())
}

fn run_experiment(args: &CommonArgs) -> Result<(Experiment, mecmg::sim::AggregateMetrics), CliError> {
    let params = args.params()?;
    let experiment = match Experiment::from_plan(params) {
        Ok(e) => e,
        Err(SimError::Plan(PlanError::Infeasible { reason, .. })) => {
            return Err(CliError::infeasible(reason))
        }
        Err(e) => return Err(CliError::config(e.to_string())),
    };
    let runs = experiment.run_all(ExecMode::default());
    let dir = args.out_dir();
    let run_dir = dir.join("runs");
    std::fs::create_dir_all(&run_dir)?;
    for policy in Policy::ALL {
        for (i, run) in runs.get(policy).iter().enumerate() {
            let name = format!("{}_run{i:03}.csv", policy.tag());
            std::fs::write(run_dir.join(&name), output::run_csv(run))?;
        }
    }
    println!("wrote {} per-run tables under {}", 3 * experiment.params().runs, run_dir.display());
    let agg = experiment
        .aggregate(&runs)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    write_file(&dir, "aggregate.json", &output::aggregate_json(&agg))?;
    println!(
        "mean attendance (tail): mg {:.4}, random {:.4}, optimal {:.4}",
        agg.mg.mean_attendance, agg.random.mean_attendance, agg.optimal.mean_attendance
    );
    println!(
        "mean QoE tail  (tail):  mg {:.4}, random {:.4}, optimal {:.4}",
        agg.mg.mean_qoe_tail, agg.random.mean_qoe_tail, agg.optimal.mean_qoe_tail
    );
    println!(
        "mean utility   (full):  mg {:.4}, random {:.4}, optimal {:.4}",
        agg.mg.mean_utility, agg.random.mean_utility, agg.optimal.mean_utility
    );
    Ok((experiment, agg))
}

fn cmd_simulate(args: &CommonArgs) -> Result<(), CliError> {
    run_experiment(args).map(|_| ())
}

fn cmd_compare(args: &CommonArgs) -> Result<(), CliError> {
    let (_, agg) = run_experiment(args)?;
    let (report, holds) = output::comparison_json(&agg);
    write_file(&args.out_dir(), "comparison.json", &report)?;
    if holds {
        println!("ordering optimal > mg > random: holds");
        Ok(())
    } else {
        Err(CliError::runtime(
            "utility ordering optimal > mg > random violated; see comparison.json",
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Plan(args) => cmd_plan(args),
        Cmd::SweepBeta {
            common,
            from,
            to,
            steps,
        } => cmd_sweep(common, *from, *to, *steps),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
