//! `equitynet`: solve, optimize and sweep equity contracts on networks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use equitynet::equilibrium::solve_equilibrium;
use equitynet::objective::{optimize, Objective};
use equitynet::sweep::{sweep, to_csv, SweepParam};
use equitynet::verify::{render_table, run_all, VerifyConfig};
use equitynet::{EquityAllocation, Error, SuccessModel, WeightedNetwork};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "equitynet",
    version,
    about = "Optimal equity contracts for teams on complementarity networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Network JSON: {"n": N, "edges": [[i, j, w], ...]} or {"n": N, "matrix": [...]}.
    #[arg(long)]
    network: PathBuf,
    /// Success model JSON: {"family": "capped_linear", "alpha", "cap", "beta"}
    /// or {"family": "saturating", "kappa", "lambda", "beta"}.
    #[arg(long)]
    model: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Nash equilibrium for given shares.
    Equilibrium {
        #[command(flatten)]
        inputs: Inputs,
        /// JSON array of shares, one per agent, summing to at most 1.
        #[arg(long)]
        shares: PathBuf,
    },
    /// Optimal contract for an objective.
    Optimize {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "sp", value_parser = ["rp", "sp"])]
        objective: String,
    },
    /// Optimal contracts along a parameter range, as CSV.
    ///
    /// Columns: param, sigma_0..sigma_{n-1}, U_0..U_{n-1}, Y, c, s,
    /// active_mask (bit i set when agent i is active). Failed points are
    /// rows of NaN.
    Sweep {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "sp", value_parser = ["rp", "sp"])]
        objective: String,
        /// `beta` or `link(i,j)` with 0-based agent indices.
        #[arg(long)]
        param: String,
        /// Inclusive range LO:HI.
        #[arg(long)]
        range: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Run the verification suite and print a pass/fail table.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Use the full batch sizes instead of the quick ones.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Solver(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidNetwork(_)
            | Error::InvalidModel(_)
            | Error::InvalidAllocation(_)
            | Error::IndexOutOfRange(_)
            | Error::OutOfRange(_)
            | Error::Parse(_)
            | Error::NotUnweighted
            | Error::BadNormalization
            | Error::TooLargeForEnumeration { .. } => Failure::Input(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(inputs: &Inputs) -> Result<(WeightedNetwork, SuccessModel), Failure> {
    let net = WeightedNetwork::from_json(&read(&inputs.network)?)?;
    let model = SuccessModel::from_json(&read(&inputs.model)?)?;
    Ok((net, model))
}

fn parse_range(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Input(format!("range must be LO:HI, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Equilibrium { inputs, shares } => {
            let (net, model) = load(&inputs)?;
            let values: Vec<f64> = serde_json::from_str(&read(&shares)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", shares.display())))?;
            let alloc = EquityAllocation::new(values)?;
            let eq = solve_equilibrium(&net, &model, &alloc)?;
            write(inputs.out.as_deref(), &pretty(&json!(eq)))
        }
        Command::Optimize { inputs, objective } => {
            let (net, model) = load(&inputs)?;
            let objective: Objective = objective.parse()?;
            let c = optimize(&net, &model, objective)?;
            let body = json!({
                "objective": c.objective,
                "active_set": c.active_set,
                "shares": c.allocation,
                "c": c.c,
                "s_star": c.s_star,
                "performance": c.equilibrium.performance,
                "objective_value": c.principal_value,
                "equilibrium": c.equilibrium,
                "balance": c.balance,
                "ties": c.ties,
                "grid_discrepancy": c.grid_discrepancy,
            });
            write(inputs.out.as_deref(), &pretty(&body))
        }
        Command::Sweep {
            inputs,
            objective,
            param,
            range,
            steps,
        } => {
            let (net, model) = load(&inputs)?;
            let objective: Objective = objective.parse()?;
            let param: SweepParam = param.parse()?;
            let (lo, hi) = parse_range(&range)?;
            let rows = sweep(&net, &model, objective, param, lo, hi, steps)?;
            write(inputs.out.as_deref(), &to_csv(&rows, net.n()))
        }
        Command::Verify { seed, full, out } => {
            let cfg = if full {
                VerifyConfig::full(seed)
            } else {
                VerifyConfig::desk(seed)
            };
            let outcomes = run_all(&cfg);
            write(out.as_deref(), &render_table(&outcomes))?;
            if outcomes.iter().all(|o| o.passed) {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("EQUITYNET_THREADS") else {
        return;
    };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring EQUITYNET_THREADS={v:?}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
