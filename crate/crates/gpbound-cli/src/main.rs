//! Command-line front end: compute certified bounds, verify them by
//! sampling, sweep ball multipliers, generate seeded random instances, and
//! time benchmark cells. JSON goes to stdout, human summaries to stderr.
//! Exit codes: 0 success, 2 when the result is minus infinity (the value is
//! still printed), 1 on errors.

use std::path::PathBuf;
use std::process::exit;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gpbound::bench::run_cell;
use gpbound::bounds::{
    ball_lower_bound_with, ball_program, lower_bound_with, Bound, BoundError, BoundOptions,
    BoundValue,
};
use gpbound::gp::{build_unconstrained_gp, log_transform};
use gpbound::instance::{random_instance, DiagonalKind, InstanceSpec};
use gpbound::oracle::{lambda_sweep, sample_ball_check};
use gpbound::parse::parse_polynomial;
use gpbound::poly::Polynomial;

#[derive(Parser)]
#[command(
    name = "gpbound",
    version,
    about = "Certified lower bounds for sparse polynomials via geometric programming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower bound over R^n, or over the ball `sum x_i^{2d} <= M` with --ball
    Compute {
        #[command(flatten)]
        input: PolyInput,
        /// Ball volume parameter M; omit for the bound over all of R^n
        #[arg(long)]
        ball: Option<f64>,
        /// Accept the first converged solve instead of refining the gap
        #[arg(long)]
        fast: bool,
        /// Include the geometric program and its log-convex form in the output
        #[arg(long)]
        dump_gp: bool,
        /// Relative duality-gap tolerance for the solver
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sample the ball uniformly and report any point below a claimed bound
    Verify {
        #[command(flatten)]
        input: PolyInput,
        #[arg(long)]
        ball: f64,
        /// The claimed lower bound to check
        #[arg(long, allow_hyphen_values = true)]
        bound: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Bound the ball minimum through a grid of Lagrange multipliers
    Sweep {
        #[command(flatten)]
        input: PolyInput,
        #[arg(long)]
        ball: f64,
        /// Comma-separated multiplier values, e.g. 0,0.5,1,2
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
    },
    /// Generate a seeded random instance: diagonal plus sparse integer terms
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        two_d: u32,
        /// Number of off-diagonal, non-constant terms
        #[arg(long)]
        omega_size: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = DiagonalArg::Unit)]
        diagonal: DiagonalArg,
        #[arg(long, default_value_t = -10, allow_hyphen_values = true)]
        coeff_min: i64,
        #[arg(long, default_value_t = 10, allow_hyphen_values = true)]
        coeff_max: i64,
    },
    /// Time batches of random instances at fixed shapes
    Bench {
        /// 1 = small-dimension grid, 2 = one sparse high-degree cell
        #[arg(long)]
        table: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads per cell
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Instances per cell
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Override the per-cell term count (default: n for table 1, 10 for table 2)
        #[arg(long)]
        omega_size: Option<usize>,
    },
}

#[derive(Args)]
struct PolyInput {
    /// Polynomial file, JSON: {"n": .., "two_d": .., "terms": [{"coeff": .., "exp": [..]}]}
    #[arg(long, conflicts_with = "expr")]
    poly: Option<PathBuf>,
    /// Inline expression, e.g. "x0^4 - 8*x0^3 + 8*x0^2 + 1"
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    /// Variable count for --expr (default: inferred from the variables used)
    #[arg(long, requires = "expr")]
    num_vars: Option<usize>,
    /// Even working degree for --expr (default: smallest even cover of the total degree)
    #[arg(long, requires = "expr")]
    degree: Option<u32>,
}

impl PolyInput {
    fn load(&self) -> Result<Polynomial, String> {
        match (&self.poly, &self.expr) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("reading {}: {e}", path.display()))?;
                serde_json::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))
            }
            (None, Some(expr)) => parse_polynomial(expr, self.num_vars, self.degree)
                .map_err(|e| format!("parsing expression: {e}")),
            _ => Err("exactly one of --poly and --expr is required".into()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagonalArg {
    Unit,
    RandomPositive,
    None,
}

impl From<DiagonalArg> for DiagonalKind {
    fn from(d: DiagonalArg) -> Self {
        match d {
            DiagonalArg::Unit => DiagonalKind::Unit,
            DiagonalArg::RandomPositive => DiagonalKind::RandomPositive,
            DiagonalArg::None => DiagonalKind::Absent,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap reserves exit code 2 for usage errors; this tool uses 2
            // for minus-infinity results, so usage errors become 1
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            exit(code);
        }
    };
    match run(cli) {
        Ok(code) => exit(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Compute {
            input,
            ball,
            fast,
            dump_gp,
            tol,
        } => compute(&input.load()?, ball, fast, dump_gp, tol),
        Command::Verify {
            input,
            ball,
            bound,
            samples,
            seed,
        } => verify(&input.load()?, ball, bound, samples, seed),
        Command::Sweep { input, ball, grid } => sweep(&input.load()?, ball, &grid),
        Command::Gen {
            n,
            two_d,
            omega_size,
            seed,
            diagonal,
            coeff_min,
            coeff_max,
        } => gen(&InstanceSpec {
            n,
            degree: two_d,
            omega_size,
            coeff_min,
            coeff_max,
            diagonal: diagonal.into(),
            seed,
        }),
        Command::Bench {
            table,
            seed,
            jobs,
            count,
            omega_size,
        } => bench(table, seed, jobs, count, omega_size),
    }
}

fn exit_code(value: BoundValue) -> i32 {
    match value {
        BoundValue::Finite(_) => 0,
        BoundValue::NegInf => 2,
    }
}

fn compute(
    p: &Polynomial,
    ball: Option<f64>,
    fast: bool,
    dump_gp: bool,
    tol: Option<f64>,
) -> Result<i32, String> {
    let mut options = BoundOptions {
        fast,
        ..BoundOptions::default()
    };
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(format!("tolerance must be positive and finite, got {t}"));
        }
        options.settings.tolerance = t;
    }

    let start = Instant::now();
    let result = match ball {
        Some(m) => ball_lower_bound_with(p, m, &options),
        None => lower_bound_with(p, &options),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (bound, warning): (Bound, Option<&str>) = match result {
        Ok(b) => (b, None),
        Err(BoundError::Unconverged { bound }) => (
            *bound,
            Some("solver stopped before tolerance; the bound is valid but loose"),
        ),
        Err(e) => return Err(e.to_string()),
    };

    let mut out = json!({
        "polynomial": p,
        "result": bound.to_json(),
        "seconds": seconds,
    });
    if let Some(w) = warning {
        out["warning"] = json!(w);
    }
    if dump_gp {
        out["program"] = dump_program(p, ball);
    }
    println!("{}", serde_json::to_string_pretty(&out).unwrap());

    let region = match ball {
        Some(m) => format!("ball sum x_i^{} <= {m}", p.degree()),
        None => "R^n".into(),
    };
    match bound.value {
        BoundValue::Finite(v) => eprintln!("lower bound on {region}: {v}  ({seconds:.3}s)"),
        BoundValue::NegInf => eprintln!("no bound on {region}: -inf  ({seconds:.3}s)"),
    }
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
    Ok(exit_code(bound.value))
}

/// The program behind the bound: for ball bounds also the capacity-chain
/// permutation (variables sorted by descending diagonal coefficient).
fn dump_program(p: &Polynomial, ball: Option<f64>) -> serde_json::Value {
    let built = match ball {
        Some(m) => ball_program(p, m)
            .map(|(gp, perm)| (gp, Some(perm)))
            .map_err(|e| e.to_string()),
        None => build_unconstrained_gp(&p.support_sets(), p.degree())
            .map(|gp| (gp, None))
            .map_err(|e| e.to_string()),
    };
    match built {
        Ok((gp, perm)) => json!({
            "geometric": gp.to_json(),
            "log_convex": log_transform(&gp).to_json(),
            "sorted_from_original": perm,
        }),
        Err(e) => json!({ "unbuildable": e }),
    }
}

fn verify(p: &Polynomial, ball: f64, bound: f64, samples: usize, seed: u64) -> Result<i32, String> {
    let rep = sample_ball_check(p, ball, bound, samples, seed).map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&rep.to_json()).unwrap());
    if rep.ok() {
        eprintln!(
            "ok: {} samples stayed above {bound} (min observed {})",
            rep.samples, rep.min_observed
        );
    } else {
        eprintln!(
            "REFUTED: {} of {} samples fall below {bound} (min observed {})",
            rep.violations.len(),
            rep.samples,
            rep.min_observed
        );
    }
    Ok(0)
}

fn sweep(p: &Polynomial, ball: f64, grid: &[f64]) -> Result<i32, String> {
    let sw = lambda_sweep(p, ball, grid).map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&sw.to_json()).unwrap());
    for e in &sw.entries {
        match e.value {
            BoundValue::Finite(v) => eprintln!("lambda {:>10}: {v}", e.lambda),
            BoundValue::NegInf => eprintln!("lambda {:>10}: -inf", e.lambda),
        }
    }
    eprintln!("best: lambda = {}, bound = {:?}", sw.best_lambda, sw.best_value);
    Ok(exit_code(sw.best_value))
}

fn gen(spec: &InstanceSpec) -> Result<i32, String> {
    let p = random_instance(spec).map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&p).unwrap());
    eprintln!("{p}");
    eprintln!(
        "n = {}, 2d = {}, {} terms",
        p.num_vars(),
        p.degree(),
        p.terms().count()
    );
    Ok(0)
}

const TABLE_ONE: &[(usize, u32)] = &[(3, 4), (3, 6), (3, 8), (3, 10), (4, 4), (4, 6), (5, 4)];

fn bench(
    table: u8,
    seed: u64,
    jobs: usize,
    count: usize,
    omega_size: Option<usize>,
) -> Result<i32, String> {
    if jobs == 0 {
        return Err("need at least one worker".into());
    }
    let cells: Vec<(usize, u32, Option<usize>)> = match table {
        1 => TABLE_ONE
            .iter()
            .map(|&(n, d)| (n, d, omega_size))
            .collect(),
        2 => vec![(10, 20, Some(omega_size.unwrap_or(10)))],
        t => return Err(format!("unknown table {t}; choose 1 or 2")),
    };

    let mut results = Vec::with_capacity(cells.len());
    for (n, degree, omega) in cells {
        let cell_seed = gpbound::instance::splitmix64(seed ^ (((n as u64) << 32) | degree as u64));
        let cell = run_cell(n, degree, omega, count, cell_seed, jobs).map_err(|e| e.to_string())?;
        eprintln!(
            "n = {n:>2}, 2d = {degree:>2}, |terms| = {:>2}: avg {:>8.4}s, max {:>8.4}s over {count} instances",
            cell.omega_size, cell.avg_seconds, cell.max_seconds
        );
        results.push(cell.to_json());
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "table": table, "cells": results })).unwrap()
    );
    Ok(0)
}
