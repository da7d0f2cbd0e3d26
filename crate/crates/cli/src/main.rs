//! `cnm`: run the adaptive cubic-regularized Newton methods on catalog
//! problems, single solves or full benchmark sweeps with performance
//! profiles.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cubic_newton::{first_order_cnm, zero_order_cnm, DriverConfig, Termination};
use cubic_newton_cli::report::{format_run, write_all, write_trace};
use cubic_newton_cli::runner::{run_benchmark, RunOutcome};
use cubic_newton_cli::spec::{
    all_problem_names, parse_list, resolve_problem, BenchmarkSpec, MChoice, Method,
};
use cubic_newton_cli::CliError;

#[derive(Parser)]
#[command(
    name = "cnm",
    about = "Adaptive first- and zeroth-order cubic-regularized Newton methods",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a single problem and print the run report.
    Solve(SolveArgs),
    /// Sweep methods x m-schedules over problems; write summary.tsv and
    /// profile_<method>.tsv (Dolan-Moré data) to the output directory.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Method: fo (first-order) or zo (zeroth-order).
    #[arg(long, default_value = "fo")]
    method: String,
    /// Problem name (catalog name or synthetic-<n>d).
    #[arg(long, short = 'p')]
    problem: String,
    /// Lazy schedule: a positive integer, n, or 2n.
    #[arg(long, default_value = "n")]
    m: String,
    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// Oracle budget (f+grad calls for fo, f calls for zo).
    #[arg(long, default_value_t = 3000)]
    budget: u64,
    /// Require second-order certificates (disables the stationarity stop).
    #[arg(long)]
    second_order: bool,
    /// Record the per-step trace; with --out also writes the trace CSV.
    #[arg(long)]
    trace: bool,
    /// Seed for synthetic problems.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the trace CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated methods (fo, zo).
    #[arg(long, default_value = "fo,zo")]
    methods: String,
    /// Comma-separated m choices (integers, n, 2n).
    #[arg(long, default_value = "1,n,2n")]
    m: String,
    /// Comma-separated problem names, or "all" for the whole catalog.
    #[arg(long, short = 'p', default_value = "all")]
    problems: String,
    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = 3000)]
    budget: u64,
    #[arg(long)]
    second_order: bool,
    /// Also write per-run trace CSVs.
    #[arg(long)]
    trace: bool,
    /// Seed for synthetic problems.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (results are merged deterministically).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let method: Method = args.method.parse()?;
    let m_choice: MChoice = args.m.parse()?;
    let entry = resolve_problem(&args.problem, args.seed)?;
    let m = m_choice.resolve(entry.dim).max(1);
    let cfg = DriverConfig {
        tau0: args.tau0,
        eps: args.eps,
        m,
        budget: Some(args.budget),
        second_order: args.second_order,
        record_trace: args.trace || args.out.is_some(),
        ..DriverConfig::default()
    };
    let report = match method {
        Method::Fo => {
            let p = entry.build();
            first_order_cnm(&p, &entry.standard_start, &cfg)?
        }
        Method::Zo => {
            let p = entry.build();
            zero_order_cnm(&p, &entry.standard_start, &cfg)?
        }
    };
    let termination = report.termination;
    let outcome = RunOutcome {
        problem: entry.name.clone(),
        method,
        m_label: m_choice.label(),
        m,
        success: termination == Termination::SolutionFound,
        metric: (termination == Termination::SolutionFound)
            .then(|| report.oracle_totals.budgeted_tally()),
        best_f: report.best_f,
        termination,
        report,
    };
    print!("{}", format_run(&outcome));
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        write_trace(dir, &outcome)?;
        println!("trace written under {}", dir.display());
    }
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let methods = parse_list::<Method>(&args.methods)?;
    let m_choices = parse_list::<MChoice>(&args.m)?;
    let problems = if args.problems.trim() == "all" {
        all_problem_names()
    } else {
        args.problems
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().to_string())
            .collect()
    };
    let spec = BenchmarkSpec {
        methods,
        m_choices,
        problems,
        tau0: args.tau0,
        eps: args.eps,
        budget: args.budget,
        seed: args.seed,
        output_dir: args.out.clone(),
        second_order: args.second_order,
        write_traces: args.trace,
        jobs: args.jobs,
    };
    let res = run_benchmark(&spec)?;
    write_all(&spec, &res)?;
    let solved = res.outcomes.iter().filter(|o| o.success).count();
    println!(
        "{} runs ({} successful); artifacts under {}",
        res.outcomes.len(),
        solved,
        spec.output_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Solve(args) => solve(args),
        Cmd::Bench(args) => bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
