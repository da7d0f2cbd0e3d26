//! Plain-text artifact writers. Output is TSV/CSV only; plotting is left to
//! external tools. Re-running the same spec overwrites the files with
//! byte-identical content.

use std::fs;
use std::path::Path;

use crate::runner::{BenchResult, RunOutcome};
use crate::spec::BenchmarkSpec;
use crate::CliError;

fn fmt_opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `summary.tsv`: one row per run.
pub fn write_summary(dir: &Path, outcomes: &[RunOutcome]) -> Result<(), CliError> {
    let mut out = String::from("problem\tmethod\tm\tsuccess\tmetric\tbest_F\ttermination\n");
    for o in outcomes {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            o.problem,
            o.method.as_str(),
            o.m_label,
            o.success,
            fmt_opt_u64(o.metric),
            o.best_f,
            o.termination,
        ));
    }
    fs::write(dir.join("summary.tsv"), out)?;
    Ok(())
}

/// `profile_<method>.tsv`: the curve of every variant on the fixed x grid,
/// with dropped problems listed in a trailing comment row.
pub fn write_profiles(dir: &Path, res: &BenchResult) -> Result<(), CliError> {
    for (method, table) in &res.profiles {
        let mut out = String::from("x");
        for v in &table.variants {
            out.push_str(&format!("\tcurve_{v}"));
        }
        out.push('\n');
        for (i, x) in table.xs.iter().enumerate() {
            out.push_str(&x.to_string());
            for curve in &table.curves {
                out.push_str(&format!("\t{}", curve[i]));
            }
            out.push('\n');
        }
        if !table.dropped.is_empty() {
            out.push_str(&format!(
                "# dropped (no finisher): {}\n",
                table.dropped.join(",")
            ));
        }
        fs::write(dir.join(format!("profile_{}.tsv", method.as_str())), out)?;
    }
    Ok(())
}

/// Per-run trace CSV with the per-step records.
pub fn write_trace(dir: &Path, o: &RunOutcome) -> Result<(), CliError> {
    let Some(trace) = &o.report.full_trace else {
        return Ok(());
    };
    let mut out = String::from("k,ell,t,sigma,h,f_evals,grad_evals,F,grad_residual,stationarity\n");
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.k,
            r.ell,
            r.t,
            r.sigma,
            r.h,
            r.f_evals,
            r.grad_evals,
            fmt_opt_f64(r.f_value),
            r.grad_residual,
            fmt_opt_f64(r.stationarity),
        ));
    }
    let name = format!("trace_{}_{}_m{}.csv", o.problem, o.method.as_str(), o.m_label);
    fs::write(dir.join(name), out)?;
    Ok(())
}

/// `bench_config.txt`: the protocol parameters and the fixed subproblem
/// solver constants, for reproducibility.
pub fn write_config(dir: &Path, spec: &BenchmarkSpec) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("# benchmark configuration\n");
    out.push_str(&format!(
        "methods = {}\n",
        spec.methods
            .iter()
            .map(|m| m.as_str().to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    out.push_str(&format!(
        "m_choices = {}\n",
        spec.m_choices
            .iter()
            .map(|m| m.label())
            .collect::<Vec<_>>()
            .join(",")
    ));
    out.push_str(&format!("problems = {}\n", spec.problems.join(",")));
    out.push_str(&format!("tau0 = {}\n", spec.tau0));
    out.push_str(&format!("eps = {}\n", spec.eps));
    out.push_str(&format!("budget = {}\n", spec.budget));
    out.push_str(&format!("seed = {}\n", spec.seed));
    out.push_str(&format!("second_order = {}\n", spec.second_order));
    out.push_str("# subproblem solver constants\n");
    out.push_str("subproblem_max_iters = 500\n");
    out.push_str("prox_backtracking_factor = 0.5\n");
    out.push_str("prox_sufficient_decrease = quadratic_upper_bound\n");
    out.push_str("ell_max = 60\n");
    fs::write(dir.join("bench_config.txt"), out)?;
    Ok(())
}

/// Write every artifact of a finished sweep under the output directory.
pub fn write_all(spec: &BenchmarkSpec, res: &BenchResult) -> Result<(), CliError> {
    fs::create_dir_all(&spec.output_dir)?;
    write_config(&spec.output_dir, spec)?;
    write_summary(&spec.output_dir, &res.outcomes)?;
    write_profiles(&spec.output_dir, res)?;
    if spec.write_traces {
        for o in &res.outcomes {
            write_trace(&spec.output_dir, o)?;
        }
    }
    Ok(())
}

/// Human-readable single-run report for the `solve` subcommand.
pub fn format_run(o: &RunOutcome) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "problem      : {} (dim from catalog)\n",
        o.problem
    ));
    s.push_str(&format!("method       : {} (m = {})\n", o.method.as_str(), o.m));
    s.push_str(&format!("termination  : {}\n", o.termination));
    s.push_str(&format!("outer iters  : {}\n", o.report.outer_iters));
    s.push_str(&format!(
        "oracle calls : f = {}, grad = {} (budgeted tally = {})\n",
        o.report.oracle_totals.f_evals(),
        o.report.oracle_totals.grad_evals(),
        o.report.oracle_totals.budgeted_tally(),
    ));
    s.push_str(&format!("best F       : {}\n", o.best_f));
    s.push_str(&format!(
        "stationarity : {}\n",
        fmt_opt_f64(o.report.best_stationarity)
    ));
    s.push_str(&format!(
        "final point  : [{}]\n",
        o.report
            .final_point
            .iter()
            .map(|v| format!("{v:.8e}"))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    let taus: Vec<String> = o.report.tau_history.iter().map(|t| t.to_string()).collect();
    let shown = taus.len().min(12);
    s.push_str(&format!(
        "tau history  : {}{}\n",
        taus[..shown].join(", "),
        if taus.len() > shown { ", ..." } else { "" }
    ));
    s
}
