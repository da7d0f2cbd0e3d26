//! Protocol sweeps: run every (problem, method, m) combination under a
//! shared oracle budget, score successes, and assemble performance profiles.
//!
//! First-order runs succeed at the first iterate with stationarity at or
//! below `eps`; the metric is the first-order oracle count at that event.
//! Zeroth-order runs are scored against the best objective value reached by
//! any zeroth-order variant on the same problem within the budget: success
//! once `F - f_best <= eps (F(x0) - f_best)`, metric = function evaluations
//! at the first crossing. Zeroth-order runs see only the value oracle.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use cubic_newton::{first_order_cnm, zero_order_cnm, DriverConfig, RunReport, Termination};

use crate::profile::{performance_profile, ProfileTable};
use crate::spec::{resolve_problem, BenchmarkSpec, MChoice, Method};
use crate::CliError;

/// One scored benchmark run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub problem: String,
    pub method: Method,
    pub m_label: String,
    pub m: usize,
    pub success: bool,
    /// Oracle count at the success event; `None` when the run did not finish.
    pub metric: Option<u64>,
    pub best_f: f64,
    pub termination: Termination,
    pub report: RunReport,
}

impl RunOutcome {
    pub fn variant(&self) -> String {
        format!("{}_m{}", self.method.as_str(), self.m_label)
    }
}

/// Sweep results plus one profile table per method.
#[derive(Debug)]
pub struct BenchResult {
    pub outcomes: Vec<RunOutcome>,
    pub profiles: Vec<(Method, ProfileTable)>,
}

fn run_pool<T: Send, F: FnOnce() -> T + Send>(jobs: usize, tasks: Vec<F>) -> Vec<T> {
    let n = tasks.len();
    let tasks: Vec<Mutex<Option<F>>> = tasks.into_iter().map(|t| Mutex::new(Some(t))).collect();
    let results: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(n.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let task = tasks[i].lock().unwrap().take().unwrap();
                *results[i].lock().unwrap() = Some(task());
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.into_inner().unwrap().unwrap())
        .collect()
}

/// Run the full sweep. Results come back in deterministic (problem, method,
/// m) order regardless of `jobs`.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchResult, CliError> {
    spec.validate()?;

    struct Task {
        problem: String,
        method: Method,
        m_choice: MChoice,
    }
    let mut tasks = Vec::new();
    for name in &spec.problems {
        resolve_problem(name, spec.seed)?; // fail fast on unknown names
        for &method in &spec.methods {
            for &m_choice in &spec.m_choices {
                tasks.push(Task {
                    problem: name.clone(),
                    method,
                    m_choice,
                });
            }
        }
    }

    let closures: Vec<_> = tasks
        .into_iter()
        .map(|task| {
            let spec = spec.clone();
            move || -> Result<RunOutcome, CliError> {
                let entry = resolve_problem(&task.problem, spec.seed)?;
                let m = task.m_choice.resolve(entry.dim).max(1);
                let cfg = DriverConfig {
                    tau0: spec.tau0,
                    eps: spec.eps,
                    m,
                    budget: Some(spec.budget),
                    second_order: spec.second_order,
                    record_trace: spec.write_traces,
                    ..DriverConfig::default()
                };
                let report = match task.method {
                    Method::Fo => {
                        let p = entry.build();
                        first_order_cnm(&p, &entry.standard_start, &cfg)?
                    }
                    Method::Zo => {
                        // The zeroth-order protocol sees only function values.
                        let p = entry.build().zeroth_order_view();
                        zero_order_cnm(&p, &entry.standard_start, &cfg)?
                    }
                };
                let termination = report.termination;
                Ok(RunOutcome {
                    problem: task.problem,
                    method: task.method,
                    m_label: task.m_choice.label(),
                    m,
                    success: false,
                    metric: None,
                    best_f: report.best_f,
                    termination,
                    report,
                })
            }
        })
        .collect();

    let mut outcomes = run_pool(spec.jobs, closures)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    score_outcomes(&mut outcomes, spec.eps);

    let mut profiles = Vec::new();
    for &method in &spec.methods {
        let rows: Vec<(String, String, Option<u64>)> = outcomes
            .iter()
            .filter(|o| o.method == method)
            .map(|o| (o.problem.clone(), o.variant(), o.metric))
            .collect();
        profiles.push((method, performance_profile(&rows)?));
    }

    Ok(BenchResult { outcomes, profiles })
}

/// Fill in `success` / `metric` for every outcome.
fn score_outcomes(outcomes: &mut [RunOutcome], eps: f64) {
    // First-order: the driver terminates at the success event itself.
    for o in outcomes.iter_mut() {
        if o.method == Method::Fo {
            o.success = o.termination == Termination::SolutionFound;
            o.metric = o.success.then(|| o.report.oracle_totals.fo_calls());
        }
    }

    // Zeroth-order: relative decrease against the per-problem best value
    // across the zeroth-order variants in this sweep.
    let problems: Vec<String> = {
        let mut v: Vec<String> = outcomes
            .iter()
            .filter(|o| o.method == Method::Zo)
            .map(|o| o.problem.clone())
            .collect();
        v.dedup();
        v
    };
    for problem in problems {
        let f_best = outcomes
            .iter()
            .filter(|o| o.method == Method::Zo && o.problem == problem)
            .map(|o| o.best_f)
            .fold(f64::INFINITY, f64::min);
        for o in outcomes
            .iter_mut()
            .filter(|o| o.method == Method::Zo && o.problem == problem)
        {
            let Some(&(_, f0)) = o.report.f_history.first() else {
                continue;
            };
            let target = f_best + eps * (f0 - f_best);
            let mut crossing = None;
            for &(tally, f) in &o.report.f_history {
                if f <= target {
                    crossing = Some(tally);
                    break;
                }
            }
            o.success = crossing.is_some();
            o.metric = crossing;
        }
    }
}
