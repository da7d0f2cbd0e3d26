//! Adaptive outer loops for the first-order and zeroth-order methods.
//!
//! Each outer iteration runs an adaptive search over `ell = 0, 1, 2, ...`:
//! the regularization parameter `sigma` and the finite-difference interval
//! `h` are derived from the current estimate `tau_k` scaled by `2^ell`, a
//! fresh Hessian approximation is built at `x_k`, and the inner loop takes
//! `m` lazy cubic steps. A halt doubles the scale; a success advances and
//! updates `tau_{k+1} = max(tau_0, 2^{ell_k - 1} tau_k)`. No Lipschitz
//! constant is ever supplied.

use std::fmt;

use crate::error::Error;
use crate::finite_diff::{fo_hessian_with_base, zo_hessian_with_base};
use crate::problem::{
    counted_gradient, counted_value, BudgetKind, OracleCounter, Point, ProblemInstance,
};
use crate::steps::{
    cubic_steps, zero_order_cubic_steps, InnerError, StepOptions, StepStatus, StepTrace,
};

/// `sigma_{k,ell} = 2^4 (2/3)^{1/3} (2^ell tau_k) m`; the same schedule is
/// used by both methods.
pub fn fo_sigma_schedule(tau: f64, ell: u32, m: usize) -> f64 {
    16.0 * (2.0f64 / 3.0).cbrt() * 2f64.powi(ell as i32) * tau * m as f64
}

/// First-order Hessian interval
/// `h = [3 sigma^{3/2} eps^{3/2} / (2^7 * 192 * n^{3/2} * tau_eff^3)]^{1/3}`
/// where `tau_eff = 2^ell tau_k`.
pub fn fo_h_schedule(sigma: f64, tau_eff: f64, eps: f64, n: usize) -> f64 {
    (3.0 * sigma.powf(1.5) * eps.powf(1.5)
        / (128.0 * 192.0 * (n as f64).powf(1.5) * tau_eff.powi(3)))
    .cbrt()
}

/// Zeroth-order Hessian interval
/// `h = [3^4 sigma^{3/2} eps^{3/2} / (2^14 * 192 * n^3 * tau_eff^3)]^{1/3}`.
pub fn zo_h_schedule(sigma: f64, tau_eff: f64, eps: f64, n: usize) -> f64 {
    (81.0 * sigma.powf(1.5) * eps.powf(1.5)
        / (16384.0 * 192.0 * (n as f64).powi(3) * tau_eff.powi(3)))
    .cbrt()
}

/// `tau_{k+1} = max(tau_0, 2^{ell_k - 1} tau_k)`: halves after a first-try
/// success (floored at `tau_0`), otherwise keeps half the scale that worked.
pub fn tau_update(tau_k: f64, tau0: f64, ell_k: u32) -> f64 {
    tau0.max(2f64.powi(ell_k as i32 - 1) * tau_k)
}

/// Configuration of one adaptive run.
#[derive(Debug, Clone)]
pub struct DriverConfig {
    pub tau0: f64,
    pub eps: f64,
    /// Number of cubic steps sharing one Hessian approximation.
    pub m: usize,
    /// Oracle budget (`None` = unlimited). Counted per the method's oracle:
    /// function plus gradient calls for first-order, function calls for
    /// zeroth-order.
    pub budget: Option<u64>,
    /// Safeguard on the adaptive search depth; `ell` past this aborts the
    /// run with [`Termination::EllOverflow`].
    pub ell_max: u32,
    /// Require second-order certificates and disable the first-order
    /// stationarity stop.
    pub second_order: bool,
    /// Keep the full per-step trace in the report. For zeroth-order runs on
    /// problems with an analytic gradient this also enables the diagnostic
    /// stationarity check (uncounted) and its early stop.
    pub record_trace: bool,
    /// Iteration cap for the subproblem solver.
    pub max_inner_iters: usize,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            tau0: 1.0,
            eps: 1e-4,
            m: 1,
            budget: Some(3000),
            ell_max: 60,
            second_order: false,
            record_trace: false,
            max_inner_iters: 500,
        }
    }
}

impl DriverConfig {
    /// Default configuration with the recommended schedule `m = n` for a
    /// problem of dimension `n`.
    pub fn recommended(n: usize) -> Self {
        DriverConfig {
            m: n.max(1),
            ..DriverConfig::default()
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return Err(Error::InvalidParameter("tau0 must be positive"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter("eps must be positive"));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1"));
        }
        if self.ell_max == 0 {
            return Err(Error::InvalidParameter("ell_max must be at least 1"));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::InvalidParameter("max_inner_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    SolutionFound,
    BudgetExhausted,
    /// The adaptive search exceeded `ell_max`: the smoothness assumption is
    /// violated or an oracle is inconsistent.
    EllOverflow,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::SolutionFound => "solution_found",
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::EllOverflow => "ell_overflow",
        };
        f.write_str(s)
    }
}

/// One per-step trace row, flattened with its outer context.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub k: usize,
    pub ell: u32,
    pub t: usize,
    pub sigma: f64,
    pub h: f64,
    pub f_evals: u64,
    pub grad_evals: u64,
    pub f_value: Option<f64>,
    pub step_norm: f64,
    pub grad_residual: f64,
    pub stationarity: Option<f64>,
    pub so_delta: Option<f64>,
    pub point: Point,
}

/// Everything observable about a finished run.
#[derive(Debug, Clone)]
pub struct RunReport {
    /// The solution point when one was certified, otherwise the best iterate
    /// seen before the run was interrupted.
    pub final_point: Point,
    /// Outer iterations started (including a final partial one).
    pub outer_iters: usize,
    pub termination: Termination,
    /// `tau_0, tau_1, ...` (one entry per completed success, plus the start).
    pub tau_history: Vec<f64>,
    /// `ell_k` of each concluded outer iteration.
    pub ell_history: Vec<u32>,
    pub oracle_totals: OracleCounter,
    /// Smallest measured stationarity residual, when any was measured.
    pub best_stationarity: Option<f64>,
    /// Smallest composite value among points where `F` was evaluated.
    pub best_f: f64,
    /// `(budgeted tally, F)` at every point where the run evaluated the full
    /// objective, in evaluation order.
    pub f_history: Vec<(u64, f64)>,
    pub full_trace: Option<Vec<TraceEntry>>,
    /// Whether the zeroth-order diagnostic stationarity check was active.
    pub stationarity_checked: bool,
}

enum Exit {
    Solution(Point),
    Budget,
    EllOverflow,
}

struct RunState {
    budget_kind: BudgetKind,
    best: Option<(f64, Point)>,
    best_stationarity: Option<f64>,
    f_history: Vec<(u64, f64)>,
    full_trace: Option<Vec<TraceEntry>>,
    tau_history: Vec<f64>,
    ell_history: Vec<u32>,
    outer_started: usize,
    stationarity_checked: bool,
}

impl RunState {
    fn new(record_trace: bool, kind: BudgetKind) -> Self {
        RunState {
            budget_kind: kind,
            best: None,
            best_stationarity: None,
            f_history: Vec::new(),
            full_trace: record_trace.then(Vec::new),
            tau_history: Vec::new(),
            ell_history: Vec::new(),
            outer_started: 0,
            stationarity_checked: false,
        }
    }

    fn note_f(&mut self, tally: u64, point: &Point, f: f64) {
        self.f_history.push((tally, f));
        if self.best.as_ref().map_or(true, |(b, _)| f < *b) {
            self.best = Some((f, point.clone()));
        }
    }

    /// Fold an inner trace into the run records; returns the first point of
    /// this batch whose measured stationarity is at or below `eps`.
    fn absorb(
        &mut self,
        k: usize,
        ell: u32,
        sigma: f64,
        h: f64,
        records: &[StepTrace],
        eps: f64,
    ) -> Option<(Point, f64)> {
        let mut hit = None;
        for rec in records {
            let tally = match self.budget_kind {
                BudgetKind::FoCalls => rec.f_evals + rec.grad_evals,
                BudgetKind::ZoCalls => rec.f_evals,
            };
            if let Some(fv) = rec.f_value {
                self.note_f(tally, &rec.point, fv);
            }
            if let Some(st) = rec.stationarity {
                if self.best_stationarity.map_or(true, |b| st < b) {
                    self.best_stationarity = Some(st);
                }
                if st <= eps && hit.is_none() {
                    hit = Some((rec.point.clone(), st));
                }
            }
            if let Some(out) = self.full_trace.as_mut() {
                out.push(TraceEntry {
                    k,
                    ell,
                    t: rec.t,
                    sigma,
                    h,
                    f_evals: rec.f_evals,
                    grad_evals: rec.grad_evals,
                    f_value: rec.f_value,
                    step_norm: rec.step_norm,
                    grad_residual: rec.grad_residual,
                    stationarity: rec.stationarity,
                    so_delta: rec.so_delta,
                    point: rec.point.clone(),
                });
            }
        }
        hit
    }

    fn into_report(self, exit: Exit, fallback: Point, counter: OracleCounter) -> RunReport {
        let (final_point, termination) = match exit {
            Exit::Solution(pt) => (pt, Termination::SolutionFound),
            Exit::Budget => (
                self.best
                    .as_ref()
                    .map(|(_, p)| p.clone())
                    .unwrap_or(fallback),
                Termination::BudgetExhausted,
            ),
            Exit::EllOverflow => (
                self.best
                    .as_ref()
                    .map(|(_, p)| p.clone())
                    .unwrap_or(fallback),
                Termination::EllOverflow,
            ),
        };
        RunReport {
            final_point,
            outer_iters: self.outer_started,
            termination,
            tau_history: self.tau_history,
            ell_history: self.ell_history,
            oracle_totals: counter,
            best_stationarity: self.best_stationarity,
            best_f: self.best.map(|(f, _)| f).unwrap_or(f64::INFINITY),
            f_history: self.f_history,
            full_trace: self.full_trace,
            stationarity_checked: self.stationarity_checked,
        }
    }
}

fn common_checks(p: &ProblemInstance, x0: &Point, cfg: &DriverConfig) -> Result<(), Error> {
    cfg.validate()?;
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x0.len(),
        });
    }
    if !p.composite().contains(x0) {
        return Err(Error::InfeasibleStart);
    }
    Ok(())
}

/// First-order adaptive method: finite-difference Hessians from gradients,
/// lazy steps, stationarity stop inside the inner loop.
pub fn first_order_cnm(
    p: &ProblemInstance,
    x0: &Point,
    cfg: &DriverConfig,
) -> Result<RunReport, Error> {
    common_checks(p, x0, cfg)?;
    if !p.has_gradient() {
        return Err(Error::NoGradientOracle);
    }
    let n = p.dim();
    let mut c = match cfg.budget {
        Some(b) => OracleCounter::with_budget(BudgetKind::FoCalls, b),
        None => OracleCounter::unlimited(BudgetKind::FoCalls),
    };
    let mut state = RunState::new(cfg.record_trace, BudgetKind::FoCalls);
    let mut x = x0.clone();
    let mut tau = cfg.tau0;
    state.tau_history.push(tau);
    let mut k = 0usize;

    macro_rules! oracle {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(Error::BudgetExhausted { .. }) => break Exit::Budget,
                Err(e) => return Err(e),
            }
        };
    }

    let exit = 'outer: loop {
        state.outer_started = k + 1;
        // One joint {f, grad} query at x_k per outer iteration (charged 2),
        // shared by every adaptive attempt below.
        let fx = oracle!(counted_value(p, &mut c, &x));
        state.note_f(c.budgeted_tally(), &x, fx + p.composite().value(&x));
        let gx = oracle!(counted_gradient(p, &mut c, &x));

        let mut ell = 0u32;
        break loop {
            if ell > cfg.ell_max {
                break Exit::EllOverflow;
            }
            let sigma = fo_sigma_schedule(tau, ell, cfg.m);
            let tau_eff = 2f64.powi(ell as i32) * tau;
            let h = fo_h_schedule(sigma, tau_eff, cfg.eps, n);
            let b = match fo_hessian_with_base(p, &mut c, &x, h, &gx) {
                Ok(b) => b,
                Err(Error::BudgetExhausted { .. }) => break Exit::Budget,
                Err(e) => return Err(e),
            };
            let opts = StepOptions {
                second_order: cfg.second_order,
                max_inner_iters: cfg.max_inner_iters,
                f_at_start: Some(fx),
                grad_at_start: Some(gx.clone()),
                check_stationarity: false,
            };
            match cubic_steps(p, &mut c, &x, &b, sigma, cfg.m, cfg.eps, &opts) {
                Err(InnerError {
                    source: Error::BudgetExhausted { .. },
                    trace,
                }) => {
                    state.absorb(k, ell, sigma, h, &trace, cfg.eps);
                    break Exit::Budget;
                }
                Err(InnerError { source, .. }) => return Err(source),
                Ok(inner) => {
                    state.absorb(k, ell, sigma, h, &inner.trace, cfg.eps);
                    match inner.status {
                        StepStatus::Halt => ell += 1,
                        StepStatus::Solution => {
                            state.ell_history.push(ell);
                            break Exit::Solution(inner.final_point);
                        }
                        StepStatus::Success => {
                            x = inner.final_point;
                            tau = tau_update(tau, cfg.tau0, ell);
                            state.tau_history.push(tau);
                            state.ell_history.push(ell);
                            k += 1;
                            continue 'outer;
                        }
                    }
                }
            }
        };
    };
    Ok(state.into_report(exit, x, c))
}

/// Zeroth-order adaptive method: both derivatives from function values. The
/// loop itself has no stationarity stop; with `record_trace` and an analytic
/// gradient available the driver stops once a trace point's true (uncounted)
/// stationarity is at or below `eps`, and flags the report accordingly.
pub fn zero_order_cnm(
    p: &ProblemInstance,
    x0: &Point,
    cfg: &DriverConfig,
) -> Result<RunReport, Error> {
    common_checks(p, x0, cfg)?;
    let n = p.dim();
    let mut c = match cfg.budget {
        Some(b) => OracleCounter::with_budget(BudgetKind::ZoCalls, b),
        None => OracleCounter::unlimited(BudgetKind::ZoCalls),
    };
    let check_stationarity = cfg.record_trace && p.has_gradient();
    let mut state = RunState::new(cfg.record_trace, BudgetKind::ZoCalls);
    state.stationarity_checked = check_stationarity;
    let mut x = x0.clone();
    let mut tau = cfg.tau0;
    state.tau_history.push(tau);
    let mut k = 0usize;

    let exit = 'outer: loop {
        state.outer_started = k + 1;
        let fx = match counted_value(p, &mut c, &x) {
            Ok(v) => v,
            Err(Error::BudgetExhausted { .. }) => break Exit::Budget,
            Err(e) => return Err(e),
        };
        state.note_f(c.budgeted_tally(), &x, fx + p.composite().value(&x));

        let mut ell = 0u32;
        break loop {
            if ell > cfg.ell_max {
                break Exit::EllOverflow;
            }
            let sigma = fo_sigma_schedule(tau, ell, cfg.m);
            let tau_eff = 2f64.powi(ell as i32) * tau;
            let h = zo_h_schedule(sigma, tau_eff, cfg.eps, n);
            let b = match zo_hessian_with_base(p, &mut c, &x, h, fx) {
                Ok(b) => b,
                Err(Error::BudgetExhausted { .. }) => break Exit::Budget,
                Err(e) => return Err(e),
            };
            let opts = StepOptions {
                second_order: cfg.second_order,
                max_inner_iters: cfg.max_inner_iters,
                f_at_start: Some(fx),
                grad_at_start: None,
                check_stationarity,
            };
            match zero_order_cubic_steps(p, &mut c, &x, &b, sigma, cfg.m, cfg.eps, &opts) {
                Err(InnerError {
                    source: Error::BudgetExhausted { .. },
                    trace,
                }) => {
                    let hit = state.absorb(k, ell, sigma, h, &trace, cfg.eps);
                    if let Some((pt, _)) = hit {
                        if check_stationarity {
                            break Exit::Solution(pt);
                        }
                    }
                    break Exit::Budget;
                }
                Err(InnerError { source, .. }) => return Err(source),
                Ok(inner) => {
                    let hit = state.absorb(k, ell, sigma, h, &inner.trace, cfg.eps);
                    if check_stationarity {
                        if let Some((pt, _)) = hit {
                            state.ell_history.push(ell);
                            break Exit::Solution(pt);
                        }
                    }
                    match inner.status {
                        StepStatus::Halt => ell += 1,
                        StepStatus::Solution => unreachable!("no stationarity stop in the zeroth-order loop"),
                        StepStatus::Success => {
                            x = inner.final_point;
                            tau = tau_update(tau, cfg.tau0, ell);
                            state.tau_history.push(tau);
                            state.ell_history.push(ell);
                            k += 1;
                            continue 'outer;
                        }
                    }
                }
            }
        };
    };
    Ok(state.into_report(exit, x, c))
}
