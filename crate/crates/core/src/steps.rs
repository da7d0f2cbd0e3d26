//! Inner loops: `m` consecutive inexact cubic steps reusing one Hessian
//! approximation.
//!
//! The first-order variant recomputes the gradient each step and may stop
//! early once the stationarity residual drops below `eps`; the zeroth-order
//! variant estimates gradients by central differences and has no such stop.
//! Both check the cumulative progress test
//! `F(x_0) - F(x_{t+1}) >= eps^{3/2} (t+1) / (384 sqrt(sigma))`
//! and halt when it fails, which signals the driver to enlarge `sigma`.

use crate::error::Error;
use crate::finite_diff::{zo_gradient_approx, SymmetricMatrixApprox};
use crate::model::{CubicModel, SolveOptions};
use crate::problem::{
    counted_gradient, counted_value, stationarity_residual, OracleCounter, Point, ProblemInstance,
};

/// Outcome tag of one inner call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    /// All `m` steps ran with sufficient cumulative progress.
    Success,
    /// A point with stationarity residual below `eps` was found (first-order
    /// loop only, and only without second-order certification).
    Solution,
    /// The progress test failed; the caller should retry with larger sigma.
    Halt,
}

/// Per-step record; `sigma` and the finite-difference interval are attached
/// by the driver, which knows the attempt they belong to.
#[derive(Debug, Clone)]
pub struct StepTrace {
    /// Inner step index `t`; the record describes the trial point `x_{t+1}`.
    pub t: usize,
    pub point: Point,
    /// Composite value `F(x_{t+1})`; `None` when the loop returned at the
    /// stationarity stop before evaluating it.
    pub f_value: Option<f64>,
    /// Step length `r_t`.
    pub step_norm: f64,
    pub grad_residual: f64,
    /// `||grad f + psi'||` when the loop measured it (first-order stop, or
    /// the zeroth-order diagnostic mode).
    pub stationarity: Option<f64>,
    /// Second-order progress measure `max{stationarity, (2/3)^{10/3} xi^2 / sigma}`,
    /// recorded in second-order mode when an analytic Hessian is available.
    pub so_delta: Option<f64>,
    /// Counter snapshots right after the step's oracle charges.
    pub f_evals: u64,
    pub grad_evals: u64,
}

/// Result of one inner call.
#[derive(Debug, Clone)]
pub struct InnerResult {
    pub final_point: Point,
    pub status: StepStatus,
    /// Loop variable `t` at return: `m` for success, the failing step index
    /// otherwise.
    pub steps_taken: usize,
    pub trace: Vec<StepTrace>,
    /// The Hessian anchor `x_0`; the approximation `B` is never recomputed
    /// inside the loop.
    pub anchor: Point,
}

/// Error carrying the partial trace accumulated before the failure, so an
/// interrupted attempt still reports the points it visited.
#[derive(Debug, Clone)]
pub struct InnerError {
    pub source: Error,
    pub trace: Vec<StepTrace>,
}

/// Options shared by both inner loops.
#[derive(Debug, Clone)]
pub struct StepOptions {
    /// Require the second-order certificate on every subproblem and disable
    /// the first-order stationarity stop.
    pub second_order: bool,
    /// Iteration cap for the composite subproblem solver.
    pub max_inner_iters: usize,
    /// `f(x_0)` when the caller already evaluated it (avoids a duplicate
    /// oracle call; the driver caches it across adaptive attempts).
    pub f_at_start: Option<f64>,
    /// `grad f(x_0)` when the caller already evaluated it (first-order loop).
    pub grad_at_start: Option<Point>,
    /// Zeroth-order diagnostic mode: measure true stationarity at each trial
    /// point through the analytic gradient, uncounted.
    pub check_stationarity: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            second_order: false,
            max_inner_iters: 500,
            f_at_start: None,
            grad_at_start: None,
            check_stationarity: false,
        }
    }
}

/// Progress threshold `eps^{3/2} (t+1) / (384 sqrt(sigma))`.
pub fn progress_threshold(sigma: f64, eps: f64, t: usize) -> f64 {
    eps.powf(1.5) * (t as f64 + 1.0) / (384.0 * sigma.sqrt())
}

/// Gradient finite-difference interval for the zeroth-order loop:
/// `h_g = 3^{-1/3} [eps m / (sigma sqrt(n))]^{1/2}`.
pub fn zo_gradient_interval(eps: f64, m: usize, sigma: f64, n: usize) -> f64 {
    (eps * m as f64 / (sigma * (n as f64).sqrt())).sqrt() / 3.0f64.cbrt()
}

fn check_loop_params(sigma: f64, m: usize, eps: f64) -> Result<(), Error> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter("sigma must be positive"));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter("eps must be positive"));
    }
    Ok(())
}

fn so_delta_diagnostic(p: &ProblemInstance, x: &Point, psi_sub: &Point, sigma: f64) -> Option<f64> {
    let xi = crate::catalog::xi_measure(p, x).ok()?;
    let grad = p.gradient_raw(x)?;
    let stat = (grad + psi_sub).norm();
    Some(stat.max((2.0 / 3.0f64).powf(10.0 / 3.0) * xi * xi / sigma))
}

/// `m` inexact cubic steps with a fixed Hessian approximation, recomputing
/// gradients each step (first-order oracle).
pub fn cubic_steps(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x0: &Point,
    b: &SymmetricMatrixApprox,
    sigma: f64,
    m: usize,
    eps: f64,
    opts: &StepOptions,
) -> Result<InnerResult, InnerError> {
    let mut trace = Vec::new();
    match fo_steps_inner(p, c, x0, b, sigma, m, eps, opts, &mut trace) {
        Ok((final_point, status, steps_taken)) => Ok(InnerResult {
            final_point,
            status,
            steps_taken,
            trace,
            anchor: x0.clone(),
        }),
        Err(source) => Err(InnerError { source, trace }),
    }
}

#[allow(clippy::too_many_arguments)]
fn fo_steps_inner(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x0: &Point,
    b: &SymmetricMatrixApprox,
    sigma: f64,
    m: usize,
    eps: f64,
    opts: &StepOptions,
    trace: &mut Vec<StepTrace>,
) -> Result<(Point, StepStatus, usize), Error> {
    check_loop_params(sigma, m, eps)?;
    let psi0 = p.composite().value(x0);
    if !psi0.is_finite() {
        return Err(Error::InfeasibleStart);
    }
    let f0 = match opts.f_at_start {
        Some(v) => v,
        None => counted_value(p, c, x0)?,
    };
    let g0 = match &opts.grad_at_start {
        Some(g) => g.clone(),
        None => counted_gradient(p, c, x0)?,
    };
    let big_f0 = f0 + psi0;

    let solve_opts = SolveOptions {
        require_second_order: opts.second_order,
        max_inner_iters: opts.max_inner_iters,
    };

    let mut x_t = x0.clone();
    let mut f_t = f0;
    let mut g_t = g0;
    for t in 0..m {
        let model = CubicModel::new(&x_t, f_t, &g_t, b, sigma, p.composite())?;
        let sol = match model.solve(&solve_opts) {
            Ok(s) => s,
            Err(Error::SubproblemStalled { .. }) => {
                return Ok((x_t, StepStatus::Halt, t));
            }
            Err(e) => return Err(e),
        };
        let x_next = sol.x_plus;

        // Step 3: stationarity stop, disabled under second-order certification.
        let mut stationarity = None;
        let mut g_next = None;
        if !opts.second_order {
            let gn = counted_gradient(p, c, &x_next)?;
            let st = stationarity_residual(p, &gn, &sol.psi_sub)?;
            stationarity = Some(st);
            if st <= eps {
                trace.push(StepTrace {
                    t,
                    point: x_next.clone(),
                    f_value: None,
                    step_norm: sol.r,
                    grad_residual: sol.grad_residual,
                    stationarity,
                    so_delta: None,
                    f_evals: c.f_evals(),
                    grad_evals: c.grad_evals(),
                });
                return Ok((x_next, StepStatus::Solution, t));
            }
            g_next = Some(gn);
        }

        // Step 4: cumulative progress test on true composite values.
        let f_next = counted_value(p, c, &x_next)?;
        let big_f_next = f_next + p.composite().value(&x_next);
        let so_delta = if opts.second_order {
            so_delta_diagnostic(p, &x_next, &sol.psi_sub, sigma)
        } else {
            None
        };
        trace.push(StepTrace {
            t,
            point: x_next.clone(),
            f_value: Some(big_f_next),
            step_norm: sol.r,
            grad_residual: sol.grad_residual,
            stationarity,
            so_delta,
            f_evals: c.f_evals(),
            grad_evals: c.grad_evals(),
        });
        if big_f0 - big_f_next >= progress_threshold(sigma, eps, t) {
            if t + 1 < m {
                g_t = match g_next {
                    Some(g) => g,
                    None => counted_gradient(p, c, &x_next)?,
                };
            }
            x_t = x_next;
            f_t = f_next;
        } else {
            return Ok((x_next, StepStatus::Halt, t));
        }
    }
    Ok((x_t, StepStatus::Success, m))
}

/// `m` inexact cubic steps using only the function-value oracle: gradients
/// come from central differences at the interval given by
/// [`zo_gradient_interval`]. No stationarity stop.
pub fn zero_order_cubic_steps(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x0: &Point,
    b: &SymmetricMatrixApprox,
    sigma: f64,
    m: usize,
    eps: f64,
    opts: &StepOptions,
) -> Result<InnerResult, InnerError> {
    let mut trace = Vec::new();
    match zo_steps_inner(p, c, x0, b, sigma, m, eps, opts, &mut trace) {
        Ok((final_point, status, steps_taken)) => Ok(InnerResult {
            final_point,
            status,
            steps_taken,
            trace,
            anchor: x0.clone(),
        }),
        Err(source) => Err(InnerError { source, trace }),
    }
}

#[allow(clippy::too_many_arguments)]
fn zo_steps_inner(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x0: &Point,
    b: &SymmetricMatrixApprox,
    sigma: f64,
    m: usize,
    eps: f64,
    opts: &StepOptions,
    trace: &mut Vec<StepTrace>,
) -> Result<(Point, StepStatus, usize), Error> {
    check_loop_params(sigma, m, eps)?;
    let psi0 = p.composite().value(x0);
    if !psi0.is_finite() {
        return Err(Error::InfeasibleStart);
    }
    let f0 = match opts.f_at_start {
        Some(v) => v,
        None => counted_value(p, c, x0)?,
    };
    let big_f0 = f0 + psi0;
    let h_g = zo_gradient_interval(eps, m, sigma, p.dim());

    let solve_opts = SolveOptions {
        require_second_order: opts.second_order,
        max_inner_iters: opts.max_inner_iters,
    };

    let mut x_t = x0.clone();
    let mut f_t = f0;
    for t in 0..m {
        let g_t = zo_gradient_approx(p, c, &x_t, h_g)?;
        let model = CubicModel::new(&x_t, f_t, &g_t, b, sigma, p.composite())?;
        let sol = match model.solve(&solve_opts) {
            Ok(s) => s,
            Err(Error::SubproblemStalled { .. }) => {
                return Ok((x_t, StepStatus::Halt, t));
            }
            Err(e) => return Err(e),
        };
        let x_next = sol.x_plus;
        let f_next = counted_value(p, c, &x_next)?;
        let big_f_next = f_next + p.composite().value(&x_next);

        let stationarity = if opts.check_stationarity {
            p.gradient_raw(&x_next).map(|g| (g + &sol.psi_sub).norm())
        } else {
            None
        };
        let so_delta = if opts.second_order {
            so_delta_diagnostic(p, &x_next, &sol.psi_sub, sigma)
        } else {
            None
        };
        trace.push(StepTrace {
            t,
            point: x_next.clone(),
            f_value: Some(big_f_next),
            step_norm: sol.r,
            grad_residual: sol.grad_residual,
            stationarity,
            so_delta,
            f_evals: c.f_evals(),
            grad_evals: c.grad_evals(),
        });
        if big_f0 - big_f_next >= progress_threshold(sigma, eps, t) {
            x_t = x_next;
            f_t = f_next;
        } else {
            return Ok((x_next, StepStatus::Halt, t));
        }
    }
    Ok((x_t, StepStatus::Success, m))
}
