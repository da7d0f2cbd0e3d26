//! Adaptive cubic-regularized Newton methods that see the objective only
//! through a first-order (value + gradient) or zeroth-order (value only)
//! black-box oracle.
//!
//! Second-order information is rebuilt from finite differences and each
//! Hessian approximation is reused lazily for `m` consecutive regularized
//! Newton steps. An adaptive doubling search fits the regularization
//! parameter and the finite-difference intervals simultaneously, so no
//! Lipschitz constant has to be known in advance. Composite objectives
//! `F = f + psi` with a simple convex `psi` (box indicator, l1, custom prox)
//! are supported throughout.
//!
//! Module map:
//! - [`problem`]: composite problem abstraction, counted oracles, budgets.
//! - [`finite_diff`]: the three finite-difference estimators.
//! - [`model`]: the cubic model and its inexact subproblem solvers.
//! - [`steps`]: `m` lazy cubic steps per Hessian approximation.
//! - [`driver`]: the adaptive outer loops (first- and zeroth-order).
//! - [`catalog`]: benchmark objectives and the `xi` diagnostic.

pub mod catalog;
pub mod driver;
pub mod error;
pub mod finite_diff;
pub mod model;
pub mod problem;
pub mod steps;

pub use catalog::{
    catalog, core_problem_names, find_problem, synthetic_known_constants, synthetic_quadratic,
    xi_measure, CatalogEntry,
};
pub use driver::{
    first_order_cnm, fo_h_schedule, fo_sigma_schedule, tau_update, zero_order_cnm, zo_h_schedule,
    DriverConfig, RunReport, Termination, TraceEntry,
};
pub use error::Error;
pub use finite_diff::{
    fo_hessian_approx, fo_hessian_with_base, zo_gradient_approx, zo_hessian_approx,
    zo_hessian_with_base, ApproxSource, FdInterval, SymmetricMatrixApprox,
};
pub use model::{CubicModel, SolveOptions, SubproblemSolution};
pub use problem::{
    counted_gradient, counted_hessian, counted_value, stationarity_residual, BudgetKind,
    Composite, OracleCounter, Point, ProblemInstance,
};
pub use steps::{
    cubic_steps, progress_threshold, zero_order_cubic_steps, zo_gradient_interval, InnerError,
    InnerResult, StepOptions, StepStatus, StepTrace,
};
