//! Composite problem abstraction and counted oracles.
//!
//! A problem is `F(x) = f(x) + psi(x)` with `f` smooth (possibly non-convex)
//! and `psi` simple, proper, closed, convex. The solvers only ever see `f`
//! through [`counted_value`] / [`counted_gradient`], which charge an
//! [`OracleCounter`]; everything reported about oracle complexity is read off
//! that counter.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;

/// Dense point/vector type used throughout.
pub type Point = DVector<f64>;

type ValueFn = dyn Fn(&Point) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Point) -> Point + Send + Sync;
type HessFn = dyn Fn(&Point) -> DMatrix<f64> + Send + Sync;
type ProxFn = dyn Fn(&Point, f64) -> Point + Send + Sync;

/// The simple convex part `psi` of the composite objective.
#[derive(Clone)]
pub enum Composite {
    /// `psi = 0` on all of R^n.
    Zero,
    /// Indicator of the box `[lower, upper]` (entries may be +-inf).
    BoxIndicator { lower: Point, upper: Point },
    /// `psi(x) = weight * ||x||_1`.
    L1 { weight: f64 },
    /// User-supplied convex term. The prox map, when present, must compute
    /// `argmin_y { psi(y) + ||y - v||^2 / (2 eta) }`.
    Custom {
        value: Arc<ValueFn>,
        prox: Option<Arc<ProxFn>>,
    },
}

impl Composite {
    /// Box indicator from per-coordinate bounds.
    pub fn box_indicator(lower: Point, upper: Point) -> Self {
        assert_eq!(lower.len(), upper.len());
        Composite::BoxIndicator { lower, upper }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Composite::Zero)
    }

    /// `psi(y)`, with `+inf` outside the domain.
    pub fn value(&self, y: &Point) -> f64 {
        match self {
            Composite::Zero => 0.0,
            Composite::BoxIndicator { lower, upper } => {
                let inside = y
                    .iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .all(|(&yi, (&lo, &hi))| yi >= lo && yi <= hi);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Composite::L1 { weight } => weight * y.iter().map(|v| v.abs()).sum::<f64>(),
            Composite::Custom { value, .. } => value(y),
        }
    }

    pub fn contains(&self, y: &Point) -> bool {
        self.value(y).is_finite()
    }

    /// `prox_{eta psi}(v)`. Errors for custom terms without a prox map.
    pub fn prox(&self, v: &Point, eta: f64) -> Result<Point, Error> {
        match self {
            Composite::Zero => Ok(v.clone()),
            Composite::BoxIndicator { lower, upper } => Ok(Point::from_fn(v.len(), |i, _| {
                v[i].max(lower[i]).min(upper[i])
            })),
            Composite::L1 { weight } => {
                let t = eta * weight;
                Ok(Point::from_fn(v.len(), |i, _| {
                    let a = v[i].abs() - t;
                    if a > 0.0 {
                        a * v[i].signum()
                    } else {
                        0.0
                    }
                }))
            }
            Composite::Custom { prox, .. } => match prox {
                Some(p) => Ok(p(v, eta)),
                None => Err(Error::ProxUnavailable),
            },
        }
    }

    /// Hessian of `psi` at `y` where it is twice differentiable: the zero
    /// matrix for the zero term, box interiors, and l1 away from the axes;
    /// `None` at kinks/boundaries.
    pub fn hessian_at(&self, y: &Point) -> Option<DMatrix<f64>> {
        let n = y.len();
        match self {
            Composite::Zero => Some(DMatrix::zeros(n, n)),
            Composite::BoxIndicator { lower, upper } => {
                let interior = y
                    .iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .all(|(&yi, (&lo, &hi))| yi > lo && yi < hi);
                interior.then(|| DMatrix::zeros(n, n))
            }
            Composite::L1 { .. } => {
                let off_axes = y.iter().all(|&yi| yi != 0.0);
                off_axes.then(|| DMatrix::zeros(n, n))
            }
            Composite::Custom { .. } => None,
        }
    }
}

/// Immutable description of one composite minimization instance.
///
/// Shareable across threads; all mutation during a run lives in the
/// per-run [`OracleCounter`].
#[derive(Clone)]
pub struct ProblemInstance {
    dim: usize,
    smooth_value: Arc<ValueFn>,
    smooth_gradient: Option<Arc<GradFn>>,
    smooth_hessian: Option<Arc<HessFn>>,
    composite: Composite,
    known_l: Option<f64>,
    known_mu: Option<f64>,
    lower_bound_hint: Option<f64>,
}

impl ProblemInstance {
    pub fn new(dim: usize, value: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        assert!(dim >= 1, "problem dimension must be at least 1");
        ProblemInstance {
            dim,
            smooth_value: Arc::new(value),
            smooth_gradient: None,
            smooth_hessian: None,
            composite: Composite::Zero,
            known_l: None,
            known_mu: None,
            lower_bound_hint: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        self.smooth_gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(
        mut self,
        h: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.smooth_hessian = Some(Arc::new(h));
        self
    }

    pub fn with_composite(mut self, composite: Composite) -> Self {
        self.composite = composite;
        self
    }

    pub fn with_known_l(mut self, l: f64) -> Self {
        assert!(l >= 0.0 && l.is_finite());
        self.known_l = Some(l);
        self
    }

    pub fn with_known_mu(mut self, mu: f64) -> Self {
        assert!(mu > 0.0 && mu.is_finite());
        self.known_mu = Some(mu);
        self
    }

    pub fn with_lower_bound_hint(mut self, f_star: f64) -> Self {
        self.lower_bound_hint = Some(f_star);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn composite(&self) -> &Composite {
        &self.composite
    }

    pub fn known_l(&self) -> Option<f64> {
        self.known_l
    }

    pub fn known_mu(&self) -> Option<f64> {
        self.known_mu
    }

    pub fn lower_bound_hint(&self) -> Option<f64> {
        self.lower_bound_hint
    }

    pub fn has_gradient(&self) -> bool {
        self.smooth_gradient.is_some()
    }

    pub fn has_hessian(&self) -> bool {
        self.smooth_hessian.is_some()
    }

    /// Clone of the instance exposing only the function-value oracle, the
    /// honest black box for zeroth-order runs (also disables the diagnostic
    /// stationarity stop, which needs an analytic gradient).
    pub fn zeroth_order_view(&self) -> ProblemInstance {
        ProblemInstance {
            smooth_gradient: None,
            smooth_hessian: None,
            ..self.clone()
        }
    }

    /// Uncounted evaluation of `f`. Diagnostics and tests only; algorithm
    /// code must go through [`counted_value`] so the tallies stay exact.
    pub fn value_raw(&self, x: &Point) -> f64 {
        (self.smooth_value)(x)
    }

    /// Uncounted analytic gradient, when available. Diagnostics only.
    pub fn gradient_raw(&self, x: &Point) -> Option<Point> {
        self.smooth_gradient.as_ref().map(|g| g(x))
    }

    /// Uncounted analytic Hessian, when available. Diagnostics only.
    pub fn hessian_raw(&self, x: &Point) -> Option<DMatrix<f64>> {
        self.smooth_hessian.as_ref().map(|h| h(x))
    }

    fn check_dim(&self, x: &Point) -> Result<(), Error> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Which tally a budget applies to.
///
/// First-order accounting charges both function and gradient evaluations
/// (a simultaneous `{f, grad f}` query costs 2); zeroth-order accounting
/// charges function evaluations only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    FoCalls,
    ZoCalls,
}

/// Monotone oracle-call tallies with an optional hard budget.
///
/// Hessian evaluations are tracked for diagnostics but never charged to
/// either budget: the methods themselves never query second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCounter {
    f_evals: u64,
    grad_evals: u64,
    hess_evals: u64,
    budget: Option<u64>,
    budget_kind: BudgetKind,
}

impl OracleCounter {
    pub fn unlimited(kind: BudgetKind) -> Self {
        OracleCounter {
            f_evals: 0,
            grad_evals: 0,
            hess_evals: 0,
            budget: None,
            budget_kind: kind,
        }
    }

    pub fn with_budget(kind: BudgetKind, budget: u64) -> Self {
        assert!(budget >= 1, "budget must be positive");
        OracleCounter {
            budget: Some(budget),
            ..OracleCounter::unlimited(kind)
        }
    }

    pub fn f_evals(&self) -> u64 {
        self.f_evals
    }

    pub fn grad_evals(&self) -> u64 {
        self.grad_evals
    }

    pub fn hess_evals(&self) -> u64 {
        self.hess_evals
    }

    /// Function plus gradient evaluations.
    pub fn fo_calls(&self) -> u64 {
        self.f_evals + self.grad_evals
    }

    /// Function evaluations only.
    pub fn zo_calls(&self) -> u64 {
        self.f_evals
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn budget_kind(&self) -> BudgetKind {
        self.budget_kind
    }

    /// The tally the budget applies to.
    pub fn budgeted_tally(&self) -> u64 {
        match self.budget_kind {
            BudgetKind::FoCalls => self.fo_calls(),
            BudgetKind::ZoCalls => self.zo_calls(),
        }
    }

    pub fn exhausted(&self) -> bool {
        matches!(self.budget, Some(b) if self.budgeted_tally() >= b)
    }

    /// Budget gate, checked before every oracle call is issued.
    fn admit(&self) -> Result<(), Error> {
        match self.budget {
            Some(b) if self.budgeted_tally() >= b => Err(Error::BudgetExhausted { budget: b }),
            _ => Ok(()),
        }
    }
}

/// Counted evaluation of `f(x)`.
pub fn counted_value(p: &ProblemInstance, c: &mut OracleCounter, x: &Point) -> Result<f64, Error> {
    p.check_dim(x)?;
    c.admit()?;
    c.f_evals += 1;
    let v = (p.smooth_value)(x);
    if !v.is_finite() {
        return Err(Error::NonfiniteValue);
    }
    Ok(v)
}

/// Counted evaluation of `grad f(x)`.
pub fn counted_gradient(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x: &Point,
) -> Result<Point, Error> {
    p.check_dim(x)?;
    let g = p.smooth_gradient.as_ref().ok_or(Error::NoGradientOracle)?;
    c.admit()?;
    c.grad_evals += 1;
    let v = g(x);
    if v.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonfiniteValue);
    }
    Ok(v)
}

/// Counted evaluation of the analytic Hessian. Never charged to a budget.
pub fn counted_hessian(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x: &Point,
) -> Result<DMatrix<f64>, Error> {
    p.check_dim(x)?;
    let h = p.smooth_hessian.as_ref().ok_or(Error::NoHessianOracle)?;
    c.hess_evals += 1;
    Ok(h(x))
}

/// `||grad + psi_sub||`, the residual that defines approximate stationarity.
pub fn stationarity_residual(
    p: &ProblemInstance,
    grad: &Point,
    psi_sub: &Point,
) -> Result<f64, Error> {
    p.check_dim(grad)?;
    if psi_sub.len() != grad.len() {
        return Err(Error::DimensionMismatch {
            expected: grad.len(),
            got: psi_sub.len(),
        });
    }
    Ok((grad + psi_sub).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU64, Ordering};

    fn half_sq_norm(n: usize) -> ProblemInstance {
        ProblemInstance::new(n, |x: &Point| 0.5 * x.norm_squared())
            .with_gradient(|x: &Point| x.clone())
    }

    fn rosenbrock2() -> ProblemInstance {
        ProblemInstance::new(2, |x: &Point| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        })
        .with_gradient(|x: &Point| {
            Point::from_vec(vec![
                -400.0 * x[0] * (x[1] - x[0] * x[0]) - 2.0 * (1.0 - x[0]),
                200.0 * (x[1] - x[0] * x[0]),
            ])
        })
    }

    #[test]
    fn counted_value_quadratic() {
        let p = half_sq_norm(2);
        let mut c = OracleCounter::unlimited(BudgetKind::FoCalls);
        let v = counted_value(&p, &mut c, &Point::from_vec(vec![3.0, 4.0])).unwrap();
        assert_eq!(v, 12.5);
        assert_eq!(c.f_evals(), 1);
        assert_eq!(c.grad_evals(), 0);
    }

    #[test]
    fn counted_value_rosenbrock_minimum() {
        let p = rosenbrock2();
        let mut c = OracleCounter::unlimited(BudgetKind::FoCalls);
        let v = counted_value(&p, &mut c, &Point::from_vec(vec![1.0, 1.0])).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn budget_blocks_second_call() {
        let p = half_sq_norm(1);
        let mut c = OracleCounter::with_budget(BudgetKind::ZoCalls, 1);
        let x = Point::from_vec(vec![1.0]);
        counted_value(&p, &mut c, &x).unwrap();
        let err = counted_value(&p, &mut c, &x).unwrap_err();
        assert_eq!(err, Error::BudgetExhausted { budget: 1 });
        assert_eq!(c.f_evals(), 1, "blocked call must not be charged");
    }

    #[test]
    fn gradient_examples() {
        let p = half_sq_norm(2);
        let mut c = OracleCounter::unlimited(BudgetKind::FoCalls);
        let g = counted_gradient(&p, &mut c, &Point::from_vec(vec![3.0, 4.0])).unwrap();
        assert_eq!(g, Point::from_vec(vec![3.0, 4.0]));

        let linear = ProblemInstance::new(3, |x: &Point| 2.0 * x[0] - x[1] + 0.5 * x[2])
            .with_gradient(|_x: &Point| Point::from_vec(vec![2.0, -1.0, 0.5]));
        let g = counted_gradient(&linear, &mut c, &Point::from_vec(vec![7.0, -3.0, 0.1])).unwrap();
        assert_eq!(g, Point::from_vec(vec![2.0, -1.0, 0.5]));

        let rosen = rosenbrock2();
        let g = counted_gradient(&rosen, &mut c, &Point::from_vec(vec![0.0, 0.0])).unwrap();
        assert_eq!(g, Point::from_vec(vec![-2.0, 0.0]));
    }

    #[test]
    fn zo_only_instance_has_no_gradient() {
        let p = ProblemInstance::new(1, |x: &Point| x[0].powi(4));
        let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
        let err = counted_gradient(&p, &mut c, &Point::from_vec(vec![1.0])).unwrap_err();
        assert_eq!(err, Error::NoGradientOracle);
    }

    #[test]
    fn nonfinite_value_aborts() {
        let p = ProblemInstance::new(1, |x: &Point| x[0].ln());
        let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
        let err = counted_value(&p, &mut c, &Point::from_vec(vec![-1.0])).unwrap_err();
        assert_eq!(err, Error::NonfiniteValue);
    }

    #[test]
    fn stationarity_examples() {
        let p = half_sq_norm(2);
        let r = stationarity_residual(
            &p,
            &Point::from_vec(vec![1.0, -1.0]),
            &Point::from_vec(vec![-1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(r, 0.0);

        let r = stationarity_residual(
            &p,
            &Point::from_vec(vec![3.0, 4.0]),
            &Point::from_vec(vec![0.0, 0.0]),
        )
        .unwrap();
        assert_eq!(r, 5.0);

        // KKT of the 1-d projection onto [0, inf): boundary gradient 2 is
        // cancelled by the normal-cone element -2.
        let p1 = half_sq_norm(1);
        let r = stationarity_residual(
            &p1,
            &Point::from_vec(vec![2.0]),
            &Point::from_vec(vec![-2.0]),
        )
        .unwrap();
        assert_eq!(r, 0.0);

        let err = stationarity_residual(
            &p1,
            &Point::from_vec(vec![1.0]),
            &Point::from_vec(vec![1.0, 2.0]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn zero_composite_residual_is_gradient_norm() {
        let p = half_sq_norm(3);
        let zero = Point::zeros(3);
        for g in [
            Point::from_vec(vec![1.0, 2.0, -2.0]),
            Point::from_vec(vec![0.0, 0.0, 0.0]),
            Point::from_vec(vec![-0.3, 0.4, 12.0]),
        ] {
            let r = stationarity_residual(&p, &g, &zero).unwrap();
            assert_eq!(r, g.norm());
        }
    }

    #[test]
    fn shadow_counter_matches_f_evals() {
        let hits = Arc::new(AtomicU64::new(0));
        let h = hits.clone();
        let p = ProblemInstance::new(2, move |x: &Point| {
            h.fetch_add(1, Ordering::SeqCst);
            0.5 * x.norm_squared()
        });
        let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
        let x = Point::from_vec(vec![1.0, 2.0]);
        for _ in 0..7 {
            counted_value(&p, &mut c, &x).unwrap();
        }
        assert_eq!(hits.load(Ordering::SeqCst), c.f_evals());
    }

    #[test]
    fn box_prox_and_values() {
        let comp = Composite::box_indicator(
            Point::from_vec(vec![0.0, -1.0]),
            Point::from_vec(vec![1.0, f64::INFINITY]),
        );
        assert_eq!(comp.value(&Point::from_vec(vec![0.5, 100.0])), 0.0);
        assert_eq!(
            comp.value(&Point::from_vec(vec![-0.1, 0.0])),
            f64::INFINITY
        );
        let proj = comp.prox(&Point::from_vec(vec![2.0, -5.0]), 1.0).unwrap();
        assert_eq!(proj, Point::from_vec(vec![1.0, -1.0]));
    }

    #[test]
    fn l1_prox_soft_thresholds() {
        let comp = Composite::L1 { weight: 2.0 };
        let out = comp
            .prox(&Point::from_vec(vec![3.0, -0.5, -4.0]), 0.5)
            .unwrap();
        assert_eq!(out, Point::from_vec(vec![2.0, 0.0, -3.0]));
        assert_eq!(comp.value(&Point::from_vec(vec![1.0, -2.0, 0.0])), 6.0);
    }
}
