//! Cubic-regularized model and its inexact composite subproblem.
//!
//! Around a center `x` the smooth part is modeled by
//! `M(y) = f(x) + <g, y-x> + (1/2)<B(y-x), y-x> + (sigma/6) ||y-x||^3`
//! and a step solves `min_y M(y) + psi(y)` inexactly. An accepted solution
//! carries its own certificate: the model value does not exceed `F(x)` and
//! the model gradient residual is at most `(sigma/4) ||y - x||^2` for an
//! explicit subgradient of `psi`.
//!
//! Two solver routes: with a zero composite the model is minimized globally
//! through an eigendecomposition of `B` and a scalar secular equation
//! (including the hard case); otherwise a proximal-gradient loop with
//! backtracking runs on the model until the certificate holds.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::finite_diff::SymmetricMatrixApprox;
use crate::problem::{Composite, Point};

/// Knobs for the inexact subproblem solver.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Also certify `B + sigma r I + hess psi >= 0` (used for second-order
    /// stationarity guarantees). Requires `psi` twice differentiable at the
    /// solution.
    pub require_second_order: bool,
    /// Iteration cap for the proximal-gradient route.
    pub max_inner_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            require_second_order: false,
            max_inner_iters: 500,
        }
    }
}

/// Accepted inexact minimizer of the composite subproblem.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub x_plus: Point,
    /// The certified subgradient of `psi` at `x_plus` (zero vector for a zero
    /// composite).
    pub psi_sub: Point,
    /// Step length `r = ||x_plus - x||`.
    pub r: f64,
    /// `M(x_plus) + psi(x_plus) <= F(x)` held at acceptance.
    pub model_decrease_ok: bool,
    /// `||grad M(x_plus) + psi_sub||`.
    pub grad_residual: f64,
    /// `lambda_min(B + sigma r I + hess psi(x_plus))` when second-order
    /// certification was requested.
    pub so_margin: Option<f64>,
}

/// The model `M_{x, sigma}` plus the composite it is minimized against.
pub struct CubicModel<'a> {
    center: &'a Point,
    f_center: f64,
    gradient: &'a Point,
    hessian: &'a SymmetricMatrixApprox,
    sigma: f64,
    composite: &'a Composite,
}

/// Acceptance tolerance for the degenerate `r = 0` step: the bound
/// `(sigma/4) r^2` collapses to zero, so the solver must certify stationarity
/// at the center to near machine precision or keep moving.
const ZERO_STEP_TOL: f64 = 1e-10;

impl<'a> CubicModel<'a> {
    pub fn new(
        center: &'a Point,
        f_center: f64,
        gradient: &'a Point,
        hessian: &'a SymmetricMatrixApprox,
        sigma: f64,
        composite: &'a Composite,
    ) -> Result<Self, Error> {
        let n = center.len();
        if gradient.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: gradient.len(),
            });
        }
        if hessian.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: hessian.dim(),
            });
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter("sigma must be positive"));
        }
        if !f_center.is_finite() {
            return Err(Error::NonfiniteValue);
        }
        Ok(CubicModel {
            center,
            f_center,
            gradient,
            hessian,
            sigma,
            composite,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> &Point {
        self.center
    }

    /// `M_{x, sigma}(y)`; the composite part is added by the caller.
    pub fn value(&self, y: &Point) -> f64 {
        let s = y - self.center;
        let quad = 0.5 * (&self.hessian.matrix * &s).dot(&s);
        self.f_center + self.gradient.dot(&s) + quad + self.sigma / 6.0 * s.norm().powi(3)
    }

    /// `grad M_{x, sigma}(y) = g + B(y-x) + (sigma/2) ||y-x|| (y-x)`.
    pub fn gradient_at(&self, y: &Point) -> Point {
        let s = y - self.center;
        let r = s.norm();
        self.gradient + &self.hessian.matrix * &s + (self.sigma / 2.0 * r) * s
    }

    /// The composite subgradient certified by the solver; equals
    /// `-grad M(x_plus)` for exact solutions, the zero vector for a zero
    /// composite.
    pub fn induced_subgradient(&self, sol: &SubproblemSolution) -> Point {
        sol.psi_sub.clone()
    }

    /// `lambda_min(B + sigma r I + hess_psi)`: nonnegative (up to rounding)
    /// certifies the optional second-order condition.
    pub fn second_order_margin(
        &self,
        sol: &SubproblemSolution,
        hess_psi: &DMatrix<f64>,
    ) -> Result<f64, Error> {
        let n = self.center.len();
        if hess_psi.nrows() != n || hess_psi.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: hess_psi.nrows(),
            });
        }
        let mut m = &self.hessian.matrix + hess_psi;
        for i in 0..n {
            m[(i, i)] += self.sigma * sol.r;
        }
        Ok(m.symmetric_eigen().eigenvalues.min())
    }

    /// Inexact solve of `min_y M(y) + psi(y)` with the acceptance certificate
    /// checked before returning.
    pub fn solve(&self, opts: &SolveOptions) -> Result<SubproblemSolution, Error> {
        match self.composite {
            Composite::Zero => self.spectral_solve(opts),
            _ => self.prox_solve(opts),
        }
    }

    fn accepts(&self, r: f64, grad_residual: f64) -> bool {
        if r == 0.0 {
            grad_residual <= ZERO_STEP_TOL * (1.0 + self.gradient.norm())
        } else {
            grad_residual <= self.sigma / 4.0 * r * r
        }
    }

    /// Global minimization for a zero composite: eigendecompose `B` and solve
    /// the secular equation `||(B + lambda I)^{-1} g|| = 2 lambda / sigma`
    /// over `lambda >= max(0, -lambda_min(B))` by bracketed bisection, adding
    /// an eigenvector component when the equation has no interior root (the
    /// hard case).
    fn spectral_solve(&self, opts: &SolveOptions) -> Result<SubproblemSolution, Error> {
        let n = self.center.len();
        let sigma = self.sigma;
        let b = &self.hessian.matrix;
        let eig = b.clone().symmetric_eigen();
        let lam = &eig.eigenvalues;
        let q = &eig.eigenvectors;
        let ghat = q.transpose() * self.gradient;

        let lam_min = lam.min();
        let lam_lb = (-lam_min).max(0.0);
        let scale = lam.amax().max(1.0);
        let gap_tol = 1e-12 * scale;
        let bottom = |i: usize| (lam[i] - lam_min).abs() <= gap_tol;

        // r(lambda) = || (Lambda + lambda I)^{-1} ghat ||; finite above lam_lb.
        let r_of = |lambda: f64| -> f64 {
            let mut s2 = 0.0;
            for i in 0..n {
                let d = lam[i] + lambda;
                let t = ghat[i] / d;
                s2 += t * t;
            }
            s2.sqrt()
        };

        let g_bottom: f64 = (0..n)
            .filter(|&i| bottom(i))
            .map(|i| ghat[i] * ghat[i])
            .sum::<f64>()
            .sqrt();
        let g_tol = 1e-13 * (1.0 + self.gradient.norm());
        let target = 2.0 * lam_lb / sigma;

        let r_interior: f64 = if g_bottom <= g_tol {
            (0..n)
                .filter(|&i| !bottom(i))
                .map(|i| {
                    let t = ghat[i] / (lam[i] + lam_lb);
                    t * t
                })
                .sum::<f64>()
                .sqrt()
        } else {
            f64::INFINITY
        };

        let s = if lam_lb > 0.0 && g_bottom <= g_tol && r_interior <= target {
            // Hard case: boundary multiplier lam_lb plus a component along the
            // bottom eigenvector to reach the prescribed step length.
            let mut shat = Point::zeros(n);
            for i in 0..n {
                if !bottom(i) {
                    shat[i] = -ghat[i] / (lam[i] + lam_lb);
                }
            }
            let alpha = (target * target - shat.norm_squared()).max(0.0).sqrt();
            let imin = (0..n)
                .min_by(|&i, &j| lam[i].partial_cmp(&lam[j]).unwrap())
                .unwrap();
            let base = q * shat;
            let vmin = q.column(imin).clone_owned();
            let plus = &base + alpha * &vmin;
            let minus = &base - alpha * &vmin;
            if lex_ge(&plus, &minus) {
                plus
            } else {
                minus
            }
        } else {
            // Interior root: phi(lambda) = r(lambda) - 2 lambda / sigma is
            // decreasing; bracket then bisect.
            let lo0 = lam_lb;
            let mut hi = lam_lb + (sigma * ghat.norm() / 2.0).sqrt() + 1e-300;
            let mut guard = 0;
            while r_of(hi) - 2.0 * hi / sigma >= 0.0 && guard < 200 {
                hi = lam_lb + 2.0 * (hi - lam_lb) + 1e-300;
                guard += 1;
            }
            let (mut lo, mut hi) = (lo0, hi);
            for _ in 0..256 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if r_of(mid) - 2.0 * mid / sigma >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let lam_star = 0.5 * (lo + hi);
            let mut shat = Point::zeros(n);
            for i in 0..n {
                let d = lam[i] + lam_star;
                if d != 0.0 {
                    shat[i] = -ghat[i] / d;
                }
            }
            q * shat
        };

        let x_plus = self.center + &s;
        let r = s.norm();
        let grad_residual = self.gradient_at(&x_plus).norm();
        if !self.accepts(r, grad_residual) {
            return Err(Error::SubproblemStalled { iters: 0 });
        }
        let model_decrease_ok = self.value(&x_plus) <= self.f_center;
        let so_margin = opts
            .require_second_order
            .then(|| lam_min + sigma * r);
        Ok(SubproblemSolution {
            x_plus,
            psi_sub: Point::zeros(n),
            r,
            model_decrease_ok,
            grad_residual,
            so_margin,
        })
    }

    /// Proximal-gradient descent on `M + psi` with backtracking, started at
    /// `y = x`, run until the acceptance certificate holds.
    fn prox_solve(&self, opts: &SolveOptions) -> Result<SubproblemSolution, Error> {
        let x = self.center;
        let sigma = self.sigma;
        let psi_x = self.composite.value(x);
        if !psi_x.is_finite() {
            return Err(Error::InfeasibleStart);
        }
        let f_x_total = self.f_center + psi_x;
        let bnorm = self.hessian.matrix.norm();

        let mut y = x.clone();
        let mut m_y = self.f_center;
        let mut eta = 1.0 / (bnorm + sigma + 1.0);

        for iter in 0..opts.max_inner_iters {
            let grad_y = self.gradient_at(&y);
            let mut step: Option<(Point, Point, f64)> = None; // (y_new, psi_sub, m_new)
            for _ in 0..80 {
                let v = &y - eta * &grad_y;
                let y_new = self.composite.prox(&v, eta)?;
                let m_new = self.value(&y_new);
                let dy = &y_new - &y;
                let upper = m_y + grad_y.dot(&dy) + dy.norm_squared() / (2.0 * eta);
                if m_new <= upper + 1e-15 * (1.0 + m_new.abs()) {
                    let psi_sub = (v - &y_new) / eta;
                    step = Some((y_new, psi_sub, m_new));
                    break;
                }
                eta *= 0.5;
            }
            let Some((y_new, psi_sub, m_new)) = step else {
                return Err(Error::SubproblemStalled { iters: iter });
            };

            let s_new = &y_new - x;
            let r = s_new.norm();
            let grad_residual = (self.gradient_at(&y_new) + &psi_sub).norm();
            let model_total = m_new + self.composite.value(&y_new);
            let model_decrease_ok = model_total <= f_x_total;

            if self.accepts(r, grad_residual) && model_decrease_ok {
                let so_margin = if opts.require_second_order {
                    let hp = self
                        .composite
                        .hessian_at(&y_new)
                        .ok_or(Error::NoHessianOracle)?;
                    Some(self.second_order_margin(
                        &SubproblemSolution {
                            x_plus: y_new.clone(),
                            psi_sub: psi_sub.clone(),
                            r,
                            model_decrease_ok,
                            grad_residual,
                            so_margin: None,
                        },
                        &hp,
                    )?)
                } else {
                    None
                };
                if let Some(mg) = so_margin {
                    if mg < -1e-10 * (1.0 + bnorm) {
                        y = y_new;
                        m_y = m_new;
                        eta *= 1.5;
                        continue;
                    }
                }
                return Ok(SubproblemSolution {
                    x_plus: y_new,
                    psi_sub,
                    r,
                    model_decrease_ok,
                    grad_residual,
                    so_margin,
                });
            }

            y = y_new;
            m_y = m_new;
            eta *= 1.5;
        }
        Err(Error::SubproblemStalled {
            iters: opts.max_inner_iters,
        })
    }
}

/// Lexicographic tie-break between step candidates of equal model value.
fn lex_ge(a: &Point, b: &Point) -> bool {
    for i in 0..a.len() {
        if a[i] > b[i] {
            return true;
        }
        if a[i] < b[i] {
            return false;
        }
    }
    true
}
