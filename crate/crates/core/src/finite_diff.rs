//! Finite-difference derivative estimators.
//!
//! Three estimators are used by the drivers: a Hessian built from gradient
//! differences (first-order), and gradient/Hessian estimates built from
//! function values only (zeroth-order). The interval parameters are supplied
//! by the caller; the adaptive drivers derive them from their schedules.
//!
//! With `L` the Hessian Lipschitz constant, the spectral-norm error bounds
//! are `sqrt(n) L h / 2` for the first-order Hessian and `sqrt(n) L h^2 / 6`
//! for the zeroth-order gradient. The zeroth-order Hessian is accurate to
//! `O(n L h)`; its per-entry remainder can reach `(5/3) L h` on the diagonal
//! (displacement `2h`), so tests budget that conservative constant.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::problem::{counted_gradient, counted_value, OracleCounter, Point, ProblemInstance};

/// Finite-difference intervals for one adaptive attempt: `h` drives the
/// Hessian estimators, `h_g` the zeroth-order gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdInterval {
    pub h: f64,
    pub h_g: f64,
}

impl FdInterval {
    pub fn new(h: f64, h_g: f64) -> Result<Self, Error> {
        if !(h > 0.0 && h.is_finite()) || !(h_g > 0.0 && h_g.is_finite()) {
            return Err(Error::InvalidParameter(
                "finite-difference intervals must be positive and finite",
            ));
        }
        Ok(FdInterval { h, h_g })
    }
}

/// Where a symmetric matrix approximation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxSource {
    FoFromGradients,
    ZoFromValues,
    Analytic,
}

/// A symmetric Hessian approximation `B = (A + A^T)/2`, symmetric bit-exactly
/// by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrixApprox {
    pub matrix: DMatrix<f64>,
    pub source: ApproxSource,
    pub h_used: f64,
}

impl SymmetricMatrixApprox {
    /// Wrap an analytically computed Hessian, symmetrizing it.
    pub fn analytic(h: DMatrix<f64>) -> Self {
        SymmetricMatrixApprox {
            matrix: symmetrize(&h),
            source: ApproxSource::Analytic,
            h_used: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `(A + A^T)/2` with `b_ij` and `b_ji` assigned from one computation, so the
/// result is symmetric to the bit.
fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        b[(i, i)] = a[(i, i)];
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    b
}

fn check_interval(h: f64) -> Result<(), Error> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "finite-difference interval must be positive and finite",
        ))
    }
}

/// Hessian estimate from forward gradient differences:
/// column `j` of `A` is `(grad f(x + h e_j) - grad f(x)) / h`, `B = (A + A^T)/2`.
///
/// Costs exactly `n + 1` gradient evaluations; `grad f(x)` is evaluated once
/// and reused for every column.
pub fn fo_hessian_approx(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x: &Point,
    h: f64,
) -> Result<SymmetricMatrixApprox, Error> {
    check_interval(h)?;
    let base = counted_gradient(p, c, x)?;
    fo_hessian_with_base(p, c, x, h, &base)
}

/// Same as [`fo_hessian_approx`] with `grad f(x)` supplied by the caller, so
/// the base gradient can be shared with the surrounding step. Costs exactly
/// `n` gradient evaluations.
pub fn fo_hessian_with_base(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x: &Point,
    h: f64,
    grad_at_x: &Point,
) -> Result<SymmetricMatrixApprox, Error> {
    check_interval(h)?;
    let n = p.dim();
    if grad_at_x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: grad_at_x.len(),
        });
    }
    let mut a = DMatrix::zeros(n, n);
    let mut shifted = x.clone();
    for j in 0..n {
        shifted[j] = x[j] + h;
        let gj = counted_gradient(p, c, &shifted)?;
        for i in 0..n {
            a[(i, j)] = (gj[i] - grad_at_x[i]) / h;
        }
        shifted[j] = x[j];
    }
    Ok(SymmetricMatrixApprox {
        matrix: symmetrize(&a),
        source: ApproxSource::FoFromGradients,
        h_used: h,
    })
}

/// Central-difference gradient estimate
/// `g_i = (f(x + h_g e_i) - f(x - h_g e_i)) / (2 h_g)`.
///
/// Costs exactly `2n` function evaluations.
pub fn zo_gradient_approx(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x: &Point,
    h_g: f64,
) -> Result<Point, Error> {
    check_interval(h_g)?;
    let n = p.dim();
    let mut g = Point::zeros(n);
    let mut probe = x.clone();
    for i in 0..n {
        probe[i] = x[i] + h_g;
        let fp = counted_value(p, c, &probe)?;
        probe[i] = x[i] - h_g;
        let fm = counted_value(p, c, &probe)?;
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h_g);
    }
    Ok(g)
}

/// Hessian estimate from function values:
/// `A_ij = (f(x + h e_i + h e_j) - f(x + h e_i) - f(x + h e_j) + f(x)) / h^2`.
///
/// Only the `i <= j` triangle is evaluated and mirrored (the formula is
/// symmetric in `(i, j)`), so the cost is exactly `n(n+1)/2 + n + 1` function
/// evaluations, with `f(x)` and the `f(x + h e_i)` each computed once.
pub fn zo_hessian_approx(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x: &Point,
    h: f64,
) -> Result<SymmetricMatrixApprox, Error> {
    check_interval(h)?;
    let f0 = counted_value(p, c, x)?;
    zo_hessian_with_base(p, c, x, h, f0)
}

/// Same as [`zo_hessian_approx`] with `f(x)` supplied by the caller. Costs
/// exactly `n(n+1)/2 + n` function evaluations.
pub fn zo_hessian_with_base(
    p: &ProblemInstance,
    c: &mut OracleCounter,
    x: &Point,
    h: f64,
    f_at_x: f64,
) -> Result<SymmetricMatrixApprox, Error> {
    check_interval(h)?;
    let n = p.dim();
    let mut probe = x.clone();
    let mut f_shift = vec![0.0; n];
    for (i, slot) in f_shift.iter_mut().enumerate() {
        probe[i] = x[i] + h;
        *slot = counted_value(p, c, &probe)?;
        probe[i] = x[i];
    }
    let inv_h2 = 1.0 / (h * h);
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        probe[i] = x[i] + h;
        for j in i..n {
            probe[j] += h;
            let fij = counted_value(p, c, &probe)?;
            probe[j] -= h;
            let v = (fij - f_shift[i] - f_shift[j] + f_at_x) * inv_h2;
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
        probe[i] = x[i];
    }
    Ok(SymmetricMatrixApprox {
        matrix: b,
        source: ApproxSource::ZoFromValues,
        h_used: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::BudgetKind;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn quadratic(q: DMatrix<f64>) -> ProblemInstance {
        let qg = q.clone();
        let n = q.nrows();
        ProblemInstance::new(n, move |x: &Point| 0.5 * (x.transpose() * &q * x)[(0, 0)])
            .with_gradient(move |x: &Point| &qg * x)
    }

    /// `f = (1/2) x'Qx + (beta/6) sum_i c_i x_i^3`, Hessian-Lipschitz with
    /// exact constant `L = beta * max_i |c_i|`.
    fn separable_cubic(q: DMatrix<f64>, beta: f64, c: Vec<f64>) -> (ProblemInstance, f64) {
        let n = q.nrows();
        let l = beta * c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (qv, cv) = (q.clone(), c.clone());
        let (qg, cg) = (q, c);
        let p = ProblemInstance::new(n, move |x: &Point| {
            let quad = 0.5 * (x.transpose() * &qv * x)[(0, 0)];
            let cub: f64 = x.iter().zip(&cv).map(|(&xi, ci)| ci * xi.powi(3)).sum();
            quad + beta / 6.0 * cub
        })
        .with_gradient(move |x: &Point| {
            let mut g = &qg * x;
            for i in 0..x.len() {
                g[i] += beta / 2.0 * cg[i] * x[i] * x[i];
            }
            g
        });
        (p, l)
    }

    fn cubic_hessian(
        q: &DMatrix<f64>,
        beta: f64,
        c: &[f64],
        x: &Point,
    ) -> DMatrix<f64> {
        let mut h = q.clone();
        for i in 0..x.len() {
            h[(i, i)] += beta * c[i] * x[i];
        }
        h
    }

    struct Rng(u64);
    impl Rng {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        }
        fn uniform(&mut self) -> f64 {
            (self.next() >> 11) as f64 / (1u64 << 53) as f64
        }
        fn range(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.uniform()
        }
    }

    fn random_symmetric(rng: &mut Rng, n: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.range(-2.0, 2.0));
        symmetrize(&a)
    }

    #[test]
    fn fo_hessian_exact_on_quadratics() {
        let mut rng = Rng(7);
        for n in [1usize, 2, 5] {
            let q = random_symmetric(&mut rng, n);
            let p = quadratic(q.clone());
            let mut c = OracleCounter::unlimited(BudgetKind::FoCalls);
            let x = DVector::from_fn(n, |_, _| rng.range(-1.0, 1.0));
            let b = fo_hessian_approx(&p, &mut c, &x, 0.37).unwrap();
            assert!((b.matrix - &q).norm() <= 1e-8 * (1.0 + q.norm()));
            assert_eq!(c.grad_evals(), (n as u64) + 1);
        }
    }

    #[test]
    fn fo_hessian_cubic_1d_tight_bound() {
        // f = x^3/6 at x = 0, h = 0.1: the estimate is h/2 = 0.05 and the
        // error meets sqrt(1) * L / 2 * h exactly (L = 1).
        let (p, l) = separable_cubic(DMatrix::zeros(1, 1), 1.0, vec![1.0]);
        let mut c = OracleCounter::unlimited(BudgetKind::FoCalls);
        let b = fo_hessian_approx(&p, &mut c, &Point::zeros(1), 0.1).unwrap();
        assert!((b.matrix[(0, 0)] - 0.05).abs() < 1e-15);
        let err = (b.matrix[(0, 0)] - 0.0f64).abs();
        assert!(err <= 0.5 * l * 0.1 * (1.0 + 1e-9));
        assert!(err >= 0.5 * l * 0.1 * (1.0 - 1e-9), "bound is tight here");
    }

    #[test]
    fn fo_hessian_error_bound_on_random_cubics() {
        let mut rng = Rng(11);
        for n in [1usize, 2, 5, 10] {
            for _ in 0..10 {
                let q = random_symmetric(&mut rng, n);
                let beta = rng.range(0.2, 2.0);
                let cs: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
                let (p, l) = separable_cubic(q.clone(), beta, cs.clone());
                let x = DVector::from_fn(n, |_, _| rng.range(-1.5, 1.5));
                let h = 1e-3;
                let mut c = OracleCounter::unlimited(BudgetKind::FoCalls);
                let b = fo_hessian_approx(&p, &mut c, &x, h).unwrap();
                let truth = cubic_hessian(&q, beta, &cs, &x);
                let err = (b.matrix - truth).norm();
                let bound = (n as f64).sqrt() * l * h / 2.0;
                assert!(
                    err <= bound * (1.0 + 1e-9) + 1e-12,
                    "n={n} err={err} bound={bound}"
                );
            }
        }
    }

    #[test]
    fn zo_gradient_examples() {
        // Linear objective: exact for any interval.
        let p = ProblemInstance::new(3, |x: &Point| 2.0 * x[0] - x[1] + 0.25 * x[2]);
        let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
        let g = zo_gradient_approx(&p, &mut c, &Point::zeros(3), 0.7).unwrap();
        assert!((g - Point::from_vec(vec![2.0, -1.0, 0.25])).norm() < 1e-14);
        assert_eq!(c.f_evals(), 6);

        // Quadratic: even-order terms cancel in the central difference.
        let p = ProblemInstance::new(1, |x: &Point| 0.5 * x[0] * x[0]);
        let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
        for (x0, h) in [(0.3, 0.5), (-1.2, 0.01)] {
            let g = zo_gradient_approx(&p, &mut c, &Point::from_vec(vec![x0]), h).unwrap();
            assert!((g[0] - x0).abs() < 1e-12);
        }

        // f = x^3/6 at 0 with h = 0.3: estimate 0.015, error exactly h^2/6.
        let p = ProblemInstance::new(1, |x: &Point| x[0].powi(3) / 6.0);
        let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
        let g = zo_gradient_approx(&p, &mut c, &Point::zeros(1), 0.3).unwrap();
        assert!((g[0] - 0.015).abs() < 1e-16);
    }

    #[test]
    fn zo_gradient_error_bound_on_random_cubics() {
        let mut rng = Rng(13);
        for n in [1usize, 2, 5, 10] {
            for _ in 0..10 {
                let q = random_symmetric(&mut rng, n);
                let beta = rng.range(0.2, 2.0);
                let cs: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
                let (p, l) = separable_cubic(q, beta, cs);
                let x = DVector::from_fn(n, |_, _| rng.range(-1.5, 1.5));
                let h = 1e-2;
                let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
                let g = zo_gradient_approx(&p, &mut c, &x, h).unwrap();
                let truth = p.gradient_raw(&x).unwrap();
                let err = (g - truth).norm();
                let bound = (n as f64).sqrt() * l * h * h / 6.0;
                assert!(err <= bound * (1.0 + 1e-9) + 1e-13, "err={err} bound={bound}");
                assert_eq!(c.f_evals(), 2 * n as u64);
            }
        }
    }

    #[test]
    fn zo_hessian_exact_on_quadratics_and_counts() {
        let mut rng = Rng(17);
        for n in [1usize, 2, 6] {
            let q = random_symmetric(&mut rng, n);
            let p = quadratic(q.clone());
            let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
            let x = DVector::from_fn(n, |_, _| rng.range(-1.0, 1.0));
            let b = zo_hessian_approx(&p, &mut c, &x, 0.25).unwrap();
            assert!((b.matrix - &q).norm() <= 1e-8 * (1.0 + q.norm()));
            let n = n as u64;
            assert_eq!(c.f_evals(), n * (n + 1) / 2 + n + 1);
        }
    }

    #[test]
    fn zo_hessian_diagonal_remainder() {
        // f = x^3/6, x = 0, h = 0.2: A = ((2h)^3/6 - 2 h^3/6)/h^2 = h, which
        // exceeds (2/3) L h and motivates the conservative 5/3 constant.
        let p = ProblemInstance::new(1, |x: &Point| x[0].powi(3) / 6.0);
        let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
        let b = zo_hessian_approx(&p, &mut c, &Point::zeros(1), 0.2).unwrap();
        assert!((b.matrix[(0, 0)] - 0.2).abs() < 1e-14);
        let err = b.matrix[(0, 0)].abs();
        assert!(err > 2.0 / 3.0 * 0.2);
        assert!(err <= 5.0 / 3.0 * 0.2 * (1.0 + 1e-9));
    }

    #[test]
    fn zo_hessian_entrywise_remainder_on_random_cubics() {
        // For quadratic-plus-separable-cubic objectives the exact remainders
        // are beta*c_i*h on the diagonal and zero off it; both sit inside the
        // (5/3) L h envelope.
        let mut rng = Rng(19);
        for n in [2usize, 5] {
            for _ in 0..8 {
                let q = random_symmetric(&mut rng, n);
                let beta = rng.range(0.1, 1.0);
                let cs: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
                let (p, l) = separable_cubic(q.clone(), beta, cs.clone());
                let x = DVector::from_fn(n, |_, _| rng.range(-1.0, 1.0));
                let h = 1e-3;
                let mut c = OracleCounter::unlimited(BudgetKind::ZoCalls);
                let b = zo_hessian_approx(&p, &mut c, &x, h).unwrap();
                let truth = cubic_hessian(&q, beta, &cs, &x);
                for i in 0..n {
                    for j in 0..n {
                        let e = (b.matrix[(i, j)] - truth[(i, j)]).abs();
                        let expected = if i == j { beta * cs[i].abs() * h } else { 0.0 };
                        // 1e-8 absorbs the rounding in the fourfold value
                        // difference divided by h^2.
                        assert!(e <= expected * (1.0 + 1e-6) + 1e-8);
                        assert!(e <= 5.0 / 3.0 * l * h * (1.0 + 1e-9) + 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_interval_rejected() {
        let p = ProblemInstance::new(1, |x: &Point| x[0]).with_gradient(|_x| Point::zeros(1));
        let mut c = OracleCounter::unlimited(BudgetKind::FoCalls);
        for h in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(fo_hessian_approx(&p, &mut c, &Point::zeros(1), h).is_err());
            assert!(zo_gradient_approx(&p, &mut c, &Point::zeros(1), h).is_err());
            assert!(zo_hessian_approx(&p, &mut c, &Point::zeros(1), h).is_err());
        }
        assert!(FdInterval::new(0.1, 0.0).is_err());
        assert!(FdInterval::new(0.1, 0.2).is_ok());
    }

    proptest! {
        #[test]
        fn outputs_are_bit_symmetric(seed in 0u64..500, n in 1usize..6) {
            let mut rng = Rng(seed);
            let q = random_symmetric(&mut rng, n);
            let beta = rng.range(0.0, 2.0);
            let cs: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
            let (p, _) = separable_cubic(q, beta, cs);
            let x = DVector::from_fn(n, |_, _| rng.range(-1.0, 1.0));
            let mut c = OracleCounter::unlimited(BudgetKind::FoCalls);
            let bf = fo_hessian_approx(&p, &mut c, &x, 0.01).unwrap();
            let bz = zo_hessian_approx(&p, &mut c, &x, 0.01).unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(bf.matrix[(i, j)].to_bits(), bf.matrix[(j, i)].to_bits());
                    prop_assert_eq!(bz.matrix[(i, j)].to_bits(), bz.matrix[(j, i)].to_bits());
                }
            }
        }
    }

    #[test]
    fn budget_exhaustion_propagates() {
        let p = ProblemInstance::new(3, |x: &Point| 0.5 * x.norm_squared())
            .with_gradient(|x: &Point| x.clone());
        let mut c = OracleCounter::with_budget(BudgetKind::FoCalls, 2);
        let err = fo_hessian_approx(&p, &mut c, &Point::zeros(3), 0.1).unwrap_err();
        assert_eq!(err, Error::BudgetExhausted { budget: 2 });
        let mut c = OracleCounter::with_budget(BudgetKind::ZoCalls, 3);
        let err = zo_gradient_approx(&p, &mut c, &Point::zeros(3), 0.1).unwrap_err();
        assert_eq!(err, Error::BudgetExhausted { budget: 3 });
    }
}
