//! Benchmark objectives: a Moré–Garbow–Hillstrom subset with analytic
//! derivatives, synthetic instances with exactly known smoothness constants,
//! and the second-order stationarity diagnostic `xi`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::problem::{Composite, Point, ProblemInstance};

/// One catalog problem: a builder plus its standard starting point and the
/// reference data that is known for it.
#[derive(Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: usize,
    pub standard_start: Point,
    /// Objective value at a known global minimizer, when documented.
    pub f_at_known_min: Option<f64>,
    /// A known minimizer, when available in closed form.
    pub known_minimizer: Option<Point>,
    /// Hessian Lipschitz constant valid on the centered box of the given
    /// radius (`f64::INFINITY` = global).
    pub known_l_on_box: Option<(f64, f64)>,
    builder: Arc<dyn Fn() -> ProblemInstance + Send + Sync>,
}

impl CatalogEntry {
    pub fn build(&self) -> ProblemInstance {
        (self.builder)()
    }

    /// Same instance with a composite term attached (used by composite-path
    /// tests and benchmarks).
    pub fn build_with_composite(&self, composite: Composite) -> ProblemInstance {
        self.build().with_composite(composite)
    }
}

/// Sum-of-squares instance `f = sum_i r_i(x)^2` from residuals, Jacobian, and
/// the weighted residual-Hessian combination `sum_i w_i hess r_i(x)`.
fn least_squares(
    dim: usize,
    residuals: impl Fn(&Point) -> DVector<f64> + Send + Sync + Clone + 'static,
    jacobian: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + Clone + 'static,
    weighted_hessians: impl Fn(&Point, &DVector<f64>) -> DMatrix<f64> + Send + Sync + Clone + 'static,
) -> ProblemInstance {
    let r_val = residuals.clone();
    let r_grad = residuals.clone();
    let j_grad = jacobian.clone();
    ProblemInstance::new(dim, move |x: &Point| r_val(x).norm_squared())
        .with_gradient(move |x: &Point| 2.0 * (j_grad(x).transpose() * r_grad(x)))
        .with_hessian(move |x: &Point| {
            let j = jacobian(x);
            let r = residuals(x);
            2.0 * (j.transpose() * &j) + 2.0 * weighted_hessians(x, &r)
        })
}

fn entry(
    name: &str,
    start: Vec<f64>,
    f_min: Option<f64>,
    minimizer: Option<Vec<f64>>,
    builder: impl Fn() -> ProblemInstance + Send + Sync + 'static,
) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        dim: start.len(),
        standard_start: Point::from_vec(start),
        f_at_known_min: f_min,
        known_minimizer: minimizer.map(Point::from_vec),
        known_l_on_box: None,
        builder: Arc::new(builder),
    }
}

fn rosenbrock() -> ProblemInstance {
    least_squares(
        2,
        |x| DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]),
        |x| DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0]),
        |_x, r| DMatrix::from_row_slice(2, 2, &[-20.0 * r[0], 0.0, 0.0, 0.0]),
    )
}

fn freudenstein_roth() -> ProblemInstance {
    least_squares(
        2,
        |x| {
            let v = x[1];
            DVector::from_vec(vec![
                -13.0 + x[0] + ((5.0 - v) * v - 2.0) * v,
                -29.0 + x[0] + ((v + 1.0) * v - 14.0) * v,
            ])
        },
        |x| {
            let v = x[1];
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    1.0,
                    10.0 * v - 3.0 * v * v - 2.0,
                    1.0,
                    3.0 * v * v + 2.0 * v - 14.0,
                ],
            )
        },
        |x, r| {
            let v = x[1];
            let h22 = r[0] * (10.0 - 6.0 * v) + r[1] * (6.0 * v + 2.0);
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, h22])
        },
    )
}

fn powell_badly_scaled() -> ProblemInstance {
    least_squares(
        2,
        |x| {
            DVector::from_vec(vec![
                1e4 * x[0] * x[1] - 1.0,
                (-x[0]).exp() + (-x[1]).exp() - 1.0001,
            ])
        },
        |x| {
            DMatrix::from_row_slice(
                2,
                2,
                &[1e4 * x[1], 1e4 * x[0], -(-x[0]).exp(), -(-x[1]).exp()],
            )
        },
        |x, r| {
            let (e0, e1) = ((-x[0]).exp(), (-x[1]).exp());
            DMatrix::from_row_slice(
                2,
                2,
                &[r[1] * e0, r[0] * 1e4, r[0] * 1e4, r[1] * e1],
            )
        },
    )
}

fn brown_badly_scaled() -> ProblemInstance {
    least_squares(
        2,
        |x| DVector::from_vec(vec![x[0] - 1e6, x[1] - 2e-6, x[0] * x[1] - 2.0]),
        |x| DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, x[1], x[0]]),
        |_x, r| DMatrix::from_row_slice(2, 2, &[0.0, r[2], r[2], 0.0]),
    )
}

fn beale() -> ProblemInstance {
    const Y: [f64; 3] = [1.5, 2.25, 2.625];
    least_squares(
        2,
        |x| DVector::from_fn(3, |i, _| Y[i] - x[0] * (1.0 - x[1].powi(i as i32 + 1))),
        |x| {
            DMatrix::from_fn(3, 2, |i, j| {
                let k = i as i32 + 1;
                if j == 0 {
                    -(1.0 - x[1].powi(k))
                } else {
                    x[0] * k as f64 * x[1].powi(k - 1)
                }
            })
        },
        |x, r| {
            let mut h = DMatrix::zeros(2, 2);
            for i in 0..3 {
                let k = i as i32 + 1;
                let d12 = k as f64 * x[1].powi(k - 1);
                let d22 = x[0] * (k * (k - 1)) as f64 * if k >= 2 { x[1].powi(k - 2) } else { 0.0 };
                h[(0, 1)] += r[i] * d12;
                h[(1, 0)] += r[i] * d12;
                h[(1, 1)] += r[i] * d22;
            }
            h
        },
    )
}

fn helical_theta(x1: f64, x2: f64) -> f64 {
    if x1 > 0.0 {
        (x2 / x1).atan() / (2.0 * PI)
    } else if x1 < 0.0 {
        (x2 / x1).atan() / (2.0 * PI) + 0.5
    } else {
        0.25 * x2.signum()
    }
}

fn helical_valley() -> ProblemInstance {
    least_squares(
        3,
        |x| {
            let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
            DVector::from_vec(vec![
                10.0 * (x[2] - 10.0 * helical_theta(x[0], x[1])),
                10.0 * (rho - 1.0),
                x[2],
            ])
        },
        |x| {
            let rho2 = x[0] * x[0] + x[1] * x[1];
            let rho = rho2.sqrt();
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    50.0 * x[1] / (PI * rho2),
                    -50.0 * x[0] / (PI * rho2),
                    10.0,
                    10.0 * x[0] / rho,
                    10.0 * x[1] / rho,
                    0.0,
                    0.0,
                    0.0,
                    1.0,
                ],
            )
        },
        |x, r| {
            let rho2 = x[0] * x[0] + x[1] * x[1];
            let rho = rho2.sqrt();
            // theta second derivatives (the branch offset is constant).
            let t11 = x[0] * x[1] / (PI * rho2 * rho2);
            let t12 = -1.0 / (2.0 * PI * rho2) + x[1] * x[1] / (PI * rho2 * rho2);
            let t22 = -x[0] * x[1] / (PI * rho2 * rho2);
            // rho second derivatives.
            let p11 = 1.0 / rho - x[0] * x[0] / (rho * rho2);
            let p12 = -x[0] * x[1] / (rho * rho2);
            let p22 = 1.0 / rho - x[1] * x[1] / (rho * rho2);
            let mut h = DMatrix::zeros(3, 3);
            h[(0, 0)] = r[0] * (-100.0 * t11) + r[1] * 10.0 * p11;
            h[(0, 1)] = r[0] * (-100.0 * t12) + r[1] * 10.0 * p12;
            h[(1, 0)] = h[(0, 1)];
            h[(1, 1)] = r[0] * (-100.0 * t22) + r[1] * 10.0 * p22;
            h
        },
    )
}

fn powell_singular() -> ProblemInstance {
    let s5 = 5.0f64.sqrt();
    let s10 = 10.0f64.sqrt();
    least_squares(
        4,
        move |x| {
            DVector::from_vec(vec![
                x[0] + 10.0 * x[1],
                s5 * (x[2] - x[3]),
                (x[1] - 2.0 * x[2]).powi(2),
                s10 * (x[0] - x[3]).powi(2),
            ])
        },
        move |x| {
            let a = x[1] - 2.0 * x[2];
            let b = x[0] - x[3];
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    1.0, 10.0, 0.0, 0.0, //
                    0.0, 0.0, s5, -s5, //
                    0.0, 2.0 * a, -4.0 * a, 0.0, //
                    2.0 * s10 * b, 0.0, 0.0, -2.0 * s10 * b,
                ],
            )
        },
        move |_x, r| {
            let mut h = DMatrix::zeros(4, 4);
            // hess r3 = 2 v v' with v = (0, 1, -2, 0)
            let v3 = [0.0, 1.0, -2.0, 0.0];
            // hess r4 = 2 sqrt(10) w w' with w = (1, 0, 0, -1)
            let v4 = [1.0, 0.0, 0.0, -1.0];
            for i in 0..4 {
                for j in 0..4 {
                    h[(i, j)] =
                        r[2] * 2.0 * v3[i] * v3[j] + r[3] * 2.0 * s10 * v4[i] * v4[j];
                }
            }
            h
        },
    )
}

fn wood() -> ProblemInstance {
    let s90 = 90.0f64.sqrt();
    let s10 = 10.0f64.sqrt();
    least_squares(
        4,
        move |x| {
            DVector::from_vec(vec![
                10.0 * (x[1] - x[0] * x[0]),
                1.0 - x[0],
                s90 * (x[3] - x[2] * x[2]),
                1.0 - x[2],
                s10 * (x[1] + x[3] - 2.0),
                (x[1] - x[3]) / s10,
            ])
        },
        move |x| {
            let mut j = DMatrix::zeros(6, 4);
            j[(0, 0)] = -20.0 * x[0];
            j[(0, 1)] = 10.0;
            j[(1, 0)] = -1.0;
            j[(2, 2)] = -2.0 * s90 * x[2];
            j[(2, 3)] = s90;
            j[(3, 2)] = -1.0;
            j[(4, 1)] = s10;
            j[(4, 3)] = s10;
            j[(5, 1)] = 1.0 / s10;
            j[(5, 3)] = -1.0 / s10;
            j
        },
        move |_x, r| {
            let mut h = DMatrix::zeros(4, 4);
            h[(0, 0)] = r[0] * -20.0;
            h[(2, 2)] = r[2] * -2.0 * s90;
            h
        },
    )
}

fn biggs_exp6() -> ProblemInstance {
    least_squares(
        6,
        |x| {
            DVector::from_fn(13, |i, _| {
                let t = 0.1 * (i as f64 + 1.0);
                let y = (-t).exp() - 5.0 * (-10.0 * t).exp() + 3.0 * (-4.0 * t).exp();
                x[2] * (-t * x[0]).exp() - x[3] * (-t * x[1]).exp() + x[5] * (-t * x[4]).exp()
                    - y
            })
        },
        |x| {
            DMatrix::from_fn(13, 6, |i, j| {
                let t = 0.1 * (i as f64 + 1.0);
                let e1 = (-t * x[0]).exp();
                let e2 = (-t * x[1]).exp();
                let e3 = (-t * x[4]).exp();
                match j {
                    0 => -t * x[2] * e1,
                    1 => t * x[3] * e2,
                    2 => e1,
                    3 => -e2,
                    4 => -t * x[5] * e3,
                    _ => e3,
                }
            })
        },
        |x, r| {
            let mut h = DMatrix::zeros(6, 6);
            for i in 0..13 {
                let t = 0.1 * (i as f64 + 1.0);
                let e1 = (-t * x[0]).exp();
                let e2 = (-t * x[1]).exp();
                let e3 = (-t * x[4]).exp();
                h[(0, 0)] += r[i] * t * t * x[2] * e1;
                h[(1, 1)] += r[i] * -t * t * x[3] * e2;
                h[(4, 4)] += r[i] * t * t * x[5] * e3;
                let h02 = r[i] * -t * e1;
                h[(0, 2)] += h02;
                h[(2, 0)] += h02;
                let h13 = r[i] * t * e2;
                h[(1, 3)] += h13;
                h[(3, 1)] += h13;
                let h45 = r[i] * -t * e3;
                h[(4, 5)] += h45;
                h[(5, 4)] += h45;
            }
            h
        },
    )
}

fn extended_rosenbrock(n: usize) -> ProblemInstance {
    assert!(n % 2 == 0);
    least_squares(
        n,
        move |x| {
            DVector::from_fn(n, |i, _| {
                let p = i / 2;
                if i % 2 == 0 {
                    10.0 * (x[2 * p + 1] - x[2 * p] * x[2 * p])
                } else {
                    1.0 - x[2 * p]
                }
            })
        },
        move |x| {
            let mut j = DMatrix::zeros(n, n);
            for p in 0..n / 2 {
                j[(2 * p, 2 * p)] = -20.0 * x[2 * p];
                j[(2 * p, 2 * p + 1)] = 10.0;
                j[(2 * p + 1, 2 * p)] = -1.0;
            }
            j
        },
        move |_x, r| {
            let mut h = DMatrix::zeros(n, n);
            for p in 0..n / 2 {
                h[(2 * p, 2 * p)] = r[2 * p] * -20.0;
            }
            h
        },
    )
}

fn broyden_tridiagonal(n: usize) -> ProblemInstance {
    least_squares(
        n,
        move |x| {
            DVector::from_fn(n, |i, _| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                (3.0 - 2.0 * x[i]) * x[i] - left - 2.0 * right + 1.0
            })
        },
        move |x| {
            let mut j = DMatrix::zeros(n, n);
            for i in 0..n {
                j[(i, i)] = 3.0 - 4.0 * x[i];
                if i > 0 {
                    j[(i, i - 1)] = -1.0;
                }
                if i + 1 < n {
                    j[(i, i + 1)] = -2.0;
                }
            }
            j
        },
        move |_x, r| {
            let mut h = DMatrix::zeros(n, n);
            for i in 0..n {
                h[(i, i)] = r[i] * -4.0;
            }
            h
        },
    )
}

fn trigonometric(n: usize) -> ProblemInstance {
    least_squares(
        n,
        move |x| {
            let cos_sum: f64 = x.iter().map(|v| v.cos()).sum();
            DVector::from_fn(n, |i, _| {
                n as f64 - cos_sum + (i as f64 + 1.0) * (1.0 - x[i].cos()) - x[i].sin()
            })
        },
        move |x| {
            DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    x[j].sin() + (i as f64 + 1.0) * x[i].sin() - x[i].cos()
                } else {
                    x[j].sin()
                }
            })
        },
        move |x, r| {
            let rsum: f64 = r.iter().sum();
            let mut h = DMatrix::zeros(n, n);
            for j in 0..n {
                h[(j, j)] = rsum * x[j].cos()
                    + r[j] * ((j as f64 + 1.0) * x[j].cos() + x[j].sin());
            }
            h
        },
    )
}

fn discrete_boundary_value(n: usize) -> ProblemInstance {
    let h = 1.0 / (n as f64 + 1.0);
    let t = move |i: usize| (i as f64 + 1.0) * h;
    least_squares(
        n,
        move |x| {
            DVector::from_fn(n, |i, _| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                2.0 * x[i] - left - right + h * h * (x[i] + t(i) + 1.0).powi(3) / 2.0
            })
        },
        move |x| {
            let mut j = DMatrix::zeros(n, n);
            for i in 0..n {
                j[(i, i)] = 2.0 + 1.5 * h * h * (x[i] + t(i) + 1.0).powi(2);
                if i > 0 {
                    j[(i, i - 1)] = -1.0;
                }
                if i + 1 < n {
                    j[(i, i + 1)] = -1.0;
                }
            }
            j
        },
        move |x, r| {
            let mut hs = DMatrix::zeros(n, n);
            for i in 0..n {
                hs[(i, i)] = r[i] * 3.0 * h * h * (x[i] + t(i) + 1.0);
            }
            hs
        },
    )
}

fn discrete_integral_equation(n: usize) -> ProblemInstance {
    let h = 1.0 / (n as f64 + 1.0);
    let t = move |j: usize| (j as f64 + 1.0) * h;
    let w = move |i: usize, j: usize| {
        if j <= i {
            (1.0 - t(i)) * t(j)
        } else {
            t(i) * (1.0 - t(j))
        }
    };
    least_squares(
        n,
        move |x| {
            let cubes: Vec<f64> = (0..n).map(|j| (x[j] + t(j) + 1.0).powi(3)).collect();
            DVector::from_fn(n, |i, _| {
                let mut acc = 0.0;
                for (j, cube) in cubes.iter().enumerate() {
                    acc += w(i, j) * cube;
                }
                x[i] + h / 2.0 * acc
            })
        },
        move |x| {
            DMatrix::from_fn(n, n, |i, j| {
                let d = if i == j { 1.0 } else { 0.0 };
                d + h / 2.0 * w(i, j) * 3.0 * (x[j] + t(j) + 1.0).powi(2)
            })
        },
        move |x, r| {
            let mut hs = DMatrix::zeros(n, n);
            for j in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += r[i] * w(i, j);
                }
                hs[(j, j)] = acc * h / 2.0 * 6.0 * (x[j] + t(j) + 1.0);
            }
            hs
        },
    )
}

fn broyden_banded(n: usize) -> ProblemInstance {
    let band = move |i: usize| {
        let lo = i.saturating_sub(5);
        let hi = (i + 1).min(n - 1);
        (lo..=hi).filter(move |&j| j != i)
    };
    least_squares(
        n,
        move |x| {
            DVector::from_fn(n, |i, _| {
                let nb: f64 = band(i).map(|j| x[j] * (1.0 + x[j])).sum();
                x[i] * (2.0 + 5.0 * x[i] * x[i]) + 1.0 - nb
            })
        },
        move |x| {
            let mut j = DMatrix::zeros(n, n);
            for i in 0..n {
                j[(i, i)] = 2.0 + 15.0 * x[i] * x[i];
                for k in band(i) {
                    j[(i, k)] = -(1.0 + 2.0 * x[k]);
                }
            }
            j
        },
        move |x, r| {
            let mut hs = DMatrix::zeros(n, n);
            for i in 0..n {
                hs[(i, i)] += r[i] * 30.0 * x[i];
                for k in band(i) {
                    hs[(k, k)] += r[i] * -2.0;
                }
            }
            hs
        },
    )
}

fn extended_powell_singular(n: usize) -> ProblemInstance {
    assert!(n % 4 == 0);
    let s5 = 5.0f64.sqrt();
    let s10 = 10.0f64.sqrt();
    least_squares(
        n,
        move |x| {
            DVector::from_fn(n, |i, _| {
                let b = 4 * (i / 4);
                match i % 4 {
                    0 => x[b] + 10.0 * x[b + 1],
                    1 => s5 * (x[b + 2] - x[b + 3]),
                    2 => (x[b + 1] - 2.0 * x[b + 2]).powi(2),
                    _ => s10 * (x[b] - x[b + 3]).powi(2),
                }
            })
        },
        move |x| {
            let mut j = DMatrix::zeros(n, n);
            for b in (0..n).step_by(4) {
                let a = x[b + 1] - 2.0 * x[b + 2];
                let d = x[b] - x[b + 3];
                j[(b, b)] = 1.0;
                j[(b, b + 1)] = 10.0;
                j[(b + 1, b + 2)] = s5;
                j[(b + 1, b + 3)] = -s5;
                j[(b + 2, b + 1)] = 2.0 * a;
                j[(b + 2, b + 2)] = -4.0 * a;
                j[(b + 3, b)] = 2.0 * s10 * d;
                j[(b + 3, b + 3)] = -2.0 * s10 * d;
            }
            j
        },
        move |_x, r| {
            let mut h = DMatrix::zeros(n, n);
            for b in (0..n).step_by(4) {
                let v3 = [0.0, 1.0, -2.0, 0.0];
                let v4 = [1.0, 0.0, 0.0, -1.0];
                for i in 0..4 {
                    for j in 0..4 {
                        h[(b + i, b + j)] = r[b + 2] * 2.0 * v3[i] * v3[j]
                            + r[b + 3] * 2.0 * s10 * v4[i] * v4[j];
                    }
                }
            }
            h
        },
    )
}

/// Shifted Chebyshev value and first two derivatives at `t` (argument on
/// [0, 1]) for orders `1..=kmax`.
fn chebyshev_rows(t: f64, kmax: usize) -> Vec<(f64, f64, f64)> {
    let u = 2.0 * t - 1.0;
    let mut out = Vec::with_capacity(kmax);
    let (mut tm1, mut dm1, mut sm1) = (1.0f64, 0.0f64, 0.0f64); // T_0
    let (mut tk, mut dk, mut sk) = (u, 2.0, 0.0); // T_1
    for _ in 0..kmax {
        out.push((tk, dk, sk));
        let tn = 2.0 * u * tk - tm1;
        let dn = 4.0 * tk + 2.0 * u * dk - dm1;
        let sn = 8.0 * dk + 2.0 * u * sk - sm1;
        tm1 = tk;
        dm1 = dk;
        sm1 = sk;
        tk = tn;
        dk = dn;
        sk = sn;
    }
    out
}

fn chebyquad(n: usize) -> ProblemInstance {
    let integral = move |i: usize| {
        // Exact integral of the i-th shifted Chebyshev polynomial over [0,1].
        let k = i + 1;
        if k % 2 == 1 {
            0.0
        } else {
            -1.0 / ((k * k - 1) as f64)
        }
    };
    least_squares(
        n,
        move |x| {
            let mut sums = vec![0.0; n];
            for &xj in x.iter() {
                for (i, (t, _, _)) in chebyshev_rows(xj, n).iter().enumerate() {
                    sums[i] += t;
                }
            }
            DVector::from_fn(n, |i, _| sums[i] / n as f64 - integral(i))
        },
        move |x| {
            let mut j = DMatrix::zeros(n, n);
            for (col, &xj) in x.iter().enumerate() {
                for (i, (_, d, _)) in chebyshev_rows(xj, n).iter().enumerate() {
                    j[(i, col)] = d / n as f64;
                }
            }
            j
        },
        move |x, r| {
            let mut h = DMatrix::zeros(n, n);
            for (col, &xj) in x.iter().enumerate() {
                let mut acc = 0.0;
                for (i, (_, _, s)) in chebyshev_rows(xj, n).iter().enumerate() {
                    acc += r[i] * s;
                }
                h[(col, col)] = acc / n as f64;
            }
            h
        },
    )
}

fn variably_dimensioned(n: usize) -> ProblemInstance {
    let wsum = move |x: &Point| -> f64 {
        x.iter()
            .enumerate()
            .map(|(j, &xj)| (j as f64 + 1.0) * (xj - 1.0))
            .sum()
    };
    least_squares(
        n,
        move |x| {
            let s = wsum(x);
            DVector::from_fn(n + 2, |i, _| {
                if i < n {
                    x[i] - 1.0
                } else if i == n {
                    s
                } else {
                    s * s
                }
            })
        },
        move |x| {
            let s = wsum(x);
            let mut j = DMatrix::zeros(n + 2, n);
            for i in 0..n {
                j[(i, i)] = 1.0;
                let wi = i as f64 + 1.0;
                j[(n, i)] = wi;
                j[(n + 1, i)] = 2.0 * s * wi;
            }
            j
        },
        move |_x, r| {
            DMatrix::from_fn(n, n, |i, j| {
                let (wi, wj) = (i as f64 + 1.0, j as f64 + 1.0);
                r[n + 1] * 2.0 * wi * wj
            })
        },
    )
}

fn brown_almost_linear(n: usize) -> ProblemInstance {
    least_squares(
        n,
        move |x| {
            let sum: f64 = x.iter().sum();
            let prod: f64 = x.iter().product();
            DVector::from_fn(n, |i, _| {
                if i + 1 < n {
                    x[i] + sum - (n as f64 + 1.0)
                } else {
                    prod - 1.0
                }
            })
        },
        move |x| {
            let mut j = DMatrix::from_element(n, n, 1.0);
            for i in 0..n - 1 {
                j[(i, i)] = 2.0;
            }
            for k in 0..n {
                let prod_except: f64 = x
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, v)| v)
                    .product();
                j[(n - 1, k)] = prod_except;
            }
            j
        },
        move |x, r| {
            // Only the product residual is nonlinear:
            // d2 prod / dx_i dx_j = prod over the remaining coordinates.
            let mut hs = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let prod_except: f64 = x
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| *k != i && *k != j)
                            .map(|(_, v)| v)
                            .product();
                        hs[(i, j)] = r[n - 1] * prod_except;
                    }
                }
            }
            hs
        },
    )
}

fn penalty_1(n: usize) -> ProblemInstance {
    let a = 1e-5f64.sqrt();
    least_squares(
        n,
        move |x| {
            DVector::from_fn(n + 1, |i, _| {
                if i < n {
                    a * (x[i] - 1.0)
                } else {
                    x.norm_squared() - 0.25
                }
            })
        },
        move |x| {
            let mut j = DMatrix::zeros(n + 1, n);
            for i in 0..n {
                j[(i, i)] = a;
                j[(n, i)] = 2.0 * x[i];
            }
            j
        },
        move |_x, r| {
            let mut hs = DMatrix::zeros(n, n);
            for i in 0..n {
                hs[(i, i)] = r[n] * 2.0;
            }
            hs
        },
    )
}

/// The benchmark subset: the twelve core problems spanning dimensions 2 to
/// 20 (badly scaled and singular-Hessian instances included), plus four more
/// collection problems with slowly varying Hessians, each with its
/// collection-standard starting point.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        entry(
            "rosenbrock",
            vec![-1.2, 1.0],
            Some(0.0),
            Some(vec![1.0, 1.0]),
            rosenbrock,
        ),
        entry(
            "freudenstein-roth",
            vec![0.5, -2.0],
            Some(0.0),
            Some(vec![5.0, 4.0]),
            freudenstein_roth,
        ),
        entry(
            "powell-badly-scaled",
            vec![0.0, 1.0],
            Some(0.0),
            None,
            powell_badly_scaled,
        ),
        entry(
            "brown-badly-scaled",
            vec![1.0, 1.0],
            Some(0.0),
            Some(vec![1e6, 2e-6]),
            brown_badly_scaled,
        ),
        entry(
            "beale",
            vec![1.0, 1.0],
            Some(0.0),
            Some(vec![3.0, 0.5]),
            beale,
        ),
        entry(
            "helical-valley",
            vec![-1.0, 0.0, 0.0],
            Some(0.0),
            Some(vec![1.0, 0.0, 0.0]),
            helical_valley,
        ),
        entry(
            "powell-singular",
            vec![3.0, -1.0, 0.0, 1.0],
            Some(0.0),
            Some(vec![0.0, 0.0, 0.0, 0.0]),
            powell_singular,
        ),
        entry(
            "wood",
            vec![-3.0, -1.0, -3.0, -1.0],
            Some(0.0),
            Some(vec![1.0, 1.0, 1.0, 1.0]),
            wood,
        ),
        entry(
            "biggs-exp6",
            vec![1.0, 2.0, 1.0, 1.0, 1.0, 1.0],
            Some(0.0),
            Some(vec![1.0, 10.0, 1.0, 5.0, 4.0, 3.0]),
            biggs_exp6,
        ),
        entry(
            "extended-rosenbrock",
            vec![-1.2, 1.0, -1.2, 1.0, -1.2, 1.0, -1.2, 1.0, -1.2, 1.0],
            Some(0.0),
            Some(vec![1.0; 10]),
            || extended_rosenbrock(10),
        ),
        entry(
            "broyden-tridiagonal",
            vec![-1.0; 20],
            Some(0.0),
            None,
            || broyden_tridiagonal(20),
        ),
        entry(
            "trigonometric",
            vec![0.1; 10],
            Some(0.0),
            None,
            || trigonometric(10),
        ),
        entry(
            "discrete-boundary-value",
            (1..=20)
                .map(|j| {
                    let t = j as f64 / 21.0;
                    t * (t - 1.0)
                })
                .collect(),
            Some(0.0),
            None,
            || discrete_boundary_value(20),
        ),
        entry(
            "discrete-integral-equation",
            (1..=20)
                .map(|j| {
                    let t = j as f64 / 21.0;
                    t * (t - 1.0)
                })
                .collect(),
            Some(0.0),
            None,
            || discrete_integral_equation(20),
        ),
        entry(
            "broyden-banded",
            vec![-1.0; 15],
            Some(0.0),
            None,
            || broyden_banded(15),
        ),
        entry(
            "penalty-1",
            (1..=10).map(|j| j as f64).collect(),
            None,
            None,
            || penalty_1(10),
        ),
        entry(
            "variably-dimensioned",
            (1..=10).map(|j| 1.0 - j as f64 / 10.0).collect(),
            Some(0.0),
            Some(vec![1.0; 10]),
            || variably_dimensioned(10),
        ),
        entry(
            "brown-almost-linear",
            vec![0.5; 10],
            Some(0.0),
            Some(vec![1.0; 10]),
            || brown_almost_linear(10),
        ),
        entry(
            "extended-powell-singular",
            [3.0, -1.0, 0.0, 1.0].repeat(5),
            Some(0.0),
            Some(vec![0.0; 20]),
            || extended_powell_singular(20),
        ),
        entry(
            "chebyquad",
            (1..=9).map(|j| j as f64 / 10.0).collect(),
            None,
            None,
            || chebyquad(9),
        ),
    ]
}

/// The twelve core problem names used by the protocol-level checks.
pub fn core_problem_names() -> Vec<String> {
    catalog().into_iter().take(12).map(|e| e.name).collect()
}

/// Look a problem up by name.
pub fn find_problem(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name == name)
}

/// Second-order stationarity measure
/// `xi(x) = max(-lambda_min(hess f(x) + hess psi(x)), 0)`.
///
/// Requires analytic Hessians of both parts; diagnostics only, uncounted.
pub fn xi_measure(p: &ProblemInstance, x: &Point) -> Result<f64, Error> {
    let hf = p.hessian_raw(x).ok_or(Error::NoHessianOracle)?;
    let hp = p
        .composite()
        .hessian_at(x)
        .ok_or(Error::NoHessianOracle)?;
    let lam_min = (hf + hp).symmetric_eigen().eigenvalues.min();
    Ok((-lam_min).max(0.0))
}

struct SplitMix(u64);

impl SplitMix {
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

    fn gaussian(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-12);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

fn build_synthetic(seed: u64, n: usize, with_cubic: bool) -> CatalogEntry {
    assert!(n >= 1);
    let mut rng = SplitMix(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(n as u64));

    let mu = rng.range(0.5, 1.5);
    let lam_max = if n == 1 { mu } else { mu * rng.range(2.0, 10.0) };
    let mut eigs = vec![mu; n];
    if n > 1 {
        eigs[n - 1] = lam_max;
        for e in eigs.iter_mut().take(n - 1).skip(1) {
            *e = rng.range(mu, lam_max);
        }
    }
    // Random orthogonal basis from a QR factorization.
    let v = if n == 1 {
        DMatrix::identity(1, 1)
    } else {
        DMatrix::from_fn(n, n, |_, _| rng.gaussian()).qr().q()
    };
    let mut q = &v * DMatrix::from_diagonal(&DVector::from_vec(eigs)) * v.transpose();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (q[(i, j)] + q[(j, i)]);
            q[(i, j)] = s;
            q[(j, i)] = s;
        }
    }

    let beta = if with_cubic { rng.range(0.25, 1.5) } else { 0.0 };
    let mut c: Vec<f64> = (0..n).map(|_| rng.range(0.3, 1.0)).collect();
    let cmax = c.iter().cloned().fold(f64::MIN, f64::max);
    for ci in c.iter_mut() {
        *ci /= cmax; // max_i c_i = 1 exactly, so L = beta exactly
    }
    let a: Vec<f64> = (0..n).map(|_| rng.range(0.5, 1.5)).collect();
    let x_min = DVector::from_fn(n, |_, _| rng.range(-1.0, 1.0));

    let dir = {
        let d = DVector::from_fn(n, |_, _| rng.gaussian());
        let nrm = d.norm();
        if nrm > 0.0 {
            d / nrm
        } else {
            DVector::from_element(n, 1.0 / (n as f64).sqrt())
        }
    };
    let start = &x_min + 0.75 * dir;

    let f_min: f64 = beta / 6.0 * c.iter().zip(&a).map(|(ci, ai)| ci * ai.powi(3)).sum::<f64>();

    let (qv, cv, av, xv) = (q.clone(), c.clone(), a.clone(), x_min.clone());
    let (qg, cg, ag, xg) = (q.clone(), c.clone(), a.clone(), x_min.clone());
    let (qh, ch, ah, xh) = (q.clone(), c.clone(), a.clone(), x_min.clone());
    let name = if with_cubic {
        format!("synthetic-{n}d-seed{seed}")
    } else {
        format!("synthetic-quadratic-{n}d-seed{seed}")
    };

    CatalogEntry {
        name,
        dim: n,
        standard_start: start,
        f_at_known_min: Some(f_min),
        known_minimizer: Some(x_min),
        known_l_on_box: Some((beta, f64::INFINITY)),
        builder: Arc::new(move || {
            let (q, c, a, xm) = (qv.clone(), cv.clone(), av.clone(), xv.clone());
            let (q2, c2, a2, xm2) = (qg.clone(), cg.clone(), ag.clone(), xg.clone());
            let (q3, c3, a3, xm3) = (qh.clone(), ch.clone(), ah.clone(), xh.clone());
            ProblemInstance::new(xm.len(), move |x: &Point| {
                let u = x - &xm;
                let quad = 0.5 * (&q * &u).dot(&u);
                let cub: f64 = u
                    .iter()
                    .zip(c.iter().zip(&a))
                    .map(|(&ui, (ci, ai))| ci * (ui * ui + ai * ai).powf(1.5))
                    .sum();
                quad + beta / 6.0 * cub
            })
            .with_gradient(move |x: &Point| {
                let u = x - &xm2;
                let mut g = &q2 * &u;
                for i in 0..u.len() {
                    g[i] += beta / 2.0 * c2[i] * u[i] * (u[i] * u[i] + a2[i] * a2[i]).sqrt();
                }
                g
            })
            .with_hessian(move |x: &Point| {
                let u = x - &xm3;
                let mut h = q3.clone();
                for i in 0..u.len() {
                    let s = (u[i] * u[i] + a3[i] * a3[i]).sqrt();
                    h[(i, i)] += beta / 2.0 * c3[i] * (2.0 * u[i] * u[i] + a3[i] * a3[i]) / s;
                }
                h
            })
            .with_known_l(beta)
            .with_known_mu(mu)
            .with_lower_bound_hint(f_min)
        }),
    }
}

/// Deterministic strongly convex instance with exactly known constants:
/// `f(x) = (1/2)(x - x*)' Q (x - x*) + (beta/6) sum_i c_i ((x_i - x*_i)^2 + a_i^2)^{3/2}`
/// with `Q >= mu I`. The smooth cube `(u^2 + a^2)^{3/2}` stands in for `|u|^3`
/// so the Hessian is globally Lipschitz; with `max_i c_i = 1` the exact
/// constant is `L = beta` (the per-coordinate third derivative is bounded by
/// `6` times the `beta/6` prefactor).
pub fn synthetic_known_constants(seed: u64, n: usize) -> CatalogEntry {
    build_synthetic(seed, n, true)
}

/// Pure-quadratic variant: `beta = 0`, so `L = 0` and every finite-difference
/// estimator is exact regardless of interval.
pub fn synthetic_quadratic(seed: u64, n: usize) -> CatalogEntry {
    build_synthetic(seed, n, false)
}
