use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use cubic_newton::{
    find_problem, fo_hessian_approx, synthetic_known_constants, zo_hessian_approx, BudgetKind,
    Composite, CubicModel, DriverConfig, OracleCounter, Point, SolveOptions,
    SymmetricMatrixApprox,
};

fn bench_finite_differences(c: &mut Criterion) {
    let e = synthetic_known_constants(3, 20);
    let p = e.build();
    let x = e.standard_start.clone();
    c.bench_function("fo_hessian_approx n=20", |b| {
        b.iter_batched(
            || OracleCounter::unlimited(BudgetKind::FoCalls),
            |mut cnt| black_box(fo_hessian_approx(&p, &mut cnt, &x, 1e-4).unwrap()),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("zo_hessian_approx n=20", |b| {
        b.iter_batched(
            || OracleCounter::unlimited(BudgetKind::ZoCalls),
            |mut cnt| black_box(zo_hessian_approx(&p, &mut cnt, &x, 1e-4).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

fn bench_subproblem(c: &mut Criterion) {
    let e = synthetic_known_constants(5, 20);
    let p = e.build();
    let x = e.standard_start.clone();
    let f0 = p.value_raw(&x);
    let g = p.gradient_raw(&x).unwrap();
    let b = SymmetricMatrixApprox::analytic(p.hessian_raw(&x).unwrap());
    let comp = Composite::Zero;
    let model = CubicModel::new(&x, f0, &g, &b, 10.0, &comp).unwrap();
    let opts = SolveOptions::default();
    c.bench_function("spectral subproblem n=20", |bch| {
        bch.iter(|| black_box(model.solve(&opts).unwrap()))
    });

    let lower = Point::from_element(20, -0.5);
    let upper = Point::from_element(20, 0.5);
    let box_comp = Composite::box_indicator(lower, upper);
    let boxed = CubicModel::new(&x, f0, &g, &b, 10.0, &box_comp).unwrap();
    c.bench_function("prox subproblem n=20 (box)", |bch| {
        bch.iter(|| black_box(boxed.solve(&opts).unwrap()))
    });
}

fn bench_full_solve(c: &mut Criterion) {
    let e = find_problem("rosenbrock").unwrap();
    let p = e.build();
    let cfg = DriverConfig {
        m: 2,
        ..DriverConfig::default()
    };
    c.bench_function("first_order_cnm rosenbrock", |b| {
        b.iter(|| black_box(cubic_newton::first_order_cnm(&p, &e.standard_start, &cfg).unwrap()))
    });
    let pz = p.zeroth_order_view();
    c.bench_function("zero_order_cnm rosenbrock", |b| {
        b.iter(|| black_box(cubic_newton::zero_order_cnm(&pz, &e.standard_start, &cfg).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_finite_differences,
    bench_subproblem,
    bench_full_solve
);
criterion_main!(benches);
