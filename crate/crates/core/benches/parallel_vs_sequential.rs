use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use tmk::besov::{besov_norm, BesovParams};
use tmk::elliptic::EllipticSymbol;
use tmk::lattice::LatticeBox;
use tmk::par;
use tmk::pde::{solve_periodic, PeriodicSpec};
use tmk::random::{hashed_symbol, random_polynomial, seeded};
use tmk::resolution::UnityResolution;
use tmk::symbol::bv_certificate;

fn both<F: Fn()>(c: &mut Criterion, group: &str, f: F) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_function(BenchmarkId::from_parameter("parallel"), |b| b.iter(&f));
    g.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| par::sequential(&f))
    });
    g.finish();
}

fn besov(c: &mut Criterion) {
    let f = random_polynomial(&mut seeded(3), &LatticeBox::cube(2, -48, 48).unwrap(), 2);
    let params = BesovParams::new(0.5, 3.0, 2.0).unwrap();
    let res = UnityResolution::standard(2);
    both(c, "besov_norm_n2_K48", || {
        black_box(besov_norm(&f, &params, &res).unwrap());
    });
}

fn certificate(c: &mut Criterion) {
    let m = hashed_symbol(5, 2, 2, 1.0, 0.1);
    both(c, "bv_certificate_n2_d6", || {
        black_box(bv_certificate(&m, 6));
    });
}

fn periodic(c: &mut Criterion) {
    let forcing = random_polynomial(&mut seeded(9), &LatticeBox::cube(3, -10, 10).unwrap(), 2);
    let spec = PeriodicSpec {
        symbol: EllipticSymbol::negative_laplacian(2, 2),
        omega: 1.0,
        omega0: 0.0,
        forcing,
    };
    both(c, "periodic_solve_n2_K10", || {
        black_box(solve_periodic(&spec).unwrap());
    });
}

criterion_group!(benches, besov, certificate, periodic);
criterion_main!(benches);
