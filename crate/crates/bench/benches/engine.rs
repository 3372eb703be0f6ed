use bienergy_bench::{generic_map, point, randers_torus, sphere};
use bienergy_core::finsler::{xy_vars, DomainJets};
use bienergy_core::quadrature::{bienergy, QuadratureSpec};
use bienergy_core::{eval_jet, parse, Jet, JetSpace, MapPoint};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn jets(c: &mut Criterion) {
    for (n, k) in [(4, 4), (4, 6)] {
        let sp = JetSpace::get(n, k);
        let a = (0..n).fold(Jet::constant(&sp, 0.3), |acc, v| &acc + &Jet::variable(&sp, v, 0.1 * v as f64)).sin();
        let b = a.exp();
        c.bench_function(&format!("jet product n={n} k={k}"), |bch| bch.iter(|| black_box(&a) * black_box(&b)));
    }
    let e = parse("sqrt((1 + 0.2*sin(x1))*y1^2 + 1.3*y2^2) + 0.2*cos(x2)*y1", &xy_vars(2)).unwrap();
    c.bench_function("eval_jet randers F order 6", |bch| {
        bch.iter(|| eval_jet(&e, black_box(&[0.3, 0.1, 0.5, 0.2]), 6).unwrap())
    });
}

fn geometry(c: &mut Criterion) {
    let fs = randers_torus();
    let rs = sphere();
    let map = generic_map();
    let p = point();
    c.bench_function("domain jets order 6", |b| b.iter(|| DomainJets::new(&fs, black_box(&p), 6).unwrap()));
    c.bench_function("tension order 4", |b| {
        b.iter(|| MapPoint::new(&fs, &rs, &map, black_box(&p), 4).unwrap().tension())
    });
    c.bench_function("bitension order 6", |b| {
        b.iter(|| MapPoint::new(&fs, &rs, &map, black_box(&p), 6).unwrap().bitension())
    });
}

fn quadrature(c: &mut Criterion) {
    let fs = randers_torus();
    let rs = sphere();
    let map = generic_map();
    let spec = QuadratureSpec::new(4, 64, 1);
    let mut g = c.benchmark_group("quadrature");
    g.sample_size(10);
    g.bench_function("bienergy 4x4 grid, 64 draws", |b| b.iter(|| bienergy(&fs, &rs, &map, black_box(&spec)).unwrap()));
    g.finish();
}

criterion_group!(benches, jets, geometry, quadrature);
criterion_main!(benches);
