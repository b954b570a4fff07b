use criterion::{black_box, criterion_group, criterion_main, Criterion};
use varmech::helmholtz::dhc_explicit;
use varmech::lagrangian::del_step;
use varmech::nonholonomic::simulate_dla;
use varmech::systems::{harmonic, rolling_disk, toy};
use varmech::{DiscretizationRule, NewtonConfig, Vector};

fn del(c: &mut Criterion) {
    let cfg = NewtonConfig::default();
    let l = toy::lagrangian(0.1).unwrap();
    let (q0, q1) = toy::initial();
    c.bench_function("del_step/toy", |b| b.iter(|| del_step(&l, black_box(&q0), black_box(&q1), &cfg).unwrap()));
    let l = harmonic::ld2(0.1).unwrap();
    let (q0, q1) = harmonic::initial(0.1);
    c.bench_function("del_step/harmonic-ld2", |b| b.iter(|| del_step(&l, black_box(&q0), black_box(&q1), &cfg).unwrap()));
}

fn dla(c: &mut Criterion) {
    let cfg = NewtonConfig::default();
    let h = rolling_disk::DEFAULT_H;
    let energies = rolling_disk::energies(h);
    let mut group = c.benchmark_group("simulate_dla");
    group.sample_size(10);
    for rule in [DiscretizationRule::Midpoint, DiscretizationRule::EulerA] {
        let sys = rolling_disk::system(h, rule).unwrap();
        let (q0, q1) = rolling_disk::initial(&sys).unwrap();
        group.bench_function(format!("disk-{rule}-1000"), |b| b.iter(|| simulate_dla(&sys, &q0, &q1, 1000, &energies, &cfg).unwrap()));
    }
    group.finish();
}

fn dhc(c: &mut Criterion) {
    let h = 0.1;
    let (f, g) = (harmonic::fd1(h), harmonic::sode(h));
    let (q0, q1) = (Vector::from_element(1, 0.3), Vector::from_element(1, -0.2));
    c.bench_function("dhc_explicit/harmonic-Fd1", |b| b.iter(|| dhc_explicit(&f, &g, black_box(&q0), black_box(&q1)).unwrap()));
}

criterion_group!(benches, del, dla, dhc);
criterion_main!(benches);
