use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use etacalc_core::dirac::{DiracModel, ModelSpec, Preset, ProjectionKind};
use etacalc_core::index::pairing::relative_pairing;
use etacalc_core::par::{set_exec, Exec};
use etacalc_core::suites::{gv_identities, melrose_commutator};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn identity_suites(c: &mut Criterion) {
    let mut g = c.benchmark_group("identity_suites");
    g.sample_size(10).measurement_time(Duration::from_secs(5));
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new("melrose_commutator_100", name), &exec, |b, &e| {
            set_exec(e);
            b.iter(|| melrose_commutator(1, 100).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("gv_identities_4", name), &exec, |b, &e| {
            set_exec(e);
            b.iter(|| gv_identities(1, 4).unwrap())
        });
    }
    g.finish();
}

fn relative_pairing_modes(c: &mut Criterion) {
    let spec = ModelSpec { n_circle: 4, window: 40, ..ModelSpec::preset(Preset::CircleDiracWithTwist) };
    let model = DiracModel::from_spec(&spec).unwrap();
    let mut g = c.benchmark_group("relative_pairing");
    g.sample_size(10).measurement_time(Duration::from_secs(10));
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new("circle_4", name), &exec, |b, &e| {
            set_exec(e);
            b.iter(|| relative_pairing(&model, ProjectionKind::Graph).unwrap())
        });
    }
    g.finish();
    set_exec(Exec::Parallel);
}

criterion_group!(benches, identity_suites, relative_pairing_modes);
criterion_main!(benches);
