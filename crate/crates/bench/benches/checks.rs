use criterion::{criterion_group, criterion_main, Criterion};
use redistrib_core::{check_axiom, classify, Axiom, RuleSpec, SampleConfig};
use std::hint::black_box;

fn bench_checks(c: &mut Criterion) {
    let cfg = SampleConfig::default().with_trials(200);
    let rule = RuleSpec::Proportional;
    let mut group = c.benchmark_group("checks");
    group.sample_size(10);
    for axiom in [Axiom::Nat, Axiom::Continuity, Axiom::Stability] {
        group.bench_function(axiom.name(), |b| {
            b.iter(|| check_axiom(axiom, black_box(&rule), &cfg, 1e-9).unwrap())
        });
    }
    group.bench_function("classify", |b| {
        b.iter(|| classify(black_box(&rule), &redistrib_core::analysis::DEFAULT_GRID, &cfg, 1e-9).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_checks);
criterion_main!(benches);
