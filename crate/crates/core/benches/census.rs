use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use weyl_census::census::{build_census_with, growth_report, CensusOptions, ReportOptions};
use weyl_census::schottky::{load_system, presets};
use weyl_census::Execution;

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("census");
    group.sample_size(10);
    for (name, len) in [("sl2-demo", 9), ("sl3-demo", 7)] {
        let sys = load_system(&presets::get(name).unwrap())
            .unwrap()
            .into_validated()
            .unwrap();
        for mode in [Execution::Sequential, Execution::Parallel] {
            let opts = CensusOptions {
                execution: mode,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), format!("{name}/L{len}")), &len, |b, &len| {
                b.iter(|| build_census_with(&sys, len, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn report(c: &mut Criterion) {
    let sys = load_system(&presets::sl2_demo()).unwrap().into_validated().unwrap();
    let table = build_census_with(&sys, 10, &CensusOptions::default()).unwrap();
    c.bench_function("growth_report/sl2-demo/L10", |b| {
        b.iter(|| growth_report(&table, &ReportOptions::default()).unwrap())
    });
}

criterion_group!(benches, sweep, report);
criterion_main!(benches);
