use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use prospect_core::fitting::{bootstrap_ci, fit, normalize_payoffs, FitDataset, FitSpec, Variant};
use prospect_core::{enumerate_contexts, simulate_choices, Exec, GridConfig, PtAgent, PtParams};

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn dataset() -> (Vec<prospect_core::Context>, FitDataset) {
    let contexts = enumerate_contexts(&GridConfig::default()).unwrap();
    let agent = PtAgent::new(PtParams::new(0.8, 2.0, 0.7, 10.0).unwrap(), &contexts).unwrap();
    let d = simulate_choices(&agent, &contexts, 10, 1, Exec::Parallel).unwrap();
    let raw = FitDataset::from_table(&contexts, &d.table()).unwrap();
    (contexts, normalize_payoffs(&raw).unwrap().0)
}

fn simulate(c: &mut Criterion) {
    let (contexts, _) = dataset();
    let agent = PtAgent::new(PtParams::new(0.8, 2.0, 0.7, 10.0).unwrap(), &contexts).unwrap();
    let mut g = c.benchmark_group("simulate_324x200");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate_choices(&agent, &contexts, 200, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn fit_full(c: &mut Criterion) {
    let (_, ds) = dataset();
    let mut g = c.benchmark_group("fit_full_pt");
    g.sample_size(10);
    for (name, exec) in MODES {
        let spec = FitSpec::new(Variant::FullPt).with_exec(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fit(&ds, &spec).unwrap())
        });
    }
    g.finish();
}

fn bootstrap(c: &mut Criterion) {
    let (_, ds) = dataset();
    let mut g = c.benchmark_group("bootstrap_beta_only_b50");
    g.sample_size(10);
    for (name, exec) in MODES {
        let spec = FitSpec::new(Variant::BetaOnly).with_exec(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| bootstrap_ci(&ds, &spec, 50).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, simulate, fit_full, bootstrap);
criterion_main!(benches);
