use criterion::{criterion_group, criterion_main, Criterion};
use msapprox::exec::Execution;
use msapprox::experiments::{run_experiment, ExperimentConfig, ExperimentKind};

fn small(kind: ExperimentKind, sweep: Vec<f64>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.trials = 8;
    cfg.grid = 7;
    cfg.sweep = sweep;
    cfg
}

fn trials(c: &mut Criterion) {
    let configs = [
        ("mls-size", small(ExperimentKind::MlsSize, vec![64.0, 100.0])),
        ("shepard-snr", small(ExperimentKind::ShepardSnr, vec![1.0, 16.0])),
        ("spd-snr", small(ExperimentKind::SpdSnr, vec![4.0])),
    ];
    for (name, cfg) in &configs {
        let mut group = c.benchmark_group(*name);
        group.sample_size(10);
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_function(label, |b| b.iter(|| run_experiment(cfg, exec).unwrap()));
        }
        group.finish();
    }
}

criterion_group!(benches, trials);
criterion_main!(benches);
