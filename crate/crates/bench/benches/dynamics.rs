use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kite_core::config::SuiteConfig;
use kite_core::dynsim::sim::{start_on_path, StepInputs};
use kite_core::dynsim::Simulator;
use kite_core::proxy::kite_properties;

fn rk4_step(c: &mut Criterion) {
    let cfg = SuiteConfig::default();
    let p = cfg.problem().unwrap();
    let design = cfg.baseline.design(&p).unwrap();
    let props = kite_properties(&p, &design).unwrap();
    let sim = Simulator::new(props, cfg.sim.tether, p.flow).unwrap();
    let start = start_on_path(&sim, &cfg.ilc.b0, cfg.sim.tether.length, cfg.sim.initial_speed);
    c.bench_function("rk4 step", |b| {
        b.iter_batched_ref(
            || start.clone(),
            |s| sim.step(s, &StepInputs::default(), black_box(cfg.sim.dt), cfg.sim.blowup_bound),
            criterion::BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, rk4_step);
criterion_main!(benches);
