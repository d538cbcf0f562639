use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hsp_elim::abelian::GroupSpec;
use hsp_elim::elimination::{class_observable, efficiency_report_with, DEFAULT_C_MIN};
use hsp_elim::exec::Exec;
use hsp_elim::game::{tournament_with, GameConfig};
use hsp_elim::linalg::Tolerances;
use hsp_elim::states::{candidate_set, candidate_set_with};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn tournaments(c: &mut Criterion) {
    let mut group = c.benchmark_group("tournament");
    group.sample_size(10);
    for name in ["Z2xZ2xZ2", "Z2xZ2xZ2xZ2"] {
        let g = GroupSpec::parse(name).unwrap();
        let cfg = GameConfig::from_states(&candidate_set(&g, 1).unwrap(), class_observable(&g).povm, 1);
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, name), &cfg, |b, cfg| {
                b.iter(|| tournament_with(black_box(cfg), 200, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn candidate_states(c: &mut Criterion) {
    let mut group = c.benchmark_group("candidate_set_m2");
    group.sample_size(10);
    let g = GroupSpec::parse("Z2xZ2xZ2").unwrap();
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| b.iter(|| candidate_set_with(black_box(&g), 2, exec).unwrap()));
    }
    group.finish();
}

fn efficiency(c: &mut Criterion) {
    let mut group = c.benchmark_group("efficiency_report");
    let tol = Tolerances::default();
    let g = GroupSpec::parse("Z2xZ2xZ2xZ2").unwrap();
    let states = candidate_set(&g, 1).unwrap();
    let dens: Vec<_> = states.iter().map(|s| s.density.clone()).collect();
    let labels: Vec<String> = states.iter().map(|s| s.name()).collect();
    let a = class_observable(&g).povm;
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| {
            b.iter(|| efficiency_report_with(black_box(&dens), &labels, &a, DEFAULT_C_MIN, &tol, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, tournaments, candidate_states, efficiency);
criterion_main!(benches);
