use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use swapfid::config::cavity_from_config;
use swapfid::fock_sim::{
    bell_pair, fock_state, sfg_evolve, swap_condition_on_sfg, tensor, BellLabel, FockKet, SfgElements,
};
use swapfid::lo_bsm::fidelity_general;
use swapfid::oracle::{exact_fidelity_lo, mc_fidelity_lo};
use swapfid::sfg_device::p_sfg_cavity;
use swapfid::sweep::{run_sweep, SweepSpec};
use swapfid::{find_preset, OracleConfig, SwapScenario};

fn closed_forms(c: &mut Criterion) {
    let s = SwapScenario::new(0.2, 0.1, 0.3, 0.05).unwrap();
    c.bench_function("fidelity_general", |b| b.iter(|| fidelity_general(black_box(&s))));
    let cav = cavity_from_config(&find_preset("ingap-ring").unwrap().config())
        .unwrap()
        .unwrap();
    c.bench_function("p_sfg_cavity", |b| b.iter(|| p_sfg_cavity(black_box(&cav))));
}

fn oracles(c: &mut Criterion) {
    let s = SwapScenario::new(0.2, 0.1, 0.3, 0.05).unwrap();
    let mut g = c.benchmark_group("exact_fidelity_lo");
    for n in [50u64, 200] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| exact_fidelity_lo(&s, &OracleConfig::exact(n)))
        });
    }
    g.finish();
    let mut g = c.benchmark_group("mc_fidelity_lo");
    g.sample_size(10);
    g.bench_function("1e5", |b| {
        b.iter(|| mc_fidelity_lo(&s, &OracleConfig::monte_carlo(100_000, 1).with_workers(1)))
    });
    g.finish();
}

fn fock(c: &mut Criterion) {
    let mut g = c.benchmark_group("sfg_evolve");
    for n in [1u32, 3, 6] {
        let psi = fock_state(FockKet::new(n, n, 0));
        g.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| {
            b.iter(|| sfg_evolve(psi, 0.05, 8))
        });
    }
    g.finish();
    let input = tensor(
        &bell_pair(BellLabel::PhiPlus, 1, 2),
        &bell_pair(BellLabel::PhiPlus, 3, 4),
    )
    .unwrap();
    c.bench_function("swap_condition_on_sfg", |b| {
        b.iter(|| swap_condition_on_sfg(&input, SfgElements::Two))
    });
}

fn sweep(c: &mut Criterion) {
    let spec = SweepSpec::from_config(&find_preset("fig2").unwrap().config()).unwrap();
    c.bench_function("fig2_sweep", |b| b.iter(|| run_sweep(&spec, 1)));
}

criterion_group!(benches, closed_forms, oracles, fock, sweep);
criterion_main!(benches);
