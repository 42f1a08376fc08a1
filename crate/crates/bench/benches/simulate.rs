use criterion::{criterion_group, criterion_main, Criterion};
use sramlab_bench::{biased_cell, cell_deck, rc_step};
use sramlab_core::snm::{snm_experiment, SnmMode};
use sramlab_core::{
    dc_operating_point, parse_netlist, run_experiment, transient, ExperimentMode, ExperimentPlan, SimConfig,
    SramCellParams,
};
use std::hint::black_box;

fn parse(c: &mut Criterion) {
    let deck = cell_deck();
    c.bench_function("parse_cell_deck", |b| {
        b.iter(|| parse_netlist(black_box(&deck)).unwrap())
    });
}

fn dc(c: &mut Criterion) {
    let n = biased_cell();
    let cfg = SimConfig::default();
    c.bench_function("cell_operating_point", |b| {
        b.iter(|| dc_operating_point(black_box(&n), &cfg).unwrap())
    });
}

fn rc(c: &mut Criterion) {
    let n = rc_step();
    let cfg = SimConfig::default();
    c.bench_function("rc_transient_1000_steps", |b| {
        b.iter(|| transient(black_box(&n), &cfg, 1e-12, 1e-9, None).unwrap())
    });
}

fn snm(c: &mut Criterion) {
    let p = SramCellParams::default();
    let cfg = SimConfig::default();
    c.bench_function("hold_snm", |b| {
        b.iter(|| snm_experiment(black_box(&p), SnmMode::Hold, p.vdd, &cfg).unwrap())
    });
}

fn sram(c: &mut Criterion) {
    let p = SramCellParams::default();
    let cfg = SimConfig::default();
    let plan = ExperimentPlan::new(ExperimentMode::WriteRead);
    let mut g = c.benchmark_group("sram");
    g.sample_size(10);
    g.bench_function("write_read_experiment", |b| {
        b.iter(|| run_experiment(black_box(&plan), &p, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, parse, dc, rc, snm, sram);
criterion_main!(benches);
