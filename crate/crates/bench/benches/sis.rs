use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use isingsis_core::cutlp::{cell_bounds, window_feasible, SuspensionIndex};
use isingsis_core::models::{gibbs_ising, IsingParams, DEFAULT_SWEEPS};
use isingsis_core::sampler::trial_rng;
use isingsis_core::{PartialTable, Sampler, SamplerConfig, Shape};
use std::hint::black_box;

fn observed(rows: usize, cols: usize) -> isingsis_core::BinaryTable {
    let params = IsingParams {
        alpha: -2.0,
        beta: 0.1,
    };
    gibbs_ising(
        params,
        Shape::new(rows, cols),
        DEFAULT_SWEEPS,
        &mut trial_rng(1, 0),
    )
}

fn sample_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_table");
    for (rows, cols) in [(10, 10), (20, 20)] {
        let table = observed(rows, cols);
        let sampler = Sampler::new(table.shape(), table.suff_stats(), SamplerConfig::default());
        let mut trial = 0;
        group.bench_function(format!("{rows}x{cols}"), |b| {
            b.iter(|| {
                trial += 1;
                black_box(sampler.trial(7, trial))
            })
        });
    }
    group.finish();
}

fn lp(c: &mut Criterion) {
    let table = observed(10, 10);
    let stats = table.suff_stats();
    let prefix = PartialTable::from_prefix(table.shape(), &table.cells()[..80]);
    let index = SuspensionIndex::new(table.shape());
    c.bench_function("window_lp_10x10_last_rows", |b| {
        b.iter(|| black_box(window_feasible(&index, &prefix, stats)))
    });
    let prefix = PartialTable::from_prefix(table.shape(), &table.cells()[..40]);
    c.bench_function("cell_bounds_10x10_half", |b| {
        b.iter(|| black_box(cell_bounds(&prefix, stats, 99).unwrap()))
    });
}

fn gibbs(c: &mut Criterion) {
    let params = IsingParams {
        alpha: -2.0,
        beta: 0.1,
    };
    let shape = Shape::new(10, 10);
    let mut seed = 0;
    c.bench_function("gibbs_10x10_default_sweeps", |b| {
        b.iter_batched(
            || {
                seed += 1;
                trial_rng(seed, 0)
            },
            |mut rng| gibbs_ising(params, shape, DEFAULT_SWEEPS, &mut rng),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, sample_table, lp, gibbs);
criterion_main!(benches);
