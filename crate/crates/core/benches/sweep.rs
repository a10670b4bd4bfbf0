use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use latticefarm::comm::{halo_exchange, Communicator};
use latticefarm::field::{FieldMeta, GaugeField};
use latticefarm::gaugeaction::ActionCoeffs;
use latticefarm::lattice::Geometry;
use latticefarm::montecarlo::{sweep, UpdateParams};
use latticefarm::par::Execution;

fn sweeps(c: &mut Criterion) {
    let comm = Communicator::solo();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, coeffs, dims) in [
        ("wilson-8^4", ActionCoeffs::wilson(5.7), [8; 4]),
        ("symanzik-8^4", ActionCoeffs::symanzik(4.2), [8; 4]),
    ] {
        group.throughput(Throughput::Elements(4 * dims.iter().product::<usize>() as u64));
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut params = UpdateParams::new(coeffs);
            params.exec = exec;
            let mut field = GaugeField::hot(Geometry::serial(dims).unwrap(), 0, FieldMeta::default());
            halo_exchange(&mut field, &comm).unwrap();
            let mut n = 0;
            group.bench_with_input(BenchmarkId::new(name, format!("{exec:?}")), &exec, |b, _| {
                b.iter(|| {
                    sweep(&mut field, &comm, &params, n).unwrap();
                    n += 1;
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
