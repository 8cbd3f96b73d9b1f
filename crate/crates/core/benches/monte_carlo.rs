use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qmpc::exec::Execution;
use qmpc::photonic::{run_noisy_experiment, NoiseModel};
use qmpc::security::server_marginal_sampled;
use qmpc::BitVector;

fn modes() -> Vec<(&'static str, Execution)> {
    #[cfg_attr(not(feature = "parallel"), allow(unused_mut))]
    let mut modes = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    modes.push(("parallel", Execution::Parallel));
    modes
}

fn noisy_experiment(c: &mut Criterion) {
    let inputs: BitVector = "1101".parse().unwrap();
    let paddings: BitVector = "0110".parse().unwrap();
    let noise = NoiseModel::default();
    let mut group = c.benchmark_group("noisy_experiment");
    for shots in [1_000u64, 20_000] {
        group.throughput(Throughput::Elements(shots));
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, shots), &shots, |b, &shots| {
                b.iter(|| run_noisy_experiment(&inputs, &paddings, &noise, shots, 7, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn sampled_marginal(c: &mut Criterion) {
    let inputs: BitVector = "10110110".parse().unwrap();
    let shots = 10_000u64;
    let mut group = c.benchmark_group("server_marginal_sampled");
    group.throughput(Throughput::Elements(shots));
    for (name, exec) in modes() {
        group.bench_function(name, |b| b.iter(|| server_marginal_sampled(&inputs, shots, 3, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, noisy_experiment, sampled_marginal);
criterion_main!(benches);
