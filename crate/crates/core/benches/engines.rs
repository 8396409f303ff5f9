//! Pack throughput of the interpreted engine, the compiled engine and the compiled
//! engine on the data-parallel core. Build with `--no-default-features` to see the
//! sequential fallback under the `compiled_par` label.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use typeforge::layouts::{build, LayoutId, LayoutSpec};
use typeforge::packer::{compile, pack_compiled_par_into, Engine, Packer};
use typeforge::typecore::commit_arc;

const M_BYTES: u64 = 2_560_000;

fn engines(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!(
        "pack/{}",
        if typeforge::par::enabled() {
            "rayon"
        } else {
            "sequential"
        }
    ));
    group.sample_size(20);
    for (id, a) in [
        (LayoutId::Tiled, 2),
        (LayoutId::Tiled, 100),
        (LayoutId::Alternating, 10),
    ] {
        let b = build(&LayoutSpec::new(id, M_BYTES / 4).with_a(a)).expect("layout");
        let t = Arc::new(commit_arc(b.datatype.clone()).expect("commit"));
        let interp = Packer::new(t.clone(), b.count, Engine::Interpreted).expect("packer");
        let compiled = Packer::new(t.clone(), b.count, Engine::Compiled).expect("packer");
        let program = compile(&t, b.count).expect("compile");
        let src: Vec<u8> = (0..program.region_len).map(|i| i as u8).collect();
        let mut dst = vec![0u8; program.total_bytes];
        let label = format!("{id}/A={a}");
        group.throughput(Throughput::Bytes(program.total_bytes as u64));
        group.bench_function(BenchmarkId::new("interpreted", &label), |bn| {
            bn.iter(|| interp.pack_into(black_box(&src), &mut dst).unwrap())
        });
        group.bench_function(BenchmarkId::new("compiled", &label), |bn| {
            bn.iter(|| compiled.pack_into(black_box(&src), &mut dst).unwrap())
        });
        group.bench_function(BenchmarkId::new("compiled_par", &label), |bn| {
            bn.iter(|| pack_compiled_par_into(&program, black_box(&src), &mut dst).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, engines);
criterion_main!(benches);
