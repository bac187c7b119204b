use criterion::{criterion_group, criterion_main, Criterion};

use hrs_sdp::parse::parse_problem;
use hrs_sdp::prover::{prove, ProveOptions};
use hrs_sdp::rewrite::RewriteSystem;

fn load(name: &str) -> RewriteSystem {
    let path = format!("{}/problems/{name}.hrs", env!("CARGO_MANIFEST_DIR"));
    parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Parallel and sequential search on the same problems.
fn parallel_vs_sequential(c: &mut Criterion) {
    for name in ["ave", "heap"] {
        let r = load(name);
        let mut group = c.benchmark_group(name);
        for parallel in [true, false] {
            let opts = ProveOptions { parallel, ..ProveOptions::default() };
            let id = if parallel { "parallel" } else { "sequential" };
            group.bench_function(id, |b| b.iter(|| prove(&r, &opts)));
        }
        group.finish();
    }
}

criterion_group!(benches, parallel_vs_sequential);
criterion_main!(benches);
