use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use privarch_core::adsl::{parse_architecture, ParseOptions};
use privarch_core::engine::{close_all, close_all_sequential, Config};
use privarch_core::model::Architecture;
use privarch_testkit::{fixture, gen};

fn workloads() -> Vec<(String, Architecture)> {
    let mut out: Vec<(String, Architecture)> = ["scenario1.pvd", "option3.pvd"]
        .iter()
        .map(|name| (name.to_string(), parse_architecture(&fixture(name), &ParseOptions::default()).unwrap()))
        .collect();
    let big = parse_architecture(&fixture("option3.pvd"), &ParseOptions { index_bound_override: Some(12), ..Default::default() })
        .unwrap();
    out.push(("option3-n12".into(), big));
    let mut rng = gen::rng(7);
    let mut widest = gen::architecture(&mut rng, "random");
    for i in 0..30 {
        let a = gen::architecture(&mut rng, &format!("random{i}"));
        if a.agents.len() > widest.agents.len() || a.facts.len() > widest.facts.len() {
            widest = a;
        }
    }
    out.push(("random".into(), widest));
    out
}

fn closures(c: &mut Criterion) {
    let config = Config::default();
    for (name, arch) in workloads() {
        let mut group = c.benchmark_group(format!("close_all/{name}"));
        group.bench_function("parallel", |b| b.iter(|| close_all(black_box(&arch), &[], &config).unwrap()));
        group.bench_function("sequential", |b| b.iter(|| close_all_sequential(black_box(&arch), &[], &config).unwrap()));
        group.finish();
    }
}

criterion_group!(benches, closures);
criterion_main!(benches);
