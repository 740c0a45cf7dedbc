use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use reda_bench::fixture;
use reda_core::ngram::train_sentences;
use reda_core::TrainOptions;
use std::hint::black_box;

fn train_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("train");
    for lines in [500, 5000] {
        let fx = fixture(lines);
        group.bench_with_input(BenchmarkId::from_parameter(lines), &fx.corpus, |b, corpus| {
            b.iter(|| train_sentences(black_box(corpus), &TrainOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn score_bench(c: &mut Criterion) {
    let fx = fixture(2000);
    let texts = &fx.corpus[..200];
    c.bench_function("score/dp", |b| {
        b.iter(|| texts.iter().map(|s| fx.model.log_prob(black_box(s))).sum::<f64>())
    });
    c.bench_function("score/greedy", |b| {
        b.iter(|| texts.iter().map(|s| fx.model.log_prob_greedy(black_box(s))).sum::<f64>())
    });
}

criterion_group!(benches, train_bench, score_bench);
criterion_main!(benches);
