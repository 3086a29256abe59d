use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use piezobeam::diagnostics::energy;
use piezobeam::solver::{build_operator, run, ExplicitStepper, ImplicitStepper};
use piezobeam_bench::{fixture, scenario};

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for n in [101, 201, 801] {
        let (spec, initial, history) = fixture(n);
        let op = build_operator(&spec.params, &spec.grid).unwrap();
        group.bench_with_input(BenchmarkId::new("explicit", n), &n, |b, _| {
            let (mut state, mut hist) = (initial.clone(), history.clone());
            let mut stepper = ExplicitStepper::new(n);
            b.iter(|| stepper.step(&mut state, &mut hist, &op, &spec.weights, &spec.delay).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("implicit", n), &n, |b, _| {
            let (mut state, mut hist) = (initial.clone(), history.clone());
            let mut stepper = ImplicitStepper::new(n);
            b.iter(|| stepper.step(&mut state, &mut hist, &op, &spec.weights, &spec.delay).unwrap());
        });
    }
    group.finish();
}

fn diagnostics(c: &mut Criterion) {
    let (spec, initial, history) = fixture(201);
    c.bench_function("energy/201", |b| {
        b.iter(|| {
            energy(
                black_box(&initial),
                &history,
                &spec.params,
                &spec.certificate,
                &spec.delay,
                &spec.weights,
            )
            .unwrap()
        })
    });
    let mut out = vec![0.0; 201];
    let t = -0.5 * history.span();
    c.bench_function("history_sample/201", |b| {
        b.iter(|| history.sample_into(black_box(t + 1e-4), &mut out).unwrap())
    });
}

fn full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    let s = scenario(201, 5.0);
    let check = s.check().unwrap();
    group.bench_function("certified-decay/201/5s", |b| {
        b.iter(|| {
            let (spec, initial, history) = s.run_inputs(&check.certificate, None).unwrap();
            run(&spec, initial, history).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, steps, diagnostics, full_run);
criterion_main!(benches);
