use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hctree::bg::{bg_field, bg_root_value, verify_consistency};
use hctree::dynamics::{classify_orbit, solve_two_cycle};
use hctree::gibbs::{brute_force_marginal, sample_configuration};
use hctree::path::{PathCode, Vertex};
use hctree::BoundaryLawField;
use hctree_bench::{contractive_params, four_spin_activity, two_spin_activity};

fn bench_dynamics(c: &mut Criterion) {
    c.bench_function("solve_two_cycle 4.2 k2", |b| {
        b.iter(|| solve_two_cycle(black_box(4.2), 2, 1e-12).unwrap().unwrap())
    });
    c.bench_function("classify_orbit 4.2 k2", |b| {
        b.iter(|| classify_orbit(black_box(0.1), 4.2, 2, 1e-10, 1_000_000).unwrap())
    });
}

fn bench_bg(c: &mut Criterion) {
    let params = contractive_params(1e-10);
    let third = PathCode::from_ratio(1, 3, 2).unwrap();
    c.bench_function("bg_root_value t=1/3 tol=1e-10", |b| {
        b.iter(|| bg_root_value(black_box(&third), &params).unwrap())
    });
    c.bench_function("bg_field m=4 + consistency", |b| {
        b.iter(|| {
            let field = bg_field(black_box(&third), &params, 4).unwrap();
            verify_consistency(&field, &params.model, 4)
        })
    });
}

fn bench_gibbs(c: &mut Criterion) {
    let params = contractive_params(1e-10);
    let activity = two_spin_activity();
    let cycle = params.fp.cycle().unwrap();
    let field = BoundaryLawField::period_two(cycle.beta_star, cycle.alpha_star);
    c.bench_function("sample_configuration m=5", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed = seed.wrapping_add(1);
            sample_configuration(&field, &activity, 2, 5, black_box(seed))
        })
    });
    let wide = four_spin_activity();
    c.bench_function("brute_force_marginal m=1 four spins", |b| {
        b.iter(|| brute_force_marginal(&field, &wide, 2, 1, &Vertex::root()).unwrap())
    });
}

criterion_group!(benches, bench_dynamics, bench_bg, bench_gibbs);
criterion_main!(benches);
