use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use stratt::{solve_levels, Constraint, LevelExpr, MetaId, Provenance};

/// `?0 < ?1 < ... < ?n-1`, listed back to front so relaxation needs many rounds.
fn chain(n: u32) -> Vec<Constraint> {
    (1..n)
        .rev()
        .map(|i| {
            Constraint::lt(LevelExpr::meta(MetaId(i - 1)), LevelExpr::meta(MetaId(i)), Provenance::new("chain", None))
        })
        .collect()
}

/// Every pair constrained both ways with offsets, still satisfiable.
fn dense(n: u32) -> Vec<Constraint> {
    let mut cs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a < b {
                let p = Provenance::new("dense", None);
                cs.push(Constraint::le(
                    LevelExpr::meta(MetaId(a)).shift(1),
                    LevelExpr::meta(MetaId(b)).shift(b - a),
                    p,
                ));
            }
        }
    }
    cs
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for n in [8, 64, 256] {
        let cs = chain(n);
        g.bench_with_input(BenchmarkId::new("chain", n), &cs, |b, cs| {
            b.iter(|| solve_levels(black_box(cs), (0..n).map(MetaId)).unwrap())
        });
    }
    for n in [8, 32, 64] {
        let cs = dense(n);
        g.bench_with_input(BenchmarkId::new("dense", n), &cs, |b, cs| {
            b.iter(|| solve_levels(black_box(cs), (0..n).map(MetaId)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, solve);
criterion_main!(benches);
