use criterion::{black_box, criterion_group, criterion_main, Criterion};

use greyvar_core::estimator::SurfaceEstimator;
use greyvar_core::lattice::{dual_shells, random_placement};
use greyvar_core::spectral::{ball_fourier_from, fourier_profile};
use greyvar_core::variance::{replicate_rng, variance_exact_from};
use greyvar_core::{HalfspaceProfile, Lattice, Phantom, ProfileGrid, Psf, WeightFunction};

fn setup(dim: usize) -> (HalfspaceProfile, Phantom, Lattice) {
    (
        HalfspaceProfile::new(&Psf::gaussian(dim, 1.0).unwrap(), ProfileGrid::default()),
        Phantom::ball(dim, 1.0).unwrap(),
        Lattice::integer(dim).unwrap(),
    )
}

fn estimates(c: &mut Criterion) {
    let indicator = WeightFunction::indicator(0.3, 0.7).unwrap();
    let plateau = WeightFunction::smooth_plateau(0.2, 0.3, 0.7, 0.8).unwrap();
    for dim in [2, 3] {
        let (profile, ball, lattice) = setup(dim);
        for (name, f) in [("indicator", &indicator), ("plateau", &plateau)] {
            let est = SurfaceEstimator::new(&profile, &ball, f, 0.025).unwrap();
            let mut rng = replicate_rng(1, 0);
            c.bench_function(&format!("estimate/{name}/d{dim}/a=0.025"), |bench| {
                bench.iter(|| {
                    let p = random_placement(&lattice, 0.025, &mut rng).unwrap();
                    black_box(est.estimate(&p, None).unwrap().estimate)
                })
            });
        }
    }
}

fn transforms(c: &mut Criterion) {
    let (profile, ball, _) = setup(2);
    let plateau = WeightFunction::smooth_plateau(0.2, 0.3, 0.7, 0.8).unwrap();
    c.bench_function("fourier_profile/plateau", |bench| {
        bench.iter(|| black_box(fourier_profile(&plateau, &profile, black_box(3.7)).unwrap()))
    });
    let est = SurfaceEstimator::new(&profile, &ball, &plateau, 0.05).unwrap();
    c.bench_function("ball_fourier/plateau/k=40", |bench| {
        bench.iter(|| black_box(ball_fourier_from(&est, black_box(40.0)).unwrap()))
    });
}

fn lattice_sums(c: &mut Criterion) {
    let mut group = c.benchmark_group("lattice_sum");
    group.sample_size(10);
    let z2 = Lattice::integer(2).unwrap();
    group.bench_function("dual_shells/Z2/cutoff=200", |bench| {
        bench.iter(|| black_box(dual_shells(&z2, 200.0).len()))
    });
    let (profile, ball, lattice) = setup(2);
    let indicator = WeightFunction::indicator(0.3, 0.7).unwrap();
    let est = SurfaceEstimator::new(&profile, &ball, &indicator, 0.05).unwrap();
    group.bench_function("exact_variance/indicator/d2/a=b=0.05", |bench| {
        bench.iter(|| black_box(variance_exact_from(&est, 0.05, &lattice).unwrap().variance))
    });
    group.finish();
}

criterion_group!(benches, estimates, transforms, lattice_sums);
criterion_main!(benches);
