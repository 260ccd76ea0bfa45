//! Acceptance checks. Each test writes one `criterion N: PASS|FAIL` line to
//! stderr (bypassing the test harness capture) before asserting.

use std::f64::consts::PI;
use std::io::Write;

use greyvar_core::estimator::SurfaceEstimator;
use greyvar_core::psf::Psf;
use greyvar_core::solve::bisect;
use greyvar_core::spectral::bessel::j0;
use greyvar_core::spectral::{ball_fourier_exact, ball_main_term, RadialFourier};
use greyvar_core::stats::loglog_slope;
use greyvar_core::variance::{
    variance_asymptotic_isotropic, variance_asymptotic_random_radius, variance_empirical,
    variance_empirical_from, variance_empirical_random_radius, variance_exact_ball,
    variance_exact_from, variance_spatial, volume_variance_exact,
};
use greyvar_core::{
    HalfspaceProfile, Lattice, Phantom, ProfileGrid, RadiusDensity, VolumeKind, WeightFunction,
};

const SEED: u64 = 0;

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn report(n: usize, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n}: {verdict} — {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn profile(psf: Psf) -> HalfspaceProfile {
    HalfspaceProfile::new(&psf, ProfileGrid::default())
}

fn gaussian(dim: usize) -> HalfspaceProfile {
    profile(Psf::gaussian(dim, 1.0).unwrap())
}

fn indicator() -> WeightFunction {
    WeightFunction::indicator(0.3, 0.7).unwrap()
}

fn plateau() -> WeightFunction {
    WeightFunction::smooth_plateau(0.2, 0.3, 0.7, 0.8).unwrap()
}

fn unit_ball(dim: usize) -> Phantom {
    Phantom::ball(dim, 1.0).unwrap()
}

fn z(dim: usize) -> Lattice {
    Lattice::integer(dim).unwrap()
}

#[test]
fn mean_converges_to_the_surface_area() {
    let g = gaussian(2);
    let ball = unit_ball(2);
    let target = 2.0 * PI;
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&a| {
            let e =
                variance_empirical(&g, &ball, &indicator(), a, a, &z(2), None, 2000, SEED).unwrap();
            (e.summary.mean - target).abs()
        })
        .collect();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let last = errors[2] / target;
    report(
        1,
        decreasing && last <= 0.02,
        format!(
            "|mean − 2π| = {}, relative at a = 0.025: {last:.2e} (≤ 2e-2, decreasing)",
            sci(&errors)
        ),
    );
}

#[test]
fn spatial_and_fourier_variance_agree() {
    let g = gaussian(2);
    let est = SurfaceEstimator::new(&g, &unit_ball(2), &plateau(), 0.05).unwrap();
    let fourier = variance_exact_from(&est, 0.05, &z(2)).unwrap().variance;
    let spatial = variance_spatial(&est, 0.05, &z(2), 32).unwrap().variance;
    let rel = (spatial - fourier).abs() / fourier;
    report(
        2,
        rel <= 1e-3,
        format!(
            "spatial {spatial:.10e} vs lattice sum {fourier:.10e}, relative gap {rel:.2e} (≤ 1e-3)"
        ),
    );
}

#[test]
fn exact_variance_matches_monte_carlo() {
    let a = 0.05;
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, dim, psf) in [
        ("gaussian d=2", 2, Psf::gaussian(2, 1.0).unwrap()),
        ("compact_bump d=2", 2, Psf::compact_bump(2, 1.0).unwrap()),
        ("gaussian d=3", 3, Psf::gaussian(3, 1.0).unwrap()),
        ("compact_bump d=3", 3, Psf::compact_bump(3, 1.0).unwrap()),
    ] {
        let prof = profile(psf);
        let est = SurfaceEstimator::new(&prof, &unit_ball(dim), &indicator(), a).unwrap();
        let exact = variance_exact_from(&est, a, &z(dim)).unwrap().variance;
        let mc = variance_empirical_from(&est, a, &z(dim), None, 10_000, SEED)
            .unwrap()
            .summary;
        let zscore = (mc.variance - exact) / mc.variance_se;
        pass &= zscore.abs() <= 3.0;
        lines.push(format!("{name}: z = {zscore:+.2}"));
    }
    report(
        3,
        pass,
        format!("{} (|z| ≤ 3 at 1e4 replicates)", lines.join(", ")),
    );
}

#[test]
fn variance_scales_like_a_to_the_d_minus_one() {
    let grid = [0.1, 0.05, 0.025];
    let mut lines = Vec::new();
    let mut pass = true;
    for dim in [2, 3] {
        let g = gaussian(dim);
        let ys: Vec<f64> = grid
            .iter()
            .map(|&a| {
                variance_empirical(
                    &g,
                    &unit_ball(dim),
                    &indicator(),
                    a,
                    a,
                    &z(dim),
                    None,
                    10_000,
                    SEED,
                )
                .unwrap()
                .summary
                .variance
            })
            .collect();
        let slope = loglog_slope(&grid, &ys).unwrap();
        let want = dim as f64 - 1.0;
        pass &= (slope - want).abs() <= 0.3;
        lines.push(format!("d={dim}: slope {slope:.3} (want {want} ± 0.3)"));
    }
    report(4, pass, lines.join(", "));
}

#[test]
fn fine_lattice_rate() {
    // b = a²: the variance carries a bounded factor oscillating in 1/a, so
    // the rate is fitted over a dense log-spaced grid rather than a handful
    // of points.
    let g = gaussian(2);
    let ball = unit_ball(2);
    let n = 60;
    let xs: Vec<f64> = (0..=n)
        .map(|i| 0.3 * (0.025f64 / 0.3).powf(i as f64 / n as f64))
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&a| {
            variance_exact_ball(&g, &ball, &indicator(), a, a * a, &z(2))
                .unwrap()
                .variance
        })
        .collect();
    let slope = loglog_slope(&xs, &ys).unwrap();
    report(
        5,
        (slope - 4.0).abs() <= 0.4,
        format!(
            "slope {slope:.3} over {} values of a in [0.025, 0.3] (want 4 ± 0.4)",
            xs.len()
        ),
    );
}

#[test]
fn random_radius_variance_limit() {
    let g = gaussian(2);
    let ball = unit_ball(2);
    let h = RadiusDensity::new(1.0, 2.0).unwrap();
    let a = 0.025;
    let limit = variance_asymptotic_random_radius(&g, &ball, &h, &plateau(), a, &z(2))
        .unwrap()
        .limit;
    let mc = variance_empirical_random_radius(&g, &ball, &h, &plateau(), a, &z(2), 10_000, SEED)
        .unwrap();
    let normalized = mc.summary.variance / a;
    let rel = (normalized - limit).abs() / limit;
    report(
        6,
        rel <= 0.15,
        format!("a^-1 Var = {normalized:.4} vs limit {limit:.4}, relative gap {rel:.3} (≤ 0.15)"),
    );
}

#[test]
fn ball_transform_leading_term() {
    // Gap between the exact transform and its leading term, relative to the
    // leading term's envelope 2k^{-(d-1)/2} a R^{(d-1)/2} ∫|f∘θ^H|.
    let prof = profile(Psf::compact_bump(2, 1.0).unwrap());
    let f = indicator();
    let a = 0.1;
    let k = 1.0;
    let envelope_integral = f.alpha_abs(&prof).unwrap();
    let radii = [10.0, 20.0, 40.0, 80.0];
    let gaps: Vec<f64> = radii
        .iter()
        .map(|&r: &f64| {
            let ball = Phantom::ball(2, r).unwrap();
            let exact = ball_fourier_exact(&prof, &ball, &f, a, k).unwrap();
            let main = ball_main_term(2, r, a, k, &f, &prof).unwrap();
            let envelope = 2.0 * k.powf(-0.5) * a * r.sqrt() * envelope_integral;
            (exact - main).abs() / envelope
        })
        .collect();
    let rate = -loglog_slope(&radii, &gaps).unwrap();
    report(
        7,
        rate >= 0.8,
        format!(
            "relative gaps {} at R|ξ| = {radii:?}; fitted rate {rate:.3} (≥ 0.8)",
            sci(&gaps)
        ),
    );
}

#[test]
fn volume_estimator_baselines() {
    let psf = Psf::gaussian(2, 1.0).unwrap();
    let ball = unit_ball(2);
    let grid = [0.04, 0.02, 0.01];
    let mut binary = Vec::new();
    let mut grey_below = true;
    for &b in &grid {
        let bin = volume_variance_exact(&psf, &ball, VolumeKind::Binary, b, b, &z(2))
            .unwrap()
            .value;
        let grey = volume_variance_exact(&psf, &ball, VolumeKind::Grey, b, b, &z(2))
            .unwrap()
            .value;
        grey_below &= grey <= bin;
        binary.push(bin);
    }
    let slope = loglog_slope(&grid, &binary).unwrap();
    report(
        8,
        (slope - 3.0).abs() <= 0.4 && grey_below,
        format!("binary slope {slope:.3} (want 3 ± 0.4); grey ≤ binary at every b: {grey_below}"),
    );
}

#[test]
fn bessel_and_hankel_kernels() {
    // e^{-π|x|²} is its own Fourier transform in every dimension.
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        let g = RadialFourier::tabulate(dim, |r| (-PI * r * r).exp(), &[0.0, 7.0], 0.05).unwrap();
        for k in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0] {
            let want = (-PI * k * k).exp();
            worst = worst.max((g.transform(k).unwrap() - want).abs() / want);
        }
    }
    let root = bisect(j0, 2.0, 3.0, 1e-14).unwrap();
    let root_err = (root - 2.404825557695773).abs();
    report(
        9,
        worst <= 1e-8 && root_err <= 1e-10,
        format!("Gaussian transform relative error {worst:.2e} (≤ 1e-8); first zero of J0 {root:.15} (error {root_err:.1e} ≤ 1e-10)"),
    );
}

#[test]
fn oscillation_stays_in_its_envelope() {
    let g = gaussian(2);
    let ball = unit_ball(2);
    let f = plateau();
    let main = variance_asymptotic_isotropic(&g, &ball, &f, 0.05, &z(2))
        .unwrap()
        .normalized_main;
    let values: Vec<f64> = (0..=100)
        .map(|i| {
            let a = 0.045 + 1e-4 * i as f64;
            variance_exact_ball(&g, &ball, &f, a, a, &z(2))
                .unwrap()
                .variance
                / a
        })
        .collect();
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    let upper = 2.0 * main;
    let inside = lo >= 0.0 && hi <= upper * 1.05;
    let reaches = hi >= 0.9 * upper;
    report(
        10,
        inside && reaches,
        format!("a^-1 Var in [{lo:.4}, {hi:.4}] with main term {main:.4}; max / (2·main) = {:.3} (≤ 1.05, ≥ 0.9)", hi / upper),
    );
}
