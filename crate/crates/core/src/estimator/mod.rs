//! Surface and volume estimators on stationary random lattices.
//!
//! The surface estimator is
//! Ŝ = c_Λ α_f^{-1} Ŝ_0,  Ŝ_0 = a^{-1} b^d Σ_{z ∈ bQΛ_c} f(θ_a^X(z)).
//! For ball phantoms the sum runs over the spherical shell where f∘θ_a^X can
//! be nonzero; with an indicator f it reduces to counting lattice points in
//! that shell.

mod weight;

use serde::{Deserialize, Serialize};

pub use weight::{Smoothness, WeightFunction, WeightKind};

use crate::error::{Error, Result};
use crate::lattice::LatticePlacement;
use crate::linalg::{dot, Vector};
use crate::phantom::{check_scale, BallImage, Phantom, PhantomKind};
use crate::psf::{HalfspaceProfile, Psf};

/// Axis-aligned box [lo, hi) over which lattice points are summed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    dim: usize,
    lo: Vector,
    hi: Vector,
}

impl Window {
    pub fn new(dim: usize, lo: &[f64], hi: &[f64]) -> Result<Self> {
        crate::linalg::check_dim(dim)?;
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: lo.len().min(hi.len()),
            });
        }
        Ok(Window {
            dim,
            lo: crate::linalg::vector(lo),
            hi: crate::linalg::vector(hi),
        })
    }

    /// Bounding box of X ⊕ B(margin) for a ball phantom.
    pub fn around(phantom: &Phantom, margin: f64) -> Result<Self> {
        let (lo, hi) = phantom
            .bounding_box(margin)
            .ok_or_else(|| Error::Unsupported {
                message: "a half-space needs an explicit window".into(),
            })?;
        Ok(Window {
            dim: phantom.dim(),
            lo,
            hi,
        })
    }

    /// The default window: X ⊕ B(a·D_eff + 2b·diam(C_Λ)).
    pub fn default_for(
        phantom: &Phantom,
        psf: &Psf,
        f: &WeightFunction,
        a: f64,
        placement: &LatticePlacement,
    ) -> Result<Self> {
        let margin = a * support_reach(psf, f)
            + 2.0 * placement.resolution() * placement.lattice().cell_diameter();
        Window::around(phantom, margin)
    }

    pub fn bounds(&self) -> (Vector, Vector) {
        (self.lo, self.hi)
    }

    pub fn is_empty(&self) -> bool {
        (0..self.dim).any(|i| !(self.hi[i] > self.lo[i]))
    }

    fn contains_ball(&self, center: &Vector, r: f64) -> bool {
        (0..self.dim).all(|i| center[i] - r >= self.lo[i] && center[i] + r < self.hi[i])
    }

    fn misses_ball(&self, center: &Vector, r: f64) -> bool {
        (0..self.dim).any(|i| center[i] + r < self.lo[i] || center[i] - r >= self.hi[i])
    }

    #[inline]
    fn contains(&self, p: &Vector) -> bool {
        (0..self.dim).all(|i| p[i] >= self.lo[i] && p[i] < self.hi[i])
    }
}

/// PSF radius D_eff (unscaled) holding all but 1e-6·min(β, 1−ω) of the mass.
pub fn support_reach(psf: &Psf, f: &WeightFunction) -> f64 {
    let (beta, omega) = f.support();
    psf.effective_radius(1e-6 * beta.min(1.0 - omega))
}

/// How the window relates to a ball-shaped region that carries the sum.
enum Coverage {
    Full,
    Disjoint,
}

fn coverage(window: &Window, center: &Vector, r: f64) -> Result<Coverage> {
    if window.contains_ball(center, r) {
        Ok(Coverage::Full)
    } else if window.misses_ball(center, r) {
        Ok(Coverage::Disjoint)
    } else {
        Err(Error::Coverage {
            message: format!("window clips the ball of radius {r} around the phantom center"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    /// Ŝ = c_Λ α_f^{-1} Ŝ_0.
    pub estimate: f64,
    /// Ŝ_0 = a^{-1} b^d Σ f(θ(z)).
    pub raw_sum: f64,
    pub alpha: f64,
    pub placement: LatticePlacement,
    /// Lattice points with f(θ(z)) ≠ 0.
    pub support_points: u64,
}

/// A surface estimator for a fixed phantom, PSF scale and weight function.
#[derive(Debug, Clone)]
pub struct SurfaceEstimator<'p> {
    profile: &'p HalfspaceProfile,
    phantom: Phantom,
    f: WeightFunction,
    a: f64,
    shape_alpha: f64,
    tube: f64,
    ball: Option<BallBand>,
}

#[derive(Debug, Clone)]
struct BallBand {
    image: BallImage,
    r_omega: f64,
    r_beta: f64,
    breaks: Vec<f64>,
}

impl<'p> SurfaceEstimator<'p> {
    pub fn new(
        profile: &'p HalfspaceProfile,
        phantom: &Phantom,
        f: &WeightFunction,
        a: f64,
    ) -> Result<Self> {
        check_scale(a)?;
        let shape_alpha = f.shape_alpha(profile)?;
        let tube = a * support_reach(profile.psf(), f);
        let ball = match phantom.as_ball() {
            None => None,
            Some(_) => {
                let (beta, omega) = f.support();
                let image = BallImage::transition(profile, phantom, a, beta, omega)?;
                let r_beta = image.level_radius(beta)?;
                let r_omega = image.level_radius(omega)?;
                let mut breaks = vec![r_omega, r_beta];
                if let WeightKind::SmoothPlateau {
                    rise_end,
                    fall_start,
                    ..
                } = f.kind()
                {
                    breaks.push(image.level_radius(rise_end)?);
                    breaks.push(image.level_radius(fall_start)?);
                }
                breaks.sort_by(|x, y| x.total_cmp(y));
                Some(BallBand {
                    image,
                    r_omega,
                    r_beta,
                    breaks,
                })
            }
        };
        Ok(SurfaceEstimator {
            profile,
            phantom: *phantom,
            f: *f,
            a,
            shape_alpha,
            tube,
            ball,
        })
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.f
    }

    pub fn scale(&self) -> f64 {
        self.a
    }

    /// α_f (including the amplitude).
    pub fn alpha(&self) -> f64 {
        self.f.amplitude() * self.shape_alpha
    }

    /// Radii (r_ω, r_β) bounding the shell where f∘θ_a^X ≠ 0 (balls only).
    pub fn shell_radii(&self) -> Option<(f64, f64)> {
        self.ball.as_ref().map(|b| (b.r_omega, b.r_beta))
    }

    /// Sorted radii where g_a changes form (balls only).
    pub fn radial_breaks(&self) -> &[f64] {
        self.ball
            .as_ref()
            .map(|b| b.breaks.as_slice())
            .unwrap_or(&[])
    }

    pub fn phantom(&self) -> &Phantom {
        &self.phantom
    }

    pub fn profile(&self) -> &'p HalfspaceProfile {
        self.profile
    }

    /// The tabulated ball image (balls only).
    pub fn image(&self) -> Option<&BallImage> {
        self.ball.as_ref().map(|b| &b.image)
    }

    /// g_a(r) = f(θ_a^X(r)) for a ball, as a function of the radius.
    pub fn radial_weight(&self, r: f64) -> f64 {
        match &self.ball {
            Some(b) => self.f.eval(b.image.theta(r)),
            None => 0.0,
        }
    }

    /// Sum of the unit-amplitude weights over the lattice points, and the
    /// number of points with nonzero weight.
    fn shape_sum(
        &self,
        placement: &LatticePlacement,
        window: Option<&Window>,
    ) -> Result<(f64, u64)> {
        match (&self.ball, self.phantom.kind()) {
            (Some(band), _) => {
                let center = band.image.center();
                if let Some(w) = window {
                    let reach = band.image.radius() + self.tube;
                    if let Coverage::Disjoint = coverage(w, &center, reach)? {
                        return Ok((0.0, 0));
                    }
                }
                match self.f.kind() {
                    WeightKind::Indicator { .. } => {
                        let outer = placement.count_in_ball(&center, band.r_beta, true);
                        let inner = placement.count_in_ball(&center, band.r_omega, false);
                        let n = outer - inner;
                        Ok((n as f64, n))
                    }
                    WeightKind::SmoothPlateau { .. } => {
                        let mut sum = 0.0;
                        let mut n = 0u64;
                        placement.visit_shell(&center, band.r_omega, band.r_beta, |p| {
                            let r = crate::linalg::norm(&crate::linalg::sub(p, &center));
                            let v = self.f.shape(band.image.theta(r));
                            if v != 0.0 {
                                sum += v;
                                n += 1;
                            }
                        });
                        Ok((sum, n))
                    }
                }
            }
            (None, PhantomKind::HalfSpace { normal, offset }) => {
                let w = window.ok_or_else(|| Error::Coverage {
                    message: "a half-space phantom needs an explicit window".into(),
                })?;
                let (lo, hi) = w.bounds();
                let mut sum = 0.0;
                let mut n = 0u64;
                for p in placement.points_in_box(&lo, &hi) {
                    let v = self
                        .f
                        .shape(self.profile.theta((dot(&p, &normal) - offset) / self.a));
                    if v != 0.0 {
                        sum += v;
                        n += 1;
                    }
                }
                Ok((sum, n))
            }
            (None, _) => unreachable!("ball phantoms always carry a band"),
        }
    }

    pub fn estimate(
        &self,
        placement: &LatticePlacement,
        window: Option<&Window>,
    ) -> Result<EstimateResult> {
        if placement.lattice().dim() != self.phantom.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.phantom.dim(),
                found: placement.lattice().dim(),
            });
        }
        let (sum, n) = self.shape_sum(placement, window)?;
        let b = placement.resolution();
        let bd = b.powi(self.phantom.dim() as i32);
        let unit_raw = bd * sum / self.a;
        // the amplitude cancels exactly between Ŝ_0 and α_f
        let estimate = placement.lattice().covolume() * unit_raw / self.shape_alpha;
        Ok(EstimateResult {
            estimate,
            raw_sum: self.f.amplitude() * unit_raw,
            alpha: self.alpha(),
            placement: *placement,
            support_points: n,
        })
    }
}

/// One-shot surface estimate; see [`SurfaceEstimator`] for repeated use.
pub fn estimate_surface(
    profile: &HalfspaceProfile,
    phantom: &Phantom,
    f: &WeightFunction,
    a: f64,
    placement: &LatticePlacement,
    window: Option<&Window>,
) -> Result<EstimateResult> {
    SurfaceEstimator::new(profile, phantom, f, a)?.estimate(placement, window)
}

/// Mass tolerance used to cut the grey-volume sum to the blurred boundary zone.
const VOLUME_MASS_TOL: f64 = 1e-13;

/// The grey-value volume estimator V̂^{a,b} = b^d c_Λ Σ θ_a^X(z), prepared for
/// repeated placements of one ball.
#[derive(Debug, Clone)]
pub struct GreyVolumeEstimator {
    image: BallImage,
}

impl GreyVolumeEstimator {
    pub fn new(psf: &Psf, phantom: &Phantom, a: f64) -> Result<Self> {
        Ok(GreyVolumeEstimator {
            image: BallImage::full(psf, phantom, a, VOLUME_MASS_TOL)?,
        })
    }

    pub fn estimate(&self, placement: &LatticePlacement, window: Option<&Window>) -> Result<f64> {
        let center = self.image.center();
        let (r_lo, r_hi) = self.image.range();
        if let Some(w) = window {
            if let Coverage::Disjoint = coverage(w, &center, r_hi)? {
                return Ok(0.0);
            }
        }
        let mut sum = 0.0;
        let inner = placement.visit_shell(&center, r_lo, r_hi, |p| {
            let r = crate::linalg::norm(&crate::linalg::sub(p, &center));
            sum += self.image.theta(r);
        });
        Ok(placement.cell_volume() * (inner as f64 + sum))
    }
}

/// V̂^{a,b}; a half-space is summed over the window, a ball over the whole
/// lattice (the window must then cover or miss the blurred ball).
pub fn estimate_volume_grey(
    profile: &HalfspaceProfile,
    phantom: &Phantom,
    a: f64,
    placement: &LatticePlacement,
    window: Option<&Window>,
) -> Result<f64> {
    check_scale(a)?;
    match phantom.kind() {
        PhantomKind::HalfSpace { normal, offset } => {
            let w = window.ok_or_else(|| Error::Coverage {
                message: "a half-space phantom needs an explicit window".into(),
            })?;
            let (lo, hi) = w.bounds();
            let sum: f64 = placement
                .points_in_box(&lo, &hi)
                .iter()
                .map(|p| profile.theta((dot(p, &normal) - offset) / a))
                .sum();
            Ok(placement.cell_volume() * sum)
        }
        _ => GreyVolumeEstimator::new(profile.psf(), phantom, a)?.estimate(placement, window),
    }
}

/// V̂^b = b^d c_Λ #(X ∩ bQΛ_c ∩ window).
pub fn estimate_volume_binary(
    phantom: &Phantom,
    placement: &LatticePlacement,
    window: Option<&Window>,
) -> Result<f64> {
    match phantom.as_ball() {
        Some((center, radius)) => {
            if let Some(w) = window {
                if let Coverage::Disjoint = coverage(w, &center, radius)? {
                    return Ok(0.0);
                }
            }
            Ok(placement.cell_volume() * placement.count_in_ball(&center, radius, true) as f64)
        }
        None => {
            let w = window.ok_or_else(|| Error::Coverage {
                message: "a half-space phantom needs an explicit window".into(),
            })?;
            let (lo, hi) = w.bounds();
            let n = placement
                .points_in_box(&lo, &hi)
                .iter()
                .filter(|p| w.contains(p) && phantom.contains(p))
                .count();
            Ok(placement.cell_volume() * n as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{random_placement, Lattice};
    use crate::linalg::Matrix;
    use crate::psf::ProfileGrid;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn gauss2() -> &'static HalfspaceProfile {
        static P: OnceLock<HalfspaceProfile> = OnceLock::new();
        P.get_or_init(|| {
            HalfspaceProfile::new(&Psf::gaussian(2, 1.0).unwrap(), ProfileGrid::default())
        })
    }

    fn indicator() -> WeightFunction {
        WeightFunction::indicator(0.3, 0.7).unwrap()
    }

    fn plateau() -> WeightFunction {
        WeightFunction::smooth_plateau(0.2, 0.3, 0.7, 0.8).unwrap()
    }

    #[test]
    fn missed_support_gives_zero() {
        // a half-space far from the window: every grey value is 1
        let h = Phantom::half_space(2, &[1.0, 0.0], 10.0).unwrap();
        let w = Window::new(2, &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let p = LatticePlacement::aligned(Lattice::integer(2).unwrap(), 0.05).unwrap();
        let r = estimate_surface(gauss2(), &h, &indicator(), 0.05, &p, Some(&w)).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.support_points, 0);
    }

    #[test]
    fn indicator_count_matches_direct_sum() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let est = SurfaceEstimator::new(gauss2(), &ball, &indicator(), 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_placement(&Lattice::hexagonal(), 0.04, &mut rng).unwrap();
        let fast = est.estimate(&p, None).unwrap();
        let (lo, hi) = Window::default_for(&ball, gauss2().psf(), &indicator(), 0.05, &p)
            .unwrap()
            .bounds();
        let direct: f64 = p
            .points_in_box(&lo, &hi)
            .iter()
            .map(|q| indicator().eval(est.image().unwrap().theta(crate::linalg::norm(q))))
            .sum();
        assert_eq!(fast.support_points as f64, direct);
        let expect = Lattice::hexagonal().covolume() * 0.04 * 0.04 * direct / 0.05 / est.alpha();
        assert!((fast.estimate - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn amplitude_cancels_exactly() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_placement(&Lattice::integer(2).unwrap(), 0.05, &mut rng).unwrap();
        for f in [indicator(), plateau()] {
            let base = estimate_surface(gauss2(), &ball, &f, 0.05, &p, None)
                .unwrap()
                .estimate;
            for lambda in [-3.7, 0.1, 2.5] {
                let g = f.scaled(lambda).unwrap();
                let r = estimate_surface(gauss2(), &ball, &g, 0.05, &p, None).unwrap();
                assert_eq!(r.estimate, base);
                assert!((r.alpha - lambda * f.alpha(gauss2()).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_equivariance() {
        let lattice = Lattice::integer(2).unwrap();
        let v = [0.3125, -0.1875, 0.0];
        let shifted = Phantom::transformed_ball(2, 1.0, 1.0, &v[..2]).unwrap();
        let ball = Phantom::ball(2, 1.0).unwrap();
        let c = [0.4, 0.7, 0.0];
        let p1 = LatticePlacement::new(lattice, 1.0 / 16.0, &c, Matrix::identity(2)).unwrap();
        // b(Λ + c) − v = b(Λ + c − v/b)
        let c2 = crate::linalg::sub(&c, &crate::linalg::scale(16.0, &v));
        let p2 = LatticePlacement::new(lattice, 1.0 / 16.0, &c2, Matrix::identity(2)).unwrap();
        let a = 0.05;
        let e1 = estimate_surface(gauss2(), &shifted, &indicator(), a, &p1, None).unwrap();
        let e2 = estimate_surface(gauss2(), &ball, &indicator(), a, &p2, None).unwrap();
        assert_eq!(e1.support_points, e2.support_points);
        assert_eq!(e1.estimate, e2.estimate);
    }

    #[test]
    fn coverage_errors_and_window_monotonicity() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let p = LatticePlacement::aligned(Lattice::integer(2).unwrap(), 0.05).unwrap();
        let clipped = Window::new(2, &[-1.0, -1.0], &[0.5, 1.0]).unwrap();
        let e =
            estimate_surface(gauss2(), &ball, &indicator(), 0.05, &p, Some(&clipped)).unwrap_err();
        assert!(matches!(e, Error::Coverage { .. }));
        let w = Window::default_for(&ball, gauss2().psf(), &indicator(), 0.05, &p).unwrap();
        let big = Window::around(&ball, 5.0).unwrap();
        let r1 = estimate_surface(gauss2(), &ball, &plateau(), 0.05, &p, Some(&w)).unwrap();
        let r2 = estimate_surface(gauss2(), &ball, &plateau(), 0.05, &p, Some(&big)).unwrap();
        assert_eq!(r1.estimate, r2.estimate);
    }

    #[test]
    fn doubling_resolution_sums_over_the_coarser_lattice() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let lattice = Lattice::integer(2).unwrap();
        let a = 0.05;
        let est = SurfaceEstimator::new(gauss2(), &ball, &plateau(), a).unwrap();
        let fine = LatticePlacement::aligned(lattice, 0.02).unwrap();
        let coarse = LatticePlacement::aligned(lattice, 0.04).unwrap();
        let mut sum = 0.0;
        fine.visit_shell(&[0.0; 3], 0.0, 1.2, |q| {
            let i = (q[0] / 0.02).round() as i64;
            let j = (q[1] / 0.02).round() as i64;
            if i % 2 == 0 && j % 2 == 0 {
                sum += est.radial_weight(crate::linalg::norm(q));
            }
        });
        let r = est.estimate(&coarse, None).unwrap();
        let expect = 0.04 * 0.04 * sum / a;
        assert!((r.raw_sum - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn volume_estimators_are_unbiased_in_the_mean() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let lattice = Lattice::integer(2).unwrap();
        let grey = GreyVolumeEstimator::new(gauss2().psf(), &ball, 0.02).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 5000;
        let mut bin = Vec::with_capacity(n);
        let mut gr = Vec::with_capacity(n);
        for _ in 0..n {
            let p = random_placement(&lattice, 0.02, &mut rng).unwrap();
            bin.push(estimate_volume_binary(&ball, &p, None).unwrap());
            gr.push(grey.estimate(&p, None).unwrap());
        }
        for v in [&bin, &gr] {
            let m = crate::stats::mean(v);
            let se = (crate::stats::sample_variance(v) / n as f64).sqrt();
            assert!((m - PI).abs() < 3.0 * se.max(1e-6), "mean {m}, se {se}");
        }
        assert!(crate::stats::sample_variance(&gr) <= crate::stats::sample_variance(&bin));
    }

    #[test]
    fn empty_window_volume_is_zero() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let p = LatticePlacement::aligned(Lattice::integer(2).unwrap(), 0.05).unwrap();
        let far = Window::new(2, &[5.0, 5.0], &[6.0, 6.0]).unwrap();
        assert_eq!(estimate_volume_binary(&ball, &p, Some(&far)).unwrap(), 0.0);
        assert_eq!(
            estimate_volume_grey(gauss2(), &ball, 0.05, &p, Some(&far)).unwrap(),
            0.0
        );
    }

    #[test]
    fn grey_volume_tends_to_binary_as_scale_vanishes() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_placement(&Lattice::integer(2).unwrap(), 0.05, &mut rng).unwrap();
        let bin = estimate_volume_binary(&ball, &p, None).unwrap();
        let grey = estimate_volume_grey(gauss2(), &ball, 1e-5, &p, None).unwrap();
        assert!((grey - bin).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn estimate_nonnegative_and_count_consistent(seed in 0u64..1000) {
            let ball = Phantom::ball(2, 1.0).unwrap();
            let est = SurfaceEstimator::new(gauss2(), &ball, &plateau(), 0.1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_placement(&Lattice::hexagonal(), 0.1, &mut rng).unwrap();
            let r = est.estimate(&p, None).unwrap();
            prop_assert!(r.estimate >= 0.0);
            prop_assert!((r.estimate - p.lattice().covolume() * r.raw_sum / r.alpha).abs() < 1e-12 * (1.0 + r.estimate));
        }

        #[test]
        fn larger_window_changes_nothing(seed in 0u64..1000, extra in 0.0f64..3.0) {
            let ball = Phantom::ball(2, 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_placement(&Lattice::integer(2).unwrap(), 0.07, &mut rng).unwrap();
            let w1 = Window::default_for(&ball, gauss2().psf(), &indicator(), 0.07, &p).unwrap();
            let (lo, hi) = w1.bounds();
            let w2 = Window::new(2, &[lo[0] - extra, lo[1] - extra], &[hi[0] + extra, hi[1] + extra]).unwrap();
            let r1 = estimate_surface(gauss2(), &ball, &indicator(), 0.07, &p, Some(&w1)).unwrap();
            let r2 = estimate_surface(gauss2(), &ball, &indicator(), 0.07, &p, Some(&w2)).unwrap();
            prop_assert_eq!(r1.estimate, r2.estimate);
        }
    }
}
