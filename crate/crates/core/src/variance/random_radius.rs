//! Randomly scaled and rotated balls sQX with a smooth scale density h.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lattice_sum::LatticeSum;
use super::monte_carlo::{check_replicates, replicate_values, BATCHES};
use super::{profile_lattice_sum, EmpiricalVariance};
use crate::error::{Error, Result};
use crate::estimator::{SurfaceEstimator, WeightFunction};
use crate::lattice::{random_placement, Lattice};
use crate::linalg::unit_sphere_area;
use crate::phantom::{check_scale, Phantom};
use crate::psf::HalfspaceProfile;
use crate::quadrature::adaptive;
use crate::spectral::ball_fourier_from;
use crate::stats::summarize;

/// h(s) ∝ (1 − u²)⁴ with u = (2s − s₀ − s₁)/(s₁ − s₀) on [s₀, s₁]: a C³
/// bump supported away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusDensity {
    lower: f64,
    upper: f64,
}

impl RadiusDensity {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0) || !lower.is_finite() {
            return Err(Error::domain(
                "radius_density.lower",
                format!("the scale density must be supported away from 0, got lower = {lower}"),
            ));
        }
        if !(upper > lower) || !upper.is_finite() {
            return Err(Error::domain(
                "radius_density.upper",
                "need lower < upper < ∞",
            ));
        }
        Ok(RadiusDensity { lower, upper })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    fn unit(&self, s: f64) -> f64 {
        (2.0 * s - self.lower - self.upper) / (self.upper - self.lower)
    }

    pub fn density(&self, s: f64) -> f64 {
        let u = self.unit(s);
        if u.abs() >= 1.0 {
            return 0.0;
        }
        // ∫_{-1}^{1} (1 − u²)⁴ du = 256/315
        let norm = 0.5 * (self.upper - self.lower) * 256.0 / 315.0;
        (1.0 - u * u).powi(4) / norm
    }

    /// ∫ s^k h(s) ds.
    pub fn moment(&self, k: i32) -> f64 {
        adaptive(
            |s| s.powi(k) * self.density(s),
            self.lower,
            self.upper,
            1e-14,
        )
    }

    /// Rejection sampling from the uniform proposal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random_range(-1.0..1.0);
            let accept: f64 = rng.random();
            if accept < (1.0 - u * u).powi(4) {
                return self.lower + 0.5 * (u + 1.0) * (self.upper - self.lower);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomRadiusVariance {
    /// lim a^{-(d-1)} Var = 2ω_d^{-1}α_f^{-2} E S(sQX) Σ|F(f∘θ^H)(|ξ|)|²|ξ|^{-d+1}.
    pub limit: f64,
    /// a^{d-1} · limit.
    pub variance: f64,
    /// E S(sQX) = S(X) ∫ s^{d-1} h(s) ds.
    pub mean_surface: f64,
    pub sum: LatticeSum,
}

/// The limit variance for the randomly scaled ball sQX, s ~ h, with a = b.
pub fn variance_asymptotic_random_radius(
    profile: &HalfspaceProfile,
    phantom: &Phantom,
    density: &RadiusDensity,
    f: &WeightFunction,
    a: f64,
    lattice: &Lattice,
) -> Result<RandomRadiusVariance> {
    check_scale(a)?;
    let dim = phantom.dim();
    let surface = phantom.surface_area().ok_or_else(|| Error::Unsupported {
        message: "the random-radius formula needs a ball phantom".into(),
    })?;
    let mean_surface = surface * density.moment(dim as i32 - 1);
    let alpha = f.alpha(profile)?;
    let sum = profile_lattice_sum(f, profile, lattice)?;
    let limit = 2.0 / unit_sphere_area(dim) / (alpha * alpha) * mean_surface * sum.value;
    Ok(RandomRadiusVariance {
        limit,
        variance: a.powi(dim as i32 - 1) * limit,
        mean_surface,
        sum,
    })
}

/// Monte Carlo for sQX with s ~ h, uniform Q and c, at a = b.
///
/// Each replicate records Ŝ − E[Ŝ | s], so the sample variance estimates the
/// placement variance averaged over s; the spread of the true surface area
/// S(sX) itself is not part of the lattice-sum formula.
#[allow(clippy::too_many_arguments)]
pub fn variance_empirical_random_radius(
    profile: &HalfspaceProfile,
    phantom: &Phantom,
    density: &RadiusDensity,
    f: &WeightFunction,
    a: f64,
    lattice: &Lattice,
    replicates: usize,
    seed: u64,
) -> Result<EmpiricalVariance> {
    check_replicates(replicates)?;
    check_scale(a)?;
    let (center, radius) = phantom.as_ball().ok_or_else(|| Error::Unsupported {
        message: "random scaling needs a ball phantom".into(),
    })?;
    let dim = phantom.dim();
    let values = replicate_values(replicates, seed, |rng| {
        let s = density.sample(rng);
        let placement = random_placement(lattice, a, rng)?;
        let scaled = Phantom::transformed_ball(dim, radius, s, &center[..dim])?;
        let est = SurfaceEstimator::new(profile, &scaled, f, a)?;
        let conditional_mean = ball_fourier_from(&est, 0.0)? / (a * est.alpha());
        Ok(est.estimate(&placement, None)?.estimate - conditional_mean)
    })?;
    Ok(EmpiricalVariance {
        summary: summarize(&values, BATCHES)?,
        seed,
        values,
    })
}
