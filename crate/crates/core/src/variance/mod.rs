//! Exact, asymptotic and empirical variance of the surface and volume
//! estimators.
//!
//! For a ball, g_a = f∘θ_a^X is radial and Poisson summation over the random
//! lattice translation gives
//! Var Ŝ = (aα_f)^{-2} Σ_{ξ∈Λ*\{0}} |F(g_a)(|ξ|/b)|².

mod lattice_sum;
mod monte_carlo;
mod random_radius;

use serde::Serialize;

pub use lattice_sum::{dual_lattice_sum, LatticeSum, SumControl};
pub use monte_carlo::{replicate_rng, replicate_values, with_workers, BATCHES, MIN_REPLICATES};
pub use random_radius::{
    variance_asymptotic_random_radius, variance_empirical_random_radius, RadiusDensity,
    RandomRadiusVariance,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{
    estimate_volume_binary, GreyVolumeEstimator, SurfaceEstimator, WeightFunction, WeightKind,
    Window,
};
use crate::lattice::{random_placement, Lattice, LatticePlacement};
use crate::linalg::{unit_sphere_area, Matrix};
use crate::phantom::{check_scale, Phantom};
use crate::psf::{HalfspaceProfile, Psf};
use crate::spectral::{ball_fourier_from, ball_indicator_fourier, fourier_profile, psf_fourier};
use crate::stats::{mean, summarize, SampleSummary};
use monte_carlo::check_replicates;

/// Exact ball transforms by quadrature are evaluated only up to
/// |ξ|/b ≤ FREQUENCY_CAP / a.
pub const FREQUENCY_CAP: f64 = 1e3;

fn check_lattice(phantom: &Phantom, lattice: &Lattice) -> Result<()> {
    if phantom.dim() != lattice.dim() {
        return Err(Error::DimensionMismatch {
            expected: phantom.dim(),
            found: lattice.dim(),
        });
    }
    Ok(())
}

fn require_surface(phantom: &Phantom) -> Result<f64> {
    phantom.surface_area().ok_or_else(|| Error::Unsupported {
        message: "this variance formula needs a ball phantom".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactVariance {
    pub variance: f64,
    /// E Ŝ = ∫ g_a / (aα_f).
    pub mean: f64,
    pub alpha: f64,
    pub sum: LatticeSum,
}

/// Exact variance of Ŝ for a prepared ball estimator at resolution b.
pub fn variance_exact_from(
    est: &SurfaceEstimator,
    b: f64,
    lattice: &Lattice,
) -> Result<ExactVariance> {
    check_scale(b)
        .map_err(|_| Error::domain("b", format!("resolution must be finite and > 0, got {b}")))?;
    check_lattice(est.phantom(), lattice)?;
    if est.shell_radii().is_none() {
        return Err(Error::Unsupported {
            message: "the exact variance needs a ball phantom".into(),
        });
    }
    let a = est.scale();
    let cap = match est.weight().kind() {
        WeightKind::Indicator { .. } => None,
        WeightKind::SmoothPlateau { .. } => Some(FREQUENCY_CAP * b / a),
    };
    let control = SumControl::for_dim(lattice.dim()).with_cap(cap);
    let sum = dual_lattice_sum(
        lattice,
        |xi| Ok(ball_fourier_from(est, xi / b)?.powi(2)),
        &control,
    )?;
    let alpha = est.alpha();
    let norm = (a * alpha).powi(-2);
    Ok(ExactVariance {
        variance: norm * sum.value,
        mean: ball_fourier_from(est, 0.0)? / (a * alpha),
        alpha,
        sum: sum.scaled(norm),
    })
}

pub fn variance_exact_ball(
    profile: &HalfspaceProfile,
    phantom: &Phantom,
    f: &WeightFunction,
    a: f64,
    b: f64,
    lattice: &Lattice,
) -> Result<ExactVariance> {
    let est = SurfaceEstimator::new(profile, phantom, f, a)?;
    variance_exact_from(&est, b, lattice)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatialVariance {
    pub variance: f64,
    pub mean: f64,
    /// Translations per axis.
    pub grid: usize,
}

/// Variance of Ŝ over the lattice translation computed in the spatial domain:
/// the trapezoid rule over an N^d grid of translations c = A u. For a ball
/// centred at the origin the rotation leaves Ŝ unchanged.
pub fn variance_spatial(
    est: &SurfaceEstimator,
    b: f64,
    lattice: &Lattice,
    grid: usize,
) -> Result<SpatialVariance> {
    check_lattice(est.phantom(), lattice)?;
    match est.phantom().as_ball() {
        Some((center, _)) if center == [0.0; 3] => {}
        _ => {
            return Err(Error::Unsupported {
                message: "the spatial variance needs a ball centred at the origin".into(),
            })
        }
    }
    if grid < 2 {
        return Err(Error::domain(
            "grid",
            "need at least two translations per axis",
        ));
    }
    let dim = lattice.dim();
    let total = grid.pow(dim as u32);
    let rotation = Matrix::identity(dim);
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut u = [0.0; 3];
            let mut rest = idx;
            for v in u.iter_mut().take(dim) {
                *v = (rest % grid) as f64 / grid as f64;
                rest /= grid;
            }
            let c = lattice.basis().mul_vec(&u);
            let placement = LatticePlacement::new(*lattice, b, &c, rotation)?;
            Ok(est.estimate(&placement, None)?.estimate)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = mean(&values);
    let variance = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / total as f64;
    Ok(SpatialVariance {
        variance,
        mean: m,
        grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalVariance {
    pub summary: SampleSummary,
    pub seed: u64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// Sample variance of Ŝ over i.i.d. placements (uniform c, Haar Q).
pub fn variance_empirical_from(
    est: &SurfaceEstimator,
    b: f64,
    lattice: &Lattice,
    window: Option<&Window>,
    replicates: usize,
    seed: u64,
) -> Result<EmpiricalVariance> {
    check_replicates(replicates)?;
    check_lattice(est.phantom(), lattice)?;
    let values = replicate_values(replicates, seed, |rng| {
        let placement = random_placement(lattice, b, rng)?;
        Ok(est.estimate(&placement, window)?.estimate)
    })?;
    Ok(EmpiricalVariance {
        summary: summarize(&values, BATCHES)?,
        seed,
        values,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn variance_empirical(
    profile: &HalfspaceProfile,
    phantom: &Phantom,
    f: &WeightFunction,
    a: f64,
    b: f64,
    lattice: &Lattice,
    window: Option<&Window>,
    replicates: usize,
    seed: u64,
) -> Result<EmpiricalVariance> {
    let est = SurfaceEstimator::new(profile, phantom, f, a)?;
    variance_empirical_from(&est, b, lattice, window, replicates, seed)
}

/// Σ_{ξ∈Λ*\{0}} |F(f∘θ^H)(|ξ|)|² |ξ|^{-d+1}.
pub fn profile_lattice_sum(
    f: &WeightFunction,
    profile: &HalfspaceProfile,
    lattice: &Lattice,
) -> Result<LatticeSum> {
    let dim = lattice.dim();
    if profile.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            found: dim,
        });
    }
    let p = 1.0 - dim as f64;
    dual_lattice_sum(
        lattice,
        |xi| Ok(fourier_profile(f, profile, xi)?.norm_sqr() * xi.powf(p)),
        &SumControl::for_dim(dim),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticVariance {
    /// 2a^{d-1}ω_d^{-1}α_f^{-2}S(X) Σ|F(f∘θ^H)(|ξ|)|²|ξ|^{-d+1}.
    pub main: f64,
    /// The oscillating remainder is bounded by this in absolute value, so
    /// Var ∈ [main − bound, main + bound] to leading order.
    pub oscillation_bound: f64,
    /// main / a^{d-1}.
    pub normalized_main: f64,
    pub sum: LatticeSum,
}

/// Leading-order variance for a ball at a = b with isotropic rotations.
pub fn variance_asymptotic_isotropic(
    profile: &HalfspaceProfile,
    phantom: &Phantom,
    f: &WeightFunction,
    a: f64,
    lattice: &Lattice,
) -> Result<AsymptoticVariance> {
    check_scale(a)?;
    check_lattice(phantom, lattice)?;
    let surface = require_surface(phantom)?;
    let dim = phantom.dim();
    let alpha = f.alpha(profile)?;
    let sum = profile_lattice_sum(f, profile, lattice)?;
    let normalized_main = 2.0 / unit_sphere_area(dim) / (alpha * alpha) * surface * sum.value;
    let main = a.powi(dim as i32 - 1) * normalized_main;
    Ok(AsymptoticVariance {
        main,
        oscillation_bound: main,
        normalized_main,
        sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub variance: f64,
    /// a^{-1} b^d R^{d-1} (α_{|f|}/α_f²)(|f(β)| + |f(ω)| + ∫|(f∘θ^H)'|).
    pub structural: f64,
    /// variance / structural.
    pub implied_constant: f64,
    /// a^{-2} b^{d+1} R^{d-1}, the rate when b ≪ a.
    pub fine_structural: f64,
    pub implied_fine_constant: f64,
}

/// Compares the exact variance with the structural part of the general
/// variance bound and with the fine-lattice rate.
pub fn variance_bound_check(
    profile: &HalfspaceProfile,
    phantom: &Phantom,
    f: &WeightFunction,
    a: f64,
    b: f64,
    lattice: &Lattice,
) -> Result<BoundCheck> {
    let exact = variance_exact_ball(profile, phantom, f, a, b, lattice)?;
    let (_, radius) = phantom.as_ball().expect("checked by the exact variance");
    let d = phantom.dim() as i32;
    let alpha = f.alpha(profile)?;
    let (fb, fw) = f.boundary_values();
    let variation = fb.abs() + fw.abs() + f.interior_variation();
    let structural =
        b.powi(d) / a * radius.powi(d - 1) * f.alpha_abs(profile)? / (alpha * alpha) * variation;
    let fine_structural = b.powi(d + 1) / (a * a) * radius.powi(d - 1);
    Ok(BoundCheck {
        variance: exact.variance,
        structural,
        implied_constant: exact.variance / structural,
        fine_structural,
        implied_fine_constant: exact.variance / fine_structural,
    })
}

/// The two volume estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeKind {
    /// V̂^b = b^d c_Λ #(X ∩ lattice).
    Binary,
    /// V̂^{a,b} = b^d c_Λ Σ θ_a^X(z).
    Grey,
}

/// Var V̂ = Σ_{ξ≠0} |F(1_X)(|ξ|/b)|² (binary), with the extra factor
/// |F(ρ)(a|ξ|/b)|² for the grey-value estimator.
pub fn volume_variance_exact(
    psf: &Psf,
    phantom: &Phantom,
    kind: VolumeKind,
    a: f64,
    b: f64,
    lattice: &Lattice,
) -> Result<LatticeSum> {
    check_scale(a)?;
    check_scale(b)?;
    check_lattice(phantom, lattice)?;
    let (_, radius) = phantom.as_ball().ok_or_else(|| Error::Unsupported {
        message: "volume variance sums need a ball phantom".into(),
    })?;
    let dim = phantom.dim();
    dual_lattice_sum(
        lattice,
        |xi| {
            let k = xi / b;
            let binary = ball_indicator_fourier(dim, radius, k)?.powi(2);
            Ok(match kind {
                VolumeKind::Binary => binary,
                VolumeKind::Grey => binary * psf_fourier(psf, a, k)?.powi(2),
            })
        },
        &SumControl::for_dim(dim),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn volume_variance_empirical(
    psf: &Psf,
    phantom: &Phantom,
    kind: VolumeKind,
    a: f64,
    b: f64,
    lattice: &Lattice,
    replicates: usize,
    seed: u64,
) -> Result<EmpiricalVariance> {
    check_replicates(replicates)?;
    check_lattice(phantom, lattice)?;
    let grey = match kind {
        VolumeKind::Grey => Some(GreyVolumeEstimator::new(psf, phantom, a)?),
        VolumeKind::Binary => None,
    };
    let values = replicate_values(replicates, seed, |rng| {
        let placement = random_placement(lattice, b, rng)?;
        match &grey {
            Some(g) => g.estimate(&placement, None),
            None => estimate_volume_binary(phantom, &placement, None),
        }
    })?;
    Ok(EmpiricalVariance {
        summary: summarize(&values, BATCHES)?,
        seed,
        values,
    })
}

/// Which leading-order formula an asymptotic value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticModel {
    /// a = b, isotropic rotations: main term ± oscillation bound.
    Isotropic,
    /// Random scaling: the oscillation averages out.
    RandomRadius,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalPart {
    pub variance: f64,
    pub standard_error: f64,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactPart {
    pub variance: f64,
    pub xi_max: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPart {
    pub model: AsymptoticModel,
    pub value: f64,
    pub oscillation_bound: f64,
}

/// Everything known about the variance at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceReport {
    pub phantom: Phantom,
    pub psf: Psf,
    pub weight: WeightFunction,
    pub a: f64,
    pub b: f64,
    pub lattice: Lattice,
    pub empirical: Option<EmpiricalPart>,
    pub exact: Option<ExactPart>,
    pub asymptotic: Option<AsymptoticPart>,
}

impl VarianceReport {
    pub fn new(
        phantom: Phantom,
        psf: Psf,
        weight: WeightFunction,
        a: f64,
        b: f64,
        lattice: Lattice,
    ) -> Self {
        VarianceReport {
            phantom,
            psf,
            weight,
            a,
            b,
            lattice,
            empirical: None,
            exact: None,
            asymptotic: None,
        }
    }

    pub fn with_empirical(mut self, e: &EmpiricalVariance) -> Self {
        self.empirical = Some(EmpiricalPart {
            variance: e.summary.variance,
            standard_error: e.summary.variance_se,
            replicates: e.summary.n,
            seed: e.seed,
        });
        self
    }

    pub fn with_exact(mut self, e: &ExactVariance) -> Self {
        self.exact = Some(ExactPart {
            variance: e.variance,
            xi_max: e.sum.xi_max,
            tail_bound: e.sum.tail_bound,
        });
        self
    }

    pub fn with_asymptotic(
        mut self,
        model: AsymptoticModel,
        value: f64,
        oscillation_bound: f64,
    ) -> Self {
        self.asymptotic = Some(AsymptoticPart {
            model,
            value,
            oscillation_bound,
        });
        self
    }

    /// (empirical − exact) in units of the empirical standard error.
    pub fn z_score(&self) -> Option<f64> {
        let (e, x) = (self.empirical?, self.exact?);
        Some((e.variance - x.variance) / e.standard_error)
    }

    /// exact / asymptotic main term.
    pub fn exact_to_asymptotic(&self) -> Option<f64> {
        Some(self.exact?.variance / self.asymptotic?.value)
    }
}
