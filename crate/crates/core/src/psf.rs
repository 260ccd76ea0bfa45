//! Radial point-spread functions ρ, the half-space intensity profile θ^H and
//! its inverse φ.
//!
//! A [`Psf`] is always the unscaled kernel; the scaled kernel
//! ρ_a(x) = a^{-d} ρ(x/a) is handled by the callers, which work in units of a.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, unit_sphere_area};
use crate::quadrature::{adaptive, gl15};
use crate::solve::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PsfKind {
    /// ρ(x) = (2πσ²)^{-d/2} exp(-|x|²/2σ²).
    Gaussian { sigma: f64 },
    /// ρ(x) = c_d (1 - |x|²/D²)³ on |x| < D; C² across the support boundary.
    CompactBump { radius: f64 },
    /// Normalized indicator of B(D). Not C²; for volume baselines only.
    BallIndicator { radius: f64 },
}

/// A radial, nonnegative, unit-mass kernel on R^d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psf {
    kind: PsfKind,
    dim: usize,
    norm: f64,
}

/// Gaussian tails beyond this many σ carry less than 1e-20 of the mass in d ≤ 3.
const GAUSSIAN_CUTOFF_SIGMAS: f64 = 10.0;
/// Gaussian profiles are tabulated on [-8σ, 8σ].
const GAUSSIAN_PROFILE_SIGMAS: f64 = 8.0;

impl Psf {
    pub fn new(dim: usize, kind: PsfKind) -> Result<Self> {
        check_dim(dim)?;
        let omega = unit_sphere_area(dim);
        let d = dim as f64;
        let norm = match kind {
            PsfKind::Gaussian { sigma } => {
                positive("psf.sigma", sigma)?;
                (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.5 * d)
            }
            PsfKind::CompactBump { radius } => {
                positive("psf.radius", radius)?;
                // ∫_0^1 (1-u²)³ u^{d-1} du = 1/8 (d=2), 16/315 (d=3)
                let moment = if dim == 2 { 1.0 / 8.0 } else { 16.0 / 315.0 };
                1.0 / (omega * moment * radius.powi(dim as i32))
            }
            PsfKind::BallIndicator { radius } => {
                positive("psf.radius", radius)?;
                d / (omega * radius.powi(dim as i32))
            }
        };
        Ok(Psf { kind, dim, norm })
    }

    pub fn gaussian(dim: usize, sigma: f64) -> Result<Self> {
        Psf::new(dim, PsfKind::Gaussian { sigma })
    }

    pub fn compact_bump(dim: usize, radius: f64) -> Result<Self> {
        Psf::new(dim, PsfKind::CompactBump { radius })
    }

    pub fn ball_indicator(dim: usize, radius: f64) -> Result<Self> {
        Psf::new(dim, PsfKind::BallIndicator { radius })
    }

    pub fn kind(&self) -> PsfKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// ρ(r) for r ≥ 0.
    pub fn eval_rho(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::domain(
                "r",
                format!("radius must be finite and >= 0, got {r}"),
            ));
        }
        Ok(self.density(r))
    }

    /// ρ(r) without validation.
    #[inline]
    pub fn density(&self, r: f64) -> f64 {
        match self.kind {
            PsfKind::Gaussian { sigma } => {
                let u = r / sigma;
                self.norm * (-0.5 * u * u).exp()
            }
            PsfKind::CompactBump { radius } => {
                if r >= radius {
                    0.0
                } else {
                    let v = 1.0 - (r / radius).powi(2);
                    self.norm * v * v * v
                }
            }
            PsfKind::BallIndicator { radius } => {
                if r <= radius {
                    self.norm
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius of the support, when compact.
    pub fn support_radius(&self) -> Option<f64> {
        match self.kind {
            PsfKind::Gaussian { .. } => None,
            PsfKind::CompactBump { radius } | PsfKind::BallIndicator { radius } => Some(radius),
        }
    }

    /// Radius beyond which the kernel is treated as zero by all quadratures.
    pub fn integration_radius(&self) -> f64 {
        match self.kind {
            PsfKind::Gaussian { sigma } => GAUSSIAN_CUTOFF_SIGMAS * sigma,
            PsfKind::CompactBump { radius } | PsfKind::BallIndicator { radius } => radius,
        }
    }

    /// Mass of ρ inside B(r).
    pub fn radial_cdf(&self, r: f64) -> f64 {
        let top = r.min(self.integration_radius());
        if top <= 0.0 {
            return 0.0;
        }
        let omega = unit_sphere_area(self.dim);
        let p = self.dim as i32 - 1;
        omega * adaptive(|s| self.density(s) * s.powi(p), 0.0, top, 1e-15)
    }

    /// Smallest radius D_eff with ∫_{B(D_eff)} ρ ≥ 1 - `mass_tol`.
    pub fn effective_radius(&self, mass_tol: f64) -> f64 {
        match self.kind {
            PsfKind::Gaussian { .. } => {
                let top = self.integration_radius();
                let target = 1.0 - mass_tol;
                bisect(|r| self.radial_cdf(r) - target, 0.0, top, 1e-12).unwrap_or(top)
            }
            PsfKind::CompactBump { radius } | PsfKind::BallIndicator { radius } => radius,
        }
    }

    /// 1-D marginal density m(s) = ∫_{R^{d-1}} ρ(√(s² + |y|²)) dy.
    pub fn marginal(&self, s: f64) -> f64 {
        let top = self.integration_radius();
        let s = s.abs();
        if s >= top {
            return 0.0;
        }
        match self.dim {
            2 => {
                let q_max = (top * top - s * s).sqrt();
                2.0 * adaptive(|q| self.density((s * s + q * q).sqrt()), 0.0, q_max, 1e-15)
            }
            _ => 2.0 * std::f64::consts::PI * adaptive(|r| self.density(r) * r, s, top, 1e-15),
        }
    }

    /// Half-width of the interval on which the half-space profile is tabulated.
    pub fn profile_half_width(&self) -> f64 {
        match self.kind {
            PsfKind::Gaussian { sigma } => GAUSSIAN_PROFILE_SIGMAS * sigma,
            PsfKind::CompactBump { radius } | PsfKind::BallIndicator { radius } => radius,
        }
    }

    pub fn is_c2(&self) -> bool {
        !matches!(self.kind, PsfKind::BallIndicator { .. })
    }

    /// Reports which of the two regularity conditions on ρ hold.
    pub fn check_conditions(&self) -> ConditionReport {
        let profile = HalfspaceProfile::new(self, ProfileGrid::default());
        let mut sup_derivative = f64::NEG_INFINITY;
        for i in 0..profile.len() {
            let th = profile.theta[i];
            if (1e-3..=1.0 - 1e-3).contains(&th) {
                sup_derivative = sup_derivative.max(profile.dtheta[i]);
            }
        }
        let strictly_decreasing = sup_derivative < -1e-12;
        let c2 = self.is_c2();
        let compact = self.support_radius().is_some();
        let (condition1, condition2, tail_exponent, note) = match self.kind {
            PsfKind::CompactBump { .. } => (
                c2 && strictly_decreasing,
                c2 && strictly_decreasing,
                Some(f64::INFINITY),
                "compact support, C2, profile strictly decreasing".to_string(),
            ),
            PsfKind::Gaussian { .. } => (
                false,
                strictly_decreasing,
                Some(f64::INFINITY),
                format!(
                    "unbounded support; tail decay s = inf, any s > 2d+1 = {} satisfied",
                    2 * self.dim + 1
                ),
            ),
            PsfKind::BallIndicator { .. } => (
                false,
                false,
                None,
                "not C2; usable only for volume-estimator baselines".to_string(),
            ),
        };
        ConditionReport {
            condition1,
            condition2,
            compact_support: compact,
            c2,
            strictly_decreasing,
            sup_derivative_on_transition: sup_derivative,
            tail_exponent,
            note,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            name,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

/// Outcome of [`Psf::check_conditions`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// C², compact support, profile strictly decreasing on its transition zone.
    pub condition1: bool,
    /// C², polynomial tail decay of ρ and its first two derivatives, decreasing profile.
    pub condition2: bool,
    pub compact_support: bool,
    pub c2: bool,
    pub strictly_decreasing: bool,
    pub sup_derivative_on_transition: f64,
    /// Tail decay exponent s; `inf` for compact or Gaussian kernels.
    pub tail_exponent: Option<f64>,
    pub note: String,
}

/// Tabulation parameters for [`HalfspaceProfile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrid {
    pub points: usize,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        ProfileGrid { points: 4096 }
    }
}

/// θ^H(t): the intensity of the blurred half-space {x·u ≤ 0} at t·u, in units
/// of the PSF scale. Tabulated with exact derivatives and evaluated by cubic
/// Hermite interpolation.
#[derive(Debug, Clone)]
pub struct HalfspaceProfile {
    psf: Psf,
    t0: f64,
    h: f64,
    theta: Vec<f64>,
    dtheta: Vec<f64>,
}

impl HalfspaceProfile {
    pub fn new(psf: &Psf, grid: ProfileGrid) -> Self {
        let n = grid.points.max(16);
        let half = psf.profile_half_width();
        let h = 2.0 * half / (n - 1) as f64;
        let t = |i: usize| -half + h * i as f64;
        let marginal: Vec<f64> = (0..n).map(|i| psf.marginal(t(i))).collect();
        let mut theta = vec![0.0; n];
        // mass beyond the tabulated range (zero for compact kernels)
        theta[n - 1] = adaptive(|s| psf.marginal(s), half, psf.integration_radius(), 1e-17);
        let rule = gl15();
        let smooth = psf.is_c2();
        for i in (0..n - 1).rev() {
            let (lo, hi) = (t(i), t(i + 1));
            let piece = if smooth {
                rule.integrate(|s| psf.marginal(s), lo, hi)
            } else {
                adaptive(|s| psf.marginal(s), lo, hi, 1e-16)
            };
            theta[i] = theta[i + 1] + piece;
        }
        let dtheta = marginal.iter().map(|m| -m).collect();
        HalfspaceProfile {
            psf: *psf,
            t0: -half,
            h,
            theta,
            dtheta,
        }
    }

    pub fn psf(&self) -> &Psf {
        &self.psf
    }

    pub fn dim(&self) -> usize {
        self.psf.dim
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// The tabulation covers [-T, T].
    pub fn half_width(&self) -> f64 {
        -self.t0
    }

    /// Grid rows (t, θ^H(t), θ^H'(t)).
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.len()).map(move |i| (self.t0 + self.h * i as f64, self.theta[i], self.dtheta[i]))
    }

    #[inline]
    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        let x = (t - self.t0) / self.h;
        if x < 0.0 || x > (self.len() - 1) as f64 {
            return None;
        }
        let i = (x.floor() as usize).min(self.len() - 2);
        Some((i, x - i as f64))
    }

    /// θ^H(t).
    #[inline]
    pub fn theta(&self, t: f64) -> f64 {
        match self.locate(t) {
            None => {
                if t < self.t0 {
                    self.theta[0]
                } else {
                    self.theta[self.len() - 1]
                }
            }
            Some((i, u)) => {
                let (y0, y1) = (self.theta[i], self.theta[i + 1]);
                let (m0, m1) = (self.dtheta[i] * self.h, self.dtheta[i + 1] * self.h);
                let u2 = u * u;
                let u3 = u2 * u;
                (2.0 * u3 - 3.0 * u2 + 1.0) * y0
                    + (u3 - 2.0 * u2 + u) * m0
                    + (-2.0 * u3 + 3.0 * u2) * y1
                    + (u3 - u2) * m1
            }
        }
    }

    /// (θ^H)'(t).
    #[inline]
    pub fn dtheta(&self, t: f64) -> f64 {
        match self.locate(t) {
            None => 0.0,
            Some((i, u)) => {
                let (y0, y1) = (self.theta[i], self.theta[i + 1]);
                let (m0, m1) = (self.dtheta[i] * self.h, self.dtheta[i + 1] * self.h);
                let u2 = u * u;
                ((6.0 * u2 - 6.0 * u) * y0
                    + (3.0 * u2 - 4.0 * u + 1.0) * m0
                    + (-6.0 * u2 + 6.0 * u) * y1
                    + (3.0 * u2 - 2.0 * u) * m1)
                    / self.h
            }
        }
    }

    /// φ(y): the unique t with θ^H(t) = y, for y ∈ (0, 1).
    pub fn phi(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y < 1.0) {
            return Err(Error::domain(
                "y",
                format!("grey value must lie in (0,1), got {y}"),
            ));
        }
        let (top, bottom) = (self.theta[0], self.theta[self.len() - 1]);
        if y >= top || y <= bottom {
            return Err(Error::Invertibility {
                value: y,
                message: format!("outside tabulated range ({bottom:e}, {top})"),
            });
        }
        let half = self.half_width();
        let t = bisect(|t| self.theta(t) - y, -half, half, 1e-12)?;
        if self.dtheta(t).abs() < 1e-14 {
            return Err(Error::Invertibility {
                value: y,
                message: format!("profile is flat near t = {t}"),
            });
        }
        Ok(t)
    }
}
