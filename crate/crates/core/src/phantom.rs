//! Test sets X with exactly computable blurred intensities θ_a^X = 1_X * ρ_a.
//!
//! For balls the d-dimensional convolution reduces to a 1-D integral over
//! the radius σ of spheres around the evaluation point, weighted by the
//! fraction of each sphere that lies inside the ball (a spherical cap).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::WeightFunction;
use crate::linalg::{check_dim, dot, norm, scale, sub, unit_sphere_area, vector, Vector};
use crate::psf::{HalfspaceProfile, Psf};
use crate::quadrature::adaptive;
use crate::solve::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhantomKind {
    /// {x : x·normal ≤ offset}.
    HalfSpace { normal: Vector, offset: f64 },
    /// B(radius) centered at the origin.
    Ball { radius: f64 },
    /// center + scale·B(radius).
    TransformedBall {
        radius: f64,
        scale: f64,
        center: Vector,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phantom {
    kind: PhantomKind,
    dim: usize,
}

impl Phantom {
    pub fn new(dim: usize, kind: PhantomKind) -> Result<Self> {
        check_dim(dim)?;
        match kind {
            PhantomKind::HalfSpace { normal, offset } => {
                let n = norm(&normal);
                if (n - 1.0).abs() > 1e-12 || normal[dim..].iter().any(|v| *v != 0.0) {
                    return Err(Error::domain(
                        "phantom.normal",
                        format!("normal must be a unit vector in R^{dim}, got |u| = {n}"),
                    ));
                }
                if !offset.is_finite() {
                    return Err(Error::domain("phantom.offset", "offset must be finite"));
                }
            }
            PhantomKind::Ball { radius } => positive("phantom.radius", radius)?,
            PhantomKind::TransformedBall {
                radius,
                scale,
                center,
            } => {
                positive("phantom.radius", radius)?;
                positive("phantom.scale", scale)?;
                if center.iter().any(|v| !v.is_finite()) || center[dim..].iter().any(|v| *v != 0.0)
                {
                    return Err(Error::domain(
                        "phantom.center",
                        "center must be a finite point of R^d",
                    ));
                }
            }
        }
        Ok(Phantom { kind, dim })
    }

    /// Half-space through `offset·u` with outer normal u (normalized here).
    pub fn half_space(dim: usize, normal: &[f64], offset: f64) -> Result<Self> {
        if normal.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: normal.len(),
            });
        }
        let u = vector(normal);
        let n = norm(&u);
        if !(n > 0.0) {
            return Err(Error::domain("phantom.normal", "normal must be nonzero"));
        }
        Phantom::new(
            dim,
            PhantomKind::HalfSpace {
                normal: scale(1.0 / n, &u),
                offset,
            },
        )
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Phantom::new(dim, PhantomKind::Ball { radius })
    }

    pub fn transformed_ball(dim: usize, radius: f64, scale: f64, center: &[f64]) -> Result<Self> {
        if center.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: center.len(),
            });
        }
        Phantom::new(
            dim,
            PhantomKind::TransformedBall {
                radius,
                scale,
                center: vector(center),
            },
        )
    }

    pub fn kind(&self) -> PhantomKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// (center, radius) for ball-type phantoms.
    pub fn as_ball(&self) -> Option<(Vector, f64)> {
        match self.kind {
            PhantomKind::HalfSpace { .. } => None,
            PhantomKind::Ball { radius } => Some(([0.0; 3], radius)),
            PhantomKind::TransformedBall {
                radius,
                scale,
                center,
            } => Some((center, radius * scale)),
        }
    }

    fn require_ball(&self) -> Result<(Vector, f64)> {
        self.as_ball().ok_or_else(|| Error::Unsupported {
            message: "operation needs a ball phantom".into(),
        })
    }

    /// S(X) = ω_d R^{d-1}; `None` for a half-space.
    pub fn surface_area(&self) -> Option<f64> {
        let (_, r) = self.as_ball()?;
        Some(unit_sphere_area(self.dim) * r.powi(self.dim as i32 - 1))
    }

    /// Volume ω_d R^d / d; `None` for a half-space.
    pub fn volume(&self) -> Option<f64> {
        let (_, r) = self.as_ball()?;
        Some(unit_sphere_area(self.dim) * r.powi(self.dim as i32) / self.dim as f64)
    }

    /// Gaussian curvature of the boundary: R^{-(d-1)} for a ball, 0 for a half-space.
    pub fn gaussian_curvature(&self) -> f64 {
        match self.as_ball() {
            Some((_, r)) => r.powi(1 - self.dim as i32),
            None => 0.0,
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match self.kind {
            PhantomKind::HalfSpace { normal, offset } => dot(x, &normal) <= offset,
            _ => {
                let (c, r) = self.as_ball().unwrap();
                let v = sub(x, &c);
                dot(&v, &v) <= r * r
            }
        }
    }

    /// Axis-aligned bounding box of X ⊕ B(margin); `None` for a half-space.
    pub fn bounding_box(&self, margin: f64) -> Option<(Vector, Vector)> {
        let (c, r) = self.as_ball()?;
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for i in 0..self.dim {
            lo[i] = c[i] - r - margin;
            hi[i] = c[i] + r + margin;
        }
        Some((lo, hi))
    }

    /// θ_a^X(x).
    pub fn intensity(&self, profile: &HalfspaceProfile, a: f64, x: &Vector) -> Result<f64> {
        check_scale(a)?;
        self.check_psf(profile.psf())?;
        Ok(match self.kind {
            PhantomKind::HalfSpace { normal, offset } => {
                profile.theta((dot(x, &normal) - offset) / a)
            }
            _ => {
                let (c, r) = self.as_ball().unwrap();
                ball_radial_intensity(profile.psf(), r, a, norm(&sub(x, &c)))
            }
        })
    }

    fn check_psf(&self, psf: &Psf) -> Result<()> {
        if psf.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: psf.dim(),
            });
        }
        Ok(())
    }

    /// Outer unit normal at a boundary point.
    fn normal_at(&self, x: &Vector) -> Result<Vector> {
        match self.kind {
            PhantomKind::HalfSpace { normal, offset } => {
                if (dot(x, &normal) - offset).abs() > 1e-9 * (1.0 + offset.abs()) {
                    return Err(Error::domain(
                        "boundary_point",
                        "point is not on the boundary",
                    ));
                }
                Ok(normal)
            }
            _ => {
                let (c, r) = self.as_ball().unwrap();
                let v = sub(x, &c);
                let n = norm(&v);
                if (n - r).abs() > 1e-9 * r {
                    return Err(Error::domain(
                        "boundary_point",
                        "point is not on the sphere",
                    ));
                }
                Ok(scale(1.0 / n, &v))
            }
        }
    }

    /// |f∘θ_a^X(x + t n) − f∘θ_a^{H_x}(x + t n)| where H_x is the supporting
    /// half-space at the boundary point x and n its outer normal.
    pub fn halfspace_gap(
        &self,
        profile: &HalfspaceProfile,
        f: &WeightFunction,
        a: f64,
        boundary_point: &Vector,
        t: f64,
    ) -> Result<f64> {
        check_scale(a)?;
        let n = self.normal_at(boundary_point)?;
        let y = crate::linalg::add(boundary_point, &scale(t, &n));
        let v_set = self.intensity(profile, a, &y)?;
        let v_half = profile.theta(t / a);
        let (lo, hi) = f.support();
        for v in [v_set, v_half] {
            if !(lo..=hi).contains(&v) {
                return Err(Error::OutsideTransitionZone {
                    message: format!("grey value {v} at offset t = {t} is outside [{lo}, {hi}]"),
                });
            }
        }
        Ok((f.eval(v_set) - f.eval(v_half)).abs())
    }

    /// (t_-, t_+): offsets along the outer normal where the intensity equals
    /// ω and β respectively.
    pub fn transition_offsets(
        &self,
        profile: &HalfspaceProfile,
        f: &WeightFunction,
        a: f64,
    ) -> Result<(f64, f64)> {
        check_scale(a)?;
        self.check_psf(profile.psf())?;
        let (beta, omega) = f.support();
        let reach = a * profile.psf().integration_radius();
        let along = |t: f64| -> f64 {
            match self.kind {
                PhantomKind::HalfSpace { .. } => profile.theta(t / a),
                _ => {
                    let (_, r) = self.as_ball().unwrap();
                    ball_radial_intensity(profile.psf(), r, a, (r + t).max(0.0))
                }
            }
        };
        let lo = match self.as_ball() {
            Some((_, r)) => -reach.min(r),
            None => -reach,
        };
        let t_minus = bisect(|t| along(t) - omega, lo, reach, 1e-14)?;
        let t_plus = bisect(|t| along(t) - beta, lo, reach, 1e-14)?;
        Ok((t_minus, t_plus))
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

pub(crate) fn check_scale(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            "a",
            format!("PSF scale must be finite and > 0, got {a}"),
        ))
    }
}

/// Fraction of the sphere of radius σ around a point at distance r from the
/// center of B(R) that lies inside the ball, given κ = (r² + σ² − R²)/(2rσ).
#[inline]
fn cap_fraction(dim: usize, kappa: f64) -> f64 {
    let k = kappa.clamp(-1.0, 1.0);
    match dim {
        2 => k.acos() / PI,
        _ => 0.5 * (1.0 - k),
    }
}

/// θ_a^{B(R)} at distance r from the center.
pub fn ball_radial_intensity(psf: &Psf, radius: f64, a: f64, r: f64) -> f64 {
    // work in units of a
    let big_r = radius / a;
    let x = r / a;
    let top = psf.integration_radius();
    if x <= 1e-9 * big_r.max(1.0) {
        return psf.radial_cdf(big_r);
    }
    let s1 = (x - big_r).abs();
    let s2 = x + big_r;
    let inside = if x < big_r {
        psf.radial_cdf(s1.min(top))
    } else {
        0.0
    };
    if s1 >= top {
        return inside;
    }
    let upper = s2.min(top);
    let len = upper - s1;
    let dim = psf.dim();
    let omega = unit_sphere_area(dim);
    let p = dim as i32 - 1;
    let diff = (x - big_r) * (x + big_r);
    // σ = s1 + len (1 − cos πw)/2 removes the square-root endpoint behaviour
    let integrand = |w: f64| {
        let c = (PI * w).cos();
        let sigma = s1 + 0.5 * len * (1.0 - c);
        if sigma <= 0.0 {
            return 0.0;
        }
        let jac = 0.5 * len * PI * (PI * w).sin();
        let kappa = (diff + sigma * sigma) / (2.0 * x * sigma);
        psf.density(sigma) * omega * sigma.powi(p) * cap_fraction(dim, kappa) * jac
    };
    (inside + adaptive(integrand, 0.0, 1.0, 1e-14)).clamp(0.0, 1.0)
}

const CHEB_NODES: usize = 16;

/// Piecewise Chebyshev interpolant of a function on [lo, hi].
#[derive(Debug, Clone)]
pub struct RadialTable {
    lo: f64,
    hi: f64,
    width: f64,
    coeffs: Vec<[f64; CHEB_NODES]>,
}

impl RadialTable {
    pub fn build<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, max_panel_width: f64) -> Self {
        let panels = (((hi - lo) / max_panel_width).ceil() as usize).max(1);
        let width = (hi - lo) / panels as f64;
        let n = CHEB_NODES;
        let mut coeffs = Vec::with_capacity(panels);
        for p in 0..panels {
            let a = lo + width * p as f64;
            let mid = a + 0.5 * width;
            let values: Vec<f64> = (0..n)
                .map(|j| {
                    let x = (PI * (j as f64 + 0.5) / n as f64).cos();
                    f(mid + 0.5 * width * x)
                })
                .collect();
            let mut c = [0.0; CHEB_NODES];
            for (k, ck) in c.iter_mut().enumerate() {
                let s: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos())
                    .sum();
                *ck = 2.0 * s / n as f64;
            }
            coeffs.push(c);
        }
        RadialTable {
            lo,
            hi,
            width,
            coeffs,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    #[inline]
    pub fn eval(&self, r: f64) -> Option<f64> {
        if !(r >= self.lo && r <= self.hi) {
            return None;
        }
        let p = (((r - self.lo) / self.width) as usize).min(self.coeffs.len() - 1);
        let a = self.lo + self.width * p as f64;
        let x = 2.0 * (r - a) / self.width - 1.0;
        let c = &self.coeffs[p];
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..CHEB_NODES).rev() {
            let b0 = 2.0 * x * b1 - b2 + c[k];
            b2 = b1;
            b1 = b0;
        }
        Some(x * b1 - b2 + 0.5 * c[0])
    }
}

/// A ball phantom imaged at a fixed PSF scale, with the radial intensity
/// tabulated over a band of radii.
#[derive(Debug, Clone)]
pub struct BallImage {
    psf: Psf,
    center: Vector,
    radius: f64,
    a: f64,
    table: RadialTable,
}

impl BallImage {
    /// Tabulates the intensity on the radii [r_lo, r_hi].
    pub fn with_range(psf: &Psf, phantom: &Phantom, a: f64, r_lo: f64, r_hi: f64) -> Result<Self> {
        check_scale(a)?;
        phantom.check_psf(psf)?;
        let (center, radius) = phantom.require_ball()?;
        let lo = r_lo.max(0.0);
        let hi = r_hi.max(lo + a * 1e-6);
        let table = RadialTable::build(
            |r| ball_radial_intensity(psf, radius, a, r),
            lo,
            hi,
            0.5 * a,
        );
        Ok(BallImage {
            psf: *psf,
            center,
            radius,
            a,
            table,
        })
    }

    /// Tabulates the band of radii where the intensity crosses the grey
    /// levels [lo, hi] (plus one PSF unit of margin on both sides).
    pub fn transition(
        profile: &HalfspaceProfile,
        phantom: &Phantom,
        a: f64,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        let (_, radius) = phantom.require_ball()?;
        let inner = profile.phi(hi)?;
        let outer = profile.phi(lo)?;
        let mut margin = 1.0;
        loop {
            let image = BallImage::with_range(
                profile.psf(),
                phantom,
                a,
                radius + a * (inner - margin),
                radius + a * (outer + margin),
            )?;
            let (r0, r1) = image.table.range();
            let covers_top = r0 == 0.0 || image.theta(r0) > hi;
            if (covers_top && image.theta(r1) < lo) || margin > 64.0 {
                return Ok(image);
            }
            margin *= 2.0;
        }
    }

    /// Tabulates the whole blurred boundary zone [R − aD, R + aD], with D the
    /// PSF radius holding all but `mass_tol` of its mass.
    pub fn full(psf: &Psf, phantom: &Phantom, a: f64, mass_tol: f64) -> Result<Self> {
        let (_, radius) = phantom.require_ball()?;
        let reach = a * psf.effective_radius(mass_tol);
        BallImage::with_range(psf, phantom, a, radius - reach, radius + reach)
    }

    pub fn center(&self) -> Vector {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn scale(&self) -> f64 {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.psf.dim()
    }

    pub fn psf(&self) -> &Psf {
        &self.psf
    }

    /// Tabulated radial range.
    pub fn range(&self) -> (f64, f64) {
        self.table.range()
    }

    /// θ_a^X at distance r from the center (table inside the band, direct
    /// quadrature elsewhere).
    #[inline]
    pub fn theta(&self, r: f64) -> f64 {
        match self.table.eval(r) {
            Some(v) => v.clamp(0.0, 1.0),
            None => ball_radial_intensity(&self.psf, self.radius, self.a, r),
        }
    }

    /// The radius inside the band where the intensity equals `level`.
    pub fn level_radius(&self, level: f64) -> Result<f64> {
        let (lo, hi) = self.table.range();
        bisect(|r| self.theta(r) - level, lo, hi, 1e-14 * hi.max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psf::ProfileGrid;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn gauss2() -> &'static HalfspaceProfile {
        static P: OnceLock<HalfspaceProfile> = OnceLock::new();
        P.get_or_init(|| {
            HalfspaceProfile::new(&Psf::gaussian(2, 1.0).unwrap(), ProfileGrid::default())
        })
    }

    fn bump2() -> &'static HalfspaceProfile {
        static P: OnceLock<HalfspaceProfile> = OnceLock::new();
        P.get_or_init(|| {
            HalfspaceProfile::new(&Psf::compact_bump(2, 1.0).unwrap(), ProfileGrid::default())
        })
    }

    fn normal_cdf(x: f64) -> f64 {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
    }

    /// Separable Gaussian convolution of the unit disc at (x, 0): integrate
    /// the chord indicator exactly along the first axis and the second axis
    /// by adaptive quadrature.
    fn disc_oracle(a: f64, x: f64) -> f64 {
        let density = |y: f64| (-0.5 * y * y / (a * a)).exp() / (a * (2.0 * PI).sqrt());
        let row = |y: f64| {
            let c = (1.0 - y * y).max(0.0).sqrt();
            density(y) * (normal_cdf((c - x) / a) - normal_cdf((-c - x) / a))
        };
        // y = sin(u) removes the chord's square-root endpoints
        adaptive(|u: f64| row(u.sin()) * u.cos(), -PI / 2.0, PI / 2.0, 1e-15)
    }

    #[test]
    fn deep_interior_is_one() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let v = ball.intensity(gauss2(), 0.1, &[0.0; 3]).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn matches_separable_oracle_at_boundary() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        for &(a, x) in &[(0.05, 1.0), (0.05, 0.97), (0.1, 1.12), (0.2, 0.5)] {
            let v = ball.intensity(gauss2(), a, &[x, 0.0, 0.0]).unwrap();
            let o = disc_oracle(a, x);
            assert!((v - o).abs() < 1e-9, "a={a} x={x}: {v} vs {o}");
        }
        let v = ball.intensity(gauss2(), 0.05, &[1.0, 0.0, 0.0]).unwrap();
        assert!(v > 0.45 && v < 0.5);
    }

    #[test]
    fn ball_in_3d_matches_closed_form_for_gaussian_at_center() {
        // θ(0) = P(|N(0, a²I)| ≤ R)
        let psf = Psf::gaussian(3, 1.0).unwrap();
        let r = 1.0 / 0.4;
        let expect =
            libm::erf(r / std::f64::consts::SQRT_2) - (2.0 / PI).sqrt() * r * (-0.5 * r * r).exp();
        let v = ball_radial_intensity(&psf, 1.0, 0.4, 0.0);
        assert!((v - expect).abs() < 1e-12);
        // continuity at small r
        let w = ball_radial_intensity(&psf, 1.0, 0.4, 1e-6);
        assert!((v - w).abs() < 1e-9);
    }

    #[test]
    fn halfspace_at_boundary_is_half() {
        let h = Phantom::half_space(2, &[1.0, 1.0], 0.0).unwrap();
        let v = h.intensity(gauss2(), 0.3, &[0.5, -0.5, 0.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Phantom::ball(2, -1.0).is_err());
        assert!(Phantom::ball(4, 1.0).is_err());
        let ball = Phantom::ball(2, 1.0).unwrap();
        assert!(ball.intensity(gauss2(), 0.0, &[0.0; 3]).is_err());
        assert!(ball.intensity(gauss2(), -0.1, &[0.0; 3]).is_err());
    }

    #[test]
    fn ball_geometry() {
        let b = Phantom::ball(3, 2.0).unwrap();
        assert!((b.surface_area().unwrap() - 16.0 * PI).abs() < 1e-12);
        assert!((b.volume().unwrap() - 32.0 * PI / 3.0).abs() < 1e-12);
        assert!((b.gaussian_curvature() - 0.25).abs() < 1e-15);
        let t = Phantom::transformed_ball(2, 1.0, 1.5, &[0.2, -0.1]).unwrap();
        assert!((t.surface_area().unwrap() - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn gap_rate_is_linear_in_scale() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let f = WeightFunction::smooth_plateau(0.2, 0.3, 0.7, 0.8).unwrap();
        let p = bump2();
        let t_unit = p.phi(0.25).unwrap();
        let scales = [0.2, 0.1, 0.05, 0.025];
        let gaps: Vec<f64> = scales
            .iter()
            .map(|&a| {
                ball.halfspace_gap(p, &f, a, &[1.0, 0.0, 0.0], a * t_unit)
                    .unwrap()
            })
            .collect();
        let slope = crate::stats::loglog_slope(&scales, &gaps).unwrap();
        assert!(slope >= 0.9, "slope {slope}, gaps {gaps:?}");
    }

    #[test]
    fn gap_vanishes_for_halfspace_and_decreases_with_radius() {
        let f = WeightFunction::smooth_plateau(0.2, 0.3, 0.7, 0.8).unwrap();
        let p = bump2();
        let h = Phantom::half_space(2, &[0.0, 1.0], 0.0).unwrap();
        let g = h
            .halfspace_gap(p, &f, 0.1, &[0.3, 0.0, 0.0], 0.1 * p.phi(0.25).unwrap())
            .unwrap();
        assert!(g < 1e-12);
        let mut last = f64::INFINITY;
        for r in [1.0, 2.0, 4.0, 8.0] {
            let b = Phantom::ball(2, r).unwrap();
            let g = b
                .halfspace_gap(p, &f, 0.1, &[r, 0.0, 0.0], 0.1 * p.phi(0.25).unwrap())
                .unwrap();
            assert!(g < last);
            last = g;
        }
    }

    #[test]
    fn gap_outside_transition_zone_is_reported() {
        let f = WeightFunction::indicator(0.3, 0.7).unwrap();
        let b = Phantom::ball(2, 1.0).unwrap();
        let e = b
            .halfspace_gap(gauss2(), &f, 0.1, &[1.0, 0.0, 0.0], 0.5)
            .unwrap_err();
        assert!(matches!(e, Error::OutsideTransitionZone { .. }));
    }

    #[test]
    fn offsets_for_halfspace_follow_profile() {
        let f = WeightFunction::indicator(0.3, 0.7).unwrap();
        let h = Phantom::half_space(2, &[1.0, 0.0], 0.0).unwrap();
        let a = 0.1;
        let (tm, tp) = h.transition_offsets(gauss2(), &f, a).unwrap();
        assert!((tp - a * gauss2().phi(0.3).unwrap()).abs() < 1e-9);
        assert!((tm + tp).abs() < 1e-9);
    }

    #[test]
    fn offsets_for_ball_converge_quadratically() {
        let f = WeightFunction::indicator(0.3, 0.7).unwrap();
        let b = Phantom::ball(2, 1.0).unwrap();
        let p = bump2();
        let scales = [0.2, 0.1, 0.05];
        let errs: Vec<f64> = scales
            .iter()
            .map(|&a| {
                let (_, tp) = b.transition_offsets(p, &f, a).unwrap();
                (tp - a * p.phi(0.3).unwrap()).abs()
            })
            .collect();
        let slope = crate::stats::loglog_slope(&scales, &errs).unwrap();
        assert!(slope >= 1.8, "slope {slope}, {errs:?}");
    }

    #[test]
    fn intensity_decreases_along_normal_in_transition_zone() {
        let psf = Psf::gaussian(2, 1.0).unwrap();
        let a = 0.05;
        let mut last = 1.0;
        for i in 0..=40 {
            let r = 1.0 + a * (-2.0 + 0.1 * i as f64);
            let v = ball_radial_intensity(&psf, 1.0, a, r);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let ball = Phantom::ball(2, 1.0).unwrap();
        let image = BallImage::full(gauss2().psf(), &ball, 0.05, 1e-12).unwrap();
        for i in 0..57 {
            let r = 0.7 + 0.6 * i as f64 / 56.0;
            let direct = ball_radial_intensity(gauss2().psf(), 1.0, 0.05, r);
            assert!((image.theta(r) - direct).abs() < 1e-10, "r={r}");
        }
        let t = BallImage::transition(gauss2(), &ball, 0.05, 0.3, 0.7).unwrap();
        let r_beta = t.level_radius(0.3).unwrap();
        assert!((ball_radial_intensity(gauss2().psf(), 1.0, 0.05, r_beta) - 0.3).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn radially_symmetric(angle in 0.0f64..(2.0 * PI), r in 0.8f64..1.2) {
            let ball = Phantom::ball(2, 1.0).unwrap();
            let v0 = ball.intensity(gauss2(), 0.1, &[r, 0.0, 0.0]).unwrap();
            let v1 = ball.intensity(gauss2(), 0.1, &[r * angle.cos(), r * angle.sin(), 0.0]).unwrap();
            prop_assert!((v0 - v1).abs() < 1e-9);
        }

        #[test]
        fn scaling_identity(s in 0.5f64..3.0, r in 0.5f64..1.5) {
            // θ_a^{sX}(s x) = θ_{a/s}^X(x)
            let psf = gauss2().psf();
            let a = 0.1;
            let lhs = ball_radial_intensity(psf, s, a, s * r);
            let rhs = ball_radial_intensity(psf, 1.0, a / s, r);
            prop_assert!((lhs - rhs).abs() < 1e-8);
        }

        #[test]
        fn intensity_in_unit_interval(x in -2.0f64..2.0, y in -2.0f64..2.0, a in 0.01f64..0.5) {
            let ball = Phantom::transformed_ball(2, 1.0, 0.8, &[0.1, 0.2]).unwrap();
            let v = ball.intensity(gauss2(), a, &[x, y, 0.0]).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
