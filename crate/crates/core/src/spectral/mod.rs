//! Radial Fourier analysis: Hankel-type transforms of radial functions, the
//! one-dimensional transform of f∘θ^H, and ball transforms (exact and
//! leading-order models).
//!
//! Convention: F(g)(ξ) = ∫ g(x) e^{-2πi x·ξ} dx. For radial g in dimension d
//! F(g)(k) = 2π k^{-(d-2)/2} ∫ g(r) J_{d/2-1}(2πkr) r^{d/2} dr.

pub mod bessel;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use bessel::{bessel_j, BesselOrder};

use crate::error::{Error, Result};
use crate::estimator::{SurfaceEstimator, WeightFunction, WeightKind};
use crate::linalg::{check_dim, unit_sphere_area};
use crate::phantom::{check_scale, Phantom, RadialTable};
use crate::psf::{HalfspaceProfile, Psf, PsfKind};
use crate::quadrature::oscillatory;

/// Radial frequency phase shift ν_d = −(d−1)π/4 of the large-argument
/// Bessel asymptotics.
pub fn phase_shift(dim: usize) -> f64 {
    -(dim as f64 - 1.0) * PI / 4.0
}

/// Volume of the unit ball.
fn unit_ball_volume(dim: usize) -> f64 {
    unit_sphere_area(dim) / dim as f64
}

/// F(g)(k) for a radial g supported in [r_lo, r_hi], smooth between the given
/// break radii. Panels are no wider than `max_panel` nor a quarter period of
/// the kernel.
pub fn hankel_transform<G: Fn(f64) -> f64>(
    dim: usize,
    g: G,
    r_lo: f64,
    r_hi: f64,
    breaks: &[f64],
    k: f64,
    max_panel: f64,
) -> Result<f64> {
    check_dim(dim)?;
    if dim == 1 {
        return Err(Error::Unsupported {
            message: "radial transforms need d ∈ {2, 3}".into(),
        });
    }
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::domain(
            "xi_norm",
            format!("frequency must be finite and >= 0, got {k}"),
        ));
    }
    if !(max_panel > 0.0) || !(r_hi >= r_lo) || r_lo < 0.0 {
        return Err(Error::domain(
            "radius",
            "need 0 <= r_lo <= r_hi and a positive panel width",
        ));
    }
    let freq = k.max(0.25 / max_panel);
    if k == 0.0 {
        let p = dim as i32 - 1;
        let v = oscillatory(|r| g(r) * r.powi(p), r_lo, r_hi, freq, breaks);
        return Ok(unit_sphere_area(dim) * v);
    }
    let order = BesselOrder::hankel_kernel(dim)?;
    let w = 2.0 * PI * k;
    let half = 0.5 * dim as f64;
    let v = oscillatory(
        |r| g(r) * bessel::bessel_j_unchecked(order, w * r) * r.powf(half),
        r_lo,
        r_hi,
        freq,
        breaks,
    );
    Ok(2.0 * PI * k.powf(1.0 - half) * v)
}

/// A radial function tabulated piecewise (smooth between breaks), with its
/// d-dimensional Fourier transform.
#[derive(Debug, Clone)]
pub struct RadialFourier {
    dim: usize,
    breaks: Vec<f64>,
    pieces: Vec<RadialTable>,
    panel: f64,
}

impl RadialFourier {
    /// Tabulates g on [breaks[0], breaks[last]]; g must be smooth inside each
    /// piece. `panel_width` bounds both the table panels and the quadrature
    /// panels.
    pub fn tabulate<G: FnMut(f64) -> f64>(
        dim: usize,
        mut g: G,
        breaks: &[f64],
        panel_width: f64,
    ) -> Result<Self> {
        check_dim(dim)?;
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks[0] < 0.0 {
            return Err(Error::domain(
                "radius",
                "breaks must be increasing, nonnegative and at least two",
            ));
        }
        if !(panel_width > 0.0) {
            return Err(Error::domain("panel_width", "must be positive"));
        }
        let pieces = breaks
            .windows(2)
            .map(|w| RadialTable::build(&mut g, w[0], w[1], panel_width))
            .collect();
        Ok(RadialFourier {
            dim,
            breaks: breaks.to_vec(),
            pieces,
            panel: panel_width,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn range(&self) -> (f64, f64) {
        (self.breaks[0], self.breaks[self.breaks.len() - 1])
    }

    /// Tabulated g(r); zero outside the range.
    pub fn eval(&self, r: f64) -> f64 {
        let (lo, hi) = self.range();
        if !(r >= lo && r <= hi) {
            return 0.0;
        }
        let i = self
            .breaks
            .partition_point(|b| *b <= r)
            .clamp(1, self.pieces.len())
            - 1;
        self.pieces[i].eval(r).unwrap_or(0.0)
    }

    pub fn transform(&self, k: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        hankel_transform(
            self.dim,
            |r| self.eval(r),
            lo,
            hi,
            &self.breaks,
            k,
            self.panel,
        )
    }

    /// ∫ g(|x|) dx = F(g)(0).
    pub fn volume_integral(&self) -> Result<f64> {
        self.transform(0.0)
    }
}

/// F(ρ_a)(k) = F(ρ)(ak): closed form for the Gaussian, quadrature otherwise.
pub fn psf_fourier(psf: &Psf, a: f64, k: f64) -> Result<f64> {
    check_scale(a)?;
    let ka = a * k;
    match psf.kind() {
        PsfKind::Gaussian { sigma } => Ok((-2.0 * PI * PI * sigma * sigma * ka * ka).exp()),
        PsfKind::BallIndicator { radius } => {
            let vol = unit_ball_volume(psf.dim()) * radius.powi(psf.dim() as i32);
            Ok(ball_indicator_fourier(psf.dim(), radius, ka)? / vol)
        }
        PsfKind::CompactBump { .. } => {
            let top = psf.integration_radius();
            hankel_transform(psf.dim(), |r| psf.density(r), 0.0, top, &[], ka, top / 64.0)
        }
    }
}

/// F(1_{B(R)})(k) = R^{d/2} k^{-d/2} J_{d/2}(2πRk); κ_d R^d at k = 0.
pub fn ball_indicator_fourier(dim: usize, radius: f64, k: f64) -> Result<f64> {
    check_dim(dim)?;
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::domain(
            "xi_norm",
            format!("frequency must be finite and >= 0, got {k}"),
        ));
    }
    if k == 0.0 {
        return Ok(unit_ball_volume(dim) * radius.powi(dim as i32));
    }
    let order = BesselOrder::ball_order(dim)?;
    let h = 0.5 * dim as f64;
    Ok((radius / k).powf(h) * bessel::bessel_j_unchecked(order, 2.0 * PI * radius * k))
}

/// F(f∘θ^H)(r) = ∫ f(θ^H(t)) e^{-2πirt} dt.
pub fn fourier_profile(
    f: &WeightFunction,
    profile: &HalfspaceProfile,
    r: f64,
) -> Result<Complex64> {
    if !r.is_finite() {
        return Err(Error::domain("frequency", "must be finite"));
    }
    let (t0, t1) = f.offset_support(profile)?;
    let lambda = f.amplitude();
    if let WeightKind::Indicator { .. } = f.kind() {
        if r == 0.0 {
            return Ok(Complex64::new(lambda * (t1 - t0), 0.0));
        }
        let w = 2.0 * PI * r;
        // (e^{-iwt0} − e^{-iwt1}) / (iw)
        let diff = Complex64::from_polar(1.0, -w * t0) - Complex64::from_polar(1.0, -w * t1);
        return Ok(lambda * diff / Complex64::new(0.0, w));
    }
    let breaks = f.offset_breaks(profile)?;
    let w = 2.0 * PI * r;
    let freq = r.abs().max(2.5);
    let re = oscillatory(
        |t| f.eval(profile.theta(t)) * (w * t).cos(),
        t0,
        t1,
        freq,
        &breaks,
    );
    let im = oscillatory(
        |t| -f.eval(profile.theta(t)) * (w * t).sin(),
        t0,
        t1,
        freq,
        &breaks,
    );
    Ok(Complex64::new(re, im))
}

/// Largest quadrature panel across the grey band, in units of the PSF scale.
const BAND_PANEL: f64 = 0.125;

/// F(g_a)(k) for g_a = f∘θ_a^X of a ball; real because g_a is radial.
/// Indicator weights use the closed form λ[F(1_{B(r_β)}) − F(1_{B(r_ω)})].
pub fn ball_fourier_from(est: &SurfaceEstimator, k: f64) -> Result<f64> {
    let (r_omega, r_beta) = est.shell_radii().ok_or_else(|| Error::Unsupported {
        message: "ball transforms need a ball phantom".into(),
    })?;
    let dim = est.phantom().dim();
    let f = est.weight();
    match f.kind() {
        WeightKind::Indicator { .. } => Ok(f.amplitude()
            * (ball_indicator_fourier(dim, r_beta, k)? - ball_indicator_fourier(dim, r_omega, k)?)),
        WeightKind::SmoothPlateau { .. } => hankel_transform(
            dim,
            |r| est.radial_weight(r),
            r_omega,
            r_beta,
            est.radial_breaks(),
            k,
            BAND_PANEL * est.scale(),
        ),
    }
}

/// F(f∘θ_a^X)(k) for a ball phantom.
pub fn ball_fourier_exact(
    profile: &HalfspaceProfile,
    phantom: &Phantom,
    f: &WeightFunction,
    a: f64,
    xi_norm: f64,
) -> Result<f64> {
    let est = SurfaceEstimator::new(profile, phantom, f, a)?;
    ball_fourier_from(&est, xi_norm)
}

/// Relation between the PSF scale a and the lattice resolution b that a
/// leading-order model assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// b = a: the full cosine-integral main term.
    Equal,
    /// b ≪ a: only the jumps of f at β and ω survive.
    FineLattice,
    /// b ≫ a: the grey band is unresolved, giving an α_f² envelope.
    CoarseLattice,
}

/// A(k) = 2k^{-(d-1)/2} a ∫ f(θ^H(t)) cos(2π(R+at)k + ν_d) (R+at)^{(d-1)/2} dt,
/// the leading term of F(g_a)(k) for a ball of radius R.
pub fn ball_main_term(
    dim: usize,
    radius: f64,
    a: f64,
    k: f64,
    f: &WeightFunction,
    profile: &HalfspaceProfile,
) -> Result<f64> {
    check_scale(a)?;
    if !(k > 0.0) {
        return Err(Error::domain(
            "xi_norm",
            "the leading term needs a positive frequency",
        ));
    }
    let (t0, t1) = f.offset_support(profile)?;
    let breaks = f.offset_breaks(profile)?;
    let nu = phase_shift(dim);
    let p = 0.5 * (dim as f64 - 1.0);
    let w = 2.0 * PI * k;
    let integral = oscillatory(
        |t| {
            let r = radius + a * t;
            f.eval(profile.theta(t)) * (w * r + nu).cos() * r.powf(p)
        },
        t0,
        t1,
        (a * k).max(0.25 / BAND_PANEL),
        &breaks,
    );
    Ok(2.0 * k.powf(-p) * a * integral)
}

/// Leading-order model of |F(g_a)(|ξ|/b)|² for a ball of radius R.
pub fn ball_fourier_asymptotic(
    radius: f64,
    a: f64,
    b: f64,
    xi_norm: f64,
    f: &WeightFunction,
    profile: &HalfspaceProfile,
    regime: Regime,
) -> Result<f64> {
    check_scale(a)?;
    check_scale(b)?;
    if !(xi_norm > 0.0) {
        return Err(Error::domain("xi_norm", "must be positive"));
    }
    let ratio = b / a;
    let consistent = match regime {
        Regime::Equal => (ratio - 1.0).abs() <= 0.1,
        Regime::FineLattice => ratio <= 0.25,
        Regime::CoarseLattice => ratio >= 4.0,
    };
    if !consistent {
        log::warn!("regime {regime:?} used with b/a = {ratio}");
    }
    let dim = profile.dim();
    let d = dim as f64;
    let k = xi_norm / b;
    let nu = phase_shift(dim);
    match regime {
        Regime::Equal => Ok(ball_main_term(dim, radius, a, k, f, profile)?.powi(2)),
        Regime::FineLattice => {
            let (t0, t1) = f.offset_support(profile)?;
            let (f_beta, f_omega) = f.boundary_values();
            let s_beta = (2.0 * PI * (radius + a * t1) * k + nu).sin();
            let s_omega = (2.0 * PI * (radius + a * t0) * k + nu).sin();
            let jump = f_beta * s_beta - f_omega * s_omega;
            Ok(k.powf(-d - 1.0) * radius.powf(d - 1.0) / (PI * PI) * jump * jump)
        }
        Regime::CoarseLattice => {
            let alpha = f.alpha(profile)?;
            let c = (2.0 * PI * radius * k + nu).cos();
            Ok(4.0 * k.powf(1.0 - d) * radius.powf(d - 1.0) * a * a * alpha * alpha * c * c)
        }
    }
}
