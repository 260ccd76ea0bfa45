//! Weight functions f applied to grey values and their normalizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psf::HalfspaceProfile;
use crate::quadrature::adaptive_with_breaks;

/// Shape of a weight function; every shape has sup |f| = 1 before the
/// amplitude is applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// 1 on [lower, upper], 0 elsewhere.
    Indicator { lower: f64, upper: f64 },
    /// 0 below `lower`, smoothstep up to 1 at `rise_end`, flat until
    /// `fall_start`, smoothstep down to 0 at `upper`. C³ on (0, 1).
    SmoothPlateau {
        lower: f64,
        rise_end: f64,
        fall_start: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    C3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    kind: WeightKind,
    amplitude: f64,
}

/// 7th-order smoothstep: S(0)=0, S(1)=1, first three derivatives vanish at both ends.
#[inline]
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let x4 = x * x * x * x;
    x4 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)))
}

impl WeightFunction {
    pub fn new(kind: WeightKind) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v < 1.0;
        match kind {
            WeightKind::Indicator { lower, upper } => {
                if !(ok(lower) && ok(upper) && lower < upper) {
                    return Err(Error::domain(
                        "weight.lower",
                        format!("need 0 < lower < upper < 1, got [{lower}, {upper}]"),
                    ));
                }
            }
            WeightKind::SmoothPlateau {
                lower,
                rise_end,
                fall_start,
                upper,
            } => {
                if !(ok(lower)
                    && ok(upper)
                    && lower < rise_end
                    && rise_end <= fall_start
                    && fall_start < upper)
                {
                    return Err(Error::domain(
                        "weight.lower",
                        format!(
                            "need 0 < lower < rise_end <= fall_start < upper < 1, got \
                             ({lower}, {rise_end}, {fall_start}, {upper})"
                        ),
                    ));
                }
            }
        }
        Ok(WeightFunction {
            kind,
            amplitude: 1.0,
        })
    }

    pub fn indicator(lower: f64, upper: f64) -> Result<Self> {
        WeightFunction::new(WeightKind::Indicator { lower, upper })
    }

    pub fn smooth_plateau(lower: f64, rise_end: f64, fall_start: f64, upper: f64) -> Result<Self> {
        WeightFunction::new(WeightKind::SmoothPlateau {
            lower,
            rise_end,
            fall_start,
            upper,
        })
    }

    /// The same shape multiplied by `amplitude` (must be nonzero).
    pub fn scaled(self, amplitude: f64) -> Result<Self> {
        if amplitude == 0.0 || !amplitude.is_finite() {
            return Err(Error::Normalization { alpha: 0.0 });
        }
        Ok(WeightFunction {
            amplitude: self.amplitude * amplitude,
            ..self
        })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Support bounds (β, ω).
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            WeightKind::Indicator { lower, upper }
            | WeightKind::SmoothPlateau { lower, upper, .. } => (lower, upper),
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self.kind {
            WeightKind::Indicator { .. } => Smoothness::C0,
            WeightKind::SmoothPlateau { .. } => Smoothness::C3,
        }
    }

    /// The unit-amplitude shape at grey value y.
    #[inline]
    pub fn shape(&self, y: f64) -> f64 {
        match self.kind {
            WeightKind::Indicator { lower, upper } => {
                if y >= lower && y <= upper {
                    1.0
                } else {
                    0.0
                }
            }
            WeightKind::SmoothPlateau {
                lower,
                rise_end,
                fall_start,
                upper,
            } => {
                if y <= lower || y >= upper {
                    0.0
                } else if y < rise_end {
                    smoothstep((y - lower) / (rise_end - lower))
                } else if y <= fall_start {
                    1.0
                } else {
                    smoothstep((upper - y) / (upper - fall_start))
                }
            }
        }
    }

    /// f(y).
    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        self.amplitude * self.shape(y)
    }

    /// (f(β), f(ω)).
    pub fn boundary_values(&self) -> (f64, f64) {
        let (lo, hi) = self.support();
        (self.eval(lo), self.eval(hi))
    }

    /// ∫ |d/dt f(θ^H(t))| dt over the open support, i.e. the total variation
    /// of f on (β, ω) (θ^H is monotone).
    pub fn interior_variation(&self) -> f64 {
        match self.kind {
            WeightKind::Indicator { .. } => 0.0,
            WeightKind::SmoothPlateau { .. } => 2.0 * self.amplitude.abs(),
        }
    }

    /// Offsets in units of the PSF scale where f∘θ^H changes form.
    fn breakpoints(&self, profile: &HalfspaceProfile) -> Result<Vec<f64>> {
        let levels: Vec<f64> = match self.kind {
            WeightKind::Indicator { lower, upper } => vec![lower, upper],
            WeightKind::SmoothPlateau {
                lower,
                rise_end,
                fall_start,
                upper,
            } => vec![lower, rise_end, fall_start, upper],
        };
        let mut out = Vec::with_capacity(levels.len());
        for y in levels {
            out.push(profile.phi(y)?);
        }
        out.sort_by(|a, b| a.total_cmp(b));
        Ok(out)
    }

    /// The interval [φ(ω), φ(β)] on which f∘θ^H can be nonzero.
    pub fn offset_support(&self, profile: &HalfspaceProfile) -> Result<(f64, f64)> {
        let (lo, hi) = self.support();
        Ok((profile.phi(hi)?, profile.phi(lo)?))
    }

    /// Breakpoints of f∘θ^H in t (sorted).
    pub fn offset_breaks(&self, profile: &HalfspaceProfile) -> Result<Vec<f64>> {
        self.breakpoints(profile)
    }

    fn integral_of_shape(&self, profile: &HalfspaceProfile) -> Result<f64> {
        match self.kind {
            WeightKind::Indicator { lower, upper } => Ok(profile.phi(lower)? - profile.phi(upper)?),
            WeightKind::SmoothPlateau { .. } => {
                let breaks = self.breakpoints(profile)?;
                let (a, b) = (breaks[0], breaks[breaks.len() - 1]);
                Ok(adaptive_with_breaks(
                    |t| self.shape(profile.theta(t)),
                    a,
                    b,
                    &breaks,
                    1e-13,
                ))
            }
        }
    }

    /// α_f = ∫ f(θ^H(t)) dt.
    pub fn alpha(&self, profile: &HalfspaceProfile) -> Result<f64> {
        let alpha = self.amplitude * self.integral_of_shape(profile)?;
        if alpha.abs() < 1e-12 || !alpha.is_finite() {
            return Err(Error::Normalization { alpha });
        }
        Ok(alpha)
    }

    /// α_{|f|} = ∫ |f(θ^H(t))| dt.
    pub fn alpha_abs(&self, profile: &HalfspaceProfile) -> Result<f64> {
        // every shape is nonnegative
        Ok(self.amplitude.abs() * self.integral_of_shape(profile)?)
    }

    /// α_f of the unit-amplitude shape; the estimators divide by this so that
    /// the amplitude cancels exactly.
    pub(crate) fn shape_alpha(&self, profile: &HalfspaceProfile) -> Result<f64> {
        let alpha = self.integral_of_shape(profile)?;
        if alpha.abs() < 1e-12 || !alpha.is_finite() {
            return Err(Error::Normalization { alpha });
        }
        Ok(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psf::{ProfileGrid, Psf};
    use proptest::prelude::*;

    fn gaussian_profile() -> &'static HalfspaceProfile {
        static P: std::sync::OnceLock<HalfspaceProfile> = std::sync::OnceLock::new();
        P.get_or_init(|| {
            HalfspaceProfile::new(&Psf::gaussian(2, 1.0).unwrap(), ProfileGrid::default())
        })
    }

    #[test]
    fn rejects_bad_support() {
        assert!(WeightFunction::indicator(0.7, 0.3).is_err());
        assert!(WeightFunction::indicator(0.0, 0.3).is_err());
        assert!(WeightFunction::smooth_plateau(0.2, 0.1, 0.7, 0.8).is_err());
        assert!(WeightFunction::indicator(0.3, 0.7)
            .unwrap()
            .scaled(0.0)
            .is_err());
    }

    #[test]
    fn indicator_alpha_matches_normal_quantile() {
        let p = gaussian_profile();
        let f = WeightFunction::indicator(0.3, 0.7).unwrap();
        // 2 Φ^{-1}(0.7)
        assert!((f.alpha(p).unwrap() - 1.048_801_025_416_082).abs() < 1e-8);
        let (lo, hi) = f.offset_support(p).unwrap();
        assert!((f.alpha(p).unwrap() - (hi - lo)).abs() < 1e-15);
    }

    #[test]
    fn plateau_alpha_between_bounds_and_matches_trapezoid() {
        let p = gaussian_profile();
        let f = WeightFunction::smooth_plateau(0.2, 0.3, 0.7, 0.8).unwrap();
        let alpha = f.alpha(p).unwrap();
        let inner = p.phi(0.3).unwrap() - p.phi(0.7).unwrap();
        let outer = p.phi(0.2).unwrap() - p.phi(0.8).unwrap();
        assert!(inner < alpha && alpha < outer);
        // plain trapezoid on a fine grid
        let (lo, hi) = (-2.0, 2.0);
        let n = 400_000;
        let h = (hi - lo) / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += w * f.eval(p.theta(lo + h * i as f64));
        }
        assert!((s * h - alpha).abs() < 1e-8, "{} vs {alpha}", s * h);
    }

    #[test]
    fn smoothstep_is_flat_at_both_ends() {
        let h = 1e-3;
        for x in [0.0, 1.0] {
            let d1 = (smoothstep(x + h) - smoothstep(x - h)) / (2.0 * h);
            assert!(d1.abs() < 1e-7);
        }
        assert_eq!(smoothstep(0.5), 0.5);
    }

    #[test]
    fn indicator_has_no_interior_variation() {
        let f = WeightFunction::indicator(0.3, 0.7).unwrap();
        assert_eq!(f.interior_variation(), 0.0);
        assert_eq!(f.boundary_values(), (1.0, 1.0));
        let g = WeightFunction::smooth_plateau(0.2, 0.3, 0.7, 0.8).unwrap();
        assert_eq!(g.boundary_values(), (0.0, 0.0));
        assert_eq!(g.interior_variation(), 2.0);
    }

    proptest! {
        #[test]
        fn plateau_bounded_and_symmetric(y in 0.0f64..1.0) {
            let f = WeightFunction::smooth_plateau(0.2, 0.3, 0.7, 0.8).unwrap();
            let v = f.eval(y);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((v - f.eval(1.0 - y)).abs() < 1e-12);
        }

        #[test]
        fn amplitude_scales_alpha(lambda in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0]) {
            let p = gaussian_profile();
            let f = WeightFunction::indicator(0.3, 0.7).unwrap();
            let g = f.scaled(lambda).unwrap();
            prop_assert!((g.alpha(p).unwrap() - lambda * f.alpha(p).unwrap()).abs() < 1e-12);
        }
    }
}
