//! Bessel functions of the first kind for the orders that appear in radial
//! Fourier transforms in two and three dimensions.
//!
//! Integer orders use the power series for small arguments, Miller's
//! backward recurrence (normalized by `J0 + 2ΣJ_{2k} = 1`) in the middle
//! range and the Hankel asymptotic expansion for large arguments. The
//! half-integer orders are elementary.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supported orders ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselOrder {
    Zero,
    One,
    Half,
    ThreeHalves,
}

impl BesselOrder {
    pub fn from_f64(nu: f64) -> Result<Self> {
        match nu {
            0.0 => Ok(BesselOrder::Zero),
            1.0 => Ok(BesselOrder::One),
            0.5 => Ok(BesselOrder::Half),
            1.5 => Ok(BesselOrder::ThreeHalves),
            _ => Err(Error::domain(
                "order",
                format!("Bessel order {nu} not supported (0, 1, 1/2, 3/2)"),
            )),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            BesselOrder::Zero => 0.0,
            BesselOrder::One => 1.0,
            BesselOrder::Half => 0.5,
            BesselOrder::ThreeHalves => 1.5,
        }
    }

    /// Kernel order `d/2 - 1` of the radial Fourier transform in dimension d.
    pub fn hankel_kernel(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(BesselOrder::Zero),
            3 => Ok(BesselOrder::Half),
            _ => Err(Error::domain(
                "dim",
                format!("no Hankel kernel for d={dim}"),
            )),
        }
    }

    /// Order `d/2` appearing in the Fourier transform of a ball indicator.
    pub fn ball_order(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(BesselOrder::One),
            3 => Ok(BesselOrder::ThreeHalves),
            _ => Err(Error::domain(
                "dim",
                format!("no ball transform for d={dim}"),
            )),
        }
    }
}

/// J_ν(x) for x ≥ 0.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "x",
            format!("Bessel argument must be finite and >= 0, got {x}"),
        ));
    }
    Ok(bessel_j_unchecked(order, x))
}

/// J_ν(x) without argument validation; callers guarantee x ≥ 0.
#[inline]
pub fn bessel_j_unchecked(order: BesselOrder, x: f64) -> f64 {
    match order {
        BesselOrder::Zero => j0(x),
        BesselOrder::One => j1(x),
        BesselOrder::Half => j_half(x),
        BesselOrder::ThreeHalves => j_three_halves(x),
    }
}

const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

pub fn j0(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        series_integer(0, x)
    } else if x <= ASYMPTOTIC_LIMIT {
        miller(x).0
    } else {
        hankel_asymptotic(0.0, x)
    }
}

pub fn j1(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        series_integer(1, x)
    } else if x <= ASYMPTOTIC_LIMIT {
        miller(x).1
    } else {
        hankel_asymptotic(1.0, x)
    }
}

/// Σ_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!)
fn series_integer(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = if n == 0 { 1.0 } else { h };
    let mut sum = term;
    let q = -h * h;
    for k in 1..60 {
        let k = k as f64;
        term *= q / (k * (k + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// (J0(x), J1(x)) by backward recurrence from a high even order.
fn miller(x: f64) -> (f64, f64) {
    let start = {
        let n = (x + 30.0 + (40.0 * x).sqrt()) as usize;
        n + (n % 2)
    };
    let two_over_x = 2.0 / x;
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let j_prev = k as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        let km1 = k - 1;
        if km1 == 1 {
            j1 = j_cur;
        }
        if km1 > 0 && km1 % 2 == 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j_cur;
    (j_cur / norm, j1 / norm)
}

/// Hankel asymptotic expansion with terms summed until the smallest one.
fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let chi = x - (0.5 * nu + 0.25) * PI;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0; // a_k / x^k
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * x);
        let mag = term.abs();
        if mag > prev {
            break;
        }
        prev = mag;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-17 {
            break;
        }
    }
    (FRAC_2_PI / x).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn j_half(x: f64) -> f64 {
    if x < 1e-3 {
        // (x/2)^{1/2} / Γ(3/2) · (1 - x²/6 + x⁴/120)
        let x2 = x * x;
        return (FRAC_2_PI * x).sqrt() * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
    }
    (FRAC_2_PI / x).sqrt() * x.sin()
}

fn j_three_halves(x: f64) -> f64 {
    if x < 0.5 {
        // Σ (-1)^k (x/2)^{2k+3/2} / (k! Γ(k+5/2))
        let h = 0.5 * x;
        // (x/2)^{3/2} / Γ(5/2), Γ(5/2) = 3√π/4
        let mut term = h * h.sqrt() / (0.75 * PI.sqrt());
        let mut sum = term;
        for k in 1..30 {
            let k = k as f64;
            term *= -h * h / (k * (k + 1.5));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    (FRAC_2_PI / x).sqrt() * (x.sin() / x - x.cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_zero<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Power series evaluated with many terms at modest x (used as an oracle
    /// away from the region where cancellation matters).
    fn series_oracle(n: u32, x: f64) -> f64 {
        series_integer(n, x)
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(BesselOrder::Zero, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(BesselOrder::One, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(BesselOrder::Half, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(BesselOrder::ThreeHalves, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_order_vanishes_at_pi() {
        assert!(bessel_j(BesselOrder::Half, PI).unwrap().abs() < 1e-15);
    }

    #[test]
    fn first_zero_of_j0_from_series_root() {
        // the series is accurate to ~1e-15 near 2.4 (terms stay below 3)
        let root = bisect_zero(|x| series_oracle(0, x), 2.0, 3.0);
        assert!((root - 2.404825557695773).abs() < 1e-10);
        assert!(j0(2.404825557695773).abs() < 1e-14);
    }

    #[test]
    fn branches_agree_at_switch_points() {
        // Miller vs series in their overlap
        for &x in &[2.0, 3.0, 4.5] {
            assert!((miller(x).0 - series_oracle(0, x)).abs() < 1e-14);
            assert!((miller(x).1 - series_oracle(1, x)).abs() < 1e-14);
        }
        // Miller vs asymptotic in their overlap
        for &x in &[20.0, 25.0, 40.0] {
            assert!((miller(x).0 - hankel_asymptotic(0.0, x)).abs() < 1e-14);
            assert!((miller(x).1 - hankel_asymptotic(1.0, x)).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_reference_libm() {
        for i in 0..5000 {
            let x = i as f64 * 0.1;
            assert!((j0(x) - libm::j0(x)).abs() < 1e-12, "j0({x})");
            assert!((j1(x) - libm::j1(x)).abs() < 1e-12, "j1({x})");
        }
    }

    #[test]
    fn half_integer_recurrence() {
        // J_{3/2}(x) = J_{1/2}(x)/x - J_{-1/2}(x), with J_{-1/2} = sqrt(2/(πx)) cos x
        for &x in &[0.3, 0.49, 0.51, 1.0, 7.0, 100.0] {
            let jm = (FRAC_2_PI / x).sqrt() * x.cos();
            let expect = j_half(x) / x - jm;
            assert!((j_three_halves(x) - expect).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn rejects_bad_order_and_argument() {
        assert!(BesselOrder::from_f64(2.0).is_err());
        assert!(bessel_j(BesselOrder::Zero, -1.0).is_err());
    }
}
