//! Gauss–Legendre quadrature: fixed rules, composite panels and adaptive
//! bisection.
//!
//! All one-dimensional integrals in the crate go through this module. Panels
//! use the 15-point rule; adaptivity compares a panel against the sum of its
//! two halves and bisects until the difference is below the absolute
//! tolerance.

use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Applies the rule on [a, b].
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The shared 15-point rule.
pub fn gl15() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

/// Composite 15-point rule over `panels` equal panels.
pub fn composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let rule = gl15();
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            rule.integrate(&mut f, lo, lo + h)
        })
        .sum()
}

const MAX_DEPTH: u32 = 40;

/// Adaptive composite Gauss–Legendre with recursive bisection and absolute
/// tolerance `tol`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let rule = gl15();
    let whole = rule.integrate(&mut f, a, b);
    refine(&mut f, rule, a, b, whole, tol, 0)
}

fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(&mut *f, a, mid);
    let right = rule.integrate(&mut *f, mid, b);
    let split = left + right;
    if (split - whole).abs() <= tol || depth >= MAX_DEPTH || mid <= a || mid >= b {
        return split;
    }
    refine(f, rule, a, mid, left, 0.5 * tol, depth + 1)
        + refine(f, rule, mid, b, right, 0.5 * tol, depth + 1)
}

/// Adaptive integration over consecutive pieces separated by `breaks`.
/// Break points outside (a, b) are ignored.
pub fn adaptive_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    pts.sort_by(|x, y| x.total_cmp(y));
    let pieces = pts.len() + 1;
    let mut lo = a;
    let mut acc = 0.0;
    for hi in pts.into_iter().chain(std::iter::once(b)) {
        acc += adaptive(&mut f, lo, hi, tol / pieces as f64);
        lo = hi;
    }
    acc
}

/// Oscillatory integral of `f` over [a, b] where the integrand oscillates with
/// spatial frequency `freq` (cycles per unit length): panels no wider than a
/// quarter period, 15 nodes each, plus the given break points.
pub fn oscillatory<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    freq: f64,
    breaks: &[f64],
) -> f64 {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    pts.sort_by(|x, y| x.total_cmp(y));
    let mut lo = a;
    let mut acc = 0.0;
    for hi in pts.into_iter().chain(std::iter::once(b)) {
        let panels = ((hi - lo) * 4.0 * freq.abs()).ceil().max(2.0) as usize;
        acc += composite(&mut f, lo, hi, panels);
        lo = hi;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(15);
        // degree 29 is the exactness limit
        let v = rule.integrate(|x| x.powi(28), -1.0, 1.0);
        assert_abs_diff_eq!(v, 2.0 / 29.0, epsilon = 1e-15);
        let s: f64 = rule.weights.iter().sum();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let v = adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12);
        assert_abs_diff_eq!(v, 2.0 / 3.0, epsilon = 1e-11);
    }

    #[test]
    fn breaks_split_kinks() {
        let v = adaptive_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-13);
        assert_abs_diff_eq!(v, 0.5 * 0.09 + 0.5 * 0.49, epsilon = 1e-13);
    }

    #[test]
    fn oscillatory_sine() {
        let k = 37.0;
        let v = oscillatory(
            |x: f64| (2.0 * std::f64::consts::PI * k * x).cos() * x,
            0.0,
            1.0,
            k,
            &[],
        );
        // ∫ x cos(2πkx) over whole periods = 0 for integer k
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-13);
    }
}
