//! Sums of radial terms over the nonzero dual lattice, with shell-wise
//! truncation and a tail estimate from an assumed |ξ|^{-p} decay.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{dual_shells_between, Lattice};
use crate::linalg::unit_sphere_area;

/// Stopping rule for [`dual_lattice_sum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumControl {
    /// Terms are assumed to decay at least like |ξ|^{-p}; p > d.
    pub decay_power: f64,
    /// A shell is quiet when it adds at most this fraction of the partial sum.
    pub shell_tolerance: f64,
    /// Consecutive quiet shells required before stopping.
    pub quiet_shells: usize,
    /// The tail bound must fall below this fraction of the partial sum.
    pub tail_tolerance: f64,
    /// Largest |ξ| at which terms may be evaluated.
    pub xi_cap: Option<f64>,
    /// Hard limit on |ξ| regardless of the cap.
    pub xi_limit: f64,
}

impl SumControl {
    /// p = d + 1, 1e-6 per shell over three shells, 1% tail.
    pub fn for_dim(dim: usize) -> Self {
        SumControl {
            decay_power: dim as f64 + 1.0,
            shell_tolerance: 1e-6,
            quiet_shells: 3,
            tail_tolerance: 0.01,
            xi_cap: None,
            xi_limit: 4000.0,
        }
    }

    pub fn with_cap(mut self, cap: Option<f64>) -> Self {
        self.xi_cap = cap;
        self
    }
}

/// A truncated dual-lattice sum Σ_{ξ≠0} T(|ξ|).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSum {
    /// Partial sum plus the tail estimate.
    pub value: f64,
    pub partial: f64,
    /// Tail beyond `xi_max` from the mean envelope of the last shells.
    pub tail_estimate: f64,
    /// Tail beyond `xi_max` from the largest envelope of the last shells.
    pub tail_bound: f64,
    pub xi_max: f64,
    pub shells: usize,
    pub points: u64,
    /// Whether the frequency cap ended the summation.
    pub capped: bool,
}

impl LatticeSum {
    pub fn tail_ratio(&self) -> f64 {
        if self.partial > 0.0 {
            self.tail_bound / self.partial
        } else {
            0.0
        }
    }

    /// The sum multiplied by a constant.
    pub fn scaled(self, s: f64) -> Self {
        LatticeSum {
            value: s * self.value,
            partial: s * self.partial,
            tail_estimate: s * self.tail_estimate,
            tail_bound: s.abs() * self.tail_bound,
            ..self
        }
    }
}

/// Envelope constants C = T(|ξ|)|ξ|^p of the shells in [Ξ/2, Ξ].
#[derive(Default)]
struct Envelope {
    recent: VecDeque<(f64, f64, usize)>,
    /// Candidates for the maximum over [3Ξ/4, Ξ], with decreasing C.
    peaks: VecDeque<(f64, f64)>,
}

impl Envelope {
    fn push(&mut self, norm: f64, c: f64, mult: usize) {
        self.recent.push_back((norm, c, mult));
        while self.recent.front().is_some_and(|r| r.0 < 0.5 * norm) {
            self.recent.pop_front();
        }
        while self.peaks.back().is_some_and(|r| r.1 <= c) {
            self.peaks.pop_back();
        }
        self.peaks.push_back((norm, c));
        while self.peaks.front().is_some_and(|r| r.0 < 0.75 * norm) {
            self.peaks.pop_front();
        }
    }

    fn newest(&self) -> f64 {
        self.recent.back().map_or(0.0, |r| r.0)
    }

    /// Largest C over [3Ξ/4, Ξ].
    fn max(&self) -> f64 {
        self.peaks.front().map_or(0.0, |r| r.1)
    }

    /// Multiplicity-weighted mean of C over [lo·Ξ, hi·Ξ).
    fn mean_between(&self, lo: f64, hi: f64) -> Option<f64> {
        let xi = self.newest();
        let (s, w) = self
            .recent
            .iter()
            .filter(|r| r.0 >= lo * xi && (r.0 < hi * xi || hi >= 1.0))
            .fold((0.0, 0usize), |(s, w), &(_, c, m)| {
                (s + c * m as f64, w + m)
            });
        (w > 0).then(|| s / w as f64)
    }

    /// Tail estimate: the envelope of the newest quarter, continued with the
    /// extra decay |ξ|^{-q} seen between the two newest quarters.
    fn tail_estimate(&self, lattice: &Lattice, dim: usize, p: f64) -> f64 {
        let xi = self.newest();
        let Some(c_new) = self.mean_between(0.75, 1.0) else {
            return 0.0;
        };
        let q = match self.mean_between(0.5, 0.75) {
            Some(c_old) if c_old > 0.0 && c_new > 0.0 => {
                ((c_old / c_new).ln() / (0.875f64 / 0.625).ln()).max(0.0)
            }
            _ => 0.0,
        };
        let centre = 0.875 * xi;
        c_new * centre.powf(q) * tail_factor(lattice, dim, p + q, xi)
    }
}

/// Points of Λ* per unit volume times ∫_{|ξ|>Ξ} |ξ|^{-p} dξ.
fn tail_factor(lattice: &Lattice, dim: usize, p: f64, xi: f64) -> f64 {
    let d = dim as f64;
    lattice.covolume() * unit_sphere_area(dim) * xi.powf(d - p) / (p - d)
}

/// Points per chunk of shells handed to the workers.
const CHUNK_POINTS: f64 = 2048.0;
/// Least chunk thickness in dual shortest vectors, so that walking the rows
/// of the enclosing ball stays cheap next to visiting the points.
const CHUNK_THICKNESS: f64 = 2.0;

/// Σ_{ξ∈Λ*\{0}} T(|ξ|), evaluating T once per shell.
///
/// Summation stops at the first shell Ξ after which `quiet_shells`
/// consecutive shells were quiet and the tail bound C_max c_Λ ω_d
/// Ξ^{d−p}/(p−d) is below `tail_tolerance` of the partial sum. When Ξ
/// reaches the cap, the sum is accepted if the tail bound is small enough
/// and a truncation error is returned otherwise.
pub fn dual_lattice_sum<T>(lattice: &Lattice, term: T, control: &SumControl) -> Result<LatticeSum>
where
    T: Fn(f64) -> Result<f64> + Sync,
{
    let dim = lattice.dim();
    let d = dim as f64;
    let p = control.decay_power;
    if !(p > d) {
        return Err(Error::domain("decay_power", format!("need p > d, got {p}")));
    }
    let limit = match control.xi_cap {
        Some(cap) => cap.min(control.xi_limit),
        None => control.xi_limit,
    };
    let density = lattice.covolume();
    let ball = unit_sphere_area(dim) / d;
    let min_step = CHUNK_THICKNESS * lattice.dual().shortest_vector();

    let mut partial = 0.0;
    let mut points = 0u64;
    let mut shells = 0usize;
    let mut quiet = 0usize;
    let mut xi = 0.0;
    let mut env = Envelope::default();
    let mut lo = 0.0;
    let finish = |partial: f64, xi: f64, env: &Envelope, shells, points, capped| {
        let f = if xi > 0.0 {
            tail_factor(lattice, dim, p, xi)
        } else {
            0.0
        };
        let tail_estimate = if xi > 0.0 {
            env.tail_estimate(lattice, dim, p)
        } else {
            0.0
        };
        LatticeSum {
            value: partial + tail_estimate,
            partial,
            tail_estimate,
            tail_bound: env.max() * f,
            xi_max: xi,
            shells,
            points,
            capped,
        }
    };

    while lo < limit {
        let hi = ((lo.powf(d) + CHUNK_POINTS / (density * ball)).powf(1.0 / d))
            .max(lo + min_step)
            .min(limit);
        let chunk = dual_shells_between(lattice, lo, hi);
        let values: Vec<f64> = chunk
            .par_iter()
            .map(|s| term(s.norm))
            .collect::<Result<Vec<f64>>>()?;
        for (shell, t) in chunk.iter().zip(values) {
            if !t.is_finite() {
                return Err(Error::domain(
                    "xi_norm",
                    format!("term is not finite at |ξ| = {}", shell.norm),
                ));
            }
            let contrib = shell.multiplicity as f64 * t;
            partial += contrib;
            points += shell.multiplicity as u64;
            shells += 1;
            xi = shell.norm;
            env.push(shell.norm, t.abs() * shell.norm.powf(p), shell.multiplicity);
            if contrib.abs() <= control.shell_tolerance * partial.abs() {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= control.quiet_shells {
                let bound = env.max() * tail_factor(lattice, dim, p, xi);
                if bound <= control.tail_tolerance * partial.abs() {
                    return Ok(finish(partial, xi, &env, shells, points, false));
                }
            }
        }
        lo = hi;
    }

    let result = finish(
        partial,
        xi,
        &env,
        shells,
        points,
        control.xi_cap.is_some_and(|c| c <= control.xi_limit),
    );
    if result.tail_bound <= control.tail_tolerance * partial.abs() {
        return Ok(result);
    }
    let ratio = result.tail_bound / partial.abs();
    let suggested = if ratio.is_finite() {
        xi * (ratio / control.tail_tolerance).powf(1.0 / (p - d))
    } else {
        f64::INFINITY
    };
    Err(Error::Truncation {
        xi_max: xi,
        tail_ratio: ratio,
        suggested,
    })
}
