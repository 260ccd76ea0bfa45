//! Observation lattices bQ(Λ + c) with Λ = AZ^d, their duals, and point
//! enumeration in boxes, balls and spherical shells.
//!
//! Ball enumeration follows Fincke–Pohst: with R the upper Cholesky factor
//! of the Gram matrix MᵀM, the squared distance of the point Mz + o from a
//! center splits into a sum of squares that can be bounded coordinate by
//! coordinate, last coordinate first. The innermost
//! coordinate then ranges over an interval, so whole rows of points can be
//! counted without being visited.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add, check_dim, norm, scale, sub, Matrix, Vector};

/// Λ = AZ^d with det A > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    basis: Matrix,
}

impl Lattice {
    pub fn new(basis: Matrix) -> Result<Self> {
        let det = basis.det();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::domain(
                "lattice.matrix",
                format!("basis matrix must have det > 0, got {det}"),
            ));
        }
        Ok(Lattice { basis })
    }

    /// Basis from `dim*dim` row-major entries; the columns are the basis vectors.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        Lattice::new(Matrix::from_row_major(dim, entries)?)
    }

    pub fn integer(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Lattice::new(Matrix::identity(dim))
    }

    /// s·Z^d.
    pub fn scaled_integer(dim: usize, s: f64) -> Result<Self> {
        check_dim(dim)?;
        Lattice::new(Matrix::identity(dim).scaled(s))
    }

    /// Hexagonal lattice with unit nearest-neighbour distance.
    pub fn hexagonal() -> Self {
        Lattice::from_row_major(2, &[1.0, 0.5, 0.0, 0.75f64.sqrt()])
            .expect("hexagonal basis is valid")
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// c_Λ = det A, the volume of the fundamental cell.
    pub fn covolume(&self) -> f64 {
        self.basis.det()
    }

    /// Λ* = A^{-T} Z^d, so that ⟨ξ, z⟩ ∈ Z for ξ ∈ Λ*, z ∈ Λ.
    pub fn dual(&self) -> Lattice {
        let inv = self.basis.inverse().expect("basis is invertible");
        Lattice {
            basis: inv.transpose(),
        }
    }

    /// Diameter of the fundamental cell A[0,1)^d.
    pub fn cell_diameter(&self) -> f64 {
        let d = self.dim();
        let mut best: f64 = 0.0;
        for mask in 0..(1u32 << d) {
            let mut s = [0.0; 3];
            for (i, si) in s.iter_mut().enumerate().take(d) {
                *si = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
            }
            best = best.max(norm(&self.basis.mul_vec(&s)));
        }
        best
    }

    /// Reduces c into the fundamental cell A[0,1)^d.
    pub fn reduce(&self, c: &Vector) -> Vector {
        let inv = self.basis.inverse().expect("basis is invertible");
        let mut u = inv.mul_vec(c);
        for v in u.iter_mut().take(self.dim()) {
            *v -= v.floor();
            if *v >= 1.0 {
                *v = 0.0;
            }
        }
        self.basis.mul_vec(&u)
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        let walker = BallWalker::new(&self.basis, [0.0; 3]);
        // the longest basis column bounds the shortest vector from above
        let mut bound: f64 = 0.0;
        for j in 0..self.dim() {
            bound = bound.max(norm(&self.basis.column(j)));
        }
        let mut best = f64::INFINITY;
        walker.walk(&[0.0; 3], 0.0, bound * (1.0 + 1e-12), |p, _| {
            let n = norm(p);
            if n > 0.0 {
                best = best.min(n);
            }
        });
        best
    }
}

/// A group of dual lattice vectors of (numerically) equal length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub norm: f64,
    pub multiplicity: usize,
}

/// Shell grouping tolerance on |ξ|.
pub const SHELL_TOLERANCE: f64 = 1e-9;

/// Groups squared norms into shells, each point standing for `weight` points.
fn group_norms(mut squares: Vec<f64>, weight: usize) -> Vec<Shell> {
    squares.sort_unstable_by(|a, b| a.total_cmp(b));
    let mut shells: Vec<Shell> = Vec::new();
    for n in squares.into_iter().map(f64::sqrt) {
        match shells.last_mut() {
            Some(s) if n - s.norm <= SHELL_TOLERANCE => s.multiplicity += weight,
            _ => shells.push(Shell {
                norm: n,
                multiplicity: weight,
            }),
        }
    }
    shells
}

/// Whether the last nonzero coordinate is positive; picks one of ±z.
fn upper_half(z: &[i64; 3]) -> bool {
    z.iter().rev().find(|&&k| k != 0).is_some_and(|&k| k > 0)
}

/// Shells of Λ*\{0} with lo < |ξ| ≤ hi, sorted by norm.
///
/// Only one of each pair ±ξ is visited.
pub fn dual_shells_between(lattice: &Lattice, lo: f64, hi: f64) -> Vec<Shell> {
    let dual = lattice.dual();
    let walker = BallWalker::new(dual.basis(), [0.0; 3]);
    let mut squares = Vec::new();
    let slack = 1e-9 * hi.max(1.0);
    walker.walk(&[0.0; 3], (lo - slack).max(0.0), hi + slack, |p, z| {
        if upper_half(z) {
            let n2 = p.iter().map(|x| x * x).sum::<f64>();
            let n = n2.sqrt();
            if n > lo && n <= hi {
                squares.push(n2);
            }
        }
    });
    group_norms(squares, 2)
}

/// Shells of Λ*\{0} with |ξ| ≤ cutoff.
pub fn dual_shells(lattice: &Lattice, cutoff: f64) -> Vec<Shell> {
    let shells = dual_shells_between(lattice, 0.0, cutoff);
    if shells.is_empty() {
        log::warn!(
            "dual-shell cutoff {cutoff} is below the shortest dual vector; no shells returned"
        );
    }
    shells
}

/// A stationary lattice realization bQ(Λ + c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePlacement {
    lattice: Lattice,
    resolution: f64,
    translation: Vector,
    rotation: Matrix,
}

impl LatticePlacement {
    pub fn new(
        lattice: Lattice,
        resolution: f64,
        translation: &Vector,
        rotation: Matrix,
    ) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::domain(
                "b",
                format!("resolution must be finite and > 0, got {resolution}"),
            ));
        }
        if rotation.dim() != lattice.dim() {
            return Err(Error::DimensionMismatch {
                expected: lattice.dim(),
                found: rotation.dim(),
            });
        }
        if rotation.orthogonality_defect() > 1e-12 || (rotation.det() - 1.0).abs() > 1e-12 {
            return Err(Error::domain(
                "rotation",
                "rotation must be orthogonal with det +1",
            ));
        }
        Ok(LatticePlacement {
            lattice,
            resolution,
            translation: lattice.reduce(translation),
            rotation,
        })
    }

    /// c = 0, Q = I.
    pub fn aligned(lattice: Lattice, resolution: f64) -> Result<Self> {
        let dim = lattice.dim();
        LatticePlacement::new(lattice, resolution, &[0.0; 3], Matrix::identity(dim))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn translation(&self) -> Vector {
        self.translation
    }

    pub fn rotation(&self) -> &Matrix {
        &self.rotation
    }

    /// M = bQA: lattice points are M z + o.
    pub fn generator(&self) -> Matrix {
        self.rotation
            .mul(self.lattice.basis())
            .scaled(self.resolution)
    }

    /// o = bQc.
    pub fn offset(&self) -> Vector {
        scale(self.resolution, &self.rotation.mul_vec(&self.translation))
    }

    /// Volume per lattice point, b^d c_Λ.
    pub fn cell_volume(&self) -> f64 {
        self.resolution.powi(self.lattice.dim() as i32) * self.lattice.covolume()
    }

    /// The points of bQ(Λ + c) in the half-open box [lo, hi).
    pub fn points_in_box(&self, lo: &Vector, hi: &Vector) -> Vec<Vector> {
        let d = self.lattice.dim();
        if (0..d).any(|i| !(hi[i] > lo[i])) {
            return Vec::new();
        }
        let m = self.generator();
        let inv = m.inverse().expect("generator is invertible");
        let o = self.offset();
        let mut zlo = [0i64; 3];
        let mut zhi = [0i64; 3];
        for i in 0..d {
            zlo[i] = i64::MAX;
            zhi[i] = i64::MIN;
        }
        for mask in 0..(1u32 << d) {
            let mut corner = [0.0; 3];
            for i in 0..d {
                corner[i] = if mask & (1 << i) != 0 { hi[i] } else { lo[i] };
            }
            let z = inv.mul_vec(&sub(&corner, &o));
            for i in 0..d {
                zlo[i] = zlo[i].min(z[i].floor() as i64 - 1);
                zhi[i] = zhi[i].max(z[i].ceil() as i64 + 1);
            }
        }
        let mut out = Vec::new();
        let inside = |p: &Vector| (0..d).all(|i| p[i] >= lo[i] && p[i] < hi[i]);
        let z2 = if d == 3 { (zlo[2], zhi[2]) } else { (0, 0) };
        for k in z2.0..=z2.1 {
            for j in zlo[1]..=zhi[1] {
                for i in zlo[0]..=zhi[0] {
                    let p = add(&m.mul_vec(&[i as f64, j as f64, k as f64]), &o);
                    if inside(&p) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    fn walker(&self) -> BallWalker {
        BallWalker::new(&self.generator(), self.offset())
    }

    /// Number of lattice points with |p − center| ≤ radius (or < radius when
    /// `closed` is false), computed row by row without visiting points.
    pub fn count_in_ball(&self, center: &Vector, radius: f64, closed: bool) -> u64 {
        self.walker().count(center, radius, closed)
    }

    /// Visits every lattice point p with r_in ≤ |p − center| ≤ r_out (points
    /// strictly inside r_in are skipped row-wise). Returns the number of
    /// skipped inner points.
    pub fn visit_shell<F: FnMut(&Vector)>(
        &self,
        center: &Vector,
        r_in: f64,
        r_out: f64,
        mut visit: F,
    ) -> u64 {
        self.walker().walk(center, r_in, r_out, |p, _| visit(p))
    }
}

/// Draws c uniform on the fundamental cell and Q Haar-uniform on SO(d).
pub fn random_placement<R: Rng + ?Sized>(
    lattice: &Lattice,
    resolution: f64,
    rng: &mut R,
) -> Result<LatticePlacement> {
    let d = lattice.dim();
    let mut u = [0.0; 3];
    for v in u.iter_mut().take(d) {
        *v = rng.random::<f64>();
    }
    let c = lattice.basis().mul_vec(&u);
    let q = random_rotation(d, rng);
    LatticePlacement::new(*lattice, resolution, &c, q)
}

/// Haar-uniform rotation: uniform angle in 2-D, uniform unit quaternion
/// (Shoemake) in 3-D.
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    if dim == 2 {
        let t = 2.0 * PI * rng.random::<f64>();
        let (s, c) = t.sin_cos();
        return Matrix::from_row_major(2, &[c, -s, s, c]).expect("2x2");
    }
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (x, y) = (a * (2.0 * PI * u2).sin(), a * (2.0 * PI * u2).cos());
    let (z, w) = (b * (2.0 * PI * u3).sin(), b * (2.0 * PI * u3).cos());
    quaternion_matrix(w, x, y, z)
}

fn quaternion_matrix(w: f64, x: f64, y: f64, z: f64) -> Matrix {
    Matrix::from_row_major(
        3,
        &[
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    )
    .expect("3x3")
}

/// Fincke–Pohst walker over the points M z + o.
struct BallWalker {
    gen: Matrix,
    inv: Matrix,
    chol: Matrix,
    offset: Vector,
}

impl BallWalker {
    fn new(gen: &Matrix, offset: Vector) -> Self {
        BallWalker {
            gen: *gen,
            inv: gen.inverse().expect("generator is invertible"),
            chol: gen.gram_cholesky_upper(),
            offset,
        }
    }

    fn dim(&self) -> usize {
        self.gen.dim()
    }

    /// Real coordinates of the center in the lattice basis.
    fn center_coords(&self, center: &Vector) -> Vector {
        self.inv.mul_vec(&sub(center, &self.offset))
    }

    /// Iterates over the outer coordinates (all but the first), calling
    /// `row(z_rest, c, w_sq)` where the first coordinate must satisfy
    /// (R00 (z0 − c))² ≤ w_sq.
    fn rows<F: FnMut(&[i64; 3], f64, f64)>(&self, center: &Vector, radius: f64, mut row: F) {
        let z0 = self.center_coords(center);
        let mut z = [0i64; 3];
        self.rows_rec(&mut z, self.dim() - 1, 0.0, &z0, radius * radius, &mut row);
    }

    fn rows_rec<F: FnMut(&[i64; 3], f64, f64)>(
        &self,
        z: &mut [i64; 3],
        i: usize,
        partial: f64,
        z0: &Vector,
        r2: f64,
        row: &mut F,
    ) {
        let d = self.dim();
        let r = &self.chol;
        let mut s = 0.0;
        for j in (i + 1)..d {
            s += r.get(i, j) * (z[j] as f64 - z0[j]);
        }
        let rii = r.get(i, i);
        let c = z0[i] - s / rii;
        let w_sq = r2 - partial;
        if w_sq < 0.0 {
            return;
        }
        if i == 0 {
            row(z, c, w_sq);
            return;
        }
        let w = w_sq.sqrt() / rii;
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        for k in lo..=hi {
            z[i] = k;
            let t = rii * (k as f64 - c);
            self.rows_rec(z, i - 1, partial + t * t, z0, r2, row);
        }
    }

    fn count(&self, center: &Vector, radius: f64, closed: bool) -> u64 {
        if !(radius > 0.0) {
            return 0;
        }
        let r00 = self.chol.get(0, 0);
        let mut total = 0u64;
        self.rows(center, radius, |_, c, w_sq| {
            let w = w_sq.sqrt() / r00;
            let (lo, hi) = if closed {
                ((c - w).ceil() as i64, (c + w).floor() as i64)
            } else {
                ((c - w).floor() as i64 + 1, (c + w).ceil() as i64 - 1)
            };
            if hi >= lo {
                total += (hi - lo + 1) as u64;
            }
        });
        total
    }

    /// Visits the points with r_in ≤ |p − center| ≤ r_out; returns how many
    /// points with |p − center| < r_in were skipped.
    fn walk<F: FnMut(&Vector, &[i64; 3])>(
        &self,
        center: &Vector,
        r_in: f64,
        r_out: f64,
        mut visit: F,
    ) -> u64 {
        if !(r_out >= 0.0) {
            return 0;
        }
        let r00 = self.chol.get(0, 0);
        let rin2 = r_in.max(0.0).powi(2);
        let rout2 = r_out * r_out;
        let mut skipped = 0u64;
        let gen = self.gen;
        let offset = self.offset;
        self.rows(center, r_out, |zr, c, w_sq| {
            let w = w_sq.sqrt() / r00;
            let lo = (c - w).ceil() as i64;
            let hi = (c + w).floor() as i64;
            if hi < lo {
                return;
            }
            // inner open interval: squared distance < r_in²
            let partial = rout2 - w_sq;
            let inner = rin2 - partial;
            let (ilo, ihi) = if inner > 0.0 {
                let wi = inner.sqrt() / r00;
                (
                    ((c - wi).floor() as i64 + 1).max(lo),
                    ((c + wi).ceil() as i64 - 1).min(hi),
                )
            } else {
                (1, 0)
            };
            let mut z = *zr;
            let mut emit = |k: i64| {
                z[0] = k;
                let p = add(
                    &gen.mul_vec(&[z[0] as f64, z[1] as f64, z[2] as f64]),
                    &offset,
                );
                visit(&p, &z);
            };
            if ihi >= ilo {
                skipped += (ihi - ilo + 1) as u64;
                for k in lo..ilo {
                    emit(k);
                }
                for k in (ihi + 1)..=hi {
                    emit(k);
                }
            } else {
                for k in lo..=hi {
                    emit(k);
                }
            }
        });
        skipped
    }
}
