//! Fixed-capacity vectors and matrices for d ∈ {2, 3}.
//!
//! Entries beyond the active dimension are kept at zero so that dot products
//! and norms can always run over all three slots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = [f64; 3];

pub const MAX_DIM: usize = 3;

pub fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::domain(
            "dim",
            format!("supported dimensions are 2 and 3, got {dim}"),
        ))
    }
}

/// Surface area ω_d of the unit sphere S^{d-1} in R^d.
pub fn unit_sphere_area(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        d => {
            // ω_d = 2π ω_{d-2} / (d-2)
            2.0 * PI * unit_sphere_area(d - 2) / (d - 2) as f64
        }
    }
}

/// Builds a vector from a slice of length `dim`.
pub fn vector(values: &[f64]) -> Vector {
    let mut v = [0.0; 3];
    v[..values.len()].copy_from_slice(values);
    v
}

#[inline]
pub fn dot(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vector) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &Vector, b: &Vector) -> Vector {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Vector, b: &Vector) -> Vector {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(s: f64, a: &Vector) -> Vector {
    [s * a[0], s * a[1], s * a[2]]
}

/// Square matrix of size `dim` stored in a 3×3 array (row-major).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    m: [[f64; 3]; 3],
}

impl Matrix {
    pub fn identity(dim: usize) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate().take(dim) {
            row[i] = 1.0;
        }
        Matrix { dim, m }
    }

    /// Builds a matrix from `dim*dim` row-major entries.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::domain(
                "lattice.matrix",
                format!(
                    "expected {} entries for d={dim}, got {}",
                    dim * dim,
                    entries.len()
                ),
            ));
        }
        let mut m = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                m[i][j] = entries[i * dim + j];
            }
        }
        Ok(Matrix { dim, m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            out.extend_from_slice(&self.m[i][..self.dim]);
        }
        out
    }

    pub fn column(&self, j: usize) -> Vector {
        [self.m[0][j], self.m[1][j], self.m[2][j]]
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        match self.dim {
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            _ => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in self.m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[j][i] = *v;
            }
        }
        Matrix {
            dim: self.dim,
            m: t,
        }
    }

    /// Inverse by the adjugate; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.m;
        let mut inv = [[0.0; 3]; 3];
        match self.dim {
            2 => {
                inv[0][0] = m[1][1] / det;
                inv[0][1] = -m[0][1] / det;
                inv[1][0] = -m[1][0] / det;
                inv[1][1] = m[0][0] / det;
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                        let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                        inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
                    }
                }
            }
        }
        Some(Matrix {
            dim: self.dim,
            m: inv,
        })
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vector) -> Vector {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let mut p = [[0.0; 3]; 3];
        for (i, row) in p.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Matrix {
            dim: self.dim,
            m: p,
        }
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// Frobenius norm of `selfᵀ·self − I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.transpose().mul(self);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (g.m[i][j] - target).powi(2);
            }
        }
        acc.sqrt()
    }

    /// Upper-triangular `R` with `selfᵀ·self = Rᵀ·R` (Cholesky of the Gram
    /// matrix). Requires a nonsingular matrix.
    pub fn gram_cholesky_upper(&self) -> Matrix {
        let d = self.dim;
        let g = self.transpose().mul(self);
        let mut r = [[0.0; 3]; 3];
        for i in 0..d {
            for j in i..d {
                let mut s = g.m[i][j];
                for k in 0..i {
                    s -= r[k][i] * r[k][j];
                }
                if i == j {
                    r[i][i] = s.max(0.0).sqrt();
                } else {
                    r[i][j] = s / r[i][i];
                }
            }
        }
        Matrix { dim: d, m: r }
    }
}
