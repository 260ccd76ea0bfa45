//! Grey-value surface-area estimators on random lattices: the estimator
//! itself, its exact Fourier-side variance, and its asymptotic variance.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod estimator;
pub mod lattice;
pub mod linalg;
pub mod phantom;
pub mod psf;
pub mod quadrature;
pub mod solve;
pub mod spectral;
pub mod stats;
pub mod variance;

pub use error::{Error, Result};
pub use estimator::{EstimateResult, SurfaceEstimator, WeightFunction, WeightKind, Window};
pub use lattice::{Lattice, LatticePlacement, Shell};
pub use phantom::{Phantom, PhantomKind};
pub use psf::{HalfspaceProfile, ProfileGrid, Psf, PsfKind};
pub use spectral::Regime;
pub use variance::{LatticeSum, RadiusDensity, SumControl, VarianceReport, VolumeKind};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
