//! Numerical laboratory for Bergman kernels of magnetic Laplacians.
//!
//! - [`torus`] and [`spectral`]: grid Laplacians on flat tori, bound-state
//!   clusters, Bergman fields and density-of-states moments.
//! - [`theta`] and [`cp1`]: exact section bases on the torus and on ℂP¹.
//! - [`fit`]: least-squares fits in powers of 1/p and decay exponents.
//! - [`embed`]: Kodaira-map pullbacks, peak sections and near-diagonal checks.

pub mod cache;
pub mod cp1;
pub mod csv;
pub mod embed;
pub mod error;
pub mod fit;
pub mod lanczos;
pub mod sparse;
pub mod spectral;
pub mod theta;
pub mod torus;
pub mod tridiag;

pub use error::{Result, SpecError};
pub use lanczos::{dense_spectrum, low_spectrum, Eigenpairs, HermitianOperator, LanczosOptions};
pub use spectral::{bergman_fields, dos_moments, gap_and_dimension, solve_torus, DosMoment, GapReport, SpectralResult};
pub use torus::{assemble_torus, default_grid, Gauge, TorusSpec};
