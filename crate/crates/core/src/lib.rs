//! Exact computation of Bergman kernel expansion coefficients for the
//! renormalized Bochner-Laplacian.
//!
//! - [`wick`]: ladder algebra and kernel calculus on the Bargmann–Fock model.
//! - [`jets`]: curvature jets at a point and the operators 𝒪₁, 𝒪₂.
//! - [`expansion`]: residue extraction of F_{q,r} and the coefficients b_{q,r}.

pub mod error;
pub mod expansion;
pub mod jets;
pub mod poly;
pub mod scalar;
pub mod wick;

pub use error::{Error, Result};
