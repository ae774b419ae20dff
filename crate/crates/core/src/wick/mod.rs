//! Exact calculus on the Bargmann–Fock model: ladder algebra, normal forms,
//! projections, resolvents and kernel evaluation.

pub mod diffop;
pub mod kernel;
pub mod lambda;
pub mod model;

pub use diffop::{l0, normal_order, DiffOp, Gen};
pub use kernel::{
    compose, from_normal, inv_l0_perp, pn_value, project_n, to_normal, KernelPoly, NormalKernel,
};
pub use lambda::{residue_at_zero, resolvent, RationalLambda, Series};
pub use model::{model_spectrum, ModelSpec, SpectrumLevel};
