//! Curvature jets at a point, random consistent jets and the operators 𝒪₁, 𝒪₂.

pub mod frame;
pub mod io;
pub mod point;
pub mod ops;
pub mod random;

pub use frame::{contract, FrameMap};
pub use io::{mat_json, AnyJets, JsonScalar};
pub use point::{DerivedQuantities, JetParts, PointJets};
pub use ops::{build_o1, build_o2, closed_o2_pn, kahler_o1, nabla0, MatOp};
pub use random::{random_jets, solve_with_free, LinearEq};
