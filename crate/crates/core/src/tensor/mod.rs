//! Point-level multilinear algebra on `(g, C, K)`.
//!
//! The cubic form `C_ijk = g(K(e_i, e_j), e_k)` is the stored quantity; the
//! Amari-Chentsov tensor is always derived from it as `T = -2C`.

mod bracket;
mod cubic;
mod metric;

pub use bracket::{
    bracket, check_constant_curvature, constant_curvature_fit, sectional_k_curvature, yukawa_term,
    BracketSymmetryResiduals, BracketTensor, ConstantCurvatureFit, DEGENERATE_PLANE,
};
pub use cubic::{raise_index, CubicTensor, KOperator};
pub use metric::{Metric, SYMMETRY_TOLERANCE};

pub(crate) use cubic::permutations_of;
