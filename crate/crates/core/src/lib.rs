//! Numerical tensor calculus of statistical manifolds.
//!
//! A statistical structure at a point is a metric `g` together with a totally
//! symmetric cubic form `C`. From these the crate derives the operator `K`,
//! the bracket `[K,K]`, sectional K-curvature, the commutative product
//! `X∘Y = K(X,Y)` on the tangent space and its unit and idempotents. Charts
//! given by expressions supply `g` and `C` as fields, from which connections
//! and curvature tensors are computed; the `wdvv` module checks associativity
//! equations for Hessian potentials and for the BC_n trilogarithm prepotential.

pub mod error;
pub mod fields;
pub mod frobenius;
pub mod geometry;
pub mod linalg;
pub mod sampling;
pub mod special;
pub mod tensor;
pub mod wdvv;

pub use error::{Error, Result};
pub use fields::{ChartField, FdPolicy, ScalarExpr};
pub use tensor::{BracketTensor, CubicTensor, KOperator, Metric};
pub use wdvv::{BcnParams, Prepotential};
