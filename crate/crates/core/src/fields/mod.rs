//! Expression-defined fields on charts and their numerical derivatives.

mod chart;
pub mod expr;
mod fd;
mod fisher;

pub use chart::{upper_pairs, upper_triples, ChartField, ChartJet, ChartKind};
pub use expr::ScalarExpr;
pub use fd::{derive_fd, partial, FdPolicy};
pub use fisher::{fisher_finite_family, probabilities, NORMALIZATION_TOLERANCE};

pub(crate) use chart::Derivatives;
