//! Curvature of coordinate metrics, Penrose plane-wave limits and Wick rotation.
//!
//! Metrics are given by symbolic component expressions ([`expr::Expr`]); all
//! derivatives needed for Christoffel symbols, curvature and covariant
//! derivatives of curvature are taken exactly and then evaluated pointwise.

// Index loops read closer to the tensor formulas; `!(a <= b)` is used on
// purpose so that NaN falls on the failing side.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod linalg;
pub mod penrose;
pub mod sampling;
pub mod tensor;
pub mod tol;
pub mod wick;

pub use expr::{parse, Expr, ExprError, Point};
pub use sampling::Domain;
