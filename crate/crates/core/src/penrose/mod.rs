//! Plane-wave limits of Riemannian metrics.
//!
//! Pipeline: a semigeodesic Riemannian metric `dr² + g_ij(r,x) dx^i dx^j` is
//! embedded as the slice `t = 0` of `−dt² + ḡ`, rewritten in null coordinates
//! `x0 = (r+t)/√2`, `x1 = (r−t)/√2`, and rescaled into the family `h_ε`.
//! Its limit is the Rosen-form wave `2 dr dt + ḡ_ij(r) dx^i dx^j`, where
//! `ḡ(r)` is the spatial block on the axis `x = 0`.
//!
//! The Rosen wave is converted to Brinkmann form `2 dv du + H du² + Σ dx²`
//! with `H = A_kl(u) x^k x^l`. Internally `u` is the Rosen `r`. The frame is
//! `C = C₀ O`, where `C₀ = L^{-T}` for the Cholesky factor `ḡ = L Lᵀ` and `O`
//! solves `Ȯ = ½(Mᵀ − M) O`, `M = C₀ᵀ ḡ Ċ₀`. With `E = C⁻¹` the coordinate map is
//!
//! ```text
//! u = r,   x = E(r) y,   v = t − ½ yᵀ S y,   S = Ėᵀ E,
//! ```
//!
//! and `A = −(∂_u(ḡ Ċ))ᵀ C`, symmetrized. [`verify_brinkmann_isometry`] pulls
//! the Brinkmann metric back through this map and compares against the Rosen
//! components, so the signs here are checked rather than assumed.

mod chart;
mod classify;
mod frame;
mod hereditary;
mod obstruct;

use thiserror::Error;

use crate::expr::ExprError;
use crate::linalg::LinalgError;
use crate::tensor::TensorError;

pub use chart::{
    build_time_symmetric_product, family_limit, family_pullback, penrose_family, tilde_name, to_null_chart,
    AxisMetric, RosenProfile, penrose_limit_rosen,
};
pub use classify::{check_brinkmann_class, check_slice_curvature, BrinkmannClass, SliceReport};
pub use frame::{rosen_to_brinkmann, verify_brinkmann_isometry, BrinkmannProfile, FrameSolution, Grid, IsometryReport};
pub use hereditary::{hereditary_check, EinsteinHeredity, EpsilonCheck, HereditaryOptions, HereditaryReport};
pub use obstruct::{
    brinkmann_closed_form_curvature, brinkmann_metric_at_node, obstruction_report, ClosedFormCurvature, EinsteinComparison, Obstruction,
    ObstructionReport, Verdict,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PenroseError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("input metric must be riemannian")]
    NotRiemannian,
    #[error("unexpected chart shape: {0}")]
    Shape(String),
    #[error("coordinate name `{0}` is already used by the chart")]
    NameClash(String),
    #[error("eps must be positive, got {0}")]
    InvalidEps(f64),
    #[error("axis matrix not positive definite at {var}={at}")]
    NotPositiveDefinite { var: String, at: f64 },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("frame invariant `{which}` violated at node {node} (u={u}): {value:e}")]
    FrameInvariant { which: &'static str, node: usize, u: f64, value: f64 },
    #[error("u={0} is outside the grid")]
    OffGrid(f64),
    #[error("metric is not brinkmann (components depend on the first coordinate)")]
    NotBrinkmann,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
