//! Pointwise tensor calculus for coordinate metrics.
//!
//! Conventions:
//!
//! * `Rm(v,w,x,y) = g(∇_v∇_w x − ∇_w∇_v x − ∇_[v,w] x, y)`, stored as `rm[[i,j,k,l]]`.
//!   The round sphere has `Rm(∂_r,∂_θ,∂_θ,∂_r) > 0`.
//! * `Ric_jk = g^il Rm_ijkl`, `scalar = g^jk Ric_jk`.
//! * `gamma[[k,i,j]] = Γ^k_ij`.
//! * `cov_rm[[a,b,c,d,e]] = (∇_a Rm)_bcde`, `cov_ric[[a,b,c]] = (∇_a Ric)_bc`;
//!   the differentiation slot comes first.
//! * Weyl (n ≥ 3): `W = Rm − P ⧆ g` with Schouten tensor
//!   `P = (Ric − scalar/(2(n−1)) g) / (n−2)`.
//! * Kulkarni–Nomizu:
//!   `(P⧆Q)(v,w,x,y) = P(v,y)Q(w,x) + P(w,x)Q(v,y) − P(v,x)Q(w,y) − P(w,y)Q(v,x)`,
//!   so a space of constant curvature λ has `Rm = ½λ g⧆g`.

mod curvature;

use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use thiserror::Error;

use crate::expr::{Expr, ExprError, Point};
use crate::linalg::{LinalgError, Mat};

pub use curvature::{
    constant_curvature_residual, conformal_scaling_check, curvature_at, einstein_residual,
    kulkarni_nomizu, sectional_curvature, ConformalResiduals, CurvatureBundle, Depth,
    SymmetryResiduals,
};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("dimension {0} outside supported range {MIN_DIM}..={MAX_DIM}")]
    Dimension(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),
    #[error("component g[{row}][{col}] uses undeclared coordinate `{name}`")]
    UndeclaredCoordinate { row: usize, col: usize, name: String },
    #[error("point {point} does not match chart ({chart})")]
    PointMismatch { point: String, chart: String },
    #[error("metric is singular at {point}")]
    Singular { point: String },
    #[error("signature mismatch at {point}: expected {expected}, found {negative} negative eigenvalue(s)")]
    Signature { point: String, expected: Signature, negative: usize },
    #[error("degenerate plane: |v|^2|w|^2 - <v,w>^2 = {denominator:e}")]
    DegeneratePlane { denominator: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

impl Signature {
    pub fn negative_count(self) -> usize {
        match self {
            Signature::Riemannian => 0,
            Signature::Lorentzian => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Signature::Riemannian => "riemannian",
            Signature::Lorentzian => "lorentzian",
        }
    }

    pub fn from_name(s: &str) -> Option<Signature> {
        match s {
            "riemannian" => Some(Signature::Riemannian),
            "lorentzian" => Some(Signature::Lorentzian),
            _ => None,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense rank-`R` array over `n` values per index, row-major.
#[derive(Clone, PartialEq)]
pub struct Array<const R: usize> {
    n: usize,
    data: Vec<f64>,
}

impl<const R: usize> Array<R> {
    pub fn zeros(n: usize) -> Self {
        Array { n, data: vec![0.0; n.pow(R as u32)] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut([usize; R]) -> f64) -> Self {
        let mut a = Self::zeros(n);
        for flat in 0..a.data.len() {
            a.data[flat] = f(a.unflatten(flat));
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }

    fn unflatten(&self, mut flat: usize) -> [usize; R] {
        let mut idx = [0; R];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    /// All index tuples in storage order.
    pub fn indices(&self) -> impl Iterator<Item = [usize; R]> + '_ {
        (0..self.data.len()).map(|f| self.unflatten(f))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "array dimension mismatch");
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Index tuple and value of the largest absolute entry.
    pub fn argmax_abs(&self) -> ([usize; R], f64) {
        let (flat, v) = self
            .data
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, v)| if v.abs() > bv.abs() { (i, *v) } else { (bi, bv) });
        (self.unflatten(flat), v)
    }

    pub fn scale(&self, s: f64) -> Self {
        Array { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "array dimension mismatch");
        Array { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect() }
    }
}

impl<const R: usize> Index<[usize; R]> for Array<R> {
    type Output = f64;
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Array<R> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

impl<const R: usize> fmt::Debug for Array<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Array<{R}>(n={}, max_abs={:e})", self.n, self.max_abs())
    }
}

/// Values of the metric and its coordinate derivatives at one point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub g: Mat,
    /// `dg[[k,i,j]] = ∂_k g_ij`
    pub dg: Array<3>,
    /// `ddg[[k,l,i,j]] = ∂_k∂_l g_ij`
    pub ddg: Array<4>,
    /// `d3g[[a,k,l,i,j]] = ∂_a∂_k∂_l g_ij`, present when requested.
    pub d3g: Option<Array<5>>,
}

/// A metric on a coordinate chart: symbolic components plus a signature tag.
///
/// Only the lower triangle is read at construction, so the stored matrix is
/// symmetric by construction. Derivative tables are built on first use.
#[derive(Clone)]
pub struct MetricSpec {
    coords: Vec<String>,
    signature: Signature,
    g: Vec<Expr>,
    d1: OnceLock<Vec<Expr>>,
    d2: OnceLock<Vec<Expr>>,
    d3: OnceLock<Vec<Expr>>,
}

impl fmt::Debug for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        let rows: Vec<Vec<String>> =
            (0..n).map(|i| (0..=i).map(|j| self.component(i, j).to_string()).collect()).collect();
        f.debug_struct("MetricSpec")
            .field("coords", &self.coords)
            .field("signature", &self.signature)
            .field("lower", &rows)
            .finish()
    }
}

impl MetricSpec {
    /// `component(i, j)` is consulted for `j <= i` only.
    pub fn from_fn<S: AsRef<str>>(
        coords: &[S],
        signature: Signature,
        component: impl Fn(usize, usize) -> Expr,
    ) -> Result<Self, TensorError> {
        let coords: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        let n = coords.len();
        if !(MIN_DIM..=MAX_DIM).contains(&n) {
            return Err(TensorError::Dimension(n));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(TensorError::DuplicateCoordinate(c.clone()));
            }
        }
        let mut g = vec![Expr::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let e = component(i, j);
                if let Some(name) = e.variables().into_iter().find(|v| !coords.contains(v)) {
                    return Err(TensorError::UndeclaredCoordinate { row: i, col: j, name });
                }
                g[i * n + j] = e.clone();
                g[j * n + i] = e;
            }
        }
        Ok(MetricSpec {
            coords,
            signature,
            g,
            d1: OnceLock::new(),
            d2: OnceLock::new(),
            d3: OnceLock::new(),
        })
    }

    /// Rows may be full (`n` entries) or lower-triangular (`i + 1` entries).
    pub fn from_rows<S: AsRef<str>>(
        coords: &[S],
        signature: Signature,
        rows: &[Vec<Expr>],
    ) -> Result<Self, TensorError> {
        let n = coords.len();
        if rows.len() != n {
            return Err(TensorError::Shape(format!("{} rows for {} coordinates", rows.len(), n)));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n && r.len() != i + 1 {
                return Err(TensorError::Shape(format!("row {i} has {} entries", r.len())));
            }
        }
        Self::from_fn(coords, signature, |i, j| rows[i][j].clone())
    }

    pub fn diagonal<S: AsRef<str>>(
        coords: &[S],
        signature: Signature,
        diag: &[Expr],
    ) -> Result<Self, TensorError> {
        if diag.len() != coords.len() {
            return Err(TensorError::Shape(format!("{} diagonal entries for {} coordinates", diag.len(), coords.len())));
        }
        Self::from_fn(coords, signature, |i, j| if i == j { diag[i].clone() } else { Expr::zero() })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.g[i * self.dim() + j]
    }

    pub fn components(&self) -> Vec<Vec<Expr>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.component(i, j).clone()).collect()).collect()
    }

    pub fn with_signature(&self, signature: Signature) -> Self {
        let mut m = self.clone();
        m.signature = signature;
        m
    }

    /// The metric `factor · g` (derivative caches are rebuilt lazily).
    pub fn scaled(&self, factor: f64) -> Self {
        MetricSpec::from_fn(&self.coords, self.signature, |i, j| {
            Expr::mul(Expr::num(factor), self.component(i, j).clone())
        })
        .expect("scaling preserves validity")
    }

    /// Pulls the metric back along `x^i = map[i](y)` onto the chart `new_coords`.
    pub fn pullback<S: AsRef<str>>(
        &self,
        new_coords: &[S],
        map: &[Expr],
        signature: Signature,
    ) -> Result<MetricSpec, TensorError> {
        let n = self.dim();
        if map.len() != n {
            return Err(TensorError::Shape(format!("map has {} components for {n} coordinates", map.len())));
        }
        let names: Vec<&str> = new_coords.iter().map(|c| c.as_ref()).collect();
        let jac: Vec<Vec<Expr>> = map
            .iter()
            .map(|x| names.iter().map(|y| x.differentiate(y)).collect())
            .collect();
        let sub = |e: &Expr| {
            e.substitute(&|name| self.coord_index(name).map(|k| map[k].clone()))
        };
        let g: Vec<Expr> = self.g.iter().map(sub).collect();
        MetricSpec::from_fn(new_coords, signature, |a, b| {
            let mut acc = Expr::zero();
            for i in 0..n {
                for j in 0..n {
                    let term = Expr::mul(
                        Expr::mul(jac[i][a].clone(), jac[j][b].clone()),
                        g[i * n + j].clone(),
                    );
                    acc = Expr::add(acc, term);
                }
            }
            acc
        })
    }

    fn d1_table(&self) -> &[Expr] {
        self.d1.get_or_init(|| {
            let n = self.dim();
            let mut t = vec![Expr::zero(); n * n * n];
            for k in 0..n {
                for i in 0..n {
                    for j in 0..=i {
                        let d = self.component(i, j).differentiate(&self.coords[k]);
                        t[(k * n + i) * n + j] = d.clone();
                        t[(k * n + j) * n + i] = d;
                    }
                }
            }
            t
        })
    }

    fn d2_table(&self) -> &[Expr] {
        self.d2.get_or_init(|| {
            let n = self.dim();
            let d1 = self.d1_table();
            let mut t = vec![Expr::zero(); n.pow(4)];
            for k in 0..n {
                for l in 0..=k {
                    for i in 0..n {
                        for j in 0..=i {
                            let d = d1[(l * n + i) * n + j].differentiate(&self.coords[k]);
                            for (a, b) in [(k, l), (l, k)] {
                                t[((a * n + b) * n + i) * n + j] = d.clone();
                                t[((a * n + b) * n + j) * n + i] = d.clone();
                            }
                        }
                    }
                }
            }
            t
        })
    }

    fn d3_table(&self) -> &[Expr] {
        self.d3.get_or_init(|| {
            let n = self.dim();
            let d2 = self.d2_table();
            let mut t = vec![Expr::zero(); n.pow(5)];
            for a in 0..n {
                for k in 0..=a {
                    for l in 0..=k {
                        for i in 0..n {
                            for j in 0..=i {
                                let d = d2[((k * n + l) * n + i) * n + j].differentiate(&self.coords[a]);
                                for (x, y, z) in [(a, k, l), (a, l, k), (k, a, l), (k, l, a), (l, a, k), (l, k, a)] {
                                    t[(((x * n + y) * n + z) * n + i) * n + j] = d.clone();
                                    t[(((x * n + y) * n + z) * n + j) * n + i] = d.clone();
                                }
                            }
                        }
                    }
                }
            }
            t
        })
    }

    /// Coordinate values of `p` in chart order; `p` must name exactly this chart.
    pub fn values(&self, p: &Point) -> Result<Vec<f64>, TensorError> {
        if !p.matches_chart(&self.coords) {
            return Err(TensorError::PointMismatch { point: point_string(p), chart: self.coords.join(",") });
        }
        Ok(p.values_for(&self.coords)?)
    }

    fn eval_table(&self, table: &[Expr], vals: &[f64]) -> Result<Vec<f64>, TensorError> {
        let lookup = |name: &str| self.coord_index(name).map(|i| vals[i]);
        let mut out = Vec::with_capacity(table.len());
        for e in table {
            out.push(match e.as_num() {
                Some(v) => v,
                None => e.eval_with(&lookup)?,
            });
        }
        Ok(out)
    }

    /// Metric matrix at `p`, checked for invertibility and signature.
    pub fn eval_metric(&self, p: &Point) -> Result<Mat, TensorError> {
        let vals = self.values(p)?;
        let g = self.eval_table(&self.g, &vals)?;
        let n = self.dim();
        let g = Mat::from_fn(n, |i, j| g[i * n + j]);
        self.check_nondegenerate(&g, p)?;
        Ok(g)
    }

    fn check_nondegenerate(&self, g: &Mat, p: &Point) -> Result<(), TensorError> {
        let (eigs, _) = g.symmetric_eigen();
        let scale = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if !scale.is_finite() || eigs.iter().any(|e| e.abs() <= 1e-12 * scale) || scale == 0.0 {
            return Err(TensorError::Singular { point: point_string(p) });
        }
        let negative = eigs.iter().filter(|e| **e < 0.0).count();
        if negative != self.signature.negative_count() {
            return Err(TensorError::Signature { point: point_string(p), expected: self.signature, negative });
        }
        Ok(())
    }

    /// Metric values and derivatives up to second (or third) order at `p`.
    pub fn jet(&self, p: &Point, third: bool) -> Result<Jet, TensorError> {
        let n = self.dim();
        let g = self.eval_metric(p)?;
        let vals = self.values(p)?;
        let dg = self.eval_table(self.d1_table(), &vals)?;
        let ddg = self.eval_table(self.d2_table(), &vals)?;
        let d3g = if third {
            Some(Array { n, data: self.eval_table(self.d3_table(), &vals)? })
        } else {
            None
        };
        Ok(Jet { g, dg: Array { n, data: dg }, ddg: Array { n, data: ddg }, d3g })
    }
}

pub(crate) fn point_string(p: &Point) -> String {
    let parts: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(s: &str, coords: &[&str]) -> Expr {
        parse(s, coords).unwrap()
    }

    #[test]
    fn lower_triangle_is_authoritative() {
        let c = ["x", "y"];
        let rows = vec![vec![e("1", &c), e("99", &c)], vec![e("x", &c), e("2", &c)]];
        let m = MetricSpec::from_rows(&c, Signature::Riemannian, &rows).unwrap();
        assert_eq!(m.component(0, 1).to_string(), "x");
    }

    #[test]
    fn rejects_bad_charts() {
        let c = ["x", "x"];
        assert!(matches!(
            MetricSpec::diagonal(&c, Signature::Riemannian, &[Expr::one(), Expr::one()]),
            Err(TensorError::DuplicateCoordinate(_))
        ));
        assert!(matches!(
            MetricSpec::diagonal(&["x"], Signature::Riemannian, &[Expr::one()]),
            Err(TensorError::Dimension(1))
        ));
        let r = MetricSpec::diagonal(&["x", "y"], Signature::Riemannian, &[Expr::one(), Expr::var("z")]);
        assert!(matches!(r, Err(TensorError::UndeclaredCoordinate { row: 1, col: 1, .. })));
    }

    #[test]
    fn signature_and_singularity_are_hard_errors() {
        let c = ["t", "x"];
        let m = MetricSpec::diagonal(&c, Signature::Riemannian, &[e("-1", &c), e("1", &c)]).unwrap();
        let p = Point::from_chart(&c, &[0.0, 0.0]);
        assert!(matches!(m.eval_metric(&p), Err(TensorError::Signature { negative: 1, .. })));
        assert!(m.with_signature(Signature::Lorentzian).eval_metric(&p).is_ok());
        let s = MetricSpec::diagonal(&c, Signature::Riemannian, &[e("x", &c), e("1", &c)]).unwrap();
        assert!(matches!(s.eval_metric(&p), Err(TensorError::Singular { .. })));
    }

    #[test]
    fn point_must_match_chart() {
        let c = ["x", "y"];
        let m = MetricSpec::diagonal(&c, Signature::Riemannian, &[Expr::one(), Expr::one()]).unwrap();
        let p = Point::new().with("x", 0.0);
        assert!(matches!(m.eval_metric(&p), Err(TensorError::PointMismatch { .. })));
        let p = Point::new().with("x", 0.0).with("y", 0.0).with("z", 1.0);
        assert!(matches!(m.eval_metric(&p), Err(TensorError::PointMismatch { .. })));
    }

    #[test]
    fn jet_tables_are_symmetric_and_exact() {
        let c = ["x", "y"];
        let m = MetricSpec::from_rows(
            &c,
            Signature::Riemannian,
            &[vec![e("2 + sin(x*y)", &c)], vec![e("x*y^2/10", &c), e("exp(x) + y^2", &c)]],
        )
        .unwrap();
        let (x, y) = (0.3f64, -0.7f64);
        let j = m.jet(&Point::from_chart(&c, &[x, y]), true).unwrap();
        let d3 = j.d3g.unwrap();
        for (a, b, cc) in [(0, 1, 1), (1, 0, 1), (1, 1, 0)] {
            assert_eq!(d3[[a, b, cc, 0, 0]], d3[[0, 1, 1, 0, 0]]);
        }
        // ∂y g_01 = x y / 5
        assert!((j.dg[[1, 0, 1]] - x * y / 5.0).abs() < 1e-15);
        assert_eq!(j.dg[[1, 0, 1]], j.dg[[1, 1, 0]]);
        // ∂x∂x g_11 = e^x
        assert!((j.ddg[[0, 0, 1, 1]] - x.exp()).abs() < 1e-15);
    }

    #[test]
    fn array_indexing_round_trips() {
        let a = Array::<3>::from_fn(3, |[i, j, k]| (100 * i + 10 * j + k) as f64);
        assert_eq!(a[[2, 0, 1]], 201.0);
        assert_eq!(a.indices().nth(5), Some([0, 1, 2]));
        assert_eq!(a.argmax_abs(), ([2, 2, 2], 222.0));
    }

    #[test]
    fn pullback_of_polar_coordinates() {
        let flat = MetricSpec::diagonal(&["x", "y"], Signature::Riemannian, &[Expr::one(), Expr::one()]).unwrap();
        let c = ["r", "th"];
        let map = [e("r*cos(th)", &c), e("r*sin(th)", &c)];
        let polar = flat.pullback(&c, &map, Signature::Riemannian).unwrap();
        let p = Point::from_chart(&c, &[1.7, 0.4]);
        let g = polar.eval_metric(&p).unwrap();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(g[(0, 1)].abs() < 1e-14);
        assert!((g[(1, 1)] - 1.7 * 1.7).abs() < 1e-14);
    }
}
