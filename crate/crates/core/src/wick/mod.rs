//! Wick rotation along a unit closed vector field.
//!
//! For a Riemannian `g` and a unit field `T` the Lorentzian partner is
//! `g_L = g − 2 T♭⊗T♭`, and conversely `g = g_L + 2 T♭_L⊗T♭_L` with
//! `T♭_L = g_L(T, ·) = −T♭`. When `T♭` is closed, `∇T♭` (taken with `g`) is
//! symmetric and the curvatures are related by
//!
//! ```text
//! Rm_L = Rm + ∇T♭ ⧆ ∇T♭.
//! ```
//!
//! So `g_L` has constant curvature `λ` exactly when
//! `Rm = ½λ g⧆g − 2λ g⧆(T♭⊗T♭) − ∇T♭⧆∇T♭`. The checks here evaluate these
//! identities, the Bochner relation `T(div T) = −Ric(T,T) − Σλ_i²` and the
//! sectional curvatures they imply, at seeded sample points.

use thiserror::Error;

use crate::expr::{Expr, ExprError, Point};
use crate::linalg::{LinalgError, Mat};
use crate::sampling::{par_map, Domain};
use crate::tensor::{
    constant_curvature_residual, curvature_at, kulkarni_nomizu, CurvatureBundle, Depth, MetricSpec, Signature,
    TensorError,
};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WickError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("vector field has {field} components but the metric has dimension {metric}")]
    Dimension { field: usize, metric: usize },
    #[error("expected a {expected} metric")]
    Signature { expected: Signature },
    #[error("covariant derivative of the 1-form is not symmetric at {point} (asymmetry {asymmetry:e}); the field is not closed")]
    NotClosed { point: String, asymmetry: f64 },
    #[error("surface identities need dimension 2, got {0}")]
    NotSurface(usize),
    #[error("field does not span a direction at {point}")]
    DegenerateFrame { point: String },
}

/// Contravariant vector field in the chart of its metric.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldSpec {
    name: String,
    components: Vec<Expr>,
}

impl VectorFieldSpec {
    pub fn new(name: &str, components: Vec<Expr>) -> Self {
        VectorFieldSpec { name: name.to_string(), components }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, p: &Point) -> Result<Vec<f64>, WickError> {
        self.components.iter().map(|e| Ok(e.eval(p)?)).collect()
    }

    fn check(&self, g: &MetricSpec) -> Result<(), WickError> {
        if self.dim() != g.dim() {
            return Err(WickError::Dimension { field: self.dim(), metric: g.dim() });
        }
        Ok(())
    }
}

/// `T♭_i = g_ij T^j` as expressions.
pub fn flat_form(g: &MetricSpec, t: &VectorFieldSpec) -> Result<Vec<Expr>, WickError> {
    t.check(g)?;
    let n = g.dim();
    Ok((0..n)
        .map(|i| {
            (0..n).fold(Expr::zero(), |acc, j| Expr::add(acc, Expr::mul(g.component(i, j).clone(), t.components[j].clone())))
        })
        .collect())
}

fn point_label(p: &Point) -> String {
    let parts: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("({})", parts.join(","))
}

fn sample_points(g: &MetricSpec, domain: &Domain, samples: usize, seed: u64) -> Vec<Point> {
    domain.for_chart(g.coords(), (-1.0, 1.0)).samples(samples, seed)
}

/// Largest value of a per-point residual together with where it occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub residual: f64,
    pub witness: Point,
    pub samples: usize,
    pub seed: u64,
}

impl ResidualReport {
    fn collect(values: Vec<Result<(f64, Point), WickError>>, samples: usize, seed: u64) -> Result<Self, WickError> {
        let mut best = ResidualReport { residual: 0.0, witness: Point::new(), samples, seed };
        for v in values {
            let (r, p) = v?;
            if r > best.residual || best.witness.is_empty() {
                best.residual = best.residual.max(r);
                best.witness = p;
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitClosedReport {
    /// `+1` for riemannian metrics, `−1` for lorentzian ones.
    pub expected_norm: f64,
    /// `max |g(T,T) − expected_norm|`
    pub unit: ResidualReport,
    /// `max_{i<j} |∂_i T♭_j − ∂_j T♭_i|`
    pub closed: ResidualReport,
    pub is_unit: bool,
    pub is_closed: bool,
}

pub fn check_unit_closed(
    g: &MetricSpec,
    t: &VectorFieldSpec,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<UnitClosedReport, WickError> {
    let flat = flat_form(g, t)?;
    let n = g.dim();
    let coords = g.coords();
    let mut curl = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            curl.push(Expr::sub(flat[j].differentiate(&coords[i]), flat[i].differentiate(&coords[j])));
        }
    }
    let expected_norm = if g.signature() == Signature::Lorentzian { -1.0 } else { 1.0 };
    let points = sample_points(g, domain, samples, seed);
    let (mut unit, mut closed) = (Vec::new(), Vec::new());
    for p in points {
        let tv = t.eval(&p)?;
        let gm = g.eval_metric(&p)?;
        unit.push(Ok(((gm.bilinear(&tv, &tv) - expected_norm).abs(), p.clone())));
        let mut c = 0.0f64;
        for e in &curl {
            c = c.max(e.eval(&p)?.abs());
        }
        closed.push(Ok((c, p)));
    }
    let unit = ResidualReport::collect(unit, samples, seed)?;
    let closed = ResidualReport::collect(closed, samples, seed)?;
    Ok(UnitClosedReport {
        expected_norm,
        is_unit: unit.residual <= tol::SYMBOLIC,
        is_closed: closed.residual <= tol::SYMBOLIC,
        unit,
        closed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `g − 2 T♭⊗T♭` from a riemannian `g`.
    ToLorentzian,
    /// `g_L + 2 T♭_L⊗T♭_L` from a lorentzian `g_L`.
    ToRiemannian,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::ToLorentzian => "to_lorentzian",
            Direction::ToRiemannian => "to_riemannian",
        }
    }

    pub fn from_name(s: &str) -> Option<Direction> {
        match s {
            "to_lorentzian" => Some(Direction::ToLorentzian),
            "to_riemannian" => Some(Direction::ToRiemannian),
            _ => None,
        }
    }
}

/// Builds the rotated metric and checks its signature at the sample points.
pub fn wick_rotate(
    g: &MetricSpec,
    t: &VectorFieldSpec,
    direction: Direction,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<MetricSpec, WickError> {
    let (from, to, sign) = match direction {
        Direction::ToLorentzian => (Signature::Riemannian, Signature::Lorentzian, -2.0),
        Direction::ToRiemannian => (Signature::Lorentzian, Signature::Riemannian, 2.0),
    };
    if g.signature() != from {
        return Err(WickError::Signature { expected: from });
    }
    let flat = flat_form(g, t)?;
    let out = MetricSpec::from_fn(g.coords(), to, |i, j| {
        let tt = Expr::mul(flat[i].clone(), flat[j].clone());
        Expr::add(g.component(i, j).clone(), Expr::mul(Expr::num(sign), tt))
    })?;
    for p in sample_points(g, domain, samples, seed) {
        out.eval_metric(&p)?;
    }
    Ok(out)
}

/// `(∇T♭)_ij = ∂_i T♭_j − Γ^k_ij T♭_k` at `p`, unsymmetrized.
pub fn covariant_flat(g: &MetricSpec, t: &VectorFieldSpec, p: &Point) -> Result<Mat, WickError> {
    let b = curvature_at(g, p, Depth::Ricci)?;
    covariant_flat_with(g, t, p, &b)
}

fn covariant_flat_with(g: &MetricSpec, t: &VectorFieldSpec, p: &Point, b: &CurvatureBundle) -> Result<Mat, WickError> {
    let flat = flat_form(g, t)?;
    let n = g.dim();
    let coords = g.coords();
    let fv: Vec<f64> = flat.iter().map(|e| e.eval(p)).collect::<Result<_, _>>()?;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = flat[j].differentiate(&coords[i]).eval(p)?;
        }
    }
    Ok(Mat::from_fn(n, |i, j| d[i * n + j] - (0..n).map(|k| b.gamma[[k, i, j]] * fv[k]).sum::<f64>()))
}

/// `∇T♭`, its spectrum on `T^⊥` and `div T` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeData {
    pub point: Point,
    /// Symmetrized `∇T♭`.
    pub hess: Mat,
    pub asymmetry: f64,
    /// `max |∇T♭(T, ·)|`
    pub t_annihilation: f64,
    /// Eigenvalues `λ_i` of `D = ∇T` on `T^⊥`, ascending.
    pub eigs: Vec<f64>,
    /// Matching `g`-orthonormal eigenvectors in coordinate components.
    pub eigvecs: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    pub divergence: f64,
}

/// Shape data of a unit closed `T` for a riemannian `g`. Fails with
/// [`WickError::NotClosed`] if `∇T♭` is not symmetric.
pub fn shape_data(g: &MetricSpec, t: &VectorFieldSpec, p: &Point) -> Result<ShapeData, WickError> {
    let b = curvature_at(g, p, Depth::Ricci)?;
    shape_data_with(g, t, p, &b)
}

fn shape_data_with(g: &MetricSpec, t: &VectorFieldSpec, p: &Point, b: &CurvatureBundle) -> Result<ShapeData, WickError> {
    if g.signature() != Signature::Riemannian {
        return Err(WickError::Signature { expected: Signature::Riemannian });
    }
    let raw = covariant_flat_with(g, t, p, b)?;
    let asymmetry = raw.asymmetry();
    if asymmetry > tol::SYMBOLIC * raw.max_abs().max(1.0) {
        return Err(WickError::NotClosed { point: point_label(p), asymmetry });
    }
    let hess = raw.symmetrized();
    let n = g.dim();
    let tv = t.eval(p)?;
    let ht = hess.mul_vec(&tv);
    let t_annihilation = ht.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let frame = complement_frame(&b.g, &tv, p)?;
    let s = Mat::from_fn(n - 1, |a, c| hess.bilinear(&frame[a], &frame[c]));
    let (eigs, vecs) = s.symmetric_eigen();
    let eigvecs = (0..n - 1)
        .map(|k| (0..n).map(|i| (0..n - 1).map(|a| vecs[(a, k)] * frame[a][i]).sum()).collect())
        .collect();
    let divergence = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| b.g_inv[(i, j)] * hess[(i, j)]).sum();
    Ok(ShapeData { point: p.clone(), hess, asymmetry, t_annihilation, eigs, eigvecs, t: tv, divergence })
}

/// Orthonormal basis of `T^⊥` by Gram–Schmidt, seeded with `T` and the coordinate
/// vectors except the one most aligned with `T`.
fn complement_frame(g: &Mat, t: &[f64], p: &Point) -> Result<Vec<Vec<f64>>, WickError> {
    let n = g.dim();
    let tn = g.bilinear(t, t);
    if !(tn > 0.0) {
        return Err(WickError::DegenerateFrame { point: point_label(p) });
    }
    let e0: Vec<f64> = t.iter().map(|v| v / tn.sqrt()).collect();
    let tf = g.mul_vec(t);
    let skip = (0..n).max_by(|&a, &c| tf[a].abs().total_cmp(&tf[c].abs())).unwrap_or(0);
    let mut basis = vec![e0];
    for k in (0..n).filter(|&k| k != skip) {
        let mut v: Vec<f64> = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        for b in &basis {
            let c = g.bilinear(&v, b);
            for i in 0..n {
                v[i] -= c * b[i];
            }
        }
        let norm = g.bilinear(&v, &v);
        if !(norm > 1e-24) {
            return Err(WickError::DegenerateFrame { point: point_label(p) });
        }
        basis.push(v.iter().map(|x| x / norm.sqrt()).collect());
    }
    basis.remove(0);
    Ok(basis)
}

/// `max |Rm_L − Rm − ∇T♭⧆∇T♭|` over the samples.
pub fn closed_t_residual(
    g: &MetricSpec,
    t: &VectorFieldSpec,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<ResidualReport, WickError> {
    let gl = wick_rotate(g, t, Direction::ToLorentzian, domain, samples, seed)?;
    let points = sample_points(g, domain, samples, seed);
    let vals = par_map(&points, |p| {
        let b = curvature_at(g, p, Depth::Ricci)?;
        let bl = curvature_at(&gl, p, Depth::Ricci)?;
        let h = shape_data_with(g, t, p, &b)?.hess;
        let hh = kulkarni_nomizu(&h, &h)?;
        let mut r = 0.0f64;
        for ix in b.rm.indices() {
            r = r.max((bl.rm[ix] - b.rm[ix] - hh[ix]).abs());
        }
        Ok((r, p.clone()))
    });
    ResidualReport::collect(vals, samples, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem3Report {
    pub lambda: f64,
    /// `max |Rm − ½λ g⧆g + 2λ g⧆(T♭⊗T♭) + ∇T♭⧆∇T♭|`
    pub form: ResidualReport,
    /// `max |Rm_L − ½λ g_L⧆g_L|`
    pub constant_curvature: ResidualReport,
}

pub fn theorem3_residual(
    g: &MetricSpec,
    t: &VectorFieldSpec,
    lambda: f64,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<Theorem3Report, WickError> {
    let gl = wick_rotate(g, t, Direction::ToLorentzian, domain, samples, seed)?;
    let points = sample_points(g, domain, samples, seed);
    let pairs = par_map(&points, |p| -> Result<(f64, f64), WickError> {
        let b = curvature_at(g, p, Depth::Ricci)?;
        let sd = shape_data_with(g, t, p, &b)?;
        let tf = b.g.mul_vec(&sd.t);
        let tt = Mat::from_fn(g.dim(), |i, j| tf[i] * tf[j]);
        let gg = kulkarni_nomizu(&b.g, &b.g)?;
        let gt = kulkarni_nomizu(&b.g, &tt)?;
        let hh = kulkarni_nomizu(&sd.hess, &sd.hess)?;
        let mut r = 0.0f64;
        for ix in b.rm.indices() {
            let model = 0.5 * lambda * gg[ix] - 2.0 * lambda * gt[ix] - hh[ix];
            r = r.max((b.rm[ix] - model).abs());
        }
        Ok((r, constant_curvature_residual(&gl, lambda, p)?))
    });
    let (mut form, mut cc) = (Vec::new(), Vec::new());
    for (pair, p) in pairs.into_iter().zip(&points) {
        let (f, c) = pair?;
        form.push(Ok((f, p.clone())));
        cc.push(Ok((c, p.clone())));
    }
    Ok(Theorem3Report {
        lambda,
        form: ResidualReport::collect(form, samples, seed)?,
        constant_curvature: ResidualReport::collect(cc, samples, seed)?,
    })
}

const BOCHNER_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct BochnerReport {
    /// `max |T(div T) + Ric(T,T) + Σλ_i²|`
    pub bochner: ResidualReport,
    /// `min (Σλ_i² − (Σλ_i)²/(n−1))`, nonnegative by Cauchy–Schwarz.
    pub schwarz_gap: f64,
}

fn divergence_at(g: &MetricSpec, t: &VectorFieldSpec, p: &Point) -> Result<f64, WickError> {
    Ok(shape_data(g, t, p)?.divergence)
}

pub fn bochner_residual(
    g: &MetricSpec,
    t: &VectorFieldSpec,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<BochnerReport, WickError> {
    t.check(g)?;
    let n = g.dim();
    let points = sample_points(g, domain, samples, seed);
    let vals = par_map(&points, |p| -> Result<(f64, f64), WickError> {
        let b = curvature_at(g, p, Depth::Ricci)?;
        let sd = shape_data_with(g, t, p, &b)?;
        let x = p.values_for(g.coords())?;
        let shifted = |s: f64| -> Result<f64, WickError> {
            let y: Vec<f64> = x.iter().zip(&sd.t).map(|(a, v)| a + s * v).collect();
            divergence_at(g, t, &Point::from_chart(g.coords(), &y))
        };
        let h = BOCHNER_STEP;
        let d = (shifted(-2.0 * h)? - 8.0 * shifted(-h)? + 8.0 * shifted(h)? - shifted(2.0 * h)?) / (12.0 * h);
        let ric_tt = b.ric.bilinear(&sd.t, &sd.t);
        let sq: f64 = sd.eigs.iter().map(|l| l * l).sum();
        let sum: f64 = sd.eigs.iter().sum();
        Ok(((d + ric_tt + sq).abs(), sq - sum * sum / (n as f64 - 1.0)))
    });
    let mut res = Vec::new();
    let mut schwarz_gap = f64::INFINITY;
    for (v, p) in vals.into_iter().zip(&points) {
        let (r, gap) = v?;
        res.push(Ok((r, p.clone())));
        schwarz_gap = schwarz_gap.min(gap);
    }
    Ok(BochnerReport { bochner: ResidualReport::collect(res, samples, seed)?, schwarz_gap })
}

/// `max |Ric(T,T) − Ric_L(T,T)|`
pub fn ricci_restriction_residual(
    g: &MetricSpec,
    t: &VectorFieldSpec,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<ResidualReport, WickError> {
    let gl = wick_rotate(g, t, Direction::ToLorentzian, domain, samples, seed)?;
    let points = sample_points(g, domain, samples, seed);
    let vals = par_map(&points, |p| {
        let tv = t.eval(p)?;
        let r = curvature_at(g, p, Depth::Ricci)?.ric.bilinear(&tv, &tv);
        let rl = curvature_at(&gl, p, Depth::Ricci)?.ric.bilinear(&tv, &tv);
        Ok(((r - rl).abs(), p.clone()))
    });
    ResidualReport::collect(vals, samples, seed)
}

/// Surface identities `∇T♭⧆∇T♭ = 0` and `g⧆(T♭⊗T♭) = ½ g⧆g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceReport {
    pub hess_square: ResidualReport,
    pub mixed: ResidualReport,
}

pub fn surface_identities(
    g: &MetricSpec,
    t: &VectorFieldSpec,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<SurfaceReport, WickError> {
    if g.dim() != 2 {
        return Err(WickError::NotSurface(g.dim()));
    }
    let (mut hs, mut mx) = (Vec::new(), Vec::new());
    for p in sample_points(g, domain, samples, seed) {
        let sd = shape_data(g, t, &p)?;
        let gm = g.eval_metric(&p)?;
        let tf = gm.mul_vec(&sd.t);
        let tt = Mat::from_fn(2, |i, j| tf[i] * tf[j]);
        let gt = kulkarni_nomizu(&gm, &tt)?;
        let gg = kulkarni_nomizu(&gm, &gm)?;
        hs.push(Ok((kulkarni_nomizu(&sd.hess, &sd.hess)?.max_abs(), p.clone())));
        mx.push(Ok((gt.zip_with(&gg, |a, b| a - 0.5 * b).max_abs(), p)));
    }
    Ok(SurfaceReport {
        hess_square: ResidualReport::collect(hs, samples, seed)?,
        mixed: ResidualReport::collect(mx, samples, seed)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCurvature {
    pub plane: (usize, usize),
    pub sectional: f64,
    pub expected: f64,
}

/// Sectional curvatures on planes through `T` (expected `−λ`) and on eigenplanes
/// `span{X_i, X_j}` (expected `λ − 2λ_iλ_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct SectionalReport {
    pub lambda: f64,
    pub point: Point,
    pub eigs: Vec<f64>,
    /// Largest number of eigenvalues within `1e-8` of one another.
    pub multiplicity: usize,
    /// `plane.0` indexes the eigenvector paired with `T`; `plane.1` is unused (0).
    pub t_planes: Vec<PlaneCurvature>,
    pub eigen_planes: Vec<PlaneCurvature>,
    pub t_deviation: f64,
    pub eigen_deviation: f64,
}

pub fn sectional_deviation_check(
    g: &MetricSpec,
    t: &VectorFieldSpec,
    lambda: f64,
    p: &Point,
) -> Result<SectionalReport, WickError> {
    let b = curvature_at(g, p, Depth::Ricci)?;
    let sd = shape_data_with(g, t, p, &b)?;
    let m = sd.eigs.len();
    let mut t_planes = Vec::new();
    for i in 0..m {
        let k = b.sectional(&sd.t, &sd.eigvecs[i])?;
        t_planes.push(PlaneCurvature { plane: (i, 0), sectional: k, expected: -lambda });
    }
    let mut eigen_planes = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let k = b.sectional(&sd.eigvecs[i], &sd.eigvecs[j])?;
            eigen_planes.push(PlaneCurvature { plane: (i, j), sectional: k, expected: lambda - 2.0 * sd.eigs[i] * sd.eigs[j] });
        }
    }
    let dev = |v: &[PlaneCurvature]| v.iter().fold(0.0f64, |a, c| a.max((c.sectional - c.expected).abs()));
    let multiplicity = (0..m)
        .map(|i| sd.eigs.iter().filter(|l| (*l - sd.eigs[i]).abs() <= 1e-8).count())
        .max()
        .unwrap_or(0);
    Ok(SectionalReport {
        lambda,
        point: p.clone(),
        t_deviation: dev(&t_planes),
        eigen_deviation: dev(&eigen_planes),
        eigs: sd.eigs,
        multiplicity,
        t_planes,
        eigen_planes,
    })
}
