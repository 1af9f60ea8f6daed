use crate::expr::{Expr, Point};
use crate::sampling::Domain;
use crate::tensor::{curvature_at, Depth, MetricSpec, Signature};
use crate::tol;

use super::PenroseError;

/// Flags for a metric in null-chart shape `g_00 = 0, g_01 = 1, g_0i = 0`,
/// with `V = ∂_0` the candidate parallel null field.
#[derive(Debug, Clone, PartialEq)]
pub struct BrinkmannClass {
    pub is_brinkmann: bool,
    pub is_pp_wave: bool,
    pub is_plane_wave: bool,
    /// Every `∂_0 g_ab` simplified to the zero expression.
    pub symbolic_x0_free: bool,
    /// Largest `|∂_0 g_ab|` at the sample points.
    pub x0_derivative: f64,
    /// Largest `|Rm(X, Y, ·, ·)|` over `X, Y ∈ V^⊥`, relative to `max|Rm|`.
    pub pp_residual: f64,
    /// Largest `|(∇_X Rm)|` over `X ∈ V^⊥`, relative to `max|Rm|`.
    pub plane_residual: f64,
    pub samples: usize,
    pub seed: u64,
}

fn check_shape(m: &MetricSpec) -> Result<(), PenroseError> {
    let n = m.dim();
    if m.signature() != Signature::Lorentzian || n < 3 {
        return Err(PenroseError::Shape("expected a lorentzian metric of dimension at least 3".into()));
    }
    let want = |i: usize, v: f64| {
        if m.component(i, 0).constant_value() == Some(v) {
            Ok(())
        } else {
            Err(PenroseError::Shape(format!(
                "expected g[{}][{}] = {v}, found `{}`",
                m.coords()[i],
                m.coords()[0],
                m.component(i, 0)
            )))
        }
    };
    want(0, 0.0)?;
    want(1, 1.0)?;
    (2..n).try_for_each(|i| want(i, 0.0))
}

/// Indices spanning `V^⊥ = span{∂_0, ∂_2, …}`.
fn perp(n: usize) -> impl Iterator<Item = usize> + Clone {
    std::iter::once(0).chain(2..n)
}

fn x0_derivatives(m: &MetricSpec) -> Vec<Expr> {
    let x0 = &m.coords()[0];
    let n = m.dim();
    (0..n).flat_map(|i| (0..=i).map(move |j| (i, j))).map(|(i, j)| m.component(i, j).differentiate(x0)).collect()
}

fn max_abs_at(exprs: &[Expr], p: &Point) -> Result<f64, PenroseError> {
    let mut v = 0.0f64;
    for e in exprs {
        v = v.max(e.eval(p)?.abs());
    }
    Ok(v)
}

/// Classifies `m` at seeded points of `domain` (missing coordinates default to `[-1, 1]`).
pub fn check_brinkmann_class(
    m: &MetricSpec,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<BrinkmannClass, PenroseError> {
    check_shape(m)?;
    let n = m.dim();
    let dx0 = x0_derivatives(m);
    let symbolic_x0_free = dx0.iter().all(Expr::is_zero);
    let dom = domain.for_chart(m.coords(), (-1.0, 1.0));
    let (mut x0_derivative, mut pp, mut plane) = (0.0f64, 0.0f64, 0.0f64);
    for p in dom.samples(samples, seed) {
        x0_derivative = x0_derivative.max(max_abs_at(&dx0, &p)?);
        let b = curvature_at(m, &p, Depth::Derivatives)?;
        let scale = b.rm.max_abs();
        let mut r = 0.0f64;
        for a in perp(n) {
            for c in perp(n) {
                for k in 0..n {
                    for l in 0..n {
                        r = r.max(b.rm[[a, c, k, l]].abs());
                    }
                }
            }
        }
        pp = pp.max(tol::relative(r, scale));
        let cov = b.cov_rm.as_ref().expect("derivatives depth");
        let mut d = 0.0f64;
        for a in perp(n) {
            for [_, i, j, k, l] in cov.indices().filter(|ix| ix[0] == a) {
                d = d.max(cov[[a, i, j, k, l]].abs());
            }
        }
        plane = plane.max(tol::relative(d, scale));
    }
    let is_brinkmann = symbolic_x0_free || x0_derivative <= tol::SYMBOLIC;
    let is_pp_wave = is_brinkmann && pp <= tol::SYMBOLIC;
    Ok(BrinkmannClass {
        is_brinkmann,
        is_pp_wave,
        is_plane_wave: is_pp_wave && plane <= tol::SYMBOLIC,
        symbolic_x0_free,
        x0_derivative,
        pp_residual: pp,
        plane_residual: plane,
        samples,
        seed,
    })
}

/// Ambient versus intrinsic curvature of the slice `x0 = b, x1 = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceReport {
    pub residual: f64,
    /// Largest spatial ambient component seen.
    pub ambient_max: f64,
    pub witness: Point,
    pub samples: usize,
    pub seed: u64,
}

/// Compares `Rm(∂_i, ∂_j, ∂_k, ∂_l)` of a Brinkmann metric with the curvature of the
/// induced metric `g_ij(b, c, x) dx^i dx^j`, over spatial indices at seeded `x`.
pub fn check_slice_curvature(
    m: &MetricSpec,
    b: f64,
    c: f64,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<SliceReport, PenroseError> {
    check_shape(m)?;
    let dx0 = x0_derivatives(m);
    let (x0, x1) = (m.coords()[0].clone(), m.coords()[1].clone());
    let spatial = &m.coords()[2..];
    let dom = domain.for_chart(spatial, (-1.0, 1.0));
    let pts = dom.samples(samples, seed);
    if !dx0.iter().all(Expr::is_zero) {
        for p in &pts {
            let q = p.clone().with(&x0, b).with(&x1, c);
            if max_abs_at(&dx0, &q)? > tol::SYMBOLIC {
                return Err(PenroseError::NotBrinkmann);
            }
        }
    }
    let sub = |name: &str| {
        if name == x0 {
            Some(Expr::num(b))
        } else if name == x1 {
            Some(Expr::num(c))
        } else {
            None
        }
    };
    if spatial.len() == 1 {
        // a curve has no curvature; the single ambient component vanishes by antisymmetry
        let mut ambient_max = 0.0f64;
        for p in &pts {
            let amb = curvature_at(m, &p.clone().with(&x0, b).with(&x1, c), Depth::Ricci)?;
            ambient_max = ambient_max.max(amb.rm[[2, 2, 2, 2]].abs());
        }
        let witness = pts.first().cloned().unwrap_or_default();
        return Ok(SliceReport { residual: ambient_max, ambient_max, witness, samples, seed });
    }
    let slice = MetricSpec::from_fn(spatial, Signature::Riemannian, |i, j| m.component(i + 2, j + 2).substitute(&sub))?;
    let (mut residual, mut ambient_max, mut witness) = (0.0f64, 0.0f64, Point::new());
    for p in pts {
        let ambient = curvature_at(m, &p.clone().with(&x0, b).with(&x1, c), Depth::Ricci)?;
        let intrinsic = curvature_at(&slice, &p, Depth::Ricci)?;
        for [i, j, q, l] in intrinsic.rm.indices() {
            let a = ambient.rm[[i + 2, j + 2, q + 2, l + 2]];
            ambient_max = ambient_max.max(a.abs());
            let d = (a - intrinsic.rm[[i, j, q, l]]).abs();
            if d > residual || witness.is_empty() {
                residual = residual.max(d);
                witness = p.clone();
            }
        }
    }
    Ok(SliceReport { residual, ambient_max, witness, samples, seed })
}
