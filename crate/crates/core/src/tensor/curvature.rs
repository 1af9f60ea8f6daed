use crate::expr::Point;
use crate::linalg::Mat;

use super::{point_string, Array, Jet, MetricSpec, TensorError};

/// How much of the curvature bundle to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Depth {
    /// Γ, Rm, Ric, scalar.
    Ricci,
    /// Adds the Weyl tensor (n ≥ 3).
    Full,
    /// Adds ∇Rm and ∇Ric; needs third derivatives of the components.
    Derivatives,
}

impl Depth {
    pub fn name(self) -> &'static str {
        match self {
            Depth::Ricci => "ricci",
            Depth::Full => "full",
            Depth::Derivatives => "derivatives",
        }
    }

    pub fn from_name(s: &str) -> Option<Depth> {
        match s {
            "ricci" => Some(Depth::Ricci),
            "full" => Some(Depth::Full),
            "derivatives" => Some(Depth::Derivatives),
            _ => None,
        }
    }
}

/// Pointwise curvature data; see the module docs for index conventions.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub point: Point,
    pub depth: Depth,
    pub g: Mat,
    pub g_inv: Mat,
    pub gamma: Array<3>,
    pub rm: Array<4>,
    pub ric: Mat,
    pub scalar: f64,
    pub weyl: Option<Array<4>>,
    pub cov_rm: Option<Array<5>>,
    pub cov_ric: Option<Array<3>>,
}

pub fn curvature_at(m: &MetricSpec, p: &Point, depth: Depth) -> Result<CurvatureBundle, TensorError> {
    let jet = m.jet(p, depth == Depth::Derivatives)?;
    CurvatureBundle::from_jet(p.clone(), &jet, depth)
}

impl CurvatureBundle {
    /// Builds the bundle from metric values and derivatives. `jet.d3g` is
    /// required for [`Depth::Derivatives`].
    pub fn from_jet(point: Point, jet: &Jet, depth: Depth) -> Result<Self, TensorError> {
        let n = jet.g.dim();
        let g = jet.g.clone();
        let g_inv = g.inverse().map_err(|_| TensorError::Singular { point: point_string(&point) })?;
        let (dg, ddg) = (&jet.dg, &jet.ddg);

        // Γ_{l,jk}
        let gl = Array::<3>::from_fn(n, |[l, j, k]| 0.5 * (dg[[j, l, k]] + dg[[k, l, j]] - dg[[l, j, k]]));
        let gamma = Array::<3>::from_fn(n, |[m, j, k]| (0..n).map(|l| g_inv[(m, l)] * gl[[l, j, k]]).sum());
        // ∂_i Γ_{l,jk}
        let dgl = Array::<4>::from_fn(n, |[i, l, j, k]| {
            0.5 * (ddg[[i, j, l, k]] + ddg[[i, k, l, j]] - ddg[[i, l, j, k]])
        });
        let rm = Array::<4>::from_fn(n, |[i, j, k, l]| {
            let mut v = dgl[[i, l, j, k]] - dgl[[j, l, i, k]];
            for m in 0..n {
                v += gl[[m, j, l]] * gamma[[m, i, k]] - gl[[m, i, l]] * gamma[[m, j, k]];
            }
            v
        });
        let ric = Mat::from_fn(n, |j, k| {
            let mut v = 0.0;
            for i in 0..n {
                for l in 0..n {
                    v += g_inv[(i, l)] * rm[[i, j, k, l]];
                }
            }
            v
        });
        let scalar = (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| g_inv[(j, k)] * ric[(j, k)]).sum();

        let mut b = CurvatureBundle {
            point,
            depth,
            g,
            g_inv,
            gamma,
            rm,
            ric,
            scalar,
            weyl: None,
            cov_rm: None,
            cov_ric: None,
        };
        if depth >= Depth::Full && n >= 3 {
            b.weyl = Some(b.compute_weyl()?);
        }
        if depth == Depth::Derivatives {
            let d3g = jet
                .d3g
                .as_ref()
                .ok_or_else(|| TensorError::Shape("third derivatives missing from jet".into()))?;
            b.compute_covariant(&gl, &dgl, dg, d3g);
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    fn compute_weyl(&self) -> Result<Array<4>, TensorError> {
        let n = self.dim() as f64;
        let schouten = Mat::from_fn(self.dim(), |i, j| {
            (self.ric[(i, j)] - self.scalar / (2.0 * (n - 1.0)) * self.g[(i, j)]) / (n - 2.0)
        });
        let pg = kulkarni_nomizu(&schouten, &self.g)?;
        Ok(self.rm.zip_with(&pg, |a, b| a - b))
    }

    fn compute_covariant(&mut self, gl: &Array<3>, dgl: &Array<4>, dg: &Array<3>, d3g: &Array<5>) {
        let n = self.dim();
        let (g_inv, gamma, rm) = (&self.g_inv, &self.gamma, &self.rm);
        // ∂_a Γ^m_jk = g^mp (∂_a Γ_{p,jk} − ∂_a g_pq Γ^q_jk)
        let dgu = Array::<4>::from_fn(n, |[a, m, j, k]| {
            let mut v = 0.0;
            for p in 0..n {
                let mut w = dgl[[a, p, j, k]];
                for q in 0..n {
                    w -= dg[[a, p, q]] * gamma[[q, j, k]];
                }
                v += g_inv[(m, p)] * w;
            }
            v
        });
        // ∂_a ∂_i Γ_{l,jk}
        let ddgl = |a: usize, i: usize, l: usize, j: usize, k: usize| {
            0.5 * (d3g[[a, i, j, l, k]] + d3g[[a, i, k, l, j]] - d3g[[a, i, l, j, k]])
        };
        let drm = Array::<5>::from_fn(n, |[a, i, j, k, l]| {
            let mut v = ddgl(a, i, l, j, k) - ddgl(a, j, l, i, k);
            for m in 0..n {
                v += dgl[[a, m, j, l]] * gamma[[m, i, k]] + gl[[m, j, l]] * dgu[[a, m, i, k]]
                    - dgl[[a, m, i, l]] * gamma[[m, j, k]]
                    - gl[[m, i, l]] * dgu[[a, m, j, k]];
            }
            v
        });
        let cov_rm = Array::<5>::from_fn(n, |[a, b, c, d, e]| {
            let mut v = drm[[a, b, c, d, e]];
            for m in 0..n {
                v -= gamma[[m, a, b]] * rm[[m, c, d, e]]
                    + gamma[[m, a, c]] * rm[[b, m, d, e]]
                    + gamma[[m, a, d]] * rm[[b, c, m, e]]
                    + gamma[[m, a, e]] * rm[[b, c, d, m]];
            }
            v
        });
        // ∂_a g^il = −g^ip ∂_a g_pq g^ql
        let dginv = Array::<3>::from_fn(n, |[a, i, l]| {
            let mut v = 0.0;
            for p in 0..n {
                for q in 0..n {
                    v -= g_inv[(i, p)] * dg[[a, p, q]] * g_inv[(q, l)];
                }
            }
            v
        });
        let dric = Array::<3>::from_fn(n, |[a, b, c]| {
            let mut v = 0.0;
            for i in 0..n {
                for l in 0..n {
                    v += dginv[[a, i, l]] * rm[[i, b, c, l]] + g_inv[(i, l)] * drm[[a, i, b, c, l]];
                }
            }
            v
        });
        let ric = &self.ric;
        let cov_ric = Array::<3>::from_fn(n, |[a, b, c]| {
            let mut v = dric[[a, b, c]];
            for m in 0..n {
                v -= gamma[[m, a, b]] * ric[(m, c)] + gamma[[m, a, c]] * ric[(b, m)];
            }
            v
        });
        self.cov_rm = Some(cov_rm);
        self.cov_ric = Some(cov_ric);
    }

    /// `Rm(v, w, x, y)` for vectors in coordinate components.
    pub fn rm_apply(&self, v: &[f64], w: &[f64], x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let vw = v[i] * w[j];
                if vw == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        s += vw * x[k] * y[l] * self.rm[[i, j, k, l]];
                    }
                }
            }
        }
        s
    }

    /// `Rm(v,w,w,v) / (|v|²|w|² − ⟨v,w⟩²)`.
    pub fn sectional(&self, v: &[f64], w: &[f64]) -> Result<f64, TensorError> {
        let (vv, ww, vw) = (self.g.bilinear(v, v), self.g.bilinear(w, w), self.g.bilinear(v, w));
        let denominator = vv * ww - vw * vw;
        let scale = (vv.abs() * ww.abs()).max(vw * vw);
        if denominator.abs() <= 1e-12 * scale || denominator == 0.0 {
            return Err(TensorError::DegeneratePlane { denominator });
        }
        Ok(self.rm_apply(v, w, w, v) / denominator)
    }

    pub fn symmetry_residuals(&self) -> SymmetryResiduals {
        let n = self.dim();
        let rm = &self.rm;
        let rel = |x: f64, scale: f64| x / scale.max(1.0);
        let gscale = self.gamma.max_abs();
        let mut gamma_symmetry = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gamma_symmetry = gamma_symmetry.max((self.gamma[[k, i, j]] - self.gamma[[k, j, i]]).abs());
                }
            }
        }
        let scale = rm.max_abs();
        let (mut a12, mut a34, mut pair, mut b1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for [i, j, k, l] in rm.indices() {
            let r = rm[[i, j, k, l]];
            a12 = a12.max((r + rm[[j, i, k, l]]).abs());
            a34 = a34.max((r + rm[[i, j, l, k]]).abs());
            pair = pair.max((r - rm[[k, l, i, j]]).abs());
            b1 = b1.max((r + rm[[j, k, i, l]] + rm[[k, i, j, l]]).abs());
        }
        let ric_symmetry = rel(self.ric.asymmetry(), self.ric.max_abs());
        let weyl_trace = self.weyl.as_ref().map(|w| {
            let mut t = 0.0f64;
            for j in 0..n {
                for k in 0..n {
                    let tr: f64 = (0..n)
                        .flat_map(|i| (0..n).map(move |l| (i, l)))
                        .map(|(i, l)| self.g_inv[(i, l)] * w[[i, j, k, l]])
                        .sum();
                    t = t.max(tr.abs());
                }
            }
            rel(t, w.max_abs().max(scale))
        });
        SymmetryResiduals {
            gamma_symmetry: rel(gamma_symmetry, gscale),
            antisymmetry_12: rel(a12, scale),
            antisymmetry_34: rel(a34, scale),
            pair_exchange: rel(pair, scale),
            first_bianchi: rel(b1, scale),
            ric_symmetry,
            weyl_trace,
        }
    }

    /// Cyclic sum `(∇_a Rm)_bcde + (∇_b Rm)_cade + (∇_c Rm)_abde`, max-norm,
    /// relative to `max(1, |∇Rm|)`. `None` below [`Depth::Derivatives`].
    pub fn second_bianchi_residual(&self) -> Option<f64> {
        let c = self.cov_rm.as_ref()?;
        let mut r = 0.0f64;
        for [a, b, cc, d, e] in c.indices() {
            r = r.max((c[[a, b, cc, d, e]] + c[[b, cc, a, d, e]] + c[[cc, a, b, d, e]]).abs());
        }
        Some(r / c.max_abs().max(1.0))
    }
}

/// Relative residuals of the algebraic identities a bundle must satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryResiduals {
    pub gamma_symmetry: f64,
    pub antisymmetry_12: f64,
    pub antisymmetry_34: f64,
    pub pair_exchange: f64,
    pub first_bianchi: f64,
    pub ric_symmetry: f64,
    pub weyl_trace: Option<f64>,
}

impl SymmetryResiduals {
    pub fn max(&self) -> f64 {
        [
            self.gamma_symmetry,
            self.antisymmetry_12,
            self.antisymmetry_34,
            self.pair_exchange,
            self.first_bianchi,
            self.ric_symmetry,
            self.weyl_trace.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn kulkarni_nomizu(p: &Mat, q: &Mat) -> Result<Array<4>, TensorError> {
    if p.dim() != q.dim() {
        return Err(TensorError::Shape(format!("Kulkarni-Nomizu of {}x{} and {}x{}", p.dim(), p.dim(), q.dim(), q.dim())));
    }
    Ok(Array::<4>::from_fn(p.dim(), |[v, w, x, y]| {
        p[(v, y)] * q[(w, x)] + p[(w, x)] * q[(v, y)] - p[(v, x)] * q[(w, y)] - p[(w, y)] * q[(v, x)]
    }))
}

/// Max-norm of `Rm − ½λ g⧆g` at `p`.
pub fn constant_curvature_residual(m: &MetricSpec, lambda: f64, p: &Point) -> Result<f64, TensorError> {
    let b = curvature_at(m, p, Depth::Ricci)?;
    let gg = kulkarni_nomizu(&b.g, &b.g)?;
    Ok(b.rm.zip_with(&gg, |r, k| r - 0.5 * lambda * k).max_abs())
}

/// Max-norm of `Ric − λ g` at `p`.
pub fn einstein_residual(m: &MetricSpec, lambda: f64, p: &Point) -> Result<f64, TensorError> {
    let b = curvature_at(m, p, Depth::Ricci)?;
    Ok((&b.ric - &b.g.scale(lambda)).max_abs())
}

pub fn sectional_curvature(m: &MetricSpec, p: &Point, v: &[f64], w: &[f64]) -> Result<f64, TensorError> {
    if v.len() != m.dim() || w.len() != m.dim() {
        return Err(TensorError::Shape(format!("vectors must have {} components", m.dim())));
    }
    curvature_at(m, p, Depth::Ricci)?.sectional(v, w)
}

/// Max-norm differences between the curvature of `c²g` and the rescaled curvature of `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalResiduals {
    /// `|Ric_{c²g} − Ric_g|`
    pub ric: f64,
    /// `|Rm_{c²g} − c² Rm_g|`
    pub rm: f64,
    /// `|W_{c²g} − c² W_g|` (n ≥ 3)
    pub weyl: Option<f64>,
}

pub fn conformal_scaling_check(m: &MetricSpec, c: f64, p: &Point) -> Result<ConformalResiduals, TensorError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(TensorError::Shape(format!("scale factor must be positive, got {c}")));
    }
    let c2 = c * c;
    let base = curvature_at(m, p, Depth::Full)?;
    let scaled = curvature_at(&m.scaled(c2), p, Depth::Full)?;
    let weyl = match (&scaled.weyl, &base.weyl) {
        (Some(ws), Some(wb)) => Some(ws.zip_with(wb, |a, b| a - c2 * b).max_abs()),
        _ => None,
    };
    Ok(ConformalResiduals {
        ric: (&scaled.ric - &base.ric).max_abs(),
        rm: scaled.rm.zip_with(&base.rm, |a, b| a - c2 * b).max_abs(),
        weyl,
    })
}
