use std::f64::consts::FRAC_1_SQRT_2;

use crate::expr::Expr;
use crate::linalg::Mat;
use crate::tensor::{MetricSpec, Signature};

use super::PenroseError;

const POSITIVITY_PROBES: usize = 65;

/// Name of a coordinate in the rescaled chart of the Penrose family.
pub fn tilde_name(name: &str) -> String {
    format!("{name}_")
}

fn is_const(e: &Expr, v: f64) -> bool {
    e.constant_value() == Some(v)
}

fn shape_error(m: &MetricSpec, i: usize, j: usize, want: &str) -> PenroseError {
    PenroseError::Shape(format!(
        "expected g[{}][{}] = {want}, found `{}`",
        m.coords()[i],
        m.coords()[j],
        m.component(i, j)
    ))
}

/// `−dt² + ḡ` on `(t, coords of ḡ)`.
pub fn build_time_symmetric_product(riem: &MetricSpec) -> Result<MetricSpec, PenroseError> {
    if riem.signature() != Signature::Riemannian {
        return Err(PenroseError::NotRiemannian);
    }
    if riem.coord_index("t").is_some() {
        return Err(PenroseError::NameClash("t".into()));
    }
    let mut coords = vec!["t".to_string()];
    coords.extend(riem.coords().iter().cloned());
    Ok(MetricSpec::from_fn(&coords, Signature::Lorentzian, |i, j| match (i, j) {
        (0, 0) => Expr::num(-1.0),
        (_, 0) => Expr::zero(),
        _ => riem.component(i - 1, j - 1).clone(),
    })?)
}

/// Rewrites `−dt² + dr² + g_ij dx^i dx^j` (chart `(t, r, x…)`) in null
/// coordinates `x0 = (r+t)/√2`, `x1 = (r−t)/√2`, giving `2 dx0 dx1 + g_ij dx^i dx^j`.
pub fn to_null_chart(prod: &MetricSpec) -> Result<MetricSpec, PenroseError> {
    let n = prod.dim();
    if prod.signature() != Signature::Lorentzian || n < 3 {
        return Err(PenroseError::Shape("expected a lorentzian product of dimension at least 3".into()));
    }
    for (i, j, v) in [(0, 0, -1.0), (1, 0, 0.0), (1, 1, 1.0)] {
        if !is_const(prod.component(i, j), v) {
            return Err(shape_error(prod, i, j, &format!("{v}")));
        }
    }
    for i in 2..n {
        for j in 0..2 {
            if !is_const(prod.component(i, j), 0.0) {
                return Err(shape_error(prod, i, j, "0"));
            }
        }
    }
    let spatial = &prod.coords()[2..];
    for name in ["x0", "x1"] {
        if spatial.iter().any(|c| c == name) {
            return Err(PenroseError::NameClash(name.into()));
        }
    }
    let mut coords = vec!["x0".to_string(), "x1".to_string()];
    coords.extend(spatial.iter().cloned());
    let (x0, x1) = (Expr::var("x0"), Expr::var("x1"));
    let r = Expr::mul(Expr::num(FRAC_1_SQRT_2), Expr::add(x0.clone(), x1.clone()));
    let t = Expr::mul(Expr::num(FRAC_1_SQRT_2), Expr::sub(x0, x1));
    let (t_name, r_name) = (prod.coords()[0].clone(), prod.coords()[1].clone());
    let sub = move |name: &str| {
        if name == t_name {
            Some(t.clone())
        } else if name == r_name {
            Some(r.clone())
        } else {
            None
        }
    };
    Ok(MetricSpec::from_fn(&coords, Signature::Lorentzian, |i, j| match (i, j) {
        (1, 0) => Expr::one(),
        (i, j) if i >= 2 && j >= 2 => prod.component(i, j).substitute(&sub),
        _ => Expr::zero(),
    })?)
}

fn check_null_shape(m: &MetricSpec) -> Result<(), PenroseError> {
    let n = m.dim();
    if n < 3 {
        return Err(PenroseError::Shape("null chart needs at least 3 coordinates".into()));
    }
    if !is_const(m.component(0, 0), 0.0) {
        return Err(shape_error(m, 0, 0, "0"));
    }
    if !is_const(m.component(1, 0), 1.0) {
        return Err(shape_error(m, 1, 0, "1"));
    }
    for i in 2..n {
        if !is_const(m.component(i, 0), 0.0) {
            return Err(shape_error(m, i, 0, "0"));
        }
    }
    Ok(())
}

fn tilde_coords(m: &MetricSpec) -> Vec<String> {
    m.coords().iter().map(|c| tilde_name(c)).collect()
}

/// `φ_ε(x̃) = (x̃0, ε² x̃1, ε x̃2, …)` as expressions in the tilde chart.
fn scaling_map(m: &MetricSpec, eps: f64) -> Vec<Expr> {
    tilde_coords(m)
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let s = match k {
                0 => 1.0,
                1 => eps * eps,
                _ => eps,
            };
            Expr::mul(Expr::num(s), Expr::var(name))
        })
        .collect()
}

fn check_eps(eps: f64) -> Result<(), PenroseError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(PenroseError::InvalidEps(eps))
    }
}

/// The rescaled family `h_ε = ε⁻² φ_ε^* g` on the tilde chart, for `g` in null-chart form.
pub fn penrose_family(null_metric: &MetricSpec, eps: f64) -> Result<MetricSpec, PenroseError> {
    check_eps(eps)?;
    check_null_shape(null_metric)?;
    let coords = tilde_coords(null_metric);
    let phi = scaling_map(null_metric, eps);
    let jac: Vec<f64> = (0..null_metric.dim())
        .map(|k| match k {
            0 => 1.0,
            1 => eps * eps,
            _ => eps,
        })
        .collect();
    let sub = |name: &str| null_metric.coord_index(name).map(|k| phi[k].clone());
    Ok(MetricSpec::from_fn(&coords, Signature::Lorentzian, |a, b| {
        let c = jac[a] * jac[b] / (eps * eps);
        Expr::mul(Expr::num(c), null_metric.component(a, b).substitute(&sub))
    })?)
}

/// `g_ε = φ_ε^* g` on the tilde chart (equal to `ε² h_ε`), built by a generic pullback.
pub fn family_pullback(null_metric: &MetricSpec, eps: f64) -> Result<MetricSpec, PenroseError> {
    check_eps(eps)?;
    check_null_shape(null_metric)?;
    let coords = tilde_coords(null_metric);
    Ok(null_metric.pullback(&coords, &scaling_map(null_metric, eps), Signature::Lorentzian)?)
}

/// `lim_{ε→0} h_ε = 2 dx̃0 dx̃1 + g_ij(x̃0, 0, …, 0) dx̃^i dx̃^j`.
pub fn family_limit(null_metric: &MetricSpec) -> Result<MetricSpec, PenroseError> {
    check_null_shape(null_metric)?;
    let coords = tilde_coords(null_metric);
    let first = null_metric.coords()[0].clone();
    let x0 = Expr::var(&coords[0]);
    let sub = |name: &str| Some(if name == first { x0.clone() } else { Expr::zero() });
    Ok(MetricSpec::from_fn(&coords, Signature::Lorentzian, |a, b| match (a, b) {
        (1, 0) => Expr::one(),
        (a, b) if a >= 2 && b >= 2 => null_metric.component(a, b).substitute(&sub),
        _ => Expr::zero(),
    })?)
}

/// Symmetric positive-definite matrix `ḡ_ij(r)` of one variable on a working interval.
#[derive(Debug, Clone)]
pub struct AxisMetric {
    var: String,
    names: Vec<String>,
    gbar: Vec<Expr>,
    d1: Vec<Expr>,
    d2: Vec<Expr>,
    interval: (f64, f64),
}

impl AxisMetric {
    /// `rows` may be full or lower-triangular; `names` label the transverse coordinates.
    pub fn new<S: AsRef<str>>(
        var: &str,
        names: &[S],
        rows: &[Vec<Expr>],
        interval: (f64, f64),
    ) -> Result<Self, PenroseError> {
        let m = names.len();
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        if m == 0 || rows.len() != m {
            return Err(PenroseError::Shape(format!("{} rows for {m} transverse coordinates", rows.len())));
        }
        if !(interval.0 < interval.1) || !interval.0.is_finite() || !interval.1.is_finite() {
            return Err(PenroseError::Grid(format!("empty interval [{}, {}]", interval.0, interval.1)));
        }
        let mut gbar = vec![Expr::zero(); m * m];
        for i in 0..m {
            if rows[i].len() != m && rows[i].len() != i + 1 {
                return Err(PenroseError::Shape(format!("axis row {i} has {} entries", rows[i].len())));
            }
            for j in 0..=i {
                let e = rows[i][j].clone();
                if let Some(v) = e.variables().into_iter().find(|v| v != var) {
                    return Err(PenroseError::Shape(format!("axis entry [{i}][{j}] depends on `{v}`")));
                }
                gbar[i * m + j] = e.clone();
                gbar[j * m + i] = e;
            }
        }
        let d1: Vec<Expr> = gbar.iter().map(|e| e.differentiate(var)).collect();
        let d2: Vec<Expr> = d1.iter().map(|e| e.differentiate(var)).collect();
        let axis = AxisMetric { var: var.to_string(), names, gbar, d1, d2, interval };
        axis.check_positive(POSITIVITY_PROBES)?;
        Ok(axis)
    }

    /// Spatial block on the axis `x = 0` of a semigeodesic metric `dr² + g_ij(r,x) dx^i dx^j`.
    pub fn from_semigeodesic(riem: &MetricSpec, interval: (f64, f64)) -> Result<Self, PenroseError> {
        if riem.signature() != Signature::Riemannian {
            return Err(PenroseError::NotRiemannian);
        }
        let n = riem.dim();
        if !is_const(riem.component(0, 0), 1.0) {
            return Err(shape_error(riem, 0, 0, "1"));
        }
        for i in 1..n {
            if !is_const(riem.component(i, 0), 0.0) {
                return Err(shape_error(riem, i, 0, "0"));
            }
        }
        let var = riem.coords()[0].clone();
        let on_axis = |name: &str| if name == var { None } else { Some(Expr::zero()) };
        let rows: Vec<Vec<Expr>> =
            (1..n).map(|i| (1..=i).map(|j| riem.component(i, j).substitute(&on_axis)).collect()).collect();
        AxisMetric::new(&var, &riem.coords()[1..], &rows, interval)
    }

    pub fn with_interval(&self, interval: (f64, f64)) -> Result<Self, PenroseError> {
        let rows: Vec<Vec<Expr>> = (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.component(i, j).clone()).collect()).collect();
        AxisMetric::new(&self.var, &self.names, &rows, interval)
    }

    /// Transverse dimension `n − 1`.
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.gbar[i * self.dim() + j]
    }

    fn eval_table(&self, table: &[Expr], u: f64) -> Result<Mat, PenroseError> {
        let m = self.dim();
        let lookup = |name: &str| if name == self.var { Some(u) } else { None };
        let mut vals = Vec::with_capacity(m * m);
        for e in table {
            vals.push(e.eval_with(&lookup)?);
        }
        Ok(Mat::from_fn(m, |i, j| vals[i * m + j]))
    }

    pub fn eval(&self, u: f64) -> Result<Mat, PenroseError> {
        self.eval_table(&self.gbar, u)
    }

    /// `(ḡ, ḡ', ḡ'')` at `u`.
    pub fn eval_derivatives(&self, u: f64) -> Result<(Mat, Mat, Mat), PenroseError> {
        Ok((self.eval_table(&self.gbar, u)?, self.eval_table(&self.d1, u)?, self.eval_table(&self.d2, u)?))
    }

    fn check_positive(&self, probes: usize) -> Result<(), PenroseError> {
        let (a, b) = self.interval;
        for k in 0..probes {
            let u = a + (b - a) * k as f64 / (probes - 1) as f64;
            if self.eval(u)?.cholesky().is_err() {
                return Err(PenroseError::NotPositiveDefinite { var: self.var.clone(), at: u });
            }
        }
        Ok(())
    }
}

/// The Rosen-form plane wave `2 dr dt + ḡ_ij(r) dx^i dx^j` on `(r, t, x…)`.
#[derive(Debug, Clone)]
pub struct RosenProfile {
    axis: AxisMetric,
    metric: MetricSpec,
}

impl RosenProfile {
    pub fn axis(&self) -> &AxisMetric {
        &self.axis
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    /// Same wave on `(t, r, x…)`, i.e. in null-chart shape with `∂_t` as the parallel null field.
    pub fn null_ordered(&self) -> MetricSpec {
        let m = &self.metric;
        let mut coords = m.coords().to_vec();
        coords.swap(0, 1);
        let perm = |i: usize| match i {
            0 => 1,
            1 => 0,
            k => k,
        };
        MetricSpec::from_fn(&coords, Signature::Lorentzian, |i, j| m.component(perm(i), perm(j)).clone())
            .expect("reordering preserves validity")
    }
}

pub fn penrose_limit_rosen(axis: &AxisMetric) -> Result<RosenProfile, PenroseError> {
    if axis.var == "t" || axis.names.iter().any(|c| c == "t") {
        return Err(PenroseError::NameClash("t".into()));
    }
    axis.check_positive(POSITIVITY_PROBES)?;
    let mut coords = vec![axis.var.clone(), "t".to_string()];
    coords.extend(axis.names.iter().cloned());
    let metric = MetricSpec::from_fn(&coords, Signature::Lorentzian, |i, j| match (i, j) {
        (1, 0) => Expr::one(),
        (i, j) if i >= 2 && j >= 2 => axis.component(i - 2, j - 2).clone(),
        _ => Expr::zero(),
    })?;
    Ok(RosenProfile { axis: axis.clone(), metric })
}
