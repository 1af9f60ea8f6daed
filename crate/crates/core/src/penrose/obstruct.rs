use std::fmt;

use crate::expr::Expr;
use crate::tensor::{MetricSpec, Signature};

use super::{penrose_limit_rosen, rosen_to_brinkmann, AxisMetric, BrinkmannProfile, Grid, PenroseError};

/// Curvature of the Brinkmann wave at one grid node, from `A` and `∂_u A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCurvature {
    /// `Rm(∂_i, ∂_u, ∂_u, ∂_j) = −½ H_ij = −A_ij`
    pub rm_iuuj: f64,
    /// `Ric(∂_u, ∂_u) = −½ ΔH = −tr A`
    pub ric_uu: f64,
    /// `(∇_u Rm)(∂_i, ∂_u, ∂_u, ∂_j) = −½ H_iju = −∂_u A_ij`
    pub cov_rm_u_iuuj: f64,
    /// `(∇_u Ric)(∂_u, ∂_u) = −½ ∂_u ΔH = −tr ∂_u A`
    pub cov_ric_uuu: f64,
}

pub fn brinkmann_closed_form_curvature(
    profile: &BrinkmannProfile,
    u: f64,
    i: usize,
    j: usize,
) -> Result<ClosedFormCurvature, PenroseError> {
    let k = profile.grid.locate(u)?;
    let m = profile.dim();
    if i >= m || j >= m {
        return Err(PenroseError::Shape(format!("transverse index out of range ({i}, {j}) for dimension {m}")));
    }
    let (a, da) = (&profile.a[k], &profile.da[k]);
    Ok(ClosedFormCurvature {
        rm_iuuj: -a[(i, j)],
        ric_uu: -a.trace(),
        cov_rm_u_iuuj: -da[(i, j)],
        cov_ric_uuu: -da.trace(),
    })
}

/// `2 dv du + H du² + Σ dx²` on `(v, u, x2, …)` with `H = P_kl(u) x^k x^l`, where
/// `P` is the quartic interpolant of `A` through the five nodes nearest node `k`.
pub fn brinkmann_metric_at_node(profile: &BrinkmannProfile, k: usize) -> Result<MetricSpec, PenroseError> {
    let grid = &profile.grid;
    if k >= grid.len() {
        return Err(PenroseError::OffGrid(grid.u_max()));
    }
    let m = profile.dim();
    let start = k.saturating_sub(2).min(grid.len() - 5);
    let window: Vec<usize> = (start..start + 5).collect();
    let u = Expr::var("u");
    let basis: Vec<Expr> = window
        .iter()
        .map(|&q| {
            let mut e = Expr::one();
            for &p in &window {
                if p != q {
                    let factor = Expr::div(
                        Expr::sub(u.clone(), Expr::num(grid.node(p))),
                        Expr::num(grid.node(q) - grid.node(p)),
                    );
                    e = Expr::mul(e, factor);
                }
            }
            e
        })
        .collect();
    let mut coords = vec!["v".to_string(), "u".to_string()];
    coords.extend((0..m).map(|i| format!("x{}", i + 2)));
    let mut h = Expr::zero();
    for a in 0..m {
        for b in 0..m {
            let mut coeff = Expr::zero();
            for (w, &q) in window.iter().enumerate() {
                coeff = Expr::add(coeff, Expr::mul(Expr::num(profile.a[q][(a, b)]), basis[w].clone()));
            }
            let mono = Expr::mul(Expr::var(&coords[a + 2]), Expr::var(&coords[b + 2]));
            h = Expr::add(h, Expr::mul(coeff, mono));
        }
    }
    Ok(MetricSpec::from_fn(&coords, Signature::Lorentzian, |i, j| match (i, j) {
        (1, 0) => Expr::one(),
        (1, 1) => h.clone(),
        (i, j) if i == j && i >= 2 => Expr::one(),
        _ => Expr::zero(),
    })?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// The quantity is nonzero somewhere: no metric in the family has the property.
    Obstructed,
    /// Numerically zero on the grid; nothing follows.
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Obstructed => "OBSTRUCTED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstruction {
    pub name: &'static str,
    pub verdict: Verdict,
    pub magnitude: f64,
    pub threshold: f64,
    pub witness_u: f64,
    /// Transverse index pair of the witnessing `H_iju` component.
    pub witness_index: Option<(usize, usize)>,
}

impl Obstruction {
    fn new(name: &'static str, magnitude: f64, threshold: f64, witness_u: f64, witness_index: Option<(usize, usize)>) -> Self {
        let verdict = if magnitude > threshold { Verdict::Obstructed } else { Verdict::Inconclusive };
        Obstruction { name, verdict, magnitude, threshold, witness_u, witness_index }
    }
}

/// Largest deviation of `Ric(∂_u, ∂_u) = −tr A` from a prescribed Einstein constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinComparison {
    pub lambda: f64,
    pub residual: f64,
    pub witness_u: f64,
}

#[derive(Debug, Clone)]
pub struct ObstructionReport {
    pub parallel_ricci: Obstruction,
    pub ricci_flat: Obstruction,
    pub locally_symmetric: Obstruction,
    pub einstein: Option<EinsteinComparison>,
    pub grid: Grid,
    pub frame_orthonormality: f64,
    pub frame_symmetry: f64,
    pub frame_orthogonality: f64,
    pub profile_asymmetry: f64,
}

impl ObstructionReport {
    pub fn entries(&self) -> [&Obstruction; 3] {
        [&self.parallel_ricci, &self.ricci_flat, &self.locally_symmetric]
    }

    pub fn any_obstructed(&self) -> bool {
        self.entries().iter().any(|o| o.verdict == Verdict::Obstructed)
    }
}

/// Runs the plane-wave pipeline on `axis` and evaluates the three predicates:
/// `ricci_flat` from `max|ΔH|`, `parallel_ricci` from `max|∂_u ΔH|`, and
/// `locally_symmetric` from `max|H_iju|` (some component nonzero).
pub fn obstruction_report(
    axis: &AxisMetric,
    grid: &Grid,
    threshold: f64,
    lambda: Option<f64>,
) -> Result<ObstructionReport, PenroseError> {
    let rosen = penrose_limit_rosen(axis)?;
    let (frame, profile) = rosen_to_brinkmann(&rosen, grid)?;
    let m = profile.dim();
    let (mut lap, mut dlap, mut hiju) = ((0.0f64, grid.u_min()), (0.0f64, grid.u_min()), (0.0f64, grid.u_min(), (0, 0)));
    let mut einstein: Option<EinsteinComparison> = lambda.map(|l| EinsteinComparison { lambda: l, residual: 0.0, witness_u: grid.u_min() });
    for k in 0..grid.len() {
        let u = grid.node(k);
        let (a, da) = (&profile.a[k], &profile.da[k]);
        let l = (2.0 * a.trace()).abs();
        if l > lap.0 {
            lap = (l, u);
        }
        let dl = (2.0 * da.trace()).abs();
        if dl > dlap.0 {
            dlap = (dl, u);
        }
        for i in 0..m {
            for j in 0..m {
                let v = (2.0 * da[(i, j)]).abs();
                if v > hiju.0 {
                    hiju = (v, u, (i, j));
                }
            }
        }
        if let Some(e) = einstein.as_mut() {
            let r = (-a.trace() - e.lambda).abs();
            if r > e.residual {
                e.residual = r;
                e.witness_u = u;
            }
        }
    }
    Ok(ObstructionReport {
        parallel_ricci: Obstruction::new("parallel_ricci", dlap.0, threshold, dlap.1, None),
        ricci_flat: Obstruction::new("ricci_flat", lap.0, threshold, lap.1, None),
        locally_symmetric: Obstruction::new("locally_symmetric", hiju.0, threshold, hiju.1, Some(hiju.2)),
        einstein,
        grid: *grid,
        frame_orthonormality: frame.orthonormality,
        frame_symmetry: frame.symmetry,
        frame_orthogonality: frame.orthogonality,
        profile_asymmetry: profile.asymmetry,
    })
}
