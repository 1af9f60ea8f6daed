//! Command dispatch: each command turns a spec plus flags into a [`Report`].

use std::f64::consts::SQRT_2;

use geolab_core::expr::Point;
use geolab_core::penrose::{
    check_brinkmann_class, check_slice_curvature, hereditary_check, obstruction_report, penrose_limit_rosen,
    rosen_to_brinkmann, tilde_name, verify_brinkmann_isometry, AxisMetric, Grid, HereditaryOptions, PenroseError, Verdict,
};
use geolab_core::tensor::{
    constant_curvature_residual, curvature_at, einstein_residual, Depth, MetricSpec, Signature, TensorError,
};
use geolab_core::tol;
use geolab_core::wick::{
    bochner_residual, check_unit_closed, closed_t_residual, ricci_restriction_residual, sectional_deviation_check,
    surface_identities, theorem3_residual, wick_rotate, Direction, WickError,
};
use geolab_core::Domain;
use serde_json::{json, Value};
use thiserror::Error;

use crate::report::{num, point_json, Check, Report};
use crate::spec::{SpecError, SpecFile};

/// Threshold for residuals that compare two computations of the same quantity.
pub const IDENTITY: f64 = 1e-8;
const DEFAULT_SAMPLES: usize = 32;
const DEFAULT_HEREDITARY_SAMPLES: usize = 8;
const DEFAULT_ISOMETRY_SAMPLES: usize = 64;
const DEFAULT_EPS: [f64; 3] = [1.0, 0.5, 0.25];
const DEFAULT_GRID: (f64, f64, f64) = (0.0, 2.0, 1e-3);
const MIN_ORDER: f64 = 0.9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Penrose(#[from] PenroseError),
    #[error(transparent)]
    Wick(#[from] WickError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Spec(SpecError::Io { .. }) | CliError::Output { .. } => "io",
            CliError::Spec(_) => "spec",
            CliError::Tensor(_) => "tensor",
            CliError::Penrose(_) => "penrose",
            CliError::Wick(_) => "wick",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn to_json(&self) -> String {
        let mut err = serde_json::Map::new();
        err.insert("kind".into(), json!(self.kind()));
        err.insert("message".into(), json!(self.to_string()));
        if let CliError::Spec(e) = self {
            if let Some((line, column)) = e.location() {
                err.insert("line".into(), json!(line));
                err.insert("column".into(), json!(column));
            }
        }
        let mut s = serde_json::to_string(&json!({ "error": Value::Object(err) })).expect("error serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Curvature,
    Penrose,
    Obstruct,
    Wick,
    Classify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Penrose => "penrose",
            Command::Obstruct => "obstruct",
            Command::Wick => "wick",
            Command::Classify => "classify",
        }
    }
}

/// Raw flag values; anything unset falls back to the spec's `[run]` table.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub at: Option<String>,
    pub grid: Option<String>,
    pub eps: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub field: Option<String>,
    pub lambda: Option<f64>,
    pub threshold: Option<f64>,
}

struct Resolved<'a> {
    spec: &'a SpecFile,
    flags: &'a Flags,
}

impl Resolved<'_> {
    fn samples(&self, default: usize) -> usize {
        self.flags.samples.or(self.spec.run.samples).unwrap_or(default)
    }

    fn seed(&self) -> u64 {
        self.flags.seed.or(self.spec.run.seed).unwrap_or(0)
    }

    fn lambda(&self) -> Option<f64> {
        self.flags.lambda.or(self.spec.run.lambda)
    }

    fn threshold(&self) -> f64 {
        self.flags.threshold.or(self.spec.run.threshold).unwrap_or(tol::VERDICT)
    }

    fn eps(&self) -> Vec<f64> {
        self.flags.eps.clone().or_else(|| self.spec.run.eps.clone()).unwrap_or_else(|| DEFAULT_EPS.to_vec())
    }

    fn field(&self) -> Option<&str> {
        self.flags.field.as_deref().or(self.spec.run.field.as_deref())
    }

    /// `--grid`, then the spec's grid, then the axis interval at the default step.
    fn grid(&self, axis: Option<&AxisMetric>) -> Result<Grid, CliError> {
        let (a, b, h) = match (&self.flags.grid, self.spec.run.grid) {
            (Some(s), _) => parse_grid(s)?,
            (None, Some([a, b, h])) => (a, b, h),
            (None, None) => match axis {
                Some(ax) => (ax.interval().0, ax.interval().1, DEFAULT_GRID.2),
                None => DEFAULT_GRID,
            },
        };
        Ok(Grid::new(a, b, h)?)
    }

    /// `--at`, then the spec's point, with missing coordinates at the domain center.
    fn point(&self, coords: &[String], domain: &Domain) -> Result<Point, CliError> {
        let mut p = Point::new();
        let center = domain.for_chart(coords, (0.0, 0.0)).center();
        for c in coords {
            p.insert(c, center.get(c).unwrap_or(0.0));
        }
        if let Some(at) = &self.spec.run.at {
            for (k, v) in at {
                set_coord(&mut p, coords, k, *v)?;
            }
        }
        if let Some(s) = &self.flags.at {
            for (k, v) in parse_at(s)? {
                set_coord(&mut p, coords, &k, v)?;
            }
        }
        Ok(p)
    }

    fn axis(&self) -> Result<AxisMetric, CliError> {
        match &self.spec.axis {
            Some(a) => Ok(a.clone()),
            None => {
                let m = &self.spec.metric;
                let r = &m.coords()[0];
                let interval = match (&self.flags.grid, self.spec.run.grid) {
                    (Some(s), _) => parse_grid(s).map(|(a, b, _)| (a, b))?,
                    (None, Some([a, b, _])) => (a, b),
                    (None, None) => self.spec.domain.range(r).unwrap_or((DEFAULT_GRID.0, DEFAULT_GRID.1)),
                };
                Ok(AxisMetric::from_semigeodesic(m, interval)?)
            }
        }
    }
}

fn set_coord(p: &mut Point, coords: &[String], k: &str, v: f64) -> Result<(), CliError> {
    if !coords.iter().any(|c| c == k) {
        return Err(CliError::Usage(format!("`{k}` is not a coordinate of the metric")));
    }
    p.insert(k, v);
    Ok(())
}

/// `k=v,k=v`.
pub fn parse_at(s: &str) -> Result<Vec<(String, f64)>, CliError> {
    s.split(',')
        .filter(|item| !item.trim().is_empty())
        .map(|item| {
            let (k, v) = item.split_once('=').ok_or_else(|| CliError::Usage(format!("expected k=v in --at, found `{item}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::Usage(format!("`{}` is not a number", v.trim())))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// `a:b:h`.
pub fn parse_grid(s: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Usage(format!("expected --grid a:b:h, found `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    Ok((v[0], v[1], v[2]))
}

fn grid_json(g: &Grid) -> Value {
    json!({ "u_min": num(g.u_min()), "u_max": num(g.u_max()), "h": num(g.h()), "nodes": g.len() })
}

fn matrix_rows(m: &geolab_core::linalg::Mat) -> Vec<Vec<f64>> {
    m.rows()
}

pub fn run(cmd: Command, spec: &SpecFile, flags: &Flags) -> Result<Report, CliError> {
    let r = Resolved { spec, flags };
    let mut report = Report::new(cmd.name(), spec);
    match cmd {
        Command::Curvature => curvature(&r, &mut report)?,
        Command::Penrose => penrose(&r, &mut report)?,
        Command::Obstruct => obstruct(&r, &mut report)?,
        Command::Wick => wick(&r, &mut report)?,
        Command::Classify => classify(&r, &mut report)?,
    }
    Ok(report)
}

fn curvature(r: &Resolved, rep: &mut Report) -> Result<(), CliError> {
    let m = &r.spec.metric;
    let p = r.point(m.coords(), &r.spec.domain)?;
    rep.param("at", point_json(&p));
    rep.param("depth", json!(Depth::Derivatives.name()));
    let b = curvature_at(m, &p, Depth::Derivatives)?;
    rep.push(Check::value("gamma_max", b.gamma.max_abs()));
    rep.push(Check::value("rm_max", b.rm.max_abs()));
    rep.push(Check::matrix("ric", matrix_rows(&b.ric)));
    rep.push(Check::value("scalar", b.scalar));
    if let Some(w) = &b.weyl {
        rep.push(Check::value("weyl_max", w.max_abs()));
    }
    if let Some(c) = &b.cov_rm {
        rep.push(Check::value("cov_rm_max", c.max_abs()));
    }
    if let Some(c) = &b.cov_ric {
        rep.push(Check::value("cov_ric_max", c.max_abs()));
    }
    let s = b.symmetry_residuals();
    for (name, v) in [
        ("gamma_symmetry", s.gamma_symmetry),
        ("rm_antisymmetry_12", s.antisymmetry_12),
        ("rm_antisymmetry_34", s.antisymmetry_34),
        ("rm_pair_exchange", s.pair_exchange),
        ("first_bianchi", s.first_bianchi),
        ("ric_symmetry", s.ric_symmetry),
    ] {
        rep.push(Check::residual(name, v, tol::SYMBOLIC));
    }
    if let Some(w) = s.weyl_trace {
        rep.push(Check::residual("weyl_trace", w, tol::SYMBOLIC));
    }
    if let Some(v) = b.second_bianchi_residual() {
        rep.push(Check::residual("second_bianchi", v, IDENTITY));
    }
    if let Some(l) = r.lambda() {
        rep.param("lambda", num(l));
        // a space of constant curvature k is Einstein with constant (n-1)k
        let k = l / (m.dim() as f64 - 1.0);
        rep.push(Check::residual("einstein", einstein_residual(m, l, &p)?, tol::SYMBOLIC));
        rep.push(
            Check::residual("constant_curvature", constant_curvature_residual(m, k, &p)?, tol::SYMBOLIC)
                .note(&format!("sectional curvature {k} = lambda/(n-1)")),
        );
    }
    Ok(())
}

/// Sampling box for the rescaled chart. With `r = (x̃0 + ε² x̃1)/√2` and
/// transverse coordinates `ε x̃`, a box inside the spec's domain for every
/// `ε ≤ 1` keeps the samples where the metric is defined.
fn tilde_domain(m: &MetricSpec, dom: &Domain) -> Domain {
    const X1: f64 = 0.25;
    let mut out = Domain::new();
    let r = &m.coords()[0];
    if let Some((a, b)) = dom.range(r) {
        let (lo, hi) = (SQRT_2 * a + X1, SQRT_2 * b - X1);
        if lo < hi {
            out.set("x0_", lo, hi);
        } else {
            let mid = SQRT_2 * 0.5 * (a + b);
            out.set("x0_", mid, mid);
        }
    }
    out.set("x1_", -X1, X1);
    for c in &m.coords()[1..] {
        if let Some((a, b)) = dom.range(c) {
            // contracting toward 0 only stays inside when the box contains 0
            let (lo, hi) = if a <= 0.0 && 0.0 <= b { (a, b) } else { (0.5 * (a + b), 0.5 * (a + b)) };
            out.set(&tilde_name(c), lo, hi);
        }
    }
    out
}

fn penrose(r: &Resolved, rep: &mut Report) -> Result<(), CliError> {
    let m = &r.spec.metric;
    if m.signature() != Signature::Riemannian {
        return Err(PenroseError::NotRiemannian.into());
    }
    let axis = r.axis()?;
    let grid = r.grid(Some(&axis))?;
    let axis = axis.with_interval((grid.u_min(), grid.u_max()))?;
    let eps = r.eps();
    let seed = r.seed();
    let opts = HereditaryOptions {
        eps: eps.clone(),
        samples: r.samples(DEFAULT_HEREDITARY_SAMPLES),
        seed,
        lambda: r.lambda(),
        domain: tilde_domain(m, &r.spec.domain),
        interval: axis.interval(),
    };
    let iso_samples = r.samples(DEFAULT_ISOMETRY_SAMPLES);
    rep.param("eps", json!(eps.iter().map(|e| num(*e)).collect::<Vec<_>>()));
    rep.param("samples", json!(opts.samples));
    rep.param("seed", json!(seed));
    rep.param("grid", grid_json(&grid));
    if let Some(l) = opts.lambda {
        rep.param("lambda", num(l));
    }

    let h = hereditary_check(m, &opts)?;
    for c in &h.checks {
        let tag = format!("eps={}", c.eps);
        rep.push(Check::residual(&format!("homothety[{tag}]"), c.homothety, tol::SYMBOLIC));
        rep.push(Check::residual(&format!("ric_equality[{tag}]"), c.ric_equality, IDENTITY));
        rep.push(Check::residual(&format!("rm_scaling[{tag}]"), c.rm_scaling, IDENTITY));
        if let Some(w) = c.weyl_scaling {
            rep.push(Check::residual(&format!("weyl_scaling[{tag}]"), w, IDENTITY));
        }
        rep.push(Check::value(&format!("deviation[{tag}]"), c.deviation));
    }
    let converged = h.checks.iter().all(|c| c.deviation > tol::SYMBOLIC);
    for (k, o) in h.deviation_order.iter().enumerate() {
        let name = format!("deviation_order[eps={}->{}]", h.checks[k].eps, h.checks[k + 1].eps);
        if converged {
            rep.push(Check::at_least(&name, *o, MIN_ORDER));
        } else {
            rep.push(Check::value(&name, *o).note("family already equals its limit"));
        }
    }
    rep.push(Check::value("limit_ric_max", h.limit_ric));
    rep.push(Check::value("limit_cov_rm_max", h.limit_cov_rm));
    if let Some(e) = &h.einstein {
        rep.push(Check::residual("limit_einstein_ric", e.ric_residual, IDENTITY));
        rep.push(Check::value("limit_scalar_max", e.scalar));
    }

    let rosen = penrose_limit_rosen(&axis)?;
    let (frame, profile) = rosen_to_brinkmann(&rosen, &grid)?;
    rep.push(Check::residual("frame_orthonormality", frame.orthonormality, tol::FRAME));
    rep.push(Check::residual("frame_symmetry", frame.symmetry, tol::FRAME));
    rep.push(Check::residual("frame_orthogonality", frame.orthogonality, tol::FRAME));
    rep.push(Check::residual("profile_asymmetry", profile.asymmetry, tol::FRAME));
    let iso = verify_brinkmann_isometry(&rosen, &frame, &profile, iso_samples, seed)?;
    rep.push(Check::residual("brinkmann_isometry", iso.residual, tol::FD_ORACLE).at_point(&iso.witness));
    let mid = grid.len() / 2;
    rep.push(Check::matrix(&format!("profile_a[u={}]", grid.node(mid)), matrix_rows(&profile.a[mid])));
    Ok(())
}

fn obstruct(r: &Resolved, rep: &mut Report) -> Result<(), CliError> {
    let axis = r.axis()?;
    let grid = r.grid(Some(&axis))?;
    let axis = axis.with_interval((grid.u_min(), grid.u_max()))?;
    let threshold = r.threshold();
    let lambda = r.lambda();
    rep.param("grid", grid_json(&grid));
    rep.param("threshold", num(threshold));
    if let Some(l) = lambda {
        rep.param("lambda", num(l));
    }
    let o = obstruction_report(&axis, &grid, threshold, lambda)?;
    for e in o.entries() {
        let mut w = serde_json::Map::new();
        w.insert(axis.var().to_string(), num(e.witness_u));
        if let Some((i, j)) = e.witness_index {
            w.insert("index".into(), json!([axis.names()[i], axis.names()[j]]));
        }
        rep.push(Check::verdict(e.name, e.verdict.name(), e.magnitude, e.threshold, e.verdict == Verdict::Obstructed).witness(Value::Object(w)));
    }
    if let Some(e) = &o.einstein {
        rep.push(
            Check::residual("einstein_trace", e.residual, tol::FD_ORACLE)
                .witness(json!({ axis.var(): num(e.witness_u) }))
                .note("compares -tr A with lambda; not a verdict"),
        );
    }
    rep.push(Check::residual("frame_orthonormality", o.frame_orthonormality, tol::FRAME));
    rep.push(Check::residual("frame_symmetry", o.frame_symmetry, tol::FRAME));
    rep.push(Check::residual("frame_orthogonality", o.frame_orthogonality, tol::FRAME));
    rep.push(Check::residual("profile_asymmetry", o.profile_asymmetry, tol::FRAME));
    Ok(())
}

fn wick(r: &Resolved, rep: &mut Report) -> Result<(), CliError> {
    let t = r.spec.field(r.field())?;
    let dom = &r.spec.domain;
    let samples = r.samples(DEFAULT_SAMPLES);
    let seed = r.seed();
    rep.param("field", json!(t.name()));
    rep.param("samples", json!(samples));
    rep.param("seed", json!(seed));
    let input = &r.spec.metric;
    rep.param("input_signature", json!(input.signature().name()));

    let uc = check_unit_closed(input, t, dom, samples, seed)?;
    rep.push(Check::residual("unit", uc.unit.residual, tol::SYMBOLIC).at_point(&uc.unit.witness));
    rep.push(Check::residual("closed", uc.closed.residual, tol::SYMBOLIC).at_point(&uc.closed.witness));
    if !(uc.is_unit && uc.is_closed) {
        return Ok(());
    }
    let g = match input.signature() {
        Signature::Lorentzian => wick_rotate(input, t, Direction::ToRiemannian, dom, samples, seed)?,
        Signature::Riemannian => input.clone(),
    };
    if input.signature() == Signature::Riemannian {
        let gl = wick_rotate(input, t, Direction::ToLorentzian, dom, samples, seed)?;
        let back = wick_rotate(&gl, t, Direction::ToRiemannian, dom, samples, seed)?;
        let mut gap = 0.0f64;
        for p in dom.samples(samples, seed) {
            gap = gap.max((&back.eval_metric(&p)? - &g.eval_metric(&p)?).max_abs());
        }
        rep.push(Check::residual("involution", gap, tol::SYMBOLIC));
    }

    let c = closed_t_residual(&g, t, dom, samples, seed)?;
    rep.push(Check::residual("closed_t", c.residual, IDENTITY).at_point(&c.witness));
    let ric = ricci_restriction_residual(&g, t, dom, samples, seed)?;
    rep.push(Check::residual("ricci_restriction", ric.residual, IDENTITY).at_point(&ric.witness));
    let b = bochner_residual(&g, t, dom, samples, seed)?;
    rep.push(Check::residual("bochner", b.bochner.residual, tol::FD_ORACLE).at_point(&b.bochner.witness));
    rep.push(Check::at_least("schwarz_gap", b.schwarz_gap, -1e-12));
    if g.dim() == 2 {
        let s = surface_identities(&g, t, dom, samples, seed)?;
        rep.push(Check::residual("surface_hess_square", s.hess_square.residual, tol::SYMBOLIC).at_point(&s.hess_square.witness));
        rep.push(Check::residual("surface_mixed", s.mixed.residual, tol::SYMBOLIC).at_point(&s.mixed.witness));
    }
    if let Some(l) = r.lambda() {
        rep.param("lambda", num(l));
        let th = theorem3_residual(&g, t, l, dom, samples, seed)?;
        rep.push(Check::residual("theorem3_form", th.form.residual, IDENTITY).at_point(&th.form.witness));
        rep.push(
            Check::residual("theorem3_constant_curvature", th.constant_curvature.residual, IDENTITY)
                .at_point(&th.constant_curvature.witness),
        );
        let p = r.point(g.coords(), dom)?;
        rep.param("at", point_json(&p));
        let s = sectional_deviation_check(&g, t, l, &p)?;
        rep.push(Check::residual("sectional_t_planes", s.t_deviation, IDENTITY).at_point(&p));
        rep.push(Check::residual("sectional_eigen_planes", s.eigen_deviation, IDENTITY).at_point(&p));
        rep.push(Check::value("eigen_multiplicity", s.multiplicity as f64));
    }
    Ok(())
}

fn classify(r: &Resolved, rep: &mut Report) -> Result<(), CliError> {
    let samples = r.samples(DEFAULT_SAMPLES);
    let seed = r.seed();
    rep.param("samples", json!(samples));
    rep.param("seed", json!(seed));
    let (metric, domain) = match r.spec.metric.signature() {
        Signature::Lorentzian => (r.spec.metric.clone(), r.spec.domain.clone()),
        Signature::Riemannian => {
            // classify the plane-wave limit, in chart (t, r, x…)
            let axis = r.axis()?;
            let (a, b) = axis.interval();
            let rosen = penrose_limit_rosen(&axis)?;
            let m = rosen.null_ordered();
            let dom = Domain::new().with(&m.coords()[1], a, b);
            rep.param("classified", json!("plane_wave_limit"));
            (m, dom)
        }
    };
    let coords = metric.coords().to_vec();
    let class = check_brinkmann_class(&metric, &domain, samples, seed)?;
    rep.push(Check::flag("is_brinkmann", class.is_brinkmann, None));
    rep.push(Check::flag("is_pp_wave", class.is_pp_wave, None));
    rep.push(Check::flag("is_plane_wave", class.is_plane_wave, None));
    rep.push(Check::value("x0_derivative_max", class.x0_derivative));
    rep.push(Check::value("pp_residual", class.pp_residual));
    rep.push(Check::value("plane_residual", class.plane_residual));
    if !class.is_brinkmann {
        return Ok(());
    }
    let (b, c) = match r.spec.run.slice {
        Some([b, c]) if r.flags.at.is_none() => (b, c),
        _ => {
            let p = r.point(&coords, &domain)?;
            (p.get(&coords[0]).unwrap_or(0.0), p.get(&coords[1]).unwrap_or(0.0))
        }
    };
    rep.param("slice", json!({ coords[0].as_str(): num(b), coords[1].as_str(): num(c) }));
    let s = check_slice_curvature(&metric, b, c, &domain, samples, seed)?;
    rep.push(Check::residual("slice_curvature", s.residual, IDENTITY).at_point(&s.witness));
    rep.push(Check::value("slice_ambient_rm_max", s.ambient_max));
    Ok(())
}
