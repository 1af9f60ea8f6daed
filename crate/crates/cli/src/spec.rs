//! Spec files: a metric, its sampling box, optional vector fields, an optional
//! axis matrix and run defaults, written as TOML. See `docs/spec-format.md`.

use std::collections::BTreeMap;
use std::path::Path;

use geolab_core::expr::{parse, Expr, ExprError};
use geolab_core::penrose::AxisMetric;
use geolab_core::tensor::{MetricSpec, Signature};
use geolab_core::wick::VectorFieldSpec;
use geolab_core::Domain;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::Spanned;

/// Bundled specs, addressable by name with or without the `.spec` suffix.
pub const CATALOG: &[(&str, &str)] = &[
    ("flat2", include_str!("../specs/flat2.spec")),
    ("flat3", include_str!("../specs/flat3.spec")),
    ("sphere2_semigeo", include_str!("../specs/sphere2_semigeo.spec")),
    ("exp_einstein3", include_str!("../specs/exp_einstein3.spec")),
    ("desitter3", include_str!("../specs/desitter3.spec")),
    ("example2_3d", include_str!("../specs/example2_3d.spec")),
    ("brinkmann_quadratic", include_str!("../specs/brinkmann_quadratic.spec")),
    ("brinkmann_cubic", include_str!("../specs/brinkmann_cubic.spec")),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("no spec file or catalog entry named `{0}`")]
    Unknown(String),
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: in `{text}`: {source}")]
    Expr { line: usize, column: usize, text: String, source: ExprError },
    #[error("{line}:{column}: components[{row}][{col}] does not match components[{col}][{row}]")]
    Symmetry { line: usize, column: usize, row: usize, col: usize },
    #[error("{0}")]
    Invalid(String),
}

impl SpecError {
    pub fn location(&self) -> Option<(usize, usize)> {
        match self {
            SpecError::Syntax { line, column, .. }
            | SpecError::Expr { line, column, .. }
            | SpecError::Symmetry { line, column, .. } => Some((*line, *column)),
            _ => None,
        }
    }
}

/// Defaults a spec may carry for the command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDefaults {
    pub grid: Option<[f64; 3]>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub lambda: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub field: Option<String>,
    pub at: Option<BTreeMap<String, f64>>,
    pub slice: Option<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    metric: RawMetric,
    #[serde(default)]
    domain: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    vector_field: Vec<RawField>,
    axis: Option<RawAxis>,
    #[serde(default)]
    run: RunDefaults,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    name: String,
    signature: Spanned<String>,
    coords: Vec<String>,
    components: Vec<Vec<Spanned<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    name: String,
    components: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    var: String,
    names: Vec<String>,
    components: Vec<Vec<Spanned<String>>>,
    interval: Option<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct SpecFile {
    pub name: String,
    /// Path or `catalog:<name>`.
    pub source: String,
    /// Hex SHA-256 of the file bytes.
    pub digest: String,
    pub metric: MetricSpec,
    pub domain: Domain,
    pub fields: Vec<VectorFieldSpec>,
    pub axis: Option<AxisMetric>,
    pub run: RunDefaults,
}

impl SpecFile {
    pub fn field(&self, name: Option<&str>) -> Result<&VectorFieldSpec, SpecError> {
        match name {
            Some(n) => self
                .fields
                .iter()
                .find(|f| f.name() == n)
                .ok_or_else(|| SpecError::Invalid(format!("spec has no vector field named `{n}`"))),
            None => match self.fields.as_slice() {
                [f] => Ok(f),
                [] => Err(SpecError::Invalid("spec declares no vector field".into())),
                _ => Err(SpecError::Invalid("spec declares several vector fields; pick one with --field".into())),
            },
        }
    }
}

pub fn catalog_source(name: &str) -> Option<&'static str> {
    let key = name.strip_prefix("catalog:").unwrap_or(name);
    let key = key.strip_suffix(".spec").unwrap_or(key);
    CATALOG.iter().find(|(n, _)| *n == key).map(|(_, s)| *s)
}

/// Loads a spec from a path, falling back to the bundled catalog.
pub fn load_spec(arg: &str) -> Result<SpecFile, SpecError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpecError::Io { path: arg.to_string(), message: e.to_string() })?;
        return parse_spec(&text, arg);
    }
    match catalog_source(arg) {
        Some(text) => {
            let key = arg.strip_prefix("catalog:").unwrap_or(arg);
            parse_spec(text, &format!("catalog:{}", key.strip_suffix(".spec").unwrap_or(key)))
        }
        None if path.exists() => Err(SpecError::Io { path: arg.to_string(), message: "not a regular file".into() }),
        None => Err(SpecError::Unknown(arg.to_string())),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn expr_offset(e: &ExprError) -> usize {
    match e {
        ExprError::Syntax { offset, .. }
        | ExprError::UnknownIdentifier { offset, .. }
        | ExprError::UnknownFunction { offset, .. } => *offset,
        _ => 0,
    }
}

fn parse_at<S: AsRef<str>>(text: &str, s: &Spanned<String>, vars: &[S]) -> Result<Expr, SpecError> {
    parse(s.get_ref(), vars).map_err(|source| {
        // +1 skips the opening quote
        let (line, column) = line_col(text, s.span().start + 1 + expr_offset(&source));
        SpecError::Expr { line, column, text: s.get_ref().clone(), source }
    })
}

fn parse_rows<S: AsRef<str>>(
    text: &str,
    rows: &[Vec<Spanned<String>>],
    vars: &[S],
    what: &str,
) -> Result<Vec<Vec<Expr>>, SpecError> {
    let n = rows.len();
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n && row.len() != i + 1 {
            let (line, column) = row.first().map_or((0, 0), |s| line_col(text, s.span().start));
            return Err(SpecError::Syntax {
                line,
                column,
                message: format!("{what} row {i} has {} entries; expected {} or {n}", row.len(), i + 1),
            });
        }
        out.push(row.iter().map(|s| parse_at(text, s, vars)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(out)
}

/// Upper-triangle entries, where given, must agree with the lower triangle
/// either structurally or numerically at sample points.
fn check_symmetric(
    text: &str,
    raw: &[Vec<Spanned<String>>],
    rows: &[Vec<Expr>],
    domain: &Domain,
) -> Result<(), SpecError> {
    let n = rows.len();
    let points = domain.samples(8, 0);
    for i in 0..n {
        if rows[i].len() != n {
            continue;
        }
        for j in (i + 1)..n {
            let (upper, lower) = (&rows[i][j], &rows[j][i]);
            let same = upper == lower
                || points.iter().all(|p| match (upper.eval(p), lower.eval(p)) {
                    (Ok(a), Ok(b)) => (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0),
                    _ => false,
                });
            if !same {
                let (line, column) = line_col(text, raw[i][j].span().start);
                return Err(SpecError::Symmetry { line, column, row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn parse_spec(text: &str, source: &str) -> Result<SpecFile, SpecError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        SpecError::Syntax { line, column, message: e.message().to_string() }
    })?;
    let m = &raw.metric;
    let signature = Signature::from_name(m.signature.get_ref()).ok_or_else(|| {
        let (line, column) = line_col(text, m.signature.span().start);
        SpecError::Syntax {
            line,
            column,
            message: format!("signature must be `riemannian` or `lorentzian`, found `{}`", m.signature.get_ref()),
        }
    })?;
    for (i, c) in m.coords.iter().enumerate() {
        if m.coords[..i].contains(c) {
            return Err(SpecError::Invalid(format!("coordinate `{c}` is declared twice")));
        }
    }
    if m.components.len() != m.coords.len() {
        return Err(SpecError::Invalid(format!(
            "metric has {} coordinates but {} component rows",
            m.coords.len(),
            m.components.len()
        )));
    }
    let mut domain = Domain::new();
    for (name, [lo, hi]) in &raw.domain {
        if !m.coords.contains(name) {
            return Err(SpecError::Invalid(format!("domain names `{name}`, which is not a coordinate")));
        }
        if !(lo <= hi) {
            return Err(SpecError::Invalid(format!("domain for `{name}` is empty: [{lo}, {hi}]")));
        }
        domain.set(name, *lo, *hi);
    }
    let domain = domain.for_chart(&m.coords, (-1.0, 1.0));
    let rows = parse_rows(text, &m.components, &m.coords, "metric")?;
    check_symmetric(text, &m.components, &rows, &domain)?;
    let metric = MetricSpec::from_rows(&m.coords, signature, &rows).map_err(|e| SpecError::Invalid(e.to_string()))?;

    let mut fields = Vec::new();
    for f in &raw.vector_field {
        if f.components.len() != m.coords.len() {
            return Err(SpecError::Invalid(format!(
                "vector field `{}` has {} components for {} coordinates",
                f.name,
                f.components.len(),
                m.coords.len()
            )));
        }
        if fields.iter().any(|v: &VectorFieldSpec| v.name() == f.name) {
            return Err(SpecError::Invalid(format!("vector field `{}` is declared twice", f.name)));
        }
        let comps = f.components.iter().map(|s| parse_at(text, s, &m.coords)).collect::<Result<Vec<_>, _>>()?;
        fields.push(VectorFieldSpec::new(&f.name, comps));
    }

    let axis = match &raw.axis {
        None => None,
        Some(a) => {
            let rows = parse_rows(text, &a.components, &[a.var.as_str()], "axis")?;
            let interval = a.interval.or(raw.run.grid.map(|g| (g[0], g[1]).into())).unwrap_or([0.0, 2.0]);
            Some(
                AxisMetric::new(&a.var, &a.names, &rows, (interval[0], interval[1]))
                    .map_err(|e| SpecError::Invalid(format!("axis: {e}")))?,
            )
        }
    };

    Ok(SpecFile {
        name: m.name.clone(),
        source: source.to_string(),
        digest: format!("{:x}", Sha256::digest(text.as_bytes())),
        metric,
        domain,
        fields,
        axis,
        run: raw.run,
    })
}
