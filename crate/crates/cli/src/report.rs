//! Report records and their JSON / text renderings. The JSON layout is
//! documented in `docs/report-schema.md`.

use std::fmt::Write as _;

use geolab_core::expr::Point;
use serde_json::{json, Map, Value};

use crate::spec::SpecFile;

pub const TOOL: &str = "geolab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One named check. Every number in a report lives in one of these.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub witness: Option<Value>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckKind {
    /// Passes when `residual <= threshold`.
    Residual { residual: f64, threshold: f64 },
    /// Passes when `value >= threshold`.
    AtLeast { value: f64, threshold: f64 },
    /// Informational number.
    Value(f64),
    /// Informational matrix.
    Matrix(Vec<Vec<f64>>),
    /// Boolean outcome; `expected` makes it a pass/fail check.
    Flag { value: bool, expected: Option<bool> },
    Verdict { verdict: &'static str, magnitude: f64, threshold: f64, obstructed: bool },
}

impl Check {
    fn new(name: &str, kind: CheckKind) -> Self {
        Check { name: name.to_string(), kind, witness: None, note: None }
    }

    pub fn residual(name: &str, residual: f64, threshold: f64) -> Self {
        Self::new(name, CheckKind::Residual { residual, threshold })
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, CheckKind::AtLeast { value, threshold })
    }

    pub fn value(name: &str, value: f64) -> Self {
        Self::new(name, CheckKind::Value(value))
    }

    pub fn matrix(name: &str, rows: Vec<Vec<f64>>) -> Self {
        Self::new(name, CheckKind::Matrix(rows))
    }

    pub fn flag(name: &str, value: bool, expected: Option<bool>) -> Self {
        Self::new(name, CheckKind::Flag { value, expected })
    }

    pub fn verdict(name: &str, verdict: &'static str, magnitude: f64, threshold: f64, obstructed: bool) -> Self {
        Self::new(name, CheckKind::Verdict { verdict, magnitude, threshold, obstructed })
    }

    pub fn at_point(mut self, p: &Point) -> Self {
        self.witness = Some(point_json(p));
        self
    }

    pub fn witness(mut self, w: Value) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn note(mut self, s: &str) -> Self {
        self.note = Some(s.to_string());
        self
    }

    /// `None` for informational records.
    pub fn pass(&self) -> Option<bool> {
        match &self.kind {
            CheckKind::Residual { residual, threshold } => Some(*residual <= *threshold),
            CheckKind::AtLeast { value, threshold } => Some(*value >= *threshold),
            CheckKind::Flag { value, expected } => expected.map(|e| e == *value),
            CheckKind::Value(_) | CheckKind::Matrix(_) | CheckKind::Verdict { .. } => None,
        }
    }

    pub fn obstructed(&self) -> bool {
        matches!(self.kind, CheckKind::Verdict { obstructed: true, .. })
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), json!(self.name));
        let kind = match &self.kind {
            CheckKind::Residual { residual, threshold } => {
                m.insert("residual".into(), num(*residual));
                m.insert("threshold".into(), num(*threshold));
                "residual"
            }
            CheckKind::AtLeast { value, threshold } => {
                m.insert("value".into(), num(*value));
                m.insert("threshold".into(), num(*threshold));
                "at_least"
            }
            CheckKind::Value(v) => {
                m.insert("value".into(), num(*v));
                "value"
            }
            CheckKind::Matrix(rows) => {
                m.insert("value".into(), Value::Array(rows.iter().map(|r| Value::Array(r.iter().map(|v| num(*v)).collect())).collect()));
                "matrix"
            }
            CheckKind::Flag { value, expected } => {
                m.insert("value".into(), json!(value));
                if let Some(e) = expected {
                    m.insert("expected".into(), json!(e));
                }
                "flag"
            }
            CheckKind::Verdict { verdict, magnitude, threshold, .. } => {
                m.insert("verdict".into(), json!(verdict));
                m.insert("magnitude".into(), num(*magnitude));
                m.insert("threshold".into(), num(*threshold));
                "verdict"
            }
        };
        m.insert("kind".into(), json!(kind));
        if let Some(p) = self.pass() {
            m.insert("pass".into(), json!(p));
        }
        if let Some(w) = &self.witness {
            m.insert("witness".into(), w.clone());
        }
        if let Some(n) = &self.note {
            m.insert("note".into(), json!(n));
        }
        Value::Object(m)
    }
}

/// Non-finite numbers become `null`; JSON has no spelling for them.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn point_json(p: &Point) -> Value {
    Value::Object(p.iter().map(|(k, v)| (k.to_string(), num(v))).collect())
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub spec_name: String,
    pub spec_source: String,
    pub spec_digest: String,
    pub parameters: Map<String, Value>,
    pub checks: Vec<Check>,
    pub wall_time: Option<f64>,
}

impl Report {
    pub fn new(command: &str, spec: &SpecFile) -> Self {
        Report {
            command: command.to_string(),
            spec_name: spec.name.clone(),
            spec_source: spec.source.clone(),
            spec_digest: spec.digest.clone(),
            parameters: Map::new(),
            checks: Vec::new(),
            wall_time: None,
        }
    }

    pub fn param(&mut self, key: &str, value: Value) {
        self.parameters.insert(key.to_string(), value);
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass() == Some(false)).count()
    }

    pub fn obstructed(&self) -> bool {
        self.checks.iter().any(Check::obstructed)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_value(&self) -> Value {
        // serde_json maps are BTreeMaps here, so keys come out sorted
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "spec": {
                "name": self.spec_name,
                "source": self.spec_source,
                "sha256": self.spec_digest,
            },
            "parameters": Value::Object(self.parameters.clone()),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "summary": {
                "checks": self.checks.len(),
                "failed": self.failed(),
                "obstructed": self.obstructed(),
            },
            "wall_time_s": self.wall_time.map_or(Value::Null, num),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report values serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{TOOL} {VERSION}  {}  {} ({})", self.command, self.spec_name, self.spec_source);
        let _ = writeln!(s, "sha256 {}", self.spec_digest);
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "  {k} = {v}");
        }
        for c in &self.checks {
            let status = match (c.pass(), &c.kind) {
                (_, CheckKind::Verdict { verdict, .. }) => verdict.to_string(),
                (Some(true), _) => "pass".into(),
                (Some(false), _) => "FAIL".into(),
                (None, _) => "".into(),
            };
            let body = match &c.kind {
                CheckKind::Residual { residual, threshold } => format!("{residual:.3e} <= {threshold:.0e}"),
                CheckKind::AtLeast { value, threshold } => format!("{value:.4e} >= {threshold:.0e}"),
                CheckKind::Value(v) => format!("{v:.6e}"),
                CheckKind::Matrix(rows) => format!("{rows:?}"),
                CheckKind::Flag { value, .. } => value.to_string(),
                CheckKind::Verdict { magnitude, threshold, .. } => format!("magnitude {magnitude:.3e} vs {threshold:.0e}"),
            };
            let _ = write!(s, "  {:<34} {:<13} {}", c.name, status, body);
            if let Some(w) = &c.witness {
                let _ = write!(s, "  at {w}");
            }
            if let Some(n) = &c.note {
                let _ = write!(s, "  ({n})");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{} checks, {} failed{}", self.checks.len(), self.failed(), if self.obstructed() { ", OBSTRUCTED" } else { "" });
        if let Some(t) = self.wall_time {
            let _ = writeln!(s, "wall time {t:.3}s");
        }
        s
    }
}
