//! Submersions described in TOML, with metric coefficients given as
//! expressions in the chart coordinates.
//!
//! The total Lagrangian is `a(x)(v, v)` without a `beta` entry and
//! `(√(a(x)(v, v)) + β(x)v)²` with one.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

use crate::error::GeomError;
use crate::expr::{parse, Definitions, Expr, ExprError};
use crate::jets::Scalar;
use crate::metric::{ChartBox, Lagrangian, Metric, MetricField};
use crate::submersion::SubmersionChart;
use crate::zoo::Flags;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("{field}: {source}")]
    Expr {
        field: String,
        #[source]
        source: ExprError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Which directions are admissible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Cone {
    /// Every nonzero vector.
    #[default]
    Nonzero,
    /// Vectors with `a(v, v) > 0`.
    APositive,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Num(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProjection {
    coordinates: Option<usize>,
    matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    a: Vec<Vec<Entry>>,
    beta: Option<Vec<Entry>>,
    cone: Option<Cone>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBase {
    #[serde(default)]
    induced: bool,
    a: Option<Vec<Vec<Entry>>>,
    beta: Option<Vec<Entry>>,
    cone: Option<Cone>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    label: String,
    dim: usize,
    #[serde(default)]
    summary: String,
    chart: RawChart,
    projection: RawProjection,
    #[serde(default)]
    definitions: HashMap<String, Entry>,
    metric: RawMetric,
    base: RawBase,
    #[serde(default)]
    flags: Flags,
}

/// `a(x)(v, v)` or its Randers form, from parsed expressions.
#[derive(Clone, Debug)]
pub struct ExprLagrangian {
    pub a: Vec<Vec<Expr>>,
    pub beta: Option<Vec<Expr>>,
    pub cone: Cone,
}

impl Lagrangian for ExprLagrangian {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn lagrangian<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let n = self.a.len();
        let mut q = v[0].cst(0.0);
        for i in 0..n {
            for j in 0..n {
                q = q + self.a[i][j].eval(x) * v[i].clone() * v[j].clone();
            }
        }
        match &self.beta {
            None => q,
            Some(b) => {
                let mut l = v[0].cst(0.0);
                for i in 0..n {
                    l = l + b[i].eval(x) * v[i].clone();
                }
                let f = q.sqrt() + l;
                f.clone() * f
            }
        }
    }

    fn admissible(&self, x: &[f64], v: &[f64]) -> bool {
        match self.cone {
            Cone::Nonzero => v.iter().any(|a| *a != 0.0),
            Cone::APositive => {
                let n = self.a.len();
                let mut q = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        q += self.a[i][j].eval(x) * v[i] * v[j];
                    }
                }
                q > 0.0
            }
        }
    }
}

/// A fixture read from a spec file.
pub struct SpecFixture {
    pub label: String,
    pub summary: String,
    pub chart: SubmersionChart,
    pub flags: Flags,
}

fn entry(e: &Entry, field: &str, nvars: usize, defs: &Definitions) -> Result<Expr, SpecError> {
    match e {
        Entry::Num(c) => Ok(Expr::Num(*c)),
        Entry::Text(s) => parse(s, nvars, defs).map_err(|source| SpecError::Expr {
            field: field.to_string(),
            source,
        }),
    }
}

fn lagrangian(
    what: &str,
    a: &[Vec<Entry>],
    beta: Option<&Vec<Entry>>,
    cone: Option<Cone>,
    n: usize,
    defs: &Definitions,
) -> Result<ExprLagrangian, SpecError> {
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(SpecError::Invalid(format!("{what}.a must be {n}×{n}")));
    }
    let a = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, e)| entry(e, &format!("{what}.a[{i}][{j}]"), n, defs))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let beta = match beta {
        None => None,
        Some(b) if b.len() != n => return Err(SpecError::Invalid(format!("{what}.beta must have {n} entries"))),
        Some(b) => Some(
            b.iter()
                .enumerate()
                .map(|(i, e)| entry(e, &format!("{what}.beta[{i}]"), n, defs))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    let cone = cone.unwrap_or(if beta.is_some() { Cone::APositive } else { Cone::Nonzero });
    Ok(ExprLagrangian { a, beta, cone })
}

pub fn parse_spec(src: &str) -> Result<SpecFixture, SpecError> {
    let raw: RawSpec = toml::from_str(src)?;
    let n = raw.dim;
    if raw.chart.lo.len() != n || raw.chart.hi.len() != n {
        return Err(SpecError::Invalid(format!("chart.lo and chart.hi must have {n} entries")));
    }
    if raw.chart.lo.iter().zip(&raw.chart.hi).any(|(l, h)| !(l < h)) {
        return Err(SpecError::Invalid("chart.lo must be below chart.hi".into()));
    }
    let sigma = match (&raw.projection.coordinates, &raw.projection.matrix) {
        (Some(m), None) if *m <= n => SubmersionChart::coordinate(n, *m),
        (None, Some(rows)) => {
            let m = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(SpecError::Invalid(format!("projection.matrix rows must have {n} entries")));
            }
            DMatrix::from_fn(m, n, |i, j| rows[i][j])
        }
        _ => {
            return Err(SpecError::Invalid(
                "projection needs exactly one of `coordinates` (at most dim) or `matrix`".into(),
            ))
        }
    };
    let m = sigma.nrows();
    let defs = Definitions::new(
        raw.definitions
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    Entry::Num(c) => format!("{c:e}"),
                    Entry::Text(s) => s.clone(),
                };
                (k.clone(), s)
            })
            .collect(),
    );
    let total_l = lagrangian("metric", &raw.metric.a, raw.metric.beta.as_ref(), raw.metric.cone, n, &defs)?;
    let bbox = ChartBox::new(raw.chart.lo.clone(), raw.chart.hi.clone());
    let total: Arc<dyn MetricField> = Arc::new(Metric::new(raw.label.clone(), total_l, bbox));
    let chart = match (&raw.base.induced, &raw.base.a) {
        (true, None) => SubmersionChart::with_induced_base(raw.label.clone(), total, sigma)?,
        (false, Some(a)) => {
            let base_l = lagrangian("base", a, raw.base.beta.as_ref(), raw.base.cone, m, &defs)?;
            // the base box is the projection of the total box
            let tmp = SubmersionChart::with_induced_base(raw.label.clone(), total.clone(), sigma.clone())?;
            let base: Arc<dyn MetricField> = Arc::new(Metric::new(format!("{}/base", raw.label), base_l, tmp.base_box()));
            SubmersionChart::new(raw.label.clone(), total, base, sigma)?
        }
        _ => return Err(SpecError::Invalid("base needs either `induced = true` or an `a` matrix".into())),
    };
    Ok(SpecFixture {
        label: raw.label,
        summary: raw.summary,
        chart,
        flags: raw.flags,
    })
}

pub fn load_spec(path: &Path) -> Result<SpecFixture, SpecError> {
    let src = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_spec(&src)
}
