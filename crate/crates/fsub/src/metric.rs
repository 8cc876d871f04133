//! Pseudo-Finsler metrics `L(x, v)` and their pointwise tensors.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, GeomResult};
use crate::jets::{fd_taylor, seed, FdOptions, Jet, Scalar};

/// Axis-aligned box in chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> ChartBox {
        assert_eq!(lo.len(), hi.len());
        ChartBox { lo, hi }
    }

    pub fn cube(n: usize, r: f64) -> ChartBox {
        ChartBox::new(vec![-r; n], vec![r; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(a, (l, h))| a >= l && a <= h)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l + (h - l) * rng.gen::<f64>())
            .collect()
    }
}

/// How Taylor jets of `L` are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DiffMode {
    /// Jet arithmetic, falling back to sampling when the metric has no jet form.
    #[default]
    Ad,
    /// Always sample.
    Fd,
}

/// A pseudo-Finsler metric on an open subset of `ℝⁿ`.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;
    fn label(&self) -> &str;
    fn eval(&self, x: &[f64], v: &[f64]) -> f64;
    /// `L` on jet arguments, or `None` when only point values are available.
    fn eval_jet(&self, x: &[Jet], v: &[Jet]) -> Option<Jet>;
    fn admissible(&self, _x: &[f64], v: &[f64]) -> bool {
        v.iter().any(|a| *a != 0.0)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|a| a.is_finite())
    }
    /// Region used for sampling base points.
    fn chart_box(&self) -> ChartBox;
}

/// A Lagrangian written once over [`Scalar`].
pub trait Lagrangian: Send + Sync {
    fn dim(&self) -> usize;
    fn lagrangian<S: Scalar>(&self, x: &[S], v: &[S]) -> S;
    fn admissible(&self, _x: &[f64], v: &[f64]) -> bool {
        v.iter().any(|a| *a != 0.0)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|a| a.is_finite())
    }
}

/// Adapts a [`Lagrangian`] to [`MetricField`].
pub struct Metric<L> {
    pub lag: L,
    pub label: String,
    pub bbox: ChartBox,
}

impl<L: Lagrangian> Metric<L> {
    pub fn new(label: impl Into<String>, lag: L, bbox: ChartBox) -> Metric<L> {
        assert_eq!(lag.dim(), bbox.dim());
        Metric {
            lag,
            label: label.into(),
            bbox,
        }
    }
}

impl<L: Lagrangian> MetricField for Metric<L> {
    fn dim(&self) -> usize {
        self.lag.dim()
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        self.lag.lagrangian(x, v)
    }
    fn eval_jet(&self, x: &[Jet], v: &[Jet]) -> Option<Jet> {
        Some(self.lag.lagrangian(x, v))
    }
    fn admissible(&self, x: &[f64], v: &[f64]) -> bool {
        self.lag.admissible(x, v)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        self.lag.in_domain(x)
    }
    fn chart_box(&self) -> ChartBox {
        self.bbox.clone()
    }
}

/// Hides the jet evaluation of the wrapped metric.
pub struct PointsOnly<M>(pub M);

impl<M: MetricField> MetricField for PointsOnly<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn label(&self) -> &str {
        self.0.label()
    }
    fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        self.0.eval(x, v)
    }
    fn eval_jet(&self, _x: &[Jet], _v: &[Jet]) -> Option<Jet> {
        None
    }
    fn admissible(&self, x: &[f64], v: &[f64]) -> bool {
        self.0.admissible(x, v)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        self.0.in_domain(x)
    }
    fn chart_box(&self) -> ChartBox {
        self.0.chart_box()
    }
}

impl<M: MetricField + ?Sized> MetricField for std::sync::Arc<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn label(&self) -> &str {
        (**self).label()
    }
    fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        (**self).eval(x, v)
    }
    fn eval_jet(&self, x: &[Jet], v: &[Jet]) -> Option<Jet> {
        (**self).eval_jet(x, v)
    }
    fn admissible(&self, x: &[f64], v: &[f64]) -> bool {
        (**self).admissible(x, v)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        (**self).in_domain(x)
    }
    fn chart_box(&self) -> ChartBox {
        (**self).chart_box()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDirection {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PointDirection {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> PointDirection {
        assert_eq!(x.len(), v.len());
        PointDirection { x, v }
    }
}

pub(crate) fn vnorm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn check(m: &dyn MetricField, x: &[f64], v: &[f64]) -> GeomResult<()> {
    if !m.in_domain(x) {
        return Err(GeomError::LeftChartDomain);
    }
    if !m.admissible(x, v) {
        return Err(GeomError::NotAdmissible);
    }
    Ok(())
}

/// Taylor jet of `L` at `(x, v)` in the `2n` variables `(δx, δv)`.
pub fn lagrangian_jet(
    m: &dyn MetricField,
    x: &[f64],
    v: &[f64],
    order: usize,
    mode: DiffMode,
) -> GeomResult<Jet> {
    check(m, x, v)?;
    let n = x.len();
    if mode == DiffMode::Ad {
        let (xs, vs) = seed(x, v, order)?;
        if let Some(j) = m.eval_jet(&xs, &vs) {
            return Ok(j);
        }
    }
    let mut p = x.to_vec();
    p.extend_from_slice(v);
    let mut sc = vec![1.0; n];
    sc.extend(std::iter::repeat_n(vnorm(v), n));
    let f = |z: &[f64]| m.eval(&z[..n], &z[n..]);
    Ok(fd_taylor(&f, &p, &sc, order, &FdOptions::default()))
}

/// Taylor jet of `v ↦ L(x, v)` in the `n` variables `δv`.
pub fn fiber_jet(
    m: &dyn MetricField,
    x: &[f64],
    v: &[f64],
    order: usize,
    mode: DiffMode,
) -> GeomResult<Jet> {
    check(m, x, v)?;
    let n = x.len();
    if mode == DiffMode::Ad {
        let (_, vs) = seed(&[], v, order)?;
        let xs: Vec<Jet> = x.iter().map(|&a| vs[0].cst(a)).collect();
        if let Some(j) = m.eval_jet(&xs, &vs) {
            return Ok(j);
        }
    }
    let f = |z: &[f64]| m.eval(x, z);
    Ok(fd_taylor(&f, v, &vec![vnorm(v); n], order, &FdOptions::default()))
}

/// Fundamental tensor `g_v` with its signature `(positive, negative)`.
#[derive(Clone, Debug)]
pub struct FundamentalTensor {
    pub g: DMatrix<f64>,
    pub signature: (usize, usize),
}

/// Cartan tensor `C_v(e, h, b)`, stored densely as `c[(i * n + j) * n + k]`.
#[derive(Clone, Debug)]
pub struct Cartan {
    pub n: usize,
    pub c: Vec<f64>,
}

impl Cartan {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.n + j) * self.n + k]
    }

    pub fn eval(&self, a: &[f64], b: &[f64], e: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += self.get(i, j, k) * a[i] * b[j] * e[k];
                }
            }
        }
        s
    }
}

/// `g`, `C` and `L` at one point, from a single fiber jet.
#[derive(Clone, Debug)]
pub struct Pointwise {
    pub l: f64,
    pub g: DMatrix<f64>,
    pub cartan: Cartan,
}

impl Pointwise {
    pub fn new(m: &dyn MetricField, x: &[f64], v: &[f64], mode: DiffMode) -> GeomResult<Self> {
        let n = x.len();
        let j = fiber_jet(m, x, v, 3, mode)?;
        let mut g = DMatrix::zeros(n, n);
        let mut c = vec![0.0; n * n * n];
        let mut a = vec![0usize; n];
        for i in 0..n {
            for k in 0..n {
                a[i] += 1;
                a[k] += 1;
                g[(i, k)] = 0.5 * j.extract(&a)?;
                for l in 0..n {
                    a[l] += 1;
                    c[(i * n + k) * n + l] = 0.25 * j.extract(&a)?;
                    a[l] -= 1;
                }
                a[i] -= 1;
                a[k] -= 1;
            }
        }
        Ok(Pointwise {
            l: j.value(),
            g,
            cartan: Cartan { n, c },
        })
    }

    pub fn gv(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = a.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.g[(i, j)] * a[i] * b[j];
            }
        }
        s
    }

    /// `C♯(a, b)`, the `g_v`-raised Cartan tensor.
    pub fn cartan_sharp(&self, a: &[f64], b: &[f64]) -> GeomResult<Vec<f64>> {
        let n = a.len();
        let mut low = DVector::zeros(n);
        for (i, li) in low.iter_mut().enumerate() {
            for j in 0..n {
                for k in 0..n {
                    *li += self.cartan.get(i, j, k) * a[j] * b[k];
                }
            }
        }
        let det = self.g.determinant();
        let s = self
            .g
            .clone()
            .lu()
            .solve(&low)
            .ok_or(GeomError::DegenerateMetric { det })?;
        Ok(s.iter().copied().collect())
    }
}

fn signature(g: &DMatrix<f64>) -> (usize, usize) {
    let ev = g.clone().symmetric_eigen().eigenvalues;
    let scale = ev.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let pos = ev.iter().filter(|&&e| e > 1e-12 * scale).count();
    let neg = ev.iter().filter(|&&e| e < -1e-12 * scale).count();
    (pos, neg)
}

/// `g_v = ½ ∂²L/∂v∂v`, refusing degenerate points.
pub fn fundamental_tensor(
    m: &dyn MetricField,
    s: &PointDirection,
    mode: DiffMode,
) -> GeomResult<FundamentalTensor> {
    let p = Pointwise::new(m, &s.x, &s.v, mode)?;
    let n = s.x.len();
    let det = p.g.determinant();
    let scale = p.g.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    if det.abs() < 1e-10 * scale.powi(n as i32) || !det.is_finite() {
        return Err(GeomError::DegenerateMetric { det });
    }
    let sig = signature(&p.g);
    Ok(FundamentalTensor {
        g: p.g,
        signature: sig,
    })
}

pub fn cartan_tensor(m: &dyn MetricField, s: &PointDirection, mode: DiffMode) -> GeomResult<Cartan> {
    Ok(Pointwise::new(m, &s.x, &s.v, mode)?.cartan)
}

pub fn cartan_sharp(
    m: &dyn MetricField,
    s: &PointDirection,
    a: &[f64],
    b: &[f64],
    mode: DiffMode,
) -> GeomResult<Vec<f64>> {
    Pointwise::new(m, &s.x, &s.v, mode)?.cartan_sharp(a, b)
}

/// The covector `g_v(v, ·) = ½ ∂L/∂v`.
pub fn legendre(m: &dyn MetricField, s: &PointDirection, mode: DiffMode) -> GeomResult<Vec<f64>> {
    let j = fiber_jet(m, &s.x, &s.v, 1, mode)?;
    Ok(j.gradient().iter().map(|a| 0.5 * a).collect())
}

/// Solves `g_v(v, ·) = ω` for `v` by damped Newton from `v0`.
pub fn legendre_invert(
    m: &dyn MetricField,
    x: &[f64],
    omega: &[f64],
    v0: &[f64],
    mode: DiffMode,
) -> GeomResult<Vec<f64>> {
    let n = x.len();
    let tol = 1e-12 * vnorm(omega).max(1.0);
    let resid = |v: &[f64]| -> GeomResult<(Vec<f64>, f64)> {
        let j = fiber_jet(m, x, v, 2, mode)?;
        let r: Vec<f64> = j
            .gradient()
            .iter()
            .zip(omega)
            .map(|(a, w)| 0.5 * a - w)
            .collect();
        let nr = vnorm(&r);
        Ok((r, nr))
    };
    let mut v = v0.to_vec();
    if !m.admissible(x, &v) {
        return Err(GeomError::NotAdmissible);
    }
    let (mut r, mut nr) = resid(&v)?;
    for _ in 0..50 {
        if nr <= tol {
            return Ok(v);
        }
        let p = Pointwise::new(m, x, &v, mode)?;
        let det = p.g.determinant();
        let step = p
            .g
            .clone()
            .lu()
            .solve(&DVector::from_column_slice(&r))
            .ok_or(GeomError::DegenerateMetric { det })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<f64> = (0..n).map(|i| v[i] - t * step[i]).collect();
            if m.admissible(x, &cand) {
                if let Ok((rc, nc)) = resid(&cand) {
                    if nc < nr || nc <= tol {
                        v = cand;
                        r = rc;
                        nr = nc;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(GeomError::LeftAdmissibleCone);
        }
    }
    if nr <= tol {
        Ok(v)
    } else {
        Err(GeomError::NoConvergence {
            what: "Legendre inversion",
            iters: 50,
            residual: nr,
        })
    }
}
