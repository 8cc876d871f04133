//! Linear submersions `σ(x) = S x` between pseudo-Finsler charts.
//!
//! The vertical space is the constant kernel of `S`, so coordinate-constant
//! vertical vectors are vertical fields and fibers are affine slices.

mod base;
mod holonomy;
mod oneill;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, GeomResult};
use crate::jets::linalg::{self, JVec};
use crate::jets::Jet;
use crate::metric::{vnorm, ChartBox, DiffMode, MetricField, PointsOnly};

pub(crate) use base::Lifter;
pub use base::{FiberMetric, InducedBase, Scaled};
pub use holonomy::{holonomy_transport, horizontal_lift, Transport};
pub use oneill::{ONeill, ParallelPolicy};

/// Deliberate defects used as negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Corruption {
    #[default]
    None,
    /// Multiplies the base Lagrangian by the given factor.
    BaseRescale(f64),
    /// Reverses the sign of `A`.
    FlipA,
    /// Omits the `C♯(x, A_v y)` term of `Q̃`.
    DropQTildeTerm,
}

pub struct SubmersionChart {
    pub label: String,
    pub total: Arc<dyn MetricField>,
    pub base: Arc<dyn MetricField>,
    /// `m × n` matrix of `σ`.
    pub sigma: DMatrix<f64>,
    /// Right inverse `σ⁺ = Sᵀ(SSᵀ)⁻¹`.
    pub section: DMatrix<f64>,
    /// Euclidean-orthonormal kernel basis, `n × r`.
    pub vertical: DMatrix<f64>,
    pub corruption: Corruption,
    induced: bool,
}

/// `e = top + bot` with respect to `g_v`.
#[derive(Clone, Debug)]
pub struct Splitting {
    pub top: Vec<f64>,
    pub bot: Vec<f64>,
    /// `g_v`-orthonormal vertical frame.
    pub basis: Vec<Vec<f64>>,
    /// `ε_i = g_v(u_i, u_i) = ±1`.
    pub signs: Vec<f64>,
}

fn kernel_basis(s: &DMatrix<f64>) -> GeomResult<DMatrix<f64>> {
    let (m, n) = s.shape();
    let sv = s.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0_f64, |a, b| a.max(*b));
    let rank = sv.iter().filter(|&&x| x > 1e-12 * smax.max(1e-300)).count();
    if rank < m {
        return Err(GeomError::RankDeficient { rank, expected: m });
    }
    // Gram–Schmidt on the rows of S, then on the unit vectors, keeping the
    // largest remainder each time
    let mut q: Vec<DVector<f64>> = Vec::new();
    for i in 0..m {
        let mut r = s.row(i).transpose();
        for b in &q {
            let c = r.dot(b);
            r -= b * c;
        }
        let nr = r.norm();
        q.push(r / nr);
    }
    let mut out = Vec::new();
    while q.len() < n {
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = 0.0;
        for i in 0..n {
            let mut r = DVector::zeros(n);
            r[i] = 1.0;
            for _ in 0..2 {
                for b in &q {
                    let c = r.dot(b);
                    r -= b * c;
                }
            }
            let nr = r.norm();
            if nr > best_norm + 1e-12 {
                best_norm = nr;
                best = Some(r / nr);
            }
        }
        let b = best.expect("a complement vector exists");
        q.push(b.clone());
        out.push(b);
    }
    let r = n - m;
    Ok(DMatrix::from_fn(n, r, |i, j| out[j][i]))
}

impl SubmersionChart {
    pub fn new(
        label: impl Into<String>,
        total: Arc<dyn MetricField>,
        base: Arc<dyn MetricField>,
        sigma: DMatrix<f64>,
    ) -> GeomResult<SubmersionChart> {
        let n = total.dim();
        let m = base.dim();
        if sigma.shape() != (m, n) {
            return Err(GeomError::Invalid(format!(
                "projection is {}×{}, expected {m}×{n}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let vertical = kernel_basis(&sigma)?;
        let sst = &sigma * sigma.transpose();
        let section = sigma.transpose()
            * sst
                .try_inverse()
                .ok_or(GeomError::RankDeficient { rank: 0, expected: m })?;
        Ok(SubmersionChart {
            label: label.into(),
            total,
            base,
            sigma,
            section,
            vertical,
            corruption: Corruption::None,
            induced: false,
        })
    }

    /// Base metric defined by `L̃(σv) = L(v)` on horizontal `v`.
    ///
    /// `L` must be invariant along the fibers for this to be well defined.
    pub fn with_induced_base(
        label: impl Into<String>,
        total: Arc<dyn MetricField>,
        sigma: DMatrix<f64>,
    ) -> GeomResult<SubmersionChart> {
        let label = label.into();
        let tmp = SubmersionChart::new(
            label.clone(),
            total.clone(),
            Arc::new(PointsOnly(Placeholder(sigma.nrows()))),
            sigma.clone(),
        )?;
        let base = InducedBase::new(
            format!("{label}/base"),
            total.clone(),
            sigma.clone(),
            tmp.section.clone(),
            tmp.vertical.clone(),
            DiffMode::Ad,
        );
        let mut c = SubmersionChart::new(label, total, Arc::new(base), sigma)?;
        c.induced = true;
        Ok(c)
    }

    /// Coordinate projection onto the first `m` coordinates.
    pub fn coordinate(n: usize, m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        let n = self.total.dim();
        let m = self.base.dim();
        (n, m, n - m)
    }

    pub fn has_induced_base(&self) -> bool {
        self.induced
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        (&self.sigma * DVector::from_column_slice(x))
            .iter()
            .copied()
            .collect()
    }

    /// `σ⁺ x̃`.
    pub fn section_point(&self, xt: &[f64]) -> Vec<f64> {
        (&self.section * DVector::from_column_slice(xt))
            .iter()
            .copied()
            .collect()
    }

    /// Vertical basis at `p`; constant for a linear projection.
    pub fn vertical_basis(&self, _p: &[f64]) -> Vec<Vec<f64>> {
        (0..self.vertical.ncols())
            .map(|j| self.vertical.column(j).iter().copied().collect())
            .collect()
    }

    /// `σ⁺ ã + K w`.
    pub fn assemble(&self, a: &[f64], w: &[f64]) -> Vec<f64> {
        let mut out = &self.section * DVector::from_column_slice(a);
        if !w.is_empty() {
            out += &self.vertical * DVector::from_column_slice(w);
        }
        out.iter().copied().collect()
    }

    /// Copy whose derivatives are all obtained by sampling.
    pub fn sampled(&self) -> SubmersionChart {
        let total: Arc<dyn MetricField> = Arc::new(PointsOnly(self.total.clone()));
        let base: Arc<dyn MetricField> = if self.induced {
            Arc::new(PointsOnly(InducedBase::new(
                format!("{}/base", self.label),
                total.clone(),
                self.sigma.clone(),
                self.section.clone(),
                self.vertical.clone(),
                DiffMode::Fd,
            )))
        } else {
            Arc::new(PointsOnly(self.base.clone()))
        };
        // a non-induced base already carries its rescaling
        let base = match self.corruption {
            Corruption::BaseRescale(f) if self.induced => Arc::new(Scaled { inner: base, factor: f }),
            _ => base,
        };
        SubmersionChart {
            label: self.label.clone(),
            total,
            base,
            sigma: self.sigma.clone(),
            section: self.section.clone(),
            vertical: self.vertical.clone(),
            corruption: self.corruption,
            induced: self.induced,
        }
    }

    /// Applies a negative-control corruption.
    pub fn corrupted(mut self, c: Corruption) -> SubmersionChart {
        if let Corruption::BaseRescale(f) = c {
            self.base = Arc::new(Scaled {
                inner: self.base.clone(),
                factor: f,
            });
        }
        self.corruption = c;
        self
    }

    pub(crate) fn lifter(&self) -> Lifter<'_> {
        Lifter {
            total: self.total.as_ref(),
            section: &self.section,
            vertical: &self.vertical,
        }
    }

    fn fiber_data(
        &self,
        x: &[f64],
        v: &[f64],
        mode: DiffMode,
    ) -> GeomResult<(f64, DVector<f64>, DMatrix<f64>)> {
        self.lifter().fiber_data(x, v, mode)
    }

    /// `g_v`-orthonormal vertical frame by Gram–Schmidt, with signs.
    pub fn vertical_frame(
        &self,
        x: &[f64],
        v: &[f64],
        mode: DiffMode,
    ) -> GeomResult<(Vec<Vec<f64>>, Vec<f64>)> {
        let (_, _, h) = self.fiber_data(x, v, mode)?;
        let g = h * 0.5;
        gram_schmidt(&g, &self.vertical_basis(x))
    }

    pub fn split(&self, x: &[f64], v: &[f64], e: &[f64], mode: DiffMode) -> GeomResult<Splitting> {
        let (_, _, h) = self.fiber_data(x, v, mode)?;
        let g = h * 0.5;
        let (basis, signs) = gram_schmidt(&g, &self.vertical_basis(x))?;
        let n = e.len();
        let ev = DVector::from_column_slice(e);
        let mut top = vec![0.0; n];
        for (u, s) in basis.iter().zip(&signs) {
            let uv = DVector::from_column_slice(u);
            let c = s * ev.dot(&(&g * &uv));
            for i in 0..n {
                top[i] += c * u[i];
            }
        }
        let bot = (0..n).map(|i| e[i] - top[i]).collect();
        Ok(Splitting {
            top,
            bot,
            basis,
            signs,
        })
    }

    /// `max_i |g_v(v, u_i)|` over a `g_v`-orthonormal vertical frame.
    pub fn horizontality_residual(&self, x: &[f64], v: &[f64], mode: DiffMode) -> GeomResult<f64> {
        let (_, grad, h) = self.fiber_data(x, v, mode)?;
        let g = h * 0.5;
        let (basis, _) = gram_schmidt(&g, &self.vertical_basis(x))?;
        // g_v(v, ·) = ½ ∂L/∂v
        Ok(basis
            .iter()
            .map(|u| (0.5 * grad.dot(&DVector::from_column_slice(u))).abs())
            .fold(0.0, f64::max))
    }

    pub fn is_horizontal(&self, x: &[f64], v: &[f64], tol: f64, mode: DiffMode) -> GeomResult<(bool, f64)> {
        let r = self.horizontality_residual(x, v, mode)?;
        Ok((r <= tol, r))
    }

    /// Vertical components `w` of the horizontal lift `σ⁺ã + K w` of `ã` at `x`.
    pub fn lift_components(
        &self,
        x: &[f64],
        a: &[f64],
        w0: &[f64],
        mode: DiffMode,
    ) -> GeomResult<Vec<f64>> {
        self.lifter().components(x, a, w0, mode)
    }

    /// The horizontal vector at `x` projecting to `ã`.
    pub fn lift_vector(&self, x: &[f64], a: &[f64], mode: DiffMode) -> GeomResult<Vec<f64>> {
        let r = self.vertical.ncols();
        let w = self.lift_components(x, a, &vec![0.0; r], mode)?;
        Ok(self.assemble(a, &w))
    }

    /// Lifts from two seeds; `false` when they land on different vectors.
    pub fn lift_is_unique(&self, x: &[f64], a: &[f64], spread: f64, mode: DiffMode) -> GeomResult<bool> {
        let r = self.vertical.ncols();
        let s = vnorm(a) * spread;
        let w1 = self.lift_components(x, a, &vec![s; r], mode)?;
        let w2 = self.lift_components(x, a, &vec![-s; r], mode)?;
        Ok(w1.iter().zip(&w2).all(|(p, q)| (p - q).abs() <= 1e-8 * vnorm(a).max(1.0)))
    }

    /// Restriction of `L` to the fiber through `p`, in kernel coordinates.
    pub fn fiber_metric(&self, p: &[f64]) -> FiberMetric {
        FiberMetric::new(
            format!("{}/fiber", self.label),
            self.total.clone(),
            p.to_vec(),
            self.vertical.clone(),
        )
    }

    /// Base chart box: the image of the total box.
    pub fn base_box(&self) -> ChartBox {
        let b = self.total.chart_box();
        let (_, m, _) = self.dims();
        let mut lo = vec![0.0; m];
        let mut hi = vec![0.0; m];
        for i in 0..m {
            for (j, (l, h)) in b.lo.iter().zip(&b.hi).enumerate() {
                let s = self.sigma[(i, j)];
                lo[i] += (s * l).min(s * h);
                hi[i] += (s * l).max(s * h);
            }
        }
        ChartBox::new(lo, hi)
    }

    /// Jets of `σ⁺ã + K w` for the horizontal lift over jet arguments.
    ///
    /// With sampled derivatives only the first-order part is produced, by
    /// central differences of the lift along the linear part of `x`, `a`.
    pub fn lift_jets(&self, x: &[Jet], a: &[Jet], mode: DiffMode) -> GeomResult<JVec> {
        if mode == DiffMode::Ad {
            return self.lifter().lift_jet(x, a, mode);
        }
        let nv = x[0].nvars();
        let x0 = linalg::values(x);
        let a0 = linalg::values(a);
        let r = self.vertical.ncols();
        let w0 = self.lift_components(&x0, &a0, &vec![0.0; r], mode)?;
        let v0 = self.assemble(&a0, &w0);
        let h = 1e-5;
        let mut out: JVec = v0.iter().map(|&c| Jet::constant(nv, 1, c)).collect();
        for j in 0..nv {
            let at = |t: f64| -> GeomResult<Vec<f64>> {
                let xs: Vec<f64> = x.iter().map(|f| f.value() + t * f.gradient()[j]).collect();
                let as_: Vec<f64> = a.iter().map(|f| f.value() + t * f.gradient()[j]).collect();
                let w = self.lift_components(&xs, &as_, &w0, mode)?;
                Ok(self.assemble(&as_, &w))
            };
            let (p, m) = (at(h)?, at(-h)?);
            let dj = Jet::variable(nv, 1, j, 0.0);
            for (o, (pi, mi)) in out.iter_mut().zip(p.iter().zip(&m)) {
                o.axpy((pi - mi) / (2.0 * h), &dj);
            }
        }
        Ok(out)
    }
}

/// Gram–Schmidt with respect to `g`, refusing tiny pivots.
pub(crate) fn gram_schmidt(
    g: &DMatrix<f64>,
    vs: &[Vec<f64>],
) -> GeomResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let scale = g.amax().max(1e-300);
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut signs = Vec::new();
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        (DVector::from_column_slice(a).transpose() * g * DVector::from_column_slice(b))[0]
    };
    for v in vs {
        let mut r = v.clone();
        for (u, s) in out.iter().zip(&signs) {
            let c = s * ip(&r, u);
            for i in 0..r.len() {
                r[i] -= c * u[i];
            }
        }
        let p = ip(&r, &r);
        if p.abs() < 1e-9 * scale * vnorm(&r).powi(2).max(1e-300) || !p.is_finite() {
            return Err(GeomError::DegenerateVertical { pivot: p });
        }
        let nr = p.abs().sqrt();
        out.push(r.iter().map(|a| a / nr).collect());
        signs.push(p.signum());
    }
    Ok((out, signs))
}

/// Stand-in base used while the section of an induced base is computed.
struct Placeholder(usize);

impl MetricField for Placeholder {
    fn dim(&self) -> usize {
        self.0
    }
    fn label(&self) -> &str {
        "placeholder"
    }
    fn eval(&self, _x: &[f64], v: &[f64]) -> f64 {
        v.iter().map(|a| a * a).sum()
    }
    fn eval_jet(&self, _x: &[Jet], _v: &[Jet]) -> Option<Jet> {
        None
    }
    fn chart_box(&self) -> ChartBox {
        ChartBox::cube(self.0, 1.0)
    }
}

#[cfg(test)]
mod tests;
