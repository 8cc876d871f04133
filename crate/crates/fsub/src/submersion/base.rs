//! Horizontal lifts, the induced base metric and fiber metrics.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, GeomResult};
use crate::jets::linalg::{self, JVec};
use crate::jets::{fd_taylor, seed, FdOptions, Jet};
use crate::metric::{fiber_jet, vnorm, ChartBox, DiffMode, MetricField};

/// The data needed to lift base vectors: `L`, `σ⁺` and the kernel basis.
#[derive(Clone, Copy)]
pub(crate) struct Lifter<'a> {
    pub total: &'a dyn MetricField,
    pub section: &'a DMatrix<f64>,
    pub vertical: &'a DMatrix<f64>,
}

impl Lifter<'_> {
    pub fn assemble(&self, a: &[f64], w: &[f64]) -> Vec<f64> {
        let mut out = self.section * DVector::from_column_slice(a);
        if !w.is_empty() {
            out += self.vertical * DVector::from_column_slice(w);
        }
        out.iter().copied().collect()
    }

    /// `(L, ∂L/∂v, ∂²L/∂v²)` at `(x, v)`.
    pub fn fiber_data(
        &self,
        x: &[f64],
        v: &[f64],
        mode: DiffMode,
    ) -> GeomResult<(f64, DVector<f64>, DMatrix<f64>)> {
        let j = fiber_jet(self.total, x, v, 2, mode)?;
        let n = x.len();
        let grad = DVector::from_iterator(n, j.gradient());
        let mut h = DMatrix::zeros(n, n);
        let mut a = vec![0usize; n];
        for i in 0..n {
            for k in 0..n {
                a[i] += 1;
                a[k] += 1;
                h[(i, k)] = j.extract(&a)?;
                a[i] -= 1;
                a[k] -= 1;
            }
        }
        Ok((j.value(), grad, h))
    }

    /// Gradient and Hessian of `w ↦ L(x, v + K w)` at `w = 0`.
    fn vertical_data(&self, x: &[f64], v: &[f64], mode: DiffMode) -> GeomResult<(DVector<f64>, DMatrix<f64>)> {
        let k = self.vertical;
        let r = k.ncols();
        let j = match mode {
            DiffMode::Ad => {
                let (_, ws) = seed(&[], &vec![0.0; r], 2)?;
                let vs: Vec<Jet> = (0..v.len())
                    .map(|i| {
                        let mut e = ws[0].cst(v[i]);
                        for (a, wa) in ws.iter().enumerate() {
                            e.axpy(k[(i, a)], wa);
                        }
                        e
                    })
                    .collect();
                let xs: Vec<Jet> = x.iter().map(|&a| ws[0].cst(a)).collect();
                match self.total.eval_jet(&xs, &vs) {
                    Some(j) => j,
                    None => return self.vertical_data(x, v, DiffMode::Fd),
                }
            }
            DiffMode::Fd => {
                let f = |w: &[f64]| self.total.eval(x, &self.assemble_from(v, w));
                fd_taylor(&f, &vec![0.0; r], &vec![vnorm(v); r], 2, &FdOptions::default())
            }
        };
        let grad = DVector::from_iterator(r, j.gradient());
        let mut h = DMatrix::zeros(r, r);
        let mut al = vec![0usize; r];
        for i in 0..r {
            for l in 0..r {
                al[i] += 1;
                al[l] += 1;
                h[(i, l)] = j.extract(&al)?;
                al[i] -= 1;
                al[l] -= 1;
            }
        }
        Ok((grad, h))
    }

    fn assemble_from(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        (self.vertical * DVector::from_column_slice(w) + DVector::from_column_slice(v))
            .iter()
            .copied()
            .collect()
    }

    /// Newton iteration for `∂L/∂w (x, σ⁺a + K w) = 0`.
    pub fn components(&self, x: &[f64], a: &[f64], w0: &[f64], mode: DiffMode) -> GeomResult<Vec<f64>> {
        let mut w = DVector::from_column_slice(w0);
        let scale = vnorm(a).max(1e-300);
        let mut best = f64::INFINITY;
        let mut stalled = 0;
        for _ in 0..40 {
            let v = self.assemble(a, w.as_slice());
            if !self.total.admissible(x, &v) {
                return Err(GeomError::LeftAdmissibleCone);
            }
            let (gw, hw) = self.vertical_data(x, &v, mode)?;
            let res = gw.amax();
            let tight = if mode == DiffMode::Ad { 1e-14 } else { 1e-11 };
            if res <= tight * scale {
                return Ok(w.iter().copied().collect());
            }
            // rounding floor reached
            if res >= best {
                stalled += 1;
                if stalled >= 2 && res <= 1e-9 * scale {
                    return Ok(w.iter().copied().collect());
                }
            }
            best = best.min(res);
            let det = hw.determinant();
            let step = hw
                .lu()
                .solve(&gw)
                .ok_or(GeomError::DegenerateVertical { pivot: det })?;
            w -= step;
        }
        Err(GeomError::NoConvergence {
            what: "horizontal lift",
            iters: 40,
            residual: best,
        })
    }

    /// Jets of the horizontal lift of `a` at `x`, both given as jets in
    /// the same variables.
    ///
    /// Newton with the frozen Hessian gains one Taylor degree per sweep once
    /// the value is exact.
    pub fn lift_jet(&self, x: &[Jet], a: &[Jet], mode: DiffMode) -> GeomResult<JVec> {
        let nv = x[0].nvars();
        let order = x[0].order();
        let r = self.vertical.ncols();
        let x0 = linalg::values(x);
        let a0 = linalg::values(a);
        let w0 = self.components(&x0, &a0, &vec![0.0; r], mode)?;
        let base_v = linalg::fmat_vec(self.section, a);
        if r == 0 {
            return Ok(base_v);
        }
        let v0 = self.assemble(&a0, &w0);
        let (_, _, h) = self.fiber_data(&x0, &v0, mode)?;
        let hw = self.vertical.transpose() * h * self.vertical;
        let det = hw.determinant();
        let hinv = hw
            .try_inverse()
            .ok_or(GeomError::DegenerateVertical { pivot: det })?;

        let e = nv + r;
        let up = order + 1;
        let map: Vec<Option<usize>> = (0..nv).map(Some).collect();
        let emb = |j: &Jet| j.restrict(&map, e).with_order(up);
        let xe: JVec = x.iter().map(emb).collect();
        let be: JVec = base_v.iter().map(emb).collect();
        let t: JVec = (0..r).map(|i| Jet::variable(e, up, nv + i, 0.0)).collect();
        let back: Vec<Option<usize>> = (0..e).map(|i| (i < nv).then_some(i)).collect();

        let mut w: JVec = w0.iter().map(|&c| x[0].cst(c)).collect();
        for _ in 0..=order {
            let we: JVec = w.iter().zip(&t).map(|(p, q)| emb(p) + q).collect();
            let v = linalg::add(&be, &linalg::fmat_vec(self.vertical, &we));
            let l = self
                .total
                .eval_jet(&xe, &v)
                .ok_or(GeomError::NoJetEvaluation)?;
            let f: JVec = (0..r).map(|i| l.deriv(nv + i).restrict(&back, nv)).collect();
            let step = linalg::fmat_vec(&hinv, &f);
            w = linalg::sub(&w, &step);
        }
        Ok(linalg::add(&base_v, &linalg::fmat_vec(self.vertical, &w)))
    }
}

/// `L̃(x̃, ṽ) = L(σ⁺x̃, ṽ^h)` where `ṽ^h` is the horizontal lift.
pub struct InducedBase {
    label: String,
    total: Arc<dyn MetricField>,
    sigma: DMatrix<f64>,
    section: DMatrix<f64>,
    vertical: DMatrix<f64>,
    mode: DiffMode,
}

impl InducedBase {
    pub fn new(
        label: String,
        total: Arc<dyn MetricField>,
        sigma: DMatrix<f64>,
        section: DMatrix<f64>,
        vertical: DMatrix<f64>,
        mode: DiffMode,
    ) -> InducedBase {
        InducedBase {
            label,
            total,
            sigma,
            section,
            vertical,
            mode,
        }
    }

    fn lifter(&self) -> Lifter<'_> {
        Lifter {
            total: self.total.as_ref(),
            section: &self.section,
            vertical: &self.vertical,
        }
    }

    fn point(&self, xt: &[f64]) -> Vec<f64> {
        (&self.section * DVector::from_column_slice(xt))
            .iter()
            .copied()
            .collect()
    }
}

impl MetricField for InducedBase {
    fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn eval(&self, xt: &[f64], vt: &[f64]) -> f64 {
        let p = self.point(xt);
        let lf = self.lifter();
        match lf.components(&p, vt, &vec![0.0; self.vertical.ncols()], self.mode) {
            Ok(w) => self.total.eval(&p, &lf.assemble(vt, &w)),
            Err(_) => f64::NAN,
        }
    }

    fn eval_jet(&self, xt: &[Jet], vt: &[Jet]) -> Option<Jet> {
        if self.mode == DiffMode::Fd {
            return None;
        }
        let p = linalg::fmat_vec(&self.section, xt);
        let v = self.lifter().lift_jet(&p, vt, self.mode).ok()?;
        self.total.eval_jet(&p, &v)
    }

    fn admissible(&self, _x: &[f64], v: &[f64]) -> bool {
        v.iter().any(|&a| a != 0.0)
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.total.in_domain(&self.point(x))
    }

    fn chart_box(&self) -> ChartBox {
        let b = self.total.chart_box();
        let m = self.sigma.nrows();
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
}

/// `L̂(y, ŵ) = L(p + K y, K ŵ)` on the fiber through `p`.
pub struct FiberMetric {
    label: String,
    total: Arc<dyn MetricField>,
    p: Vec<f64>,
    k: DMatrix<f64>,
}

impl FiberMetric {
    pub fn new(label: String, total: Arc<dyn MetricField>, p: Vec<f64>, k: DMatrix<f64>) -> FiberMetric {
        FiberMetric { label, total, p, k }
    }

    fn point(&self, y: &[f64]) -> Vec<f64> {
        let d = &self.k * DVector::from_column_slice(y);
        self.p.iter().zip(d.iter()).map(|(a, b)| a + b).collect()
    }

    fn dir(&self, w: &[f64]) -> Vec<f64> {
        (&self.k * DVector::from_column_slice(w)).iter().copied().collect()
    }
}

impl MetricField for FiberMetric {
    fn dim(&self) -> usize {
        self.k.ncols()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn eval(&self, y: &[f64], w: &[f64]) -> f64 {
        self.total.eval(&self.point(y), &self.dir(w))
    }

    fn eval_jet(&self, y: &[Jet], w: &[Jet]) -> Option<Jet> {
        let p: JVec = linalg::fmat_vec(&self.k, y)
            .into_iter()
            .zip(&self.p)
            .map(|(d, &c)| d + c)
            .collect();
        let v = linalg::fmat_vec(&self.k, w);
        self.total.eval_jet(&p, &v)
    }

    fn admissible(&self, y: &[f64], w: &[f64]) -> bool {
        self.total.admissible(&self.point(y), &self.dir(w))
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        self.total.in_domain(&self.point(y))
    }

    fn chart_box(&self) -> ChartBox {
        ChartBox::cube(self.k.ncols(), 1.0)
    }
}

/// `factor · L`.
pub struct Scaled {
    pub inner: Arc<dyn MetricField>,
    pub factor: f64,
}

impl MetricField for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn label(&self) -> &str {
        self.inner.label()
    }

    fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        self.factor * self.inner.eval(x, v)
    }

    fn eval_jet(&self, x: &[Jet], v: &[Jet]) -> Option<Jet> {
        self.inner.eval_jet(x, v).map(|j| j * self.factor)
    }

    fn admissible(&self, x: &[f64], v: &[f64]) -> bool {
        self.inner.admissible(x, v)
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.inner.in_domain(x)
    }

    fn chart_box(&self) -> ChartBox {
        self.inner.chart_box()
    }
}
