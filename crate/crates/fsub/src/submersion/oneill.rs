//! O'Neill tensors, the second fundamental forms `Q̂`, `Q̃` and the split
//! curvatures at one admissible `(x, v)`.
//!
//! Every tensor is built as a jet field over the site variables, so its
//! covariant derivative is one more application of [`Site::nabla`].

use std::cell::OnceCell;

use nalgebra::{DMatrix, DVector};

use super::{gram_schmidt, Corruption, SubmersionChart};
use crate::chern::Site;
use crate::error::{GeomError, GeomResult};
use crate::jets::linalg::{self, JMat, JVec};
use crate::jets::Jet;
use crate::metric::DiffMode;

/// How a reference vector `v` is extended to a field `V(x) = v + B(x − x₀)`.
#[derive(Clone, Debug)]
pub enum ParallelPolicy {
    /// `B = 0`.
    Constant,
    Affine(DMatrix<f64>),
    /// `B = −N(x₀, v)`, so that `∇ᵛV = 0` at `x₀`.
    FirstOrderParallel,
}

impl ParallelPolicy {
    pub fn matrix(&self, site: &Site) -> DMatrix<f64> {
        let n = site.n;
        match self {
            ParallelPolicy::Constant => DMatrix::zeros(n, n),
            ParallelPolicy::Affine(b) => b.clone(),
            ParallelPolicy::FirstOrderParallel => {
                DMatrix::from_fn(n, n, |i, j| -site.nonlin[i][j].value())
            }
        }
    }
}

pub struct ONeill<'a> {
    pub chart: &'a SubmersionChart,
    pub site: Site,
    pub mode: DiffMode,
    /// Vertical projector `P = K (Kᵀ g K)⁻¹ Kᵀ g` as jets.
    pub proj: JMat,
    pub p0: DMatrix<f64>,
    /// `χ_j` with `χ(h, e) = Σ_j hʲ χ_j e = T_{h⊤} e + A_{h⊥} e`.
    chi: Vec<JMat>,
    chi0: Vec<DMatrix<f64>>,
    a_sign: f64,
    fiber: OnceCell<GeomResult<Site>>,
    base: OnceCell<GeomResult<Site>>,
}

fn mat_add(a: &JMat, b: &JMat) -> JMat {
    a.iter().zip(b).map(|(p, q)| linalg::add(p, q)).collect()
}

fn mat_sub(a: &JMat, b: &JMat) -> JMat {
    a.iter().zip(b).map(|(p, q)| linalg::sub(p, q)).collect()
}

fn fvec(a: &DVector<f64>) -> Vec<f64> {
    a.iter().copied().collect()
}

fn vadd(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + q).collect()
}

fn vsub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

fn vscale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|p| p * s).collect()
}

impl<'a> ONeill<'a> {
    pub fn new(chart: &'a SubmersionChart, x: &[f64], v: &[f64], mode: DiffMode) -> GeomResult<Self> {
        let site = Site::new(chart.total.as_ref(), x, v, mode)?;
        Self::from_site(chart, site, mode)
    }

    pub fn from_site(chart: &'a SubmersionChart, site: Site, mode: DiffMode) -> GeomResult<Self> {
        let n = site.n;
        let k = &chart.vertical;
        let r = k.ncols();
        gram_schmidt(&site.g0, &chart.vertical_basis(&site.x))?;
        let kcol = |a: usize| -> Vec<f64> { k.column(a).iter().copied().collect() };
        let krow = |i: usize| -> Vec<f64> { k.row(i).iter().copied().collect() };
        // M = Kᵀ g, r × n
        let m: JMat = (0..r)
            .map(|a| {
                (0..n)
                    .map(|j| {
                        let col: JVec = (0..n).map(|i| site.g[i][j].clone()).collect();
                        linalg::dot_f(&col, &kcol(a))
                    })
                    .collect()
            })
            .collect();
        let proj: JMat = if r == 0 {
            vec![vec![site.g[0][0].zero_like(); n]; n]
        } else {
            let gram: JMat = (0..r)
                .map(|a| (0..r).map(|b| linalg::dot_f(&m[a], &kcol(b))).collect())
                .collect();
            let gi = linalg::inverse(&gram).ok_or(GeomError::DegenerateVertical {
                pivot: linalg::mat_values(&gram).determinant(),
            })?;
            let gm = linalg::mat_mul(&gi, &m);
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let col: JVec = (0..r).map(|a| gm[a][j].clone()).collect();
                            linalg::dot_f(&col, &krow(i))
                        })
                        .collect()
                })
                .collect()
        };
        let p0 = linalg::mat_values(&proj);
        let mut chi = Vec::with_capacity(n);
        for j in 0..n {
            let gj: JMat = (0..n)
                .map(|i| (0..n).map(|c| site.gamma[i][j][c].clone()).collect())
                .collect();
            let dp: JMat = proj
                .iter()
                .map(|row| row.iter().map(|p| site.delta(p, j)).collect())
                .collect();
            // P(Γ_j − Γ_j P − δ_j P) + (I − P)(δ_j P + Γ_j P)
            let pg = linalg::mat_mul(&proj, &gj);
            let pgp = linalg::mat_mul(&pg, &proj);
            let pdp = linalg::mat_mul(&proj, &dp);
            let gp = linalg::mat_mul(&gj, &proj);
            let two_pgp: JMat = pgp.iter().map(|r| linalg::scale(r, 2.0)).collect();
            let two_pdp: JMat = pdp.iter().map(|r| linalg::scale(r, 2.0)).collect();
            let c = mat_add(&mat_sub(&mat_sub(&pg, &two_pgp), &two_pdp), &mat_add(&dp, &gp));
            chi.push(c);
        }
        let chi0 = chi.iter().map(linalg::mat_values).collect();
        let a_sign = if chart.corruption == Corruption::FlipA {
            -1.0
        } else {
            1.0
        };
        Ok(ONeill {
            chart,
            site,
            mode,
            proj,
            p0,
            chi,
            chi0,
            a_sign,
            fiber: OnceCell::new(),
            base: OnceCell::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.site.n
    }

    pub fn x(&self) -> &[f64] {
        &self.site.x
    }

    pub fn v(&self) -> &[f64] {
        &self.site.v
    }

    pub fn gv(&self, a: &[f64], b: &[f64]) -> f64 {
        self.site.gv(a, b)
    }

    pub fn top(&self, e: &[f64]) -> Vec<f64> {
        fvec(&(&self.p0 * DVector::from_column_slice(e)))
    }

    pub fn bot(&self, e: &[f64]) -> Vec<f64> {
        vsub(e, &self.top(e))
    }

    pub fn top_of(&self, f: &[Jet]) -> JVec {
        linalg::mat_vec(&self.proj, f)
    }

    pub fn bot_of(&self, f: &[Jet]) -> JVec {
        linalg::sub(f, &self.top_of(f))
    }

    fn chi_of(&self, h: &[Jet], e: &[Jet]) -> JVec {
        let terms: Vec<JVec> = self.chi.iter().map(|c| linalg::mat_vec(c, e)).collect();
        linalg::combine(h, &terms)
    }

    fn chi_value(&self, h: &[f64], e: &[f64]) -> Vec<f64> {
        let ev = DVector::from_column_slice(e);
        let mut out = DVector::zeros(self.n());
        for (c, &hj) in self.chi0.iter().zip(h) {
            if hj != 0.0 {
                out += c * &ev * hj;
            }
        }
        fvec(&out)
    }

    pub fn t(&self, b: &[f64], e: &[f64]) -> Vec<f64> {
        self.chi_value(&self.top(b), e)
    }

    pub fn a(&self, b: &[f64], e: &[f64]) -> Vec<f64> {
        vscale(&self.chi_value(&self.bot(b), e), self.a_sign)
    }

    pub fn ta(&self, b: &[f64], e: &[f64]) -> Vec<f64> {
        vadd(&self.t(b, e), &self.a(b, e))
    }

    /// `T_b e` for anisotropic fields `b`, `e`.
    pub fn t_of(&self, b: &[Jet], e: &[Jet]) -> JVec {
        self.chi_of(&self.top_of(b), e)
    }

    pub fn a_of(&self, b: &[Jet], e: &[Jet]) -> JVec {
        linalg::scale(&self.chi_of(&self.bot_of(b), e), self.a_sign)
    }

    pub fn ta_of(&self, b: &[Jet], e: &[Jet]) -> JVec {
        linalg::add(&self.t_of(b, e), &self.a_of(b, e))
    }

    pub fn constant(&self, a: &[f64]) -> JVec {
        self.site.constant(a)
    }

    /// `T^V_V e` along the seed field.
    pub fn tv_of(&self, e: &[Jet]) -> JVec {
        self.t_of(&self.site.vj, e)
    }

    pub fn av_of(&self, e: &[Jet]) -> JVec {
        self.a_of(&self.site.vj, e)
    }

    pub fn c_sharp(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        self.site.c_sharp0(a, b)
    }

    pub fn cartan(&self, a: &[f64], b: &[f64], c: &[f64]) -> f64 {
        self.site.cartan0(a, b, c)
    }

    pub fn q_hat_of(&self, e: &[Jet], h: &[Jet]) -> JVec {
        let s = &self.site;
        let u = self.top_of(e);
        let w = self.top_of(h);
        let tvv = self.tv_of(&s.vj);
        let cuw = s.c_sharp(&u, &w);
        let terms = [
            self.tv_of(&cuw),
            s.c_sharp(&self.tv_of(&u), &w),
            s.c_sharp(&u, &self.tv_of(&w)),
            s.c_sharp(&self.top_of(&cuw), &tvv),
            linalg::scale(&s.c_sharp(&self.top_of(&s.c_sharp(&u, &tvv)), &w), -1.0),
            linalg::scale(&s.c_sharp(&u, &self.top_of(&s.c_sharp(&w, &tvv))), -1.0),
        ];
        let mut sum = terms[0].clone();
        for t in &terms[1..] {
            sum = linalg::add(&sum, t);
        }
        linalg::scale(&self.top_of(&sum), -1.0)
    }

    pub fn q_hat(&self, e: &[f64], h: &[f64]) -> Vec<f64> {
        linalg::values(&self.q_hat_of(&self.constant(e), &self.constant(h)))
    }

    pub fn q_tilde_of(&self, e: &[Jet], h: &[Jet]) -> JVec {
        let s = &self.site;
        let x = self.bot_of(e);
        let y = self.bot_of(h);
        let mut sum = linalg::add(
            &self.av_of(&s.c_sharp(&x, &y)),
            &s.c_sharp(&self.av_of(&x), &y),
        );
        if self.chart.corruption != Corruption::DropQTildeTerm {
            sum = linalg::add(&sum, &s.c_sharp(&x, &self.av_of(&y)));
        }
        self.bot_of(&sum)
    }

    pub fn q_tilde(&self, e: &[f64], h: &[f64]) -> Vec<f64> {
        linalg::values(&self.q_tilde_of(&self.constant(e), &self.constant(h)))
    }

    /// `(∇_h F)(b, e)` for a bilinear anisotropic tensor given as a jet field.
    pub fn nabla_tensor<F>(&self, h: &[f64], b: &[f64], e: &[f64], field: F) -> Vec<f64>
    where
        F: Fn(&[Jet], &[Jet]) -> JVec,
    {
        let s = &self.site;
        let d = linalg::values(&s.nabla(h, &field(&self.constant(b), &self.constant(e))));
        let val = |p: &[f64], q: &[f64]| linalg::values(&field(&self.constant(p), &self.constant(q)));
        let t1 = val(&s.gamma0(h, b), e);
        let t2 = val(b, &s.gamma0(h, e));
        vsub(&vsub(&d, &t1), &t2)
    }

    pub fn nabla_t(&self, h: &[f64], b: &[f64], e: &[f64]) -> Vec<f64> {
        self.nabla_tensor(h, b, e, |p, q| self.t_of(p, q))
    }

    pub fn nabla_a(&self, h: &[f64], b: &[f64], e: &[f64]) -> Vec<f64> {
        self.nabla_tensor(h, b, e, |p, q| self.a_of(p, q))
    }

    pub fn nabla_ta(&self, h: &[f64], b: &[f64], e: &[f64]) -> Vec<f64> {
        self.nabla_tensor(h, b, e, |p, q| self.ta_of(p, q))
    }

    pub fn nabla_q_tilde(&self, h: &[f64], b: &[f64], e: &[f64]) -> Vec<f64> {
        self.nabla_tensor(h, b, e, |p, q| self.q_tilde_of(p, q))
    }

    pub fn nabla_q_hat(&self, h: &[f64], b: &[f64], e: &[f64]) -> Vec<f64> {
        self.nabla_tensor(h, b, e, |p, q| self.q_hat_of(p, q))
    }

    /// Vertical derivative `(∂̇ F)(b, e; c)` of a bilinear jet tensor.
    pub fn dot_tensor<F>(&self, b: &[f64], e: &[f64], c: &[f64], field: F) -> Vec<f64>
    where
        F: Fn(&[Jet], &[Jet]) -> JVec,
    {
        let f = field(&self.constant(b), &self.constant(e));
        linalg::values(&self.site.fiber_deriv(&f, c))
    }

    pub fn curvature(&self, e: &[f64], h: &[f64], b: &[f64]) -> Vec<f64> {
        self.site.curvature(e, h, b)
    }

    pub fn p_tensor(&self, e: &[f64], h: &[f64], b: &[f64]) -> Vec<f64> {
        self.site.p_tensor(e, h, b)
    }

    /// `R^⊤(b, e)h` from the definition, with coordinate extensions.
    pub fn r_top(&self, b: &[f64], e: &[f64], h: &[f64]) -> Vec<f64> {
        let s = &self.site;
        let ht = self.top_of(&self.constant(h));
        let ze = self.top_of(&s.nabla(e, &ht));
        let zb = self.top_of(&s.nabla(b, &ht));
        let d = linalg::values(&linalg::sub(&s.nabla(b, &ze), &s.nabla(e, &zb)));
        self.top(&d)
    }

    /// `R^⊥(b, e)h` from the definition, with coordinate extensions.
    pub fn r_bot(&self, b: &[f64], e: &[f64], h: &[f64]) -> Vec<f64> {
        let s = &self.site;
        let hb = self.bot_of(&self.constant(h));
        let ze = self.bot_of(&s.nabla(e, &hb));
        let zb = self.bot_of(&s.nabla(b, &hb));
        let d = linalg::values(&linalg::sub(&s.nabla(b, &ze), &s.nabla(e, &zb)));
        self.bot(&d)
    }

    /// `∇ᵛ_e V` for `V = v + B(x − x₀)`.
    pub fn nabla_extension(&self, bmat: &DMatrix<f64>, e: &[f64]) -> Vec<f64> {
        let be = fvec(&(bmat * DVector::from_column_slice(e)));
        vadd(&be, &self.site.gamma0(e, &self.site.v))
    }

    /// `∇ᵛ_e Z = e·∂Z + Γ_v(e, Z)` for a plain field given as jets in the
    /// position variables.
    pub fn nabla_plain(&self, e: &[f64], z: &[Jet]) -> Vec<f64> {
        let n = self.n();
        let z0 = linalg::values(z);
        let g = self.site.gamma0(e, &z0);
        (0..n)
            .map(|i| {
                let gr = z[i].gradient();
                let d: f64 = (0..n).map(|j| e[j] * gr[j]).sum();
                d + g[i]
            })
            .collect()
    }

    fn along_mat(&self, m: &JMat, bmat: &DMatrix<f64>) -> JMat {
        m.iter()
            .map(|row| row.iter().map(|f| self.site.along(f, bmat)).collect())
            .collect()
    }

    fn gamma_along(&self, bmat: &DMatrix<f64>) -> Vec<JMat> {
        self.site
            .gamma
            .iter()
            .map(|gi| self.along_mat(gi, bmat))
            .collect()
    }

    /// `Γ_V(e, z)` with jets in the position variables.
    fn gamma_field(gamma: &[JMat], e: &[f64], z: &[Jet]) -> JVec {
        gamma
            .iter()
            .map(|gi| {
                let mut s = linalg::dot(&gi[0], z) * e[0];
                for (j, &ej) in e.iter().enumerate().skip(1) {
                    if ej != 0.0 {
                        s.axpy(ej, &linalg::dot(&gi[j], z));
                    }
                }
                s
            })
            .collect()
    }

    /// `R^⊤(b, e)w` from a concrete extension `V`, vertical `w`.
    pub fn r_top_extended(&self, b: &[f64], e: &[f64], w: &[f64], policy: &ParallelPolicy) -> Vec<f64> {
        let s = &self.site;
        let bm = policy.matrix(s);
        let pa = self.along_mat(&self.proj, &bm);
        let ga = self.gamma_along(&bm);
        let proto = pa[0][0].zero_like();
        let wj = linalg::constant(&proto, w);
        let z = |d: &[f64]| linalg::mat_vec(&pa, &Self::gamma_field(&ga, d, &wj));
        let main = vsub(&self.nabla_plain(b, &z(e)), &self.nabla_plain(e, &z(b)));
        let vb = self.nabla_extension(&bm, b);
        let ve = self.nabla_extension(&bm, e);
        let mut out = main;
        out = vsub(&out, &vscale(&s.c_sharp0(&self.ta(e, w), &vb), 2.0));
        out = vadd(&out, &vscale(&s.c_sharp0(&self.ta(b, w), &ve), 2.0));
        out = vsub(&out, &s.p_tensor(e, w, &vb));
        out = vadd(&out, &s.p_tensor(b, w, &ve));
        self.top(&out)
    }

    /// `R^⊥(b, e)h` from a concrete extension `V`.
    pub fn r_bot_extended(&self, b: &[f64], e: &[f64], h: &[f64], policy: &ParallelPolicy) -> Vec<f64> {
        let s = &self.site;
        let n = self.n();
        let bm = policy.matrix(s);
        let pa = self.along_mat(&self.proj, &bm);
        let ga = self.gamma_along(&bm);
        let proto = pa[0][0].zero_like();
        let hj = linalg::constant(&proto, h);
        let hb = linalg::sub(&hj, &linalg::mat_vec(&pa, &hj));
        let bot = |f: &[Jet]| linalg::sub(f, &linalg::mat_vec(&pa, f));
        let z = |d: &[f64]| {
            let dh: JVec = (0..n)
                .map(|i| {
                    let mut acc = hb[i].deriv(0) * d[0];
                    for (j, &dj) in d.iter().enumerate().skip(1) {
                        if dj != 0.0 {
                            acc.axpy(dj, &hb[i].deriv(j));
                        }
                    }
                    acc
                })
                .collect();
            bot(&linalg::add(&dh, &Self::gamma_field(&ga, d, &hb)))
        };
        let main = vsub(&self.nabla_plain(b, &z(e)), &self.nabla_plain(e, &z(b)));
        let hp = self.bot(h);
        let vb = self.nabla_extension(&bm, b);
        let ve = self.nabla_extension(&bm, e);
        let mut out = self.bot(&main);
        out = vsub(&out, &self.bot(&s.p_tensor(e, &hp, &vb)));
        out = vadd(&out, &self.bot(&s.p_tensor(b, &hp, &ve)));
        out = vadd(&out, &vscale(&self.ta(e, &self.top(&s.c_sharp0(&hp, &vb))), 2.0));
        out = vsub(&out, &vscale(&self.ta(b, &self.top(&s.c_sharp0(&hp, &ve))), 2.0));
        out
    }

    /// Chern site of the fiber metric at `(0, Kᵀv)`; needs `v` vertical.
    pub fn fiber_site(&self) -> GeomResult<&Site> {
        self.fiber
            .get_or_init(|| {
                let fm = self.chart.fiber_metric(&self.site.x);
                let wh = self.to_fiber_vec(&self.site.v);
                let zero = vec![0.0; wh.len()];
                Site::new(&fm, &zero, &wh, self.mode)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Chern site of the base at `(σx, σv)`.
    pub fn base_site(&self) -> GeomResult<&Site> {
        self.base
            .get_or_init(|| {
                let xt = self.chart.project(&self.site.x);
                let vt = self.chart.project(&self.site.v);
                Site::new(self.chart.base.as_ref(), &xt, &vt, self.mode)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `Kᵀ a`.
    pub fn to_fiber_vec(&self, a: &[f64]) -> Vec<f64> {
        fvec(&(self.chart.vertical.transpose() * DVector::from_column_slice(a)))
    }

    /// `K â`.
    pub fn from_fiber_vec(&self, a: &[f64]) -> Vec<f64> {
        fvec(&(&self.chart.vertical * DVector::from_column_slice(a)))
    }

    /// Restriction of a site jet to the fiber variables `(δy, δŵ)`.
    pub fn to_fiber_jet(&self, f: &Jet) -> Jet {
        let k = &self.chart.vertical;
        let (n, r) = (self.n(), k.ncols());
        let order = f.order().max(1);
        let vars: JVec = (0..2 * r).map(|a| Jet::variable(2 * r, order, a, 0.0)).collect();
        let inputs: JVec = (0..2 * n)
            .map(|i| {
                let (row, off) = if i < n { (i, 0) } else { (i - n, r) };
                let c: Vec<f64> = (0..r).map(|a| k[(row, a)]).collect();
                linalg::dot_f(&vars[off..off + r], &c)
            })
            .collect();
        f.compose(&inputs)
    }

    /// A vertical total field as a fiber field: `Kᵀ F` restricted.
    pub fn to_fiber_field(&self, f: &[Jet]) -> JVec {
        let restricted: JVec = f.iter().map(|p| self.to_fiber_jet(p)).collect();
        let kt = self.chart.vertical.transpose();
        linalg::fmat_vec(&kt, &restricted)
    }

    /// `R̂(u, w)s` of the fiber, in total coordinates.
    pub fn r_hat(&self, u: &[f64], w: &[f64], s: &[f64]) -> GeomResult<Vec<f64>> {
        let f = self.fiber_site()?;
        let r = f.curvature(&self.to_fiber_vec(u), &self.to_fiber_vec(w), &self.to_fiber_vec(s));
        Ok(self.from_fiber_vec(&r))
    }

    /// `P̂(u, w, s)` of the fiber, in total coordinates.
    pub fn p_hat(&self, u: &[f64], w: &[f64], s: &[f64]) -> GeomResult<Vec<f64>> {
        let f = self.fiber_site()?;
        let r = f.p_tensor(&self.to_fiber_vec(u), &self.to_fiber_vec(w), &self.to_fiber_vec(s));
        Ok(self.from_fiber_vec(&r))
    }

    /// `Γ̂(u, w)` of the fiber, in total coordinates.
    pub fn gamma_hat(&self, u: &[f64], w: &[f64]) -> GeomResult<Vec<f64>> {
        let f = self.fiber_site()?;
        Ok(self.from_fiber_vec(&f.gamma0(&self.to_fiber_vec(u), &self.to_fiber_vec(w))))
    }

    /// `(∇̂_u Q̂)(w, s)` with the fiber connection.
    pub fn nabla_hat_q_hat(&self, u: &[f64], w: &[f64], s: &[f64]) -> GeomResult<Vec<f64>> {
        let f = self.fiber_site()?;
        let uh = self.to_fiber_vec(u);
        let field = self.to_fiber_field(&self.q_hat_of(&self.constant(w), &self.constant(s)));
        let d = linalg::values(&f.nabla(&uh, &field));
        let t1 = self.to_fiber_vec(&self.q_hat(&self.gamma_hat(u, w)?, s));
        let t2 = self.to_fiber_vec(&self.q_hat(w, &self.gamma_hat(u, s)?));
        Ok(self.from_fiber_vec(&vsub(&vsub(&d, &t1), &t2)))
    }

    /// `g_v`-horizontal lift `(σ⁺ã)^⊥` of a base vector.
    pub fn lift_star(&self, a: &[f64]) -> Vec<f64> {
        self.bot(&self.chart.section_point(a))
    }

    /// `R̃(x̃, ỹ)z̃` of the base, lifted.
    pub fn r_tilde_star(&self, x: &[f64], y: &[f64], z: &[f64]) -> GeomResult<Vec<f64>> {
        let b = self.base_site()?;
        let p = |a: &[f64]| self.chart.project(a);
        Ok(self.lift_star(&b.curvature(&p(x), &p(y), &p(z))))
    }

    /// `P̃(x̃, ỹ, z̃)` of the base, lifted.
    pub fn p_tilde_star(&self, x: &[f64], y: &[f64], z: &[f64]) -> GeomResult<Vec<f64>> {
        let b = self.base_site()?;
        let p = |a: &[f64]| self.chart.project(a);
        Ok(self.lift_star(&b.p_tensor(&p(x), &p(y), &p(z))))
    }

    /// Substitutes `x = x₀ + δ`, `v = V(x)` into a site jet, with `V` given
    /// as jets in the `n` position variables.
    pub fn compose_field(&self, f: &Jet, vfield: &[Jet]) -> Jet {
        let n = self.n();
        let order = vfield[0].order().min(f.order()).max(1);
        let mut inputs: JVec = (0..n).map(|i| Jet::variable(n, order, i, 0.0)).collect();
        for vi in vfield {
            let t = vi.truncate(order);
            inputs.push(&t - t.value());
        }
        f.compose(&inputs)
    }

    /// `P(x, V(x))` as jets in the position variables.
    pub fn proj_along(&self, vfield: &[Jet]) -> JMat {
        self.proj
            .iter()
            .map(|row| row.iter().map(|f| self.compose_field(f, vfield)).collect())
            .collect()
    }
}
