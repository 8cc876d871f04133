//! The identity catalogue: each entry turns one sample into balances of
//! terms that must sum to zero.

use nalgebra::{DMatrix, DVector};

use super::sample::{Sample, SampleKind};
use super::ToleranceClass;
use crate::error::GeomResult;
use crate::jets::linalg::{self, JVec};
use crate::jets::Jet;
use crate::metric::{DiffMode, Pointwise};
use crate::numerics::{add, norm, scale, sub};
use crate::submersion::{ONeill, ParallelPolicy};

pub struct Ctx<'a, 'b> {
    pub on: &'b ONeill<'a>,
    pub s: &'b Sample,
    pub mode: DiffMode,
}

pub enum Outcome {
    /// Each inner list is one equation, written as terms summing to zero.
    Balances(Vec<Vec<Vec<f64>>>),
    /// Diagnostic value, reported as is.
    Value(f64),
    /// The sample does not apply, e.g. a degenerate flag.
    Skip,
}

impl Outcome {
    pub fn residual(&self) -> Option<f64> {
        match self {
            Outcome::Balances(eqs) => Some(eqs.iter().map(|t| residual(t)).fold(0.0, f64::max)),
            Outcome::Value(v) => Some(*v),
            Outcome::Skip => None,
        }
    }
}

/// `|Σ terms| / (1 + max |term|)`.
pub fn residual(terms: &[Vec<f64>]) -> f64 {
    let n = terms.iter().map(Vec::len).max().unwrap_or(0);
    let mut sum = vec![0.0; n];
    let mut big = 0.0_f64;
    for t in terms {
        for (a, b) in sum.iter_mut().zip(t) {
            *a += b;
        }
        big = big.max(norm(t));
    }
    let r = norm(&sum) / (1.0 + big);
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

pub struct Identity {
    pub id: &'static str,
    /// The formula being checked, in plain notation.
    pub anchor: &'static str,
    pub kind: SampleKind,
    pub class: ToleranceClass,
    /// Reported but never failed.
    pub diagnostic: bool,
    pub eval: fn(&Ctx) -> GeomResult<Outcome>,
}

fn neg(a: &[f64]) -> Vec<f64> {
    scale(a, -1.0)
}

fn one(x: f64) -> Vec<f64> {
    vec![x]
}

fn bal(terms: Vec<Vec<f64>>) -> GeomResult<Outcome> {
    Ok(Outcome::Balances(vec![terms]))
}

fn mat_vec(m: &DMatrix<f64>, a: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(a)).iter().copied().collect()
}

/// Linear jets `a + M δ` in `nv` position variables at order 2.
fn affine_jets(a: &[f64], m: &DMatrix<f64>, nv: usize) -> JVec {
    (0..a.len())
        .map(|i| {
            let mut f = Jet::constant(nv, 2, a[i]);
            for j in 0..nv {
                f.axpy(m[(i, j)], &Jet::variable(nv, 2, j, 0.0));
            }
            f
        })
        .collect()
}

/// `(I − P_V) Y` with `P_V = P(x, V(x))`.
fn bot_along(on: &ONeill, vfield: &[Jet], y: &[Jet]) -> JVec {
    let p = on.proj_along(vfield);
    let py = linalg::mat_vec(&p, y);
    let order = py[0].order();
    let y: JVec = y.iter().map(|f| f.truncate(order)).collect();
    linalg::sub(&y, &py)
}

/// `[X, Y]` at the base point for fields given as jets in position.
fn bracket(x: &[Jet], y: &[Jet]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let gy = y[i].gradient();
            let gx = x[i].gradient();
            (0..n).map(|j| x[j].value() * gy[j] - y[j].value() * gx[j]).sum()
        })
        .collect()
}

fn base_of(on: &ONeill, a: &[f64]) -> Vec<f64> {
    on.chart.project(a)
}

/// Flag denominator `L(v) g(e, e) − g(v, e)²`, or `None` when it is below
/// `1e-3` of its scale.
fn flag_den(on: &ONeill, e: &[f64]) -> Option<f64> {
    let v = on.v();
    let lv = on.site.lv();
    let d = lv * on.gv(e, e) - on.gv(v, e).powi(2);
    if d.abs() < 1e-3 * (lv * on.gv(e, e)).abs() || d == 0.0 {
        None
    } else {
        Some(d)
    }
}

fn flag(on: &ONeill, r: &[f64], d: f64) -> f64 {
    on.gv(r, on.v()) / d
}

// ---- Lemma 1 and the horizontal second fundamental form

fn lemma1_gv1(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let bs = on.base_site()?;
    bal(vec![
        one(on.gv(&s.xh, &s.yh)),
        one(-bs.gv(&base_of(on, &s.xh), &base_of(on, &s.yh))),
    ])
}

fn lemma1_gv2(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let bs = on.base_site()?;
    bal(vec![
        one(on.gv(&s.xh, &s.e)),
        one(-bs.gv(&base_of(on, &s.xh), &base_of(on, &s.e))),
    ])
}

/// Vertical part of the flat derivative of `(I − P_{v(t)}) σ⁺ỹ` along
/// `v(t) = lift(ṽ + t x̃)`, by central differences.
pub fn second_fundamental_h(on: &ONeill, x: &[f64], y: &[f64], mode: DiffMode) -> GeomResult<Vec<f64>> {
    let chart = on.chart;
    let (vt, xt, yt) = (base_of(on, on.v()), base_of(on, x), base_of(on, y));
    let k = &chart.vertical;
    let step = 1e-4;
    let at = |t: f64| -> GeomResult<Vec<f64>> {
        let a = add(&vt, &scale(&xt, t));
        let v = chart.lift_vector(on.x(), &a, mode)?;
        let pw = Pointwise::new(chart.total.as_ref(), on.x(), &v, mode)?;
        let m = k.transpose() * &pw.g;
        let gram = &m * k;
        let yy = DVector::from_column_slice(&chart.section_point(&yt));
        let coef = gram
            .lu()
            .solve(&(&m * &yy))
            .ok_or(crate::error::GeomError::DegenerateVertical { pivot: 0.0 })?;
        Ok((yy - k * coef).iter().copied().collect())
    };
    let d = scale(&sub(&at(step)?, &at(-step)?), 0.5 / step);
    Ok(on.top(&d))
}

fn cartan_iih(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let bs = on.base_site()?;
    let ii = second_fundamental_h(on, &s.xh, &s.yh, c.mode)?;
    let p = |a: &[f64]| base_of(on, a);
    bal(vec![
        one(on.cartan(&s.xh, &s.yh, &s.e)),
        one(-bs.cartan0(&p(&s.xh), &p(&s.yh), &p(&s.e))),
        one(0.5 * on.gv(&ii, &s.e)),
    ])
}

// ---- fiber derivatives of the splitting

fn dot_top(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let f = on.top_of(&on.constant(&s.e));
    let d = linalg::values(&on.site.fiber_deriv(&f, &s.b));
    bal(vec![d, scale(&on.top(&on.c_sharp(&on.bot(&s.e), &s.b)), -2.0)])
}

fn dot_bot(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let f = on.bot_of(&on.constant(&s.e));
    let d = linalg::values(&on.site.fiber_deriv(&f, &s.b));
    bal(vec![d, scale(&on.top(&on.c_sharp(&on.bot(&s.e), &s.b)), 2.0)])
}

// ---- extensions of vertical and horizontal vectors

fn lemma3_uta(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    // U = K(ĉ + C(x − x₀))
    let k = &on.chart.vertical;
    let u = mat_vec(k, &s.cr);
    let du = mat_vec(&(k * &s.mat_rn), &s.e);
    let nabla_u = add(&du, &on.site.gamma0(&s.e, &u));
    bal(vec![on.bot(&nabla_u), neg(&on.ta(&s.e, &u))])
}

fn lemma3_yta(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let n = on.n();
    let vf = affine_jets(on.v(), &s.mat_b, n);
    let y0 = affine_jets(&s.c, &s.mat_d, n);
    let yf = bot_along(on, &vf, &y0);
    let y = linalg::values(&yf);
    let nabla_y = on.nabla_plain(&s.e, &yf);
    let nabla_v = on.nabla_extension(&s.mat_b, &s.e);
    bal(vec![
        on.top(&nabla_y),
        neg(&on.ta(&s.e, &y)),
        scale(&on.top(&on.c_sharp(&y, &nabla_v)), 2.0),
    ])
}

fn lemma3_lieconv(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let n = on.n();
    let vf = affine_jets(on.v(), &s.mat_b, n);
    // σ⁺Ỹ(σx) with Ỹ affine in the base coordinates
    let lin = &on.chart.section * &s.mat_bt * &on.chart.sigma;
    let y0 = affine_jets(&on.chart.section_point(&s.ct), &lin, n);
    let yf = bot_along(on, &vf, &y0);
    let y = linalg::values(&yf);
    let nabla_y = on.nabla_plain(&s.w, &yf);
    bal(vec![on.bot(&nabla_y), neg(&on.a(&y, &s.w))])
}

// ---- algebraic properties of T and A

fn ta_skew(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (e, h, b) = (&s.e, &s.h, &s.b);
    Ok(Outcome::Balances(vec![
        vec![one(on.gv(&on.t(e, h), b)), one(on.gv(h, &on.t(e, b)))],
        vec![one(on.gv(&on.a(e, h), b)), one(on.gv(h, &on.a(e, b)))],
        vec![on.top(&on.t(e, &on.top(h)))],
        vec![on.bot(&on.t(e, &on.bot(h)))],
        vec![on.top(&on.a(e, &on.top(h)))],
        vec![on.bot(&on.a(e, &on.bot(h)))],
    ]))
}

fn t_sym_vert(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    bal(vec![on.t(&s.u, &s.w), neg(&on.t(&s.w, &s.u))])
}

fn a_antisym_hor(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let v = on.v();
    Ok(Outcome::Balances(vec![
        vec![on.a(&s.xh, v), on.a(v, &s.xh)],
        vec![on.a(v, v)],
    ]))
}

// ---- Gauss formulas

fn gauss_vert(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    // W = K(ŵ + Ĉ Kᵀ(x − x₀))
    let k = &on.chart.vertical;
    let dw = k * &s.mat_r * k.transpose();
    let nabla_w = add(&mat_vec(&dw, &s.u), &on.site.gamma0(&s.u, &s.w));
    bal(vec![
        on.top(&nabla_w),
        neg(&mat_vec(&dw, &s.u)),
        neg(&on.gamma_hat(&s.u, &s.w)?),
        neg(&on.q_hat(&s.u, &s.w)),
    ])
}

/// `bot(∇_e H)` against the base connection for `H = σ⁺H̃(σx) + K(ĉ + C(x − x₀))`.
fn gauss_dual_terms(on: &ONeill, s: &Sample, e: &[f64], h0: &[f64]) -> GeomResult<Vec<Vec<f64>>> {
    let bs = on.base_site()?;
    let chart = on.chart;
    let k = &chart.vertical;
    let ht = base_of(on, h0);
    let dh = &chart.section * &s.mat_bt * &chart.sigma + k * &s.mat_rn;
    let h = h0;
    let nabla_h = add(&mat_vec(&dh, e), &on.site.gamma0(e, h));
    let et = base_of(on, e);
    let base = add(&mat_vec(&s.mat_bt, &et), &bs.gamma0(&et, &ht));
    Ok(vec![on.bot(&nabla_h), neg(&on.lift_star(&base)), neg(&on.q_tilde(e, h))])
}

fn gauss_dual(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    bal(gauss_dual_terms(on, s, &s.xh, &s.yh)?)
}

fn gauss_dual_extended(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let mut terms = gauss_dual_terms(on, s, &s.e, &s.h)?;
    let extra = add(&add(&on.t(&s.e, &s.h), &on.a(&s.e, &s.h)), &on.a(&s.h, &s.e));
    terms.push(neg(&on.bot(&extra)));
    bal(terms)
}

// ---- A through brackets of projectable lifts

struct Lifts {
    x: JVec,
    y: JVec,
    v: JVec,
}

/// `V` lifts `Ṽ = ṽ − Γ̃(x̃ − x̃₀, ṽ)`; `X`, `Y` are `(I − P_V)σ⁺x̃`, `(I − P_V)σ⁺ỹ`.
fn projectable_lifts(c: &Ctx) -> GeomResult<Lifts> {
    let (on, s) = (c.on, c.s);
    let chart = on.chart;
    let n = on.n();
    let bs = on.base_site()?;
    let vt = base_of(on, on.v());
    let dv = DMatrix::from_fn(vt.len(), n, |i, j| {
        let ej = chart.project(&(0..n).map(|k| if k == j { 1.0 } else { 0.0 }).collect::<Vec<_>>());
        -bs.gamma0(&ej, &vt)[i]
    });
    let xj = affine_jets(on.x(), &DMatrix::identity(n, n), n);
    let aj = affine_jets(&vt, &dv, n);
    let v = chart.lift_jets(&xj, &aj, c.mode)?;
    let lift = |a: &[f64]| {
        let pa = chart.section_point(&base_of(on, a));
        let cj = linalg::constant(&v[0], &pa);
        bot_along(on, &v, &cj)
    };
    Ok(Lifts {
        x: lift(&s.xh),
        y: lift(&s.yh),
        v,
    })
}

fn a_bracket(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let l = projectable_lifts(c)?;
    let (x, y, v) = (&s.xh, &s.yh, on.v());
    bal(vec![
        on.a(x, y),
        scale(&on.top(&bracket(&l.x, &l.y)), -0.5),
        neg(&on.ta(&on.c_sharp(x, y), v)),
        neg(&on.top(&on.c_sharp(&on.a(x, v), y))),
        on.top(&on.c_sharp(x, &on.a(y, v))),
    ])
}

fn a_xv_bracket(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let l = projectable_lifts(c)?;
    bal(vec![on.a(&s.xh, on.v()), scale(&on.top(&bracket(&l.x, &l.v)), -0.5)])
}

fn a_almost_antisym(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (x, y) = (&s.xh, &s.yh);
    bal(vec![
        on.a(x, y),
        on.a(y, x),
        scale(&on.ta(&on.c_sharp(x, y), on.v()), -2.0),
    ])
}

// ---- covariant derivatives of T and A

fn lemma4_w_a(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    bal(vec![on.nabla_a(&s.w, &s.u, &s.e), on.a(&on.t(&s.w, &s.u), &s.e)])
}

fn lemma4_x_a(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    bal(vec![on.nabla_a(&s.xh, &s.w, &s.e), on.a(&on.a(&s.xh, &s.w), &s.e)])
}

fn lemma4_w_t(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    bal(vec![on.nabla_t(&s.w, &s.yh, &s.e), on.t(&on.t(&s.w, &s.yh), &s.e)])
}

fn lemma4_x_t(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    bal(vec![on.nabla_t(&s.xh, &s.yh, &s.e), on.t(&on.a(&s.xh, &s.yh), &s.e)])
}

fn lemma5_terms(on: &ONeill, e: &[f64], h: &[f64], b: &[f64], part: fn(&ONeill, &[f64]) -> Vec<f64>) -> Vec<Vec<f64>> {
    vec![
        part(on, &on.nabla_ta(e, h, b)),
        neg(&on.ta(e, &on.ta(h, b))),
        on.ta(h, &on.ta(e, b)),
    ]
}

fn lemma5_top(c: &Ctx) -> GeomResult<Outcome> {
    let s = c.s;
    bal(lemma5_terms(c.on, &s.e, &s.h, &s.u, |on, a| on.top(a)))
}

fn lemma5_bot(c: &Ctx) -> GeomResult<Outcome> {
    let s = c.s;
    bal(lemma5_terms(c.on, &s.e, &s.h, &s.yh, |on, a| on.bot(a)))
}

// ---- split curvatures

fn rtop_rbot_def(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (b, e) = (&s.b, &s.e);
    let affine = ParallelPolicy::Affine(s.mat_b.clone());
    let rt = on.r_top(b, e, &s.w);
    let rb = on.r_bot(b, e, &s.h);
    Ok(Outcome::Balances(vec![
        vec![rt.clone(), neg(&on.r_top_extended(b, e, &s.w, &ParallelPolicy::Constant))],
        vec![rt, neg(&on.r_top_extended(b, e, &s.w, &affine))],
        vec![rb.clone(), neg(&on.r_bot_extended(b, e, &s.h, &ParallelPolicy::Constant))],
        vec![rb, neg(&on.r_bot_extended(b, e, &s.h, &affine))],
    ]))
}

fn rtop_horizontal(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let rv = on.curvature(&s.e, &s.h, on.v());
    bal(vec![
        on.r_top(&s.e, &s.h, &s.xh),
        scale(&on.top(&on.c_sharp(&rv, &s.xh)), 2.0),
    ])
}

fn rbot_vertical(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    bal(vec![on.r_bot(&s.e, &s.h, &s.w)])
}

/// `Q̂_a v + T_a v`.
fn qt(on: &ONeill, a: &[f64]) -> Vec<f64> {
    add(&on.q_hat(a, on.v()), &on.t(a, on.v()))
}

/// Right side of the fiber formula for `R^⊤(a, b)s` minus `R̂(a, b)s`.
fn rtop_fiber_rest(on: &ONeill, a: &[f64], b: &[f64], s: &[f64]) -> GeomResult<Vec<Vec<f64>>> {
    let (qa, qb) = (qt(on, a), qt(on, b));
    Ok(vec![
        on.nabla_hat_q_hat(a, b, s)?,
        neg(&on.nabla_hat_q_hat(b, a, s)?),
        on.q_hat(a, &on.q_hat(b, s)),
        neg(&on.q_hat(b, &on.q_hat(a, s))),
        neg(&on.top(&on.p_tensor(b, s, &qa))),
        on.top(&on.p_tensor(a, s, &qb)),
        scale(&on.top(&on.c_sharp(&on.t(b, s), &qa)), -2.0),
        scale(&on.top(&on.c_sharp(&on.t(a, s), &qb)), 2.0),
    ])
}

fn rtop_fiber(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let mut terms = vec![on.r_top(&s.u, &s.w, &s.s), neg(&on.r_hat(&s.u, &s.w, &s.s)?)];
    terms.extend(rtop_fiber_rest(on, &s.u, &s.w, &s.s)?.iter().map(|t| neg(t)));
    bal(terms)
}

/// Right side of the base formula for `R^⊥(x, y)z` minus `R̃*(x, y)z`.
fn rbot_base_rest(on: &ONeill, x: &[f64], y: &[f64], z: &[f64]) -> Vec<Vec<f64>> {
    let v = on.v();
    let (axv, ayv) = (on.a(x, v), on.a(y, v));
    let ctop = |p: &[f64], q: &[f64]| on.top(&on.c_sharp(p, q));
    let qdot = |p: &[f64], q: &[f64], w: &[f64]| on.bot(&on.dot_tensor(p, q, w, |a, b| on.q_tilde_of(a, b)));
    vec![
        on.a(z, &on.a(y, x)),
        neg(&on.a(z, &on.a(x, y))),
        scale(&on.a(z, &ctop(y, &axv)), 2.0),
        scale(&on.a(y, &ctop(z, &axv)), 2.0),
        scale(&on.a(z, &ctop(x, &ayv)), -2.0),
        scale(&on.a(x, &ctop(z, &ayv)), -2.0),
        on.bot(&on.nabla_q_tilde(x, y, z)),
        neg(&on.bot(&on.nabla_q_tilde(y, x, z))),
        on.q_tilde(y, &on.q_tilde(x, z)),
        neg(&on.q_tilde(x, &on.q_tilde(y, z))),
        qdot(y, z, &axv),
        neg(&qdot(x, z, &ayv)),
        neg(&on.bot(&on.p_tensor(y, z, &axv))),
        on.bot(&on.p_tensor(x, z, &ayv)),
    ]
}

fn rbot_base(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (x, y, z) = (&s.xh, &s.yh, &s.zh);
    let mut terms = vec![on.r_bot(x, y, z), neg(&on.r_tilde_star(x, y, z)?)];
    terms.extend(rbot_base_rest(on, x, y, z).iter().map(|t| neg(t)));
    bal(terms)
}

fn unified(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (e, h, b) = (&s.e, &s.h, &s.b);
    bal(vec![
        on.curvature(e, h, b),
        neg(&on.r_top(e, h, b)),
        neg(&on.r_bot(e, h, b)),
        neg(&on.nabla_ta(e, h, b)),
        on.nabla_ta(h, e, b),
        neg(&on.ta(h, &on.ta(e, b))),
        on.ta(e, &on.ta(h, b)),
    ])
}

// ---- fundamental equations in scalar form

fn fund_0(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (w, u, p, q) = (&s.w, &s.u, &s.s, &s.s2);
    bal(vec![
        one(on.gv(&on.curvature(w, u, p), q)),
        one(-on.gv(&on.r_top(w, u, p), q)),
        one(-on.gv(&on.t(w, p), &on.t(u, q))),
        one(on.gv(&on.t(u, p), &on.t(w, q))),
    ])
}

fn fund_1(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (w, u, p, z) = (&s.w, &s.u, &s.s, &s.zh);
    bal(vec![
        one(on.gv(&on.curvature(w, u, p), z)),
        one(-on.gv(&on.nabla_t(w, u, p), z)),
        one(on.gv(&on.nabla_t(u, w, p), z)),
    ])
}

fn fund_1p(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (x, u, p, w) = (&s.xh, &s.u, &s.s, &s.w);
    bal(vec![
        one(on.gv(&on.curvature(x, u, p), w)),
        one(-on.gv(&on.r_top(x, u, p), w)),
        one(on.gv(&on.t(u, p), &on.a(x, w))),
        one(-on.gv(&on.a(x, p), &on.t(u, w))),
    ])
}

fn fund_2(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (x, u, p, z) = (&s.xh, &s.u, &s.s, &s.zh);
    bal(vec![
        one(on.gv(&on.curvature(x, u, p), z)),
        one(-on.gv(&on.nabla_t(x, u, p), z)),
        one(on.gv(&on.nabla_a(u, x, p), z)),
        one(on.gv(&on.a(&on.a(x, u), p), z)),
        one(on.gv(&on.t(u, x), &on.t(p, z))),
    ])
}

fn fund_2p(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (x, y, p, w) = (&s.xh, &s.yh, &s.s, &s.w);
    bal(vec![
        one(on.gv(&on.curvature(x, y, p), w)),
        one(-on.gv(&on.r_top(x, y, p), w)),
        one(on.gv(&on.a(y, p), &on.a(x, w))),
        one(-on.gv(&on.a(x, p), &on.a(y, w))),
    ])
}

fn fund_3(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (x, y, p, z) = (&s.xh, &s.yh, &s.s, &s.zh);
    bal(vec![
        one(on.gv(&on.curvature(x, y, p), z)),
        one(-on.gv(&on.nabla_a(x, y, p), z)),
        one(on.gv(&on.nabla_a(y, x, p), z)),
        one(on.gv(&on.a(y, x), &on.t(p, z))),
        one(-on.gv(&on.a(x, y), &on.t(p, z))),
    ])
}

fn fund_4(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (x, y, z, z2) = (&s.xh, &s.yh, &s.zh, &s.zh2);
    bal(vec![
        one(on.gv(&on.curvature(x, y, z), z2)),
        one(-on.gv(&on.r_bot(x, y, z), z2)),
        one(-on.gv(&on.a(x, z), &on.a(y, z2))),
        one(on.gv(&on.a(y, z), &on.a(x, z2))),
    ])
}

fn fund_0p(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (w, u, p) = (&s.w, &s.u, &s.s);
    let mut terms = vec![
        on.top(&on.curvature(w, u, p)),
        neg(&on.r_hat(w, u, p)?),
        neg(&on.t(w, &on.t(u, p))),
        on.t(u, &on.t(w, p)),
    ];
    terms.extend(rtop_fiber_rest(on, w, u, p)?.iter().map(|t| neg(t)));
    bal(terms)
}

fn fund_4p(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (x, y, z) = (&s.xh, &s.yh, &s.zh);
    let mut terms = vec![
        on.bot(&on.curvature(x, y, z)),
        neg(&on.r_tilde_star(x, y, z)?),
        neg(&on.a(x, &on.a(y, z))),
        on.a(y, &on.a(x, z)),
    ];
    terms.extend(rbot_base_rest(on, x, y, z).iter().map(|t| neg(t)));
    bal(terms)
}

// ---- flag curvatures

fn flag_general_vert(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (v, w) = (on.v(), &s.w);
    let Some(d) = flag_den(on, w) else {
        return Ok(Outcome::Skip);
    };
    let tav = on.ta(v, w);
    bal(vec![
        one(flag(on, &on.curvature(v, w, w), d)),
        one(-flag(on, &on.r_top(v, w, w), d)),
        one(-flag(on, &sub(&on.nabla_t(v, w, w), &on.nabla_ta(w, v, w)), d)),
        one(flag(on, &on.a(&tav, w), d)),
        one(-on.gv(&on.t(w, w), &on.ta(v, v)) / d),
        one(on.gv(&tav, &on.t(w, v)) / d),
    ])
}

fn flag_general_hor(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (v, x) = (on.v(), &s.xh);
    let Some(d) = flag_den(on, x) else {
        return Ok(Outcome::Skip);
    };
    let tav = on.ta(v, x);
    bal(vec![
        one(flag(on, &on.curvature(v, x, x), d)),
        one(-flag(on, &on.r_top(v, x, x), d)),
        one(-flag(on, &on.r_bot(v, x, x), d)),
        one(-flag(on, &sub(&on.nabla_a(v, x, x), &on.nabla_ta(x, v, x)), d)),
        one(flag(on, &on.t(&tav, x), d)),
        one(-on.gv(&on.a(x, x), &on.ta(v, v)) / d),
        one(on.gv(&tav, &on.a(x, v)) / d),
    ])
}

/// Flag curvature of the fiber metric, in the flag spanned by `v` and `w`.
fn fiber_flag(on: &ONeill, w: &[f64]) -> GeomResult<f64> {
    on.fiber_site()?.flag_curvature(&on.to_fiber_vec(w))
}

fn flag_vert_pole(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (v, w) = (on.v(), &s.w);
    let Some(d) = flag_den(on, w) else {
        return Ok(Outcome::Skip);
    };
    let tvv = on.t(v, v);
    let tvw = on.t(v, w);
    let inner = sub(&on.p_tensor(w, w, &tvv), &on.nabla_hat_q_hat(v, w, w)?);
    bal(vec![
        one(flag(on, &on.curvature(v, w, w), d)),
        one(-fiber_flag(on, w)?),
        one((on.gv(&on.t(w, w), &tvv) - on.gv(&tvw, &tvw)) / d),
        one(flag(on, &inner, d)),
        one(on.cartan(w, &on.q_hat(v, w), &tvv) / d),
    ])
}

fn flag_hor_pole_w(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (v, w) = (on.v(), &s.w);
    let Some(d) = flag_den(on, w) else {
        return Ok(Outcome::Skip);
    };
    let avw = on.a(v, w);
    let twv = on.t(w, v);
    bal(vec![
        one(flag(on, &on.curvature(v, w, w), d)),
        one(-flag(on, &on.nabla_t(v, w, w), d)),
        one(-on.gv(&avw, &avw) / d),
        one(on.gv(&twv, &twv) / d),
    ])
}

fn flag_hor_pole_x(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let (v, x) = (on.v(), &s.xh);
    let Some(d) = flag_den(on, x) else {
        return Ok(Outcome::Skip);
    };
    let axv = on.a(x, v);
    let base = on.base_site()?.flag_curvature(&base_of(on, x))?;
    bal(vec![
        one(flag(on, &on.curvature(v, x, x), d)),
        one(-base),
        one(3.0 * on.gv(&axv, &axv) / d),
    ])
}

// ---- diagnostics

fn totally_geodesic(c: &Ctx) -> GeomResult<Outcome> {
    let on = c.on;
    let v = on.v();
    Ok(Outcome::Value(norm(&on.t(v, v)) / (1.0 + norm(v).powi(2))))
}

/// `top(∇_v X^⊤)` for `X` the horizontal lift of a constant base field.
fn horizontal_regularity(c: &Ctx) -> GeomResult<Outcome> {
    let (on, s) = (c.on, c.s);
    let chart = on.chart;
    let n = on.n();
    let xj = affine_jets(on.x(), &DMatrix::identity(n, n), n);
    let aj = affine_jets(&s.ct, &DMatrix::zeros(s.ct.len(), n), n);
    let xf = chart.lift_jets(&xj, &aj, c.mode)?;
    // as a site field: independent of the direction variables
    let map: Vec<Option<usize>> = (0..n).map(Some).collect();
    let sf: JVec = xf
        .iter()
        .map(|f| f.restrict(&map, 2 * n))
        .collect();
    let xt = on.top_of(&sf);
    let d = linalg::values(&on.site.nabla(on.v(), &xt));
    Ok(Outcome::Value(norm(&on.top(&d)) / (1.0 + norm(&s.ct))))
}

macro_rules! identity {
    ($id:literal, $anchor:literal, $kind:ident, $class:ident, $f:ident) => {
        Identity {
            id: $id,
            anchor: $anchor,
            kind: SampleKind::$kind,
            class: ToleranceClass::$class,
            diagnostic: false,
            eval: $f,
        }
    };
}

pub fn catalogue() -> Vec<Identity> {
    let mut out = vec![
        identity!("lemma1-gv1", "g_v(x,y) = g~(x~,y~) for horizontal v, x, y", Horizontal, Standard, lemma1_gv1),
        identity!("lemma1-gv2", "g_v(x,e) = g~(x~,e~) for horizontal v, x", Horizontal, Standard, lemma1_gv2),
        identity!("cartan-IIH", "C_v(x,y,e) = C~(x~,y~,e~) - g_v(II(x,y),e)/2", Horizontal, Loose, cartan_iih),
        identity!("dot-top", "d/dv (e^top)(b) = 2 top C#(bot e, b)", Any, Standard, dot_top),
        identity!("dot-bot", "d/dv (e^bot)(b) = -2 top C#(bot e, b)", Any, Standard, dot_bot),
        identity!("lemma3-UTA", "bot(nabla_e U) = (T+A)_e u", Any, Standard, lemma3_uta),
        identity!("lemma3-YTA", "top(nabla_e Y) = (T+A)_e y - 2 top C#(y, nabla_e V)", Any, Standard, lemma3_yta),
        identity!("lemma3-lieconv", "bot(nabla_w Y) = A_y w for projectable Y", Any, Standard, lemma3_lieconv),
        identity!("TA-skew", "T_e, A_e are g_v-skew and swap top and bot", Any, Standard, ta_skew),
        identity!("T-sym-vert", "T_u w = T_w u", Vertical, Standard, t_sym_vert),
        identity!("A-antisym-hor", "A_x v = -A_v x, A_v v = 0", Horizontal, Standard, a_antisym_hor),
        identity!("gauss-vert", "top(nabla_u W) = nabla^_u W + Q^_u w", Vertical, Standard, gauss_vert),
        identity!("gauss-dual", "bot(nabla_x Y) = (nabla~_x~ Y~)* + Q~_x y", Horizontal, Standard, gauss_dual),
        identity!(
            "gauss-dual-extended",
            "bot(nabla_e H) = (nabla~ H~)* + Q~_e h + bot(T_e h + A_e h + A_h e)",
            Horizontal,
            Standard,
            gauss_dual_extended
        ),
        identity!(
            "A-bracket",
            "A_x y = top[X,Y]/2 + (T+A)(C#(x,y), v) + top C#(A_x v, y) - top C#(x, A_y v)",
            Horizontal,
            Standard,
            a_bracket
        ),
        identity!("A-xv-bracket", "A_x v = top[X,V]/2", Horizontal, Standard, a_xv_bracket),
        identity!("A-almost-antisym", "A_x y + A_y x = 2 (T+A)(C#(x,y), v)", Horizontal, Standard, a_almost_antisym),
        identity!("lemma4-wA", "(nabla_w A)(u,e) = -A(T_w u, e)", Any, Standard, lemma4_w_a),
        identity!("lemma4-xA", "(nabla_x A)(w,e) = -A(A_x w, e)", Any, Standard, lemma4_x_a),
        identity!("lemma4-wT", "(nabla_w T)(y,e) = -T(T_w y, e)", Any, Standard, lemma4_w_t),
        identity!("lemma4-xT", "(nabla_x T)(y,e) = -T(A_x y, e)", Any, Standard, lemma4_x_t),
        identity!("lemma5-top", "top((nabla_e TA)(h,u)) = TA_e TA_h u - TA_h TA_e u", Any, Standard, lemma5_top),
        identity!("lemma5-bot", "bot((nabla_e TA)(h,y)) = TA_e TA_h y - TA_h TA_e y", Any, Standard, lemma5_bot),
        identity!(
            "rtop-rbot-def-consistency",
            "R^top, R^bot by definition agree with the extension-independent forms",
            Any,
            Standard,
            rtop_rbot_def
        ),
        identity!("rtop-horizontal", "R^top(e,h)x = -2 top C#(R(e,h)v, x)", Any, Standard, rtop_horizontal),
        identity!("rbot-vertical", "R^bot(e,h)w = 0", Any, Standard, rbot_vertical),
        identity!("rtop-fiber", "R^top(u,w)s = R^(u,w)s + Q^ and C# corrections", Vertical, Standard, rtop_fiber),
        identity!("rbot-base", "R^bot(x,y)z = R~*(x,y)z + A, Q~ and C# corrections", Horizontal, Standard, rbot_base),
        identity!("unified", "R = R^top + R^bot + (nabla TA) - (nabla TA) + TA TA - TA TA", Any, Standard, unified),
        identity!("fund-0", "g(R(w,u)s,s') = g(R^top(w,u)s,s') + g(T_w s,T_u s') - g(T_u s,T_w s')", Any, Standard, fund_0),
        identity!("fund-1", "g(R(w,u)s,z) = g((nabla_w T)(u,s),z) - g((nabla_u T)(w,s),z)", Any, Standard, fund_1),
        identity!("fund-1p", "g(R(x,u)s,w) = g(R^top(x,u)s,w) - g(T_u s,A_x w) + g(A_x s,T_u w)", Any, Standard, fund_1p),
        identity!(
            "fund-2",
            "g(R(x,u)s,z) = g((nabla_x T)(u,s),z) - g((nabla_u A)(x,s),z) - g(A_{A_x u}s,z) - g(T_u x,T_s z)",
            Any,
            Standard,
            fund_2
        ),
        identity!("fund-2p", "g(R(x,y)s,w) = g(R^top(x,y)s,w) - g(A_y s,A_x w) + g(A_x s,A_y w)", Any, Standard, fund_2p),
        identity!(
            "fund-3",
            "g(R(x,y)s,z) = g((nabla_x A)(y,s),z) - g((nabla_y A)(x,s),z) + g(A_y x,T_s z) - g(A_x y,T_s z)",
            Any,
            Standard,
            fund_3
        ),
        identity!("fund-4", "g(R(x,y)z,z') = g(R^bot(x,y)z,z') + g(A_x z,A_y z') - g(A_y z,A_x z')", Any, Standard, fund_4),
        identity!("fund-0p", "top R(w,u)s = R^(w,u)s + T_w T_u s - T_u T_w s + fiber corrections", Vertical, Standard, fund_0p),
        identity!(
            "fund-4p",
            "bot R(x,y)z = R~*(x,y)z + A_x A_y z - A_y A_x z + base corrections",
            Horizontal,
            Standard,
            fund_4p
        ),
        identity!("flag-general-vert", "K_v(w) = K^top_v(w) + T, A corrections over L(v)g(w,w) - g(v,w)^2", Any, Standard, flag_general_vert),
        identity!(
            "flag-general-hor",
            "K_v(x) = K^top_v(x) + K^bot_v(x) + T, A corrections over L(v)g(x,x) - g(v,x)^2",
            Any,
            Standard,
            flag_general_hor
        ),
        identity!("flag-vert-pole", "K_v(w) = K^_v(w) - T and Q^ corrections, v vertical", Vertical, Standard, flag_vert_pole),
        identity!(
            "flag-hor-pole-w",
            "K_v(w) = (g((nabla_v T)(w,w),v) + |A_v w|^2 - |T_w v|^2)/D",
            Horizontal,
            Standard,
            flag_hor_pole_w
        ),
        identity!("flag-hor-pole-x", "K_v(x) = K~(x~) - 3|A_x v|^2/D", Horizontal, Standard, flag_hor_pole_x),
    ];
    let mut diag = vec![
        identity!("totally-geodesic", "|T_v v| for vertical v", Vertical, Standard, totally_geodesic),
        identity!("horizontal-regularity", "|top(nabla_v X^top)| for projectable horizontal X", Vertical, Standard, horizontal_regularity),
    ];
    for d in &mut diag {
        d.diagnostic = true;
    }
    out.extend(diag);
    out
}

