//! The Chern connection of a pseudo-Finsler metric in a chart.
//!
//! A [`Site`] holds Taylor jets of `L`, `g`, `g⁻¹`, `C`, the spray, the
//! nonlinear connection and the Christoffel symbols around one admissible
//! `(x, v)`, in the `2n` jet variables `(δx, δv)`. Anisotropic fields are
//! jets over the same variables, so `∇` can be applied repeatedly as long as
//! the truncation order lasts: every application costs one order.

use nalgebra::DMatrix;

use crate::error::{GeomError, GeomResult};
use crate::jets::linalg::{self, JMat, JVec};
use crate::jets::{seed, Jet, DEFAULT_ORDER};
use crate::metric::{lagrangian_jet, DiffMode, MetricField};

/// Christoffel symbols, nonlinear connection and spray at one point.
#[derive(Clone, Debug)]
pub struct ChristoffelSample {
    /// `gamma[i][j][k] = Γⁱⱼₖ`
    pub gamma: Vec<Vec<Vec<f64>>>,
    pub nonlinear: Vec<Vec<f64>>,
    pub spray: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Site {
    pub n: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub order: usize,
    pub l: Jet,
    /// Seed jets of `v`.
    pub vj: JVec,
    pub g: JMat,
    pub ginv: JMat,
    /// `cart[i][j][k] = C_ijk`
    pub cart: Vec<JMat>,
    pub spray: JVec,
    pub nonlin: JMat,
    pub gamma: Vec<JMat>,
    pub g0: DMatrix<f64>,
}

fn det_guard(g0: &DMatrix<f64>) -> GeomResult<()> {
    let n = g0.nrows();
    let det = g0.determinant();
    let scale = g0.amax();
    if !det.is_finite() || det.abs() < 1e-10 * scale.powi(n as i32) {
        return Err(GeomError::DegenerateMetric { det });
    }
    Ok(())
}

impl Site {
    pub fn new(m: &dyn MetricField, x: &[f64], v: &[f64], mode: DiffMode) -> GeomResult<Site> {
        Site::with_order(m, x, v, mode, DEFAULT_ORDER)
    }

    /// Builds the site jets from `L` at truncation `order ≥ 3`.
    pub fn with_order(
        m: &dyn MetricField,
        x: &[f64],
        v: &[f64],
        mode: DiffMode,
        order: usize,
    ) -> GeomResult<Site> {
        assert!(order >= 3, "the connection needs third derivatives of L");
        let l = lagrangian_jet(m, x, v, order, mode)?;
        Site::from_lagrangian_jet(l, x, v)
    }

    pub fn from_lagrangian_jet(l: Jet, x: &[f64], v: &[f64]) -> GeomResult<Site> {
        let n = x.len();
        let order = l.order();
        let (_, vj) = seed(x, v, order)?;
        let lv: Vec<Jet> = (0..n).map(|i| l.deriv(n + i)).collect();
        let g: JMat = (0..n)
            .map(|i| (0..n).map(|j| lv[i].deriv(n + j) * 0.5).collect())
            .collect();
        let g0 = linalg::mat_values(&g);
        det_guard(&g0)?;
        let ginv = linalg::inverse(&g).ok_or(GeomError::DegenerateMetric {
            det: g0.determinant(),
        })?;
        let cart: Vec<JMat> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| g[i][j].deriv(n + k) * 0.5).collect())
                    .collect()
            })
            .collect();
        // ∂²L/∂vˡ∂xᵏ vᵏ − ∂L/∂xˡ
        let h: JVec = (0..n)
            .map(|a| {
                let mut s = -l.deriv(a);
                for k in 0..n {
                    s = s + lv[a].deriv(k) * &vj[k];
                }
                s
            })
            .collect();
        let spray: JVec = linalg::mat_vec(&ginv, &h)
            .into_iter()
            .map(|s| s * 0.25)
            .collect();
        let nonlin: JMat = (0..n)
            .map(|i| (0..n).map(|j| spray[i].deriv(n + j)).collect())
            .collect();
        let mut site = Site {
            n,
            x: x.to_vec(),
            v: v.to_vec(),
            order,
            l,
            vj,
            g,
            ginv,
            cart,
            spray,
            nonlin,
            gamma: Vec::new(),
            g0,
        };
        // dg[j][a][k] = δ_j g_ak
        let dg: Vec<JMat> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|a| (0..n).map(|k| site.delta(&site.g[a][k], j)).collect())
                    .collect()
            })
            .collect();
        let proto = dg[0][0][0].zero_like();
        let mut gamma = vec![vec![vec![proto.clone(); n]; n]; n];
        for j in 0..n {
            for k in j..n {
                let low: JVec = (0..n)
                    .map(|a| (&dg[j][a][k] + &dg[k][j][a] - &dg[a][j][k]) * 0.5)
                    .collect();
                let up = linalg::mat_vec(&site.ginv, &low);
                for (i, u) in up.into_iter().enumerate() {
                    gamma[i][k][j] = u.clone();
                    gamma[i][j][k] = u;
                }
            }
        }
        site.gamma = gamma;
        Ok(site)
    }

    /// `δf/δxʲ = ∂f/∂xʲ − Nᵐⱼ ∂f/∂vᵐ`, one order lower.
    pub fn delta(&self, f: &Jet, j: usize) -> Jet {
        let n = self.n;
        let mut s = f.deriv(j);
        for m in 0..n {
            let d = f.deriv(n + m);
            if !d.is_const() || d.value() != 0.0 {
                s = s - &self.nonlin[m][j] * d;
            }
        }
        s
    }

    /// `e(f) = eʲ δf/δxʲ`, the covariant derivative of an anisotropic function.
    pub fn nabla_function(&self, e: &[f64], f: &Jet) -> Jet {
        let mut s = self.delta(f, 0) * e[0];
        for (j, &ej) in e.iter().enumerate().skip(1) {
            if ej != 0.0 {
                s.axpy(ej, &self.delta(f, j));
            }
        }
        s
    }

    /// `Γ(a, b)` with jet arguments.
    pub fn gamma_of(&self, a: &[Jet], b: &[Jet]) -> JVec {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s: Option<Jet> = None;
                for j in 0..n {
                    let t = linalg::dot(&self.gamma[i][j], b) * &a[j];
                    s = Some(match s {
                        None => t,
                        Some(s) => s + t,
                    });
                }
                s.unwrap()
            })
            .collect()
    }

    /// `Γ(e, b)` with a constant first argument.
    pub fn gamma_e(&self, e: &[f64], b: &[Jet]) -> JVec {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = linalg::dot(&self.gamma[i][0], b) * e[0];
                for (j, &ej) in e.iter().enumerate().skip(1) {
                    if ej != 0.0 {
                        s.axpy(ej, &linalg::dot(&self.gamma[i][j], b));
                    }
                }
                s
            })
            .collect()
    }

    /// Value of `Γ_v(a, b)`.
    pub fn gamma0(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        s += self.gamma[i][j][k].value() * a[j] * b[k];
                    }
                }
                s
            })
            .collect()
    }

    /// `∇ᵛₑ𝒳 = eʲ δ𝒳/δxʲ + Γ(e, 𝒳)` for an anisotropic vector field given by jets.
    pub fn nabla(&self, e: &[f64], field: &[Jet]) -> JVec {
        let ge = self.gamma_e(e, field);
        field
            .iter()
            .zip(ge)
            .map(|(f, g)| self.nabla_function(e, f) + g)
            .collect()
    }

    /// Derivative of the field along `b` in the fiber variables.
    pub fn fiber_deriv(&self, field: &[Jet], b: &[f64]) -> JVec {
        let n = self.n;
        field
            .iter()
            .map(|f| {
                let mut s = f.deriv(n) * b[0];
                for (m, &bm) in b.iter().enumerate().skip(1) {
                    if bm != 0.0 {
                        s.axpy(bm, &f.deriv(n + m));
                    }
                }
                s
            })
            .collect()
    }

    /// Constant field with the site's variables.
    pub fn constant(&self, a: &[f64]) -> JVec {
        linalg::constant(&self.l, a)
    }

    pub fn g_of(&self, a: &[Jet], b: &[Jet]) -> Jet {
        let gb = linalg::mat_vec(&self.g, b);
        linalg::dot(a, &gb)
    }

    pub fn gv(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.g0[(i, j)] * a[i] * b[j];
            }
        }
        s
    }

    pub fn lv(&self) -> f64 {
        self.l.value()
    }

    /// `C(a, b, ·)` lowered, as jets.
    fn cart_low(&self, a: &[Jet], b: &[Jet]) -> JVec {
        let n = self.n;
        (0..n)
            .map(|l| {
                let mut s: Option<Jet> = None;
                for j in 0..n {
                    let t = linalg::dot(&self.cart[l][j], b) * &a[j];
                    s = Some(match s {
                        None => t,
                        Some(s) => s + t,
                    });
                }
                s.unwrap()
            })
            .collect()
    }

    /// `C♯(a, b)` as jets.
    pub fn c_sharp(&self, a: &[Jet], b: &[Jet]) -> JVec {
        linalg::mat_vec(&self.ginv, &self.cart_low(a, b))
    }

    pub fn c_sharp0(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let aj = linalg::constant(&self.cart[0][0][0].truncate(0), a);
        let bj = linalg::constant(&self.cart[0][0][0].truncate(0), b);
        let low: Vec<f64> = linalg::values(&self.cart_low(&aj, &bj));
        let s = self
            .ginv
            .iter()
            .map(|row| row.iter().zip(&low).map(|(p, q)| p.value() * q).sum())
            .collect();
        s
    }

    pub fn cartan0(&self, a: &[f64], b: &[f64], c: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += self.cart[i][j][k].value() * a[i] * b[j] * c[k];
                }
            }
        }
        s
    }

    /// `P_v(e, h, b) = ∂Γⁱⱼₖ/∂vˡ eʲ hᵏ bˡ`.
    pub fn p_tensor(&self, e: &[f64], h: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        let w = e[j] * h[k];
                        if w == 0.0 {
                            continue;
                        }
                        let gr = self.gamma[i][j][k].gradient();
                        for l in 0..n {
                            s += w * gr[n + l] * b[l];
                        }
                    }
                }
                s
            })
            .collect()
    }

    /// `R_v(e, h)b`.
    pub fn curvature(&self, e: &[f64], h: &[f64], b: &[f64]) -> Vec<f64> {
        let hb = self.gamma_e(h, &self.constant(b));
        let eb = self.gamma_e(e, &self.constant(b));
        let r1 = self.nabla(e, &hb);
        let r2 = self.nabla(h, &eb);
        r1.iter().zip(&r2).map(|(p, q)| p.value() - q.value()).collect()
    }

    /// `K_v(e)`; fails on flags whose denominator is below `1e-10` of its scale.
    pub fn flag_curvature(&self, e: &[f64]) -> GeomResult<f64> {
        let v = &self.v;
        let den = self.lv() * self.gv(e, e) - self.gv(v, e).powi(2);
        let scale = self.lv().abs() * self.gv(e, e).abs() + self.gv(v, e).powi(2);
        if den.abs() <= 1e-10 * scale {
            return Err(GeomError::DegenerateFlag { denom: den });
        }
        let r = self.curvature(v, e, e);
        Ok(self.gv(&r, v) / den)
    }

    pub fn christoffels(&self) -> ChristoffelSample {
        let n = self.n;
        ChristoffelSample {
            gamma: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).map(|k| self.gamma[i][j][k].value()).collect())
                        .collect()
                })
                .collect(),
            nonlinear: (0..n)
                .map(|i| (0..n).map(|j| self.nonlin[i][j].value()).collect())
                .collect(),
            spray: linalg::values(&self.spray),
        }
    }

    /// Composes a site jet with `x = x₀ + δ`, `v = v₀ + B δ`, giving a jet in
    /// the `n` position variables.
    pub fn along(&self, f: &Jet, b: &DMatrix<f64>) -> Jet {
        let n = self.n;
        let mut inputs: Vec<Jet> = (0..n)
            .map(|i| Jet::variable(n, f.order().max(1), i, 0.0))
            .collect();
        for m in 0..n {
            let row: Vec<f64> = (0..n).map(|i| b[(m, i)]).collect();
            let d = linalg::dot_f(&inputs[..n], &row);
            inputs.push(d);
        }
        f.compose(&inputs)
    }

    /// Restriction to `v = v₀`, a jet in the position variables.
    pub fn at_fixed_v(&self, f: &Jet) -> Jet {
        let n = self.n;
        let map: Vec<Option<usize>> = (0..2 * n).map(|i| (i < n).then_some(i)).collect();
        f.restrict(&map, n)
    }
}

/// Christoffel symbols at `(x, v)`.
pub fn christoffels(
    m: &dyn MetricField,
    x: &[f64],
    v: &[f64],
    mode: DiffMode,
) -> GeomResult<ChristoffelSample> {
    Ok(Site::with_order(m, x, v, mode, 3)?.christoffels())
}

/// Spray coefficients `Gⁱ(x, v)`; geodesics solve `ẍ = −2G(x, ẋ)`.
pub fn spray(m: &dyn MetricField, x: &[f64], v: &[f64], mode: DiffMode) -> GeomResult<Vec<f64>> {
    let n = x.len();
    let l = lagrangian_jet(m, x, v, 2, mode)?;
    let mut g = DMatrix::zeros(n, n);
    let mut h = nalgebra::DVector::zeros(n);
    let mut a = vec![0usize; 2 * n];
    for i in 0..n {
        a[n + i] += 1;
        for j in 0..n {
            a[n + j] += 1;
            g[(i, j)] = 0.5 * l.extract(&a)?;
            a[n + j] -= 1;
        }
        let mut s = 0.0;
        for k in 0..n {
            a[k] += 1;
            s += l.extract(&a)? * v[k];
            a[k] -= 1;
        }
        a[n + i] -= 1;
        a[i] += 1;
        s -= l.extract(&a)?;
        a[i] -= 1;
        h[i] = 0.25 * s;
    }
    det_guard(&g)?;
    let det = g.determinant();
    let sol = g.lu().solve(&h).ok_or(GeomError::DegenerateMetric { det })?;
    Ok(sol.iter().copied().collect())
}

/// `(D^W_γ X)ⁱ = Ẋⁱ + Γⁱⱼₖ(γ, W) γ̇ʲ Xᵏ` at one instant.
pub fn covariant_derivative_along(
    m: &dyn MetricField,
    gamma: &[f64],
    w: &[f64],
    gamma_dot: &[f64],
    x: &[f64],
    x_dot: &[f64],
    mode: DiffMode,
) -> GeomResult<Vec<f64>> {
    let c = christoffels(m, gamma, w, mode)?;
    let n = gamma.len();
    Ok((0..n)
        .map(|i| {
            let mut s = x_dot[i];
            for j in 0..n {
                for k in 0..n {
                    s += c.gamma[i][j][k] * gamma_dot[j] * x[k];
                }
            }
            s
        })
        .collect())
}

#[cfg(test)]
mod tests;
