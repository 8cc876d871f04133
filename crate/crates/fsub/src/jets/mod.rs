//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients `c_α` of `f(p + δ) = Σ c_α δ^α`
//! for `|α| ≤ K`. Coefficients are Taylor coefficients, not derivatives:
//! [`Jet::extract`] applies the factorial, `∂^α f(p) = α! c_α`. So `v²` seeded
//! at `v = 2` to order 2 stores `(4, 4, 1)` and `extract(&[2])` gives 2.

mod fd;
pub mod linalg;
mod scalar;
mod table;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

pub use fd::{fd_taylor, FdOptions};
pub use scalar::Scalar;
use table::{table, Table, NONE};

use crate::error::JetError;

/// Highest truncation order the engine will build tables for.
pub const MAX_ORDER: usize = 8;
/// Default truncation order.
pub const DEFAULT_ORDER: usize = 5;

#[derive(Clone)]
pub struct Jet {
    t: Arc<Table>,
    c: Vec<f64>,
    konst: bool,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Jet(n={}, K={}, {:?})",
            self.t.nvars,
            self.t.order,
            &self.c[..self.c.len().min(8)]
        )
    }
}

fn check_order(order: usize) -> Result<(), JetError> {
    if order > MAX_ORDER {
        Err(JetError::UnsupportedOrder {
            requested: order,
            max: MAX_ORDER,
        })
    } else {
        Ok(())
    }
}

/// Seeds `x + δx` and `v + δv` as jet variables `0..n` and `n..2n`.
pub fn seed(x: &[f64], v: &[f64], order: usize) -> Result<(Vec<Jet>, Vec<Jet>), JetError> {
    if order == 0 {
        return Err(JetError::UnsupportedOrder {
            requested: 0,
            max: MAX_ORDER,
        });
    }
    check_order(order)?;
    let nv = x.len() + v.len();
    let xs = x
        .iter()
        .enumerate()
        .map(|(i, &a)| Jet::variable(nv, order, i, a))
        .collect();
    let vs = v
        .iter()
        .enumerate()
        .map(|(i, &a)| Jet::variable(nv, order, x.len() + i, a))
        .collect();
    Ok((xs, vs))
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Jet {
        let t = table(nvars, order);
        let mut c = vec![0.0; t.len()];
        c[0] = value;
        Jet { t, c, konst: true }
    }

    /// The jet of `value + δ_i`.
    pub fn variable(nvars: usize, order: usize, i: usize, value: f64) -> Jet {
        assert!(i < nvars, "variable index {i} out of range for {nvars} vars");
        let mut j = Jet::constant(nvars, order, value);
        if order >= 1 {
            j.c[1 + i] = 1.0;
            j.konst = false;
        }
        j
    }

    /// Builds a jet from Taylor coefficients in graded order.
    pub fn from_coeffs(nvars: usize, order: usize, c: Vec<f64>) -> Jet {
        let t = table(nvars, order);
        assert_eq!(c.len(), t.len(), "coefficient count mismatch");
        let konst = c[1..].iter().all(|&a| a == 0.0);
        Jet { t, c, konst }
    }

    /// Constant jet with the same variables and order as `self`.
    pub fn cst(&self, value: f64) -> Jet {
        let mut c = vec![0.0; self.c.len()];
        c[0] = value;
        Jet {
            t: self.t.clone(),
            c,
            konst: true,
        }
    }

    pub fn zero_like(&self) -> Jet {
        self.cst(0.0)
    }

    pub fn nvars(&self) -> usize {
        self.t.nvars
    }

    pub fn order(&self) -> usize {
        self.t.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn is_const(&self) -> bool {
        self.konst
    }

    /// Exponent vectors of the stored coefficients, in storage order.
    pub fn monomials(&self) -> impl Iterator<Item = &[u8]> {
        self.t.exps.iter().map(|e| e.as_slice())
    }

    /// Taylor coefficient of `δ^α`.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.t.index_of(alpha).map(|k| self.c[k]).unwrap_or(0.0)
    }

    /// Mixed partial `∂^α f` at the expansion point.
    pub fn extract(&self, alpha: &[usize]) -> Result<f64, JetError> {
        if alpha.len() != self.t.nvars {
            return Err(JetError::BadIndex {
                len: alpha.len(),
                nvars: self.t.nvars,
            });
        }
        let deg: usize = alpha.iter().sum();
        if deg > self.t.order {
            return Err(JetError::UnsupportedOrder {
                requested: deg,
                max: self.t.order,
            });
        }
        let e: Vec<u8> = alpha.iter().map(|&a| a as u8).collect();
        let k = self.t.index_of(&e).expect("degree checked");
        let fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        Ok(self.c[k] * fact)
    }

    /// First partials with respect to every variable.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.t.nvars)
            .map(|i| if self.t.order >= 1 { self.c[1 + i] } else { 0.0 })
            .collect()
    }

    /// `∂f/∂δ_i`, one order lower.
    pub fn deriv(&self, i: usize) -> Jet {
        let n = self.t.nvars;
        assert!(i < n);
        if self.t.order == 0 {
            return self.clone().into_zero();
        }
        let t = table(n, self.t.order - 1);
        let mut c = vec![0.0; t.len()];
        if !self.konst {
            for (k, ck) in c.iter_mut().enumerate() {
                let up = self.t.up[k * n + i];
                debug_assert!(up != NONE);
                *ck = (t.exps[k][i] as f64 + 1.0) * self.c[up as usize];
            }
        }
        let konst = self.konst || c[1..].iter().all(|&a| a == 0.0);
        Jet { t, c, konst }
    }

    fn into_zero(mut self) -> Jet {
        self.c.iter_mut().for_each(|a| *a = 0.0);
        self.konst = true;
        self
    }

    /// Drops all terms above degree `k`.
    pub fn truncate(&self, k: usize) -> Jet {
        if k >= self.t.order {
            return self.clone();
        }
        let t = table(self.t.nvars, k);
        let c = self.c[..t.len()].to_vec();
        Jet {
            t,
            c,
            konst: self.konst,
        }
    }

    /// Same polynomial at truncation order `k`: drops or zero-pads terms.
    ///
    /// Padding is only meaningful when the caller knows the missing terms do
    /// not reach the coefficients it will read.
    pub fn with_order(&self, k: usize) -> Jet {
        if k <= self.t.order {
            return self.truncate(k);
        }
        let t = table(self.t.nvars, k);
        let mut c = vec![0.0; t.len()];
        c[..self.c.len()].copy_from_slice(&self.c);
        Jet {
            t,
            c,
            konst: self.konst,
        }
    }

    /// Linear substitution of variables: `δ_i ↦ t_{map[i]}` or `δ_i ↦ 0`.
    pub fn restrict(&self, map: &[Option<usize>], nvars_out: usize) -> Jet {
        assert_eq!(map.len(), self.t.nvars);
        let t = table(nvars_out, self.t.order);
        let mut c = vec![0.0; t.len()];
        let mut e = vec![0u8; nvars_out];
        'mono: for (k, ex) in self.t.exps.iter().enumerate() {
            if self.c[k] == 0.0 {
                continue;
            }
            e.iter_mut().for_each(|a| *a = 0);
            for (i, &a) in ex.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => e[j] += a,
                    None => continue 'mono,
                }
            }
            c[t.index_of(&e).unwrap()] += self.c[k];
        }
        let konst = c[1..].iter().all(|&a| a == 0.0);
        Jet { t, c, konst }
    }

    /// Substitutes `δ_i ↦ inputs[i]`; the inputs must have zero value.
    ///
    /// The result lives in the inputs' variables, truncated to the lower of
    /// the two orders.
    pub fn compose(&self, inputs: &[Jet]) -> Jet {
        assert_eq!(inputs.len(), self.t.nvars);
        assert!(!inputs.is_empty());
        for p in inputs {
            assert!(
                p.value() == 0.0,
                "compose expects perturbations with zero value"
            );
        }
        let order = self.t.order.min(inputs[0].order());
        let proto = inputs[0].truncate(order);
        let len = self.t.len_upto(order);
        let mut pows: Vec<Option<Jet>> = vec![None; len];
        pows[0] = Some(proto.cst(1.0));
        let mut acc = proto.cst(self.c[0]);
        for k in 1..len {
            let ex = &self.t.exps[k];
            let i = ex.iter().position(|&a| a > 0).unwrap();
            let mut lower = ex.clone();
            lower[i] -= 1;
            let kl = self.t.index_of(&lower).unwrap();
            let m = pows[kl].as_ref().unwrap() * &inputs[i];
            if self.c[k] != 0.0 {
                acc = acc + &m * self.c[k];
            }
            pows[k] = Some(m);
        }
        acc
    }

    /// `Σ d[k] (self − self.value())^k`, the composition with a univariate
    /// function whose Taylor coefficients at `self.value()` are `d`.
    fn compose_series(&self, d: &[f64]) -> Jet {
        if self.konst {
            return self.cst(d[0]);
        }
        let mut h = self.clone();
        h.c[0] = 0.0;
        let k = self.t.order.min(d.len() - 1);
        let mut r = self.cst(d[k]);
        for j in (0..k).rev() {
            r = &r * &h;
            r.c[0] += d[j];
        }
        r
    }

    pub fn sqrt(&self) -> Jet {
        let a0 = self.c[0];
        let s0 = a0.sqrt();
        let mut s = vec![0.0; self.c.len()];
        s[0] = s0;
        if !self.konst {
            for o in 1..s.len() {
                let mut acc = self.c[o];
                for &(i, j) in self.t.pairs_of(o) {
                    if i != 0 && j != 0 {
                        acc -= s[i as usize] * s[j as usize];
                    }
                }
                s[o] = acc / (2.0 * s0);
            }
        }
        Jet {
            t: self.t.clone(),
            c: s,
            konst: self.konst,
        }
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        let d: Vec<f64> = (0..=self.t.order).map(|k| e / factorial(k)).collect();
        self.compose_series(&d)
    }

    pub fn ln(&self) -> Jet {
        let a = self.c[0];
        let mut d = vec![a.ln()];
        for k in 1..=self.t.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign / (k as f64 * a.powi(k as i32)));
        }
        self.compose_series(&d)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        let cyc = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.t.order)
            .map(|k| cyc[k % 4] / factorial(k))
            .collect();
        self.compose_series(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        let cyc = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.t.order)
            .map(|k| cyc[k % 4] / factorial(k))
            .collect();
        self.compose_series(&d)
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        let d: Vec<f64> = (0..=self.t.order)
            .map(|k| if k % 2 == 0 { s } else { c } / factorial(k))
            .collect();
        self.compose_series(&d)
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        let d: Vec<f64> = (0..=self.t.order)
            .map(|k| if k % 2 == 0 { c } else { s } / factorial(k))
            .collect();
        self.compose_series(&d)
    }

    pub fn tan(&self) -> Jet {
        &self.sin() / &self.cos()
    }

    pub fn tanh(&self) -> Jet {
        &self.sinh() / &self.cosh()
    }

    /// Real power with the principal branch; the value must be positive
    /// unless `p` is a nonnegative integer.
    pub fn powf(&self, p: f64) -> Jet {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            return self.powi(p as i32);
        }
        let a = self.c[0];
        let mut d = Vec::with_capacity(self.t.order + 1);
        let mut coef = 1.0;
        for k in 0..=self.t.order {
            d.push(coef * a.powf(p - k as f64));
            coef *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose_series(&d)
    }

    /// Integer power by repeated squaring, exact for polynomial inputs.
    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.cst(1.0) / self.powi(-n);
        }
        let mut base = self.clone();
        let mut acc = self.cst(1.0);
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        self.cst(1.0) / self
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Jet) {
        let len = self.c.len().min(other.c.len());
        if len < self.c.len() {
            self.t = other.t.clone();
            self.c.truncate(len);
        }
        for (x, y) in self.c.iter_mut().zip(&other.c) {
            *x += a * y;
        }
        self.konst &= other.konst;
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Result table for a binary operation: the lower order wins.
fn common(a: &Jet, b: &Jet) -> Arc<Table> {
    assert_eq!(
        a.t.nvars, b.t.nvars,
        "jets over different variable sets cannot be combined"
    );
    if a.t.order <= b.t.order {
        a.t.clone()
    } else {
        b.t.clone()
    }
}

fn add_jets(a: &Jet, b: &Jet, sign: f64) -> Jet {
    let t = common(a, b);
    let c = a.c[..t.len()]
        .iter()
        .zip(&b.c[..t.len()])
        .map(|(x, y)| x + sign * y)
        .collect();
    Jet {
        t,
        c,
        konst: a.konst && b.konst,
    }
}

fn mul_jets(a: &Jet, b: &Jet) -> Jet {
    let t = common(a, b);
    let len = t.len();
    if a.konst || b.konst {
        let (k, j) = if a.konst { (a.c[0], b) } else { (b.c[0], a) };
        return Jet {
            t,
            c: j.c[..len].iter().map(|x| k * x).collect(),
            konst: a.konst && b.konst,
        };
    }
    let mut c = vec![0.0; len];
    for (o, co) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for &(i, j) in t.pairs_of(o) {
            s += a.c[i as usize] * b.c[j as usize];
        }
        *co = s;
    }
    Jet {
        t,
        c,
        konst: false,
    }
}

fn div_jets(a: &Jet, b: &Jet) -> Jet {
    let t = common(a, b);
    let len = t.len();
    let b0 = b.c[0];
    if b.konst {
        return Jet {
            t,
            c: a.c[..len].iter().map(|x| x / b0).collect(),
            konst: a.konst,
        };
    }
    let mut c = vec![0.0; len];
    for o in 0..len {
        let mut s = a.c[o];
        for &(i, j) in t.pairs_of(o) {
            if j != 0 {
                s -= c[i as usize] * b.c[j as usize];
            }
        }
        c[o] = s / b0;
    }
    Jet {
        t,
        c,
        konst: false,
    }
}

macro_rules! jet_binop {
    ($tr:ident, $m:ident, $f:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                $f(self, rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                $f(self, &rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                $f(&self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                $f(&self, &rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| add_jets(a, b, 1.0));
jet_binop!(Sub, sub, |a, b| add_jets(a, b, -1.0));
jet_binop!(Mul, mul, mul_jets);
jet_binop!(Div, div, div_jets);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            t: self.t.clone(),
            c: self.c.iter().map(|x| -x).collect(),
            konst: self.konst,
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.c.iter_mut().for_each(|x| *x = -*x);
        self
    }
}

macro_rules! jet_scalar_op {
    ($tr:ident, $m:ident, |$j:ident, $s:ident| $body:block) => {
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(mut self, $s: f64) -> Jet {
                let $j = &mut self;
                $body;
                self
            }
        }
        impl $tr<f64> for &Jet {
            type Output = Jet;
            fn $m(self, $s: f64) -> Jet {
                let mut out = self.clone();
                let $j = &mut out;
                $body;
                out
            }
        }
    };
}

jet_scalar_op!(Add, add, |j, s| { j.c[0] += s });
jet_scalar_op!(Sub, sub, |j, s| { j.c[0] -= s });
jet_scalar_op!(Mul, mul, |j, s| {
    j.c.iter_mut().for_each(|x| *x *= s)
});
jet_scalar_op!(Div, div, |j, s| {
    j.c.iter_mut().for_each(|x| *x /= s)
});

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs * self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

#[cfg(test)]
mod tests;
