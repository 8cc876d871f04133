//! Taylor coefficients of plain `f64` callables by sampling.
//!
//! Along each direction `u` the restriction `t ↦ f(p + t u)` is interpolated
//! by a Chebyshev series on `[-h, h]`, which yields the homogeneous parts
//! `H_d(u)` of the Taylor polynomial. Each `H_d` is then recovered from its
//! values on the lattice `{α ∈ ℕ^N : |α| = d}`, which is unisolvent for
//! homogeneous polynomials of degree `d`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};

use super::table::table;
use super::Jet;
use crate::numerics::{cheb_fit, cheb_nodes, cheb_to_monomial};

#[derive(Clone, Debug)]
pub struct FdOptions {
    /// Half-width of the sampling window in scaled coordinates.
    pub half_width: f64,
    /// Chebyshev nodes per direction.
    pub nodes: usize,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            half_width: 0.15,
            nodes: 16,
        }
    }
}

type LatticeKey = (usize, usize);
type LatticeCache = RwLock<HashMap<LatticeKey, Arc<Lattice>>>;

struct Lattice {
    points: Vec<Vec<u8>>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

fn lattice(nvars: usize, d: usize) -> Arc<Lattice> {
    static C: OnceLock<LatticeCache> = OnceLock::new();
    let c = C.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(l) = c.read().unwrap().get(&(nvars, d)) {
        return l.clone();
    }
    let t = table(nvars, d);
    let start = t.len_upto(d - 1);
    let monos: Vec<Vec<u8>> = t.exps[start..].to_vec();
    // points = same exponent set, read as lattice coordinates scaled by 1/d
    let m = monos.len();
    let mut a = DMatrix::zeros(m, m);
    for (r, p) in monos.iter().enumerate() {
        for (k, beta) in monos.iter().enumerate() {
            let mut v = 1.0;
            for (pi, bi) in p.iter().zip(beta) {
                v *= (*pi as f64 / d as f64).powi(*bi as i32);
            }
            a[(r, k)] = v;
        }
    }
    let l = Arc::new(Lattice {
        points: monos,
        lu: a.lu(),
    });
    c.write().unwrap().entry((nvars, d)).or_insert(l).clone()
}

/// Taylor jet of `f` at `p` to `order`, sampling `p + δ` with `δ_i` of size
/// about `scale[i] * half_width`.
pub fn fd_taylor(
    f: &dyn Fn(&[f64]) -> f64,
    p: &[f64],
    scale: &[f64],
    order: usize,
    opts: &FdOptions,
) -> Jet {
    let n = p.len();
    assert_eq!(scale.len(), n);
    let t = table(n, order);
    let mut coeffs = vec![0.0; t.len()];
    coeffs[0] = f(p);
    let nodes = cheb_nodes(opts.nodes);
    let h = opts.half_width;
    let mut x = vec![0.0; n];
    for d in 1..=order {
        let lat = lattice(n, d);
        let mut rhs = DVector::zeros(lat.points.len());
        for (r, pt) in lat.points.iter().enumerate() {
            // unit direction in scaled coordinates
            let u: Vec<f64> = pt.iter().map(|&a| a as f64 / d as f64).collect();
            let len = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            let vals: Vec<f64> = nodes
                .iter()
                .map(|&tau| {
                    for i in 0..n {
                        x[i] = p[i] + tau * h * scale[i] * u[i] / len;
                    }
                    f(&x)
                })
                .collect();
            let mono = cheb_to_monomial(&cheb_fit(&vals), d);
            // coefficient of τ^d is H_d(h u/len); rescale to H_d(u)
            rhs[r] = mono[d] * (len / h).powi(d as i32);
        }
        let sol = lat.lu.solve(&rhs).expect("lattice system is unisolvent");
        let start = t.len_upto(d - 1);
        for (k, c) in sol.iter().enumerate() {
            let beta = &t.exps[start + k];
            let s: f64 = beta
                .iter()
                .zip(scale)
                .map(|(&b, &sc)| sc.powi(b as i32))
                .product();
            coeffs[start + k] = c / s;
        }
    }
    Jet::from_coeffs(n, order, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomial_exactly() {
        let f = |x: &[f64]| 1.0 + x[0] * x[1] * x[1] - 2.0 * x[2] + x[0].powi(3) * x[2];
        let p = [0.3, -0.2, 0.5];
        let j = fd_taylor(&f, &p, &[1.0; 3], 4, &FdOptions::default());
        let (xs, _) = crate::jets::seed(&p, &[], 4).unwrap();
        let exact = Jet::cst(&xs[0], 1.0) + &xs[0] * &xs[1] * &xs[1] - &xs[2] * 2.0
            + xs[0].powi(3) * &xs[2];
        for (a, b) in j.coeffs().iter().zip(exact.coeffs()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}
