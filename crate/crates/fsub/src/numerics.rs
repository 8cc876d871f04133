//! Chebyshev interpolation, quadrature and small dense linear algebra on `f64`.

use nalgebra::{DMatrix, DVector};

/// Chebyshev points of the first kind on `[-1, 1]`, in decreasing order.
pub fn cheb_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos())
        .collect()
}

/// Coefficients `b_k` of `Σ b_k T_k` interpolating `vals` at [`cheb_nodes`].
pub fn cheb_fit(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let s: f64 = vals
                .iter()
                .enumerate()
                .map(|(j, &f)| {
                    f * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / nf).cos()
                })
                .sum();
            if k == 0 {
                s / nf
            } else {
                2.0 * s / nf
            }
        })
        .collect()
}

/// Clenshaw evaluation of `Σ b_k T_k(t)`.
pub fn cheb_eval(b: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in b.iter().skip(1).rev() {
        let tmp = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = tmp;
    }
    t * b1 - b2 + b.first().copied().unwrap_or(0.0)
}

/// Coefficients of the derivative series.
pub fn cheb_deriv(b: &[f64]) -> Vec<f64> {
    let n = b.len();
    if n < 2 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * b[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// Monomial coefficients of `Σ b_k T_k(t)` up to degree `upto`.
pub fn cheb_to_monomial(b: &[f64], upto: usize) -> Vec<f64> {
    let n = b.len();
    let mut out = vec![0.0; upto + 1];
    // T_{k-1}, T_k as monomial coefficient vectors
    let mut tm1 = vec![0.0; n + 1];
    let mut tk = vec![0.0; n + 1];
    tm1[0] = 1.0;
    tk[1] = 1.0;
    for (k, &bk) in b.iter().enumerate() {
        let tcur: &Vec<f64> = if k == 0 { &tm1 } else { &tk };
        for d in 0..=upto.min(n) {
            out[d] += bk * tcur[d];
        }
        if k >= 1 {
            let mut next = vec![0.0; n + 1];
            for d in 0..n {
                next[d + 1] += 2.0 * tk[d];
            }
            for d in 0..=n {
                next[d] -= tm1[d];
            }
            tm1 = std::mem::replace(&mut tk, next);
        }
    }
    out
}

/// Clenshaw–Curtis nodes and weights on `[-1, 1]` with `n + 1` points.
pub fn clenshaw_curtis(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2 && n % 2 == 0, "use an even n ≥ 2");
    let pi = std::f64::consts::PI;
    let nodes: Vec<f64> = (0..=n).map(|k| (pi * k as f64 / n as f64).cos()).collect();
    let mut w = vec![0.0; n + 1];
    for (k, wk) in w.iter_mut().enumerate() {
        let th = pi * k as f64 / n as f64;
        let mut s = 1.0;
        for j in 1..=n / 2 {
            let bj = if j == n / 2 { 1.0 } else { 2.0 };
            s -= bj / (4.0 * (j * j) as f64 - 1.0) * (2.0 * j as f64 * th).cos();
        }
        let ck = if k == 0 || k == n { 1.0 } else { 2.0 };
        *wk = ck * s / n as f64;
    }
    (nodes, w)
}

/// Dense LU solve; `None` if the matrix is singular.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().lu().solve(b)
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + q).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|p| p * s).collect()
}
