//! Small dense vectors and matrices with jet entries.

use nalgebra::DMatrix;

use super::Jet;

pub type JVec = Vec<Jet>;
pub type JMat = Vec<Vec<Jet>>;

pub fn values(a: &[Jet]) -> Vec<f64> {
    a.iter().map(Jet::value).collect()
}

pub fn mat_values(a: &JMat) -> DMatrix<f64> {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| a[i][j].value())
}

/// Constant jets with the variables and order of `proto`.
pub fn constant(proto: &Jet, v: &[f64]) -> JVec {
    v.iter().map(|&a| proto.cst(a)).collect()
}

pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut s = &a[0] * &b[0];
    for (p, q) in a.iter().zip(b).skip(1) {
        s = s + p * q;
    }
    s
}

/// `Σ a_i b_i` with constant `b`.
pub fn dot_f(a: &[Jet], b: &[f64]) -> Jet {
    let mut s = &a[0] * b[0];
    for (p, &q) in a.iter().zip(b).skip(1) {
        if q != 0.0 {
            s.axpy(q, p);
        }
    }
    s
}

pub fn mat_vec(a: &JMat, x: &[Jet]) -> JVec {
    a.iter().map(|row| dot(row, x)).collect()
}

pub fn mat_vec_f(a: &JMat, x: &[f64]) -> JVec {
    a.iter().map(|row| dot_f(row, x)).collect()
}

/// Constant matrix times jet vector.
pub fn fmat_vec(a: &DMatrix<f64>, x: &[Jet]) -> JVec {
    (0..a.nrows())
        .map(|i| {
            let row: Vec<f64> = (0..a.ncols()).map(|j| a[(i, j)]).collect();
            dot_f(x, &row)
        })
        .collect()
}

pub fn mat_mul(a: &JMat, b: &JMat) -> JMat {
    let m = b[0].len();
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    let col: Vec<Jet> = b.iter().map(|r| r[j].clone()).collect();
                    dot(row, &col)
                })
                .collect()
        })
        .collect()
}

pub fn add(a: &[Jet], b: &[Jet]) -> JVec {
    a.iter().zip(b).map(|(p, q)| p + q).collect()
}

pub fn sub(a: &[Jet], b: &[Jet]) -> JVec {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

pub fn scale(a: &[Jet], s: f64) -> JVec {
    a.iter().map(|p| p * s).collect()
}

/// `Σ c_k v_k` with jet coefficients.
pub fn combine(c: &[Jet], v: &[JVec]) -> JVec {
    let mut out: JVec = v[0].iter().map(|e| e * &c[0]).collect();
    for (ck, vk) in c.iter().zip(v).skip(1) {
        for (o, e) in out.iter_mut().zip(vk) {
            *o = &*o + e * ck;
        }
    }
    out
}

/// Inverse by Newton–Schulz refinement of the inverse of the value matrix.
///
/// Each sweep doubles the number of correct Taylor degrees.
pub fn inverse(a: &JMat) -> Option<JMat> {
    let n = a.len();
    let inv0 = mat_values(a).try_inverse()?;
    let proto = &a[0][0];
    let mut x: JMat = (0..n)
        .map(|i| (0..n).map(|j| proto.cst(inv0[(i, j)])).collect())
        .collect();
    let mut correct = 1;
    while correct <= proto.order() {
        let ax = mat_mul(a, &x);
        let r: JMat = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = if i == j { 2.0 } else { 0.0 };
                        -&ax[i][j] + d
                    })
                    .collect()
            })
            .collect();
        x = mat_mul(&x, &r);
        correct *= 2;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::seed;

    #[test]
    fn inverse_times_matrix_is_identity() {
        let (xs, _) = seed(&[0.2, -0.4], &[], 4).unwrap();
        let a: JMat = vec![
            vec![xs[0].exp() + 1.0, &xs[0] * &xs[1]],
            vec![&xs[1] * 0.5, xs[1].cos() + 2.0],
        ];
        let b = inverse(&a).unwrap();
        let p = mat_mul(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p[i][j].value() - want).abs() < 1e-14);
                assert!(p[i][j].coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
            }
        }
    }
}
