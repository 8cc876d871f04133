use super::*;
use crate::metric::{ChartBox, Lagrangian, Metric};
use crate::numerics::{max_abs, sub};
use crate::Scalar;
use proptest::prelude::*;

struct Sphere;
impl Lagrangian for Sphere {
    fn dim(&self) -> usize {
        2
    }
    fn lagrangian<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let s = x[0].sin();
        v[0].clone() * v[0].clone() + s.clone() * s * v[1].clone() * v[1].clone()
    }
}

/// Riemannian metric on ℝ³ with a closed-form `g(x)`.
struct Quad;
fn quad_g(x: &[f64]) -> [[f64; 3]; 3] {
    [
        [1.0 + 0.3 * x[0] * x[0], 0.1 * x[2], 0.0],
        [0.1 * x[2], 1.0 + 0.2 * x[1].sin(), 0.05 * x[0]],
        [0.0, 0.05 * x[0], 2.0 + x[0] * x[1]],
    ]
}
impl Lagrangian for Quad {
    fn dim(&self) -> usize {
        3
    }
    fn lagrangian<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let a00 = x[0].clone() * x[0].clone() * 0.3 + 1.0;
        let a01 = x[2].clone() * 0.1;
        let a11 = x[1].sin() * 0.2 + 1.0;
        let a12 = x[0].clone() * 0.05;
        let a22 = x[0].clone() * x[1].clone() + 2.0;
        a00 * v[0].clone() * v[0].clone()
            + a01 * v[0].clone() * v[1].clone() * 2.0
            + a11 * v[1].clone() * v[1].clone()
            + a12 * v[1].clone() * v[2].clone() * 2.0
            + a22 * v[2].clone() * v[2].clone()
    }
}

/// Randers metric with position-dependent data.
struct Rand3;
impl Lagrangian for Rand3 {
    fn dim(&self) -> usize {
        3
    }
    fn lagrangian<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let q = Quad.lagrangian(x, v);
        let beta = x[0].cos() * v[0].clone() * 0.2 + x[1].clone() * v[2].clone() * 0.1;
        let f = q.sqrt() + beta;
        f.clone() * f
    }
}

fn rand3() -> Metric<Rand3> {
    Metric::new("rand3", Rand3, ChartBox::cube(3, 0.5))
}

// Levi-Civita symbols from central differences of the closed-form metric.
fn levi_civita_oracle(x: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let h = 1e-5;
    let mut dg = [[[0.0; 3]; 3]; 3];
    for (l, dgl) in dg.iter_mut().enumerate() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[l] += h;
        xm[l] -= h;
        let (gp, gm) = (quad_g(&xp), quad_g(&xm));
        for i in 0..3 {
            for j in 0..3 {
                dgl[i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
            }
        }
    }
    let g = quad_g(x);
    let gm = DMatrix::from_fn(3, 3, |i, j| g[i][j]).try_inverse().unwrap();
    let mut out = vec![vec![vec![0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    s += 0.5 * gm[(i, l)] * (dg[j][l][k] + dg[k][j][l] - dg[l][j][k]);
                }
                out[i][j][k] = s;
            }
        }
    }
    out
}

#[test]
fn sphere_christoffels_and_curvature() {
    let m = Metric::new("s2", Sphere, ChartBox::new(vec![0.2, 0.0], vec![3.0, 6.0]));
    for (th, v) in [(0.7, [1.0, 0.3]), (1.9, [-0.4, 1.1])] {
        let s = Site::new(&m, &[th, 0.4], &v, DiffMode::Ad).unwrap();
        let c = s.christoffels();
        assert!((c.gamma[0][1][1] + f64::sin(th) * f64::cos(th)).abs() < 1e-12);
        assert!((c.gamma[1][0][1] - f64::cos(th) / f64::sin(th)).abs() < 1e-12);
        assert!(c.gamma[0][0][0].abs() < 1e-12 && c.gamma[1][1][1].abs() < 1e-12);
        for e in [[0.0, 1.0], [1.0, -0.5], [0.3, 2.0]] {
            let k = s.flag_curvature(&e).unwrap();
            assert!((k - 1.0).abs() < 1e-10, "K = {k}");
        }
    }
}

#[test]
fn quadratic_metric_matches_levi_civita() {
    let m = Metric::new("quad", Quad, ChartBox::cube(3, 1.0));
    let x = [0.3, -0.2, 0.5];
    let c = christoffels(&m, &x, &[0.4, 1.0, -0.7], DiffMode::Ad).unwrap();
    let o = levi_civita_oracle(&x);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                assert!((c.gamma[i][j][k] - o[i][j][k]).abs() < 1e-9);
            }
        }
    }
    // quadratic L: Γ does not depend on v
    let s = Site::new(&m, &x, &[0.4, 1.0, -0.7], DiffMode::Ad).unwrap();
    assert!(max_abs(&s.p_tensor(&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0], &[0.2, 0.0, 1.0])) < 1e-12);
}

#[test]
fn flat_metric_has_no_connection() {
    struct Flat;
    impl Lagrangian for Flat {
        fn dim(&self) -> usize {
            2
        }
        fn lagrangian<S: Scalar>(&self, _x: &[S], v: &[S]) -> S {
            v[0].clone() * v[0].clone() + v[1].clone() * v[1].clone()
        }
    }
    let m = Metric::new("flat", Flat, ChartBox::cube(2, 1.0));
    let s = Site::new(&m, &[0.1, 0.2], &[1.0, 0.5], DiffMode::Ad).unwrap();
    let c = s.christoffels();
    assert!(c.spray.iter().all(|a| a.abs() < 1e-15));
    assert!(s.flag_curvature(&[0.0, 1.0]).unwrap().abs() < 1e-14);
}

#[test]
fn great_circle_is_autoparallel() {
    let m = Metric::new("s2", Sphere, ChartBox::new(vec![0.2, 0.0], vec![3.0, 6.0]));
    // the equator θ = π/2 traversed at unit speed
    let x = [std::f64::consts::FRAC_PI_2, 0.8];
    let v = [0.0, 1.0];
    let d = covariant_derivative_along(&m, &x, &v, &v, &v, &[0.0, 0.0], DiffMode::Ad).unwrap();
    assert!(max_abs(&d) < 1e-14);
    // a meridian through a general latitude is also a geodesic
    let x = [1.1, 0.8];
    let v = [1.0, 0.0];
    let d = covariant_derivative_along(&m, &x, &v, &v, &v, &[0.0, 0.0], DiffMode::Ad).unwrap();
    assert!(max_abs(&d) < 1e-14);
}

#[test]
fn p_tensor_matches_difference_quotient() {
    let m = rand3();
    let x = [0.1, 0.2, -0.3];
    let v = [0.5, -0.4, 0.9];
    let (e, h, b) = ([1.0, 0.2, 0.0], [0.0, 1.0, -0.3], [0.3, 0.1, 0.7]);
    let s = Site::new(&m, &x, &v, DiffMode::Ad).unwrap();
    let p = s.p_tensor(&e, &h, &b);
    let eps = 1e-5;
    let vp: Vec<f64> = (0..3).map(|i| v[i] + eps * b[i]).collect();
    let vm: Vec<f64> = (0..3).map(|i| v[i] - eps * b[i]).collect();
    let gp = Site::with_order(&m, &x, &vp, DiffMode::Ad, 3).unwrap().gamma0(&e, &h);
    let gm = Site::with_order(&m, &x, &vm, DiffMode::Ad, 3).unwrap().gamma0(&e, &h);
    let fd: Vec<f64> = (0..3).map(|i| (gp[i] - gm[i]) / (2.0 * eps)).collect();
    assert!(max_abs(&sub(&p, &fd)) < 1e-7, "{p:?} {fd:?}");
}

#[test]
fn sampled_site_agrees_with_jets() {
    let m = rand3();
    let pts = crate::metric::PointsOnly(rand3());
    let x = [0.1, 0.2, -0.3];
    let v = [0.5, -0.4, 0.9];
    let a = Site::new(&m, &x, &v, DiffMode::Ad).unwrap();
    let b = Site::new(&pts, &x, &v, DiffMode::Ad).unwrap();
    let e = [0.3, 1.0, 0.2];
    let ra = a.curvature(&v, &e, &e);
    let rb = b.curvature(&v, &e, &e);
    assert!(max_abs(&sub(&ra, &rb)) < 1e-6, "{ra:?} {rb:?}");
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

fn sample() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-0.5..0.5f64, 3),
        prop::collection::vec(-1.0..1.0f64, 3),
    )
        .prop_filter("admissible", |(_, v)| v.iter().map(|a| a * a).sum::<f64>() > 0.05)
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spray_is_half_the_geodesic_contraction((x, v) in sample()) {
        let m = rand3();
        let s = Site::new(&m, &x, &v, DiffMode::Ad).unwrap();
        let gvv = s.gamma0(&v, &v);
        let g = spray(&m, &x, &v, DiffMode::Ad).unwrap();
        for i in 0..3 {
            prop_assert!((gvv[i] - 2.0 * s.spray[i].value()).abs() < 1e-10);
            prop_assert!((g[i] - s.spray[i].value()).abs() < 1e-10);
        }
    }

    #[test]
    fn metric_compatibility_and_koszul((x, v) in sample()) {
        let m = rand3();
        let s = Site::new(&m, &x, &v, DiffMode::Ad).unwrap();
        let n = 3;
        let gx: Vec<Vec<Jet>> = (0..n)
            .map(|a| (0..n).map(|b| s.at_fixed_v(&s.g[a][b])).collect())
            .collect();
        // e(g_V(a, b)) for constant fields and constant V
        let dg = |e: usize, a: &[f64], b: &[f64]| -> f64 {
            let mut t = 0.0;
            for i in 0..n {
                for j in 0..n {
                    t += gx[i][j].gradient()[e] * a[i] * b[j];
                }
            }
            t
        };
        let nv: Vec<Vec<f64>> = (0..n).map(|e| s.gamma0(&unit(n, e), &v)).collect();
        for e in 0..n {
            for h in 0..n {
                for b in 0..n {
                    let (ee, hh, bb) = (unit(n, e), unit(n, h), unit(n, b));
                    let lhs = 2.0 * s.gv(&s.gamma0(&ee, &hh), &bb);
                    let rhs = dg(e, &bb, &hh) + dg(h, &ee, &bb) - dg(b, &ee, &hh)
                        - 2.0 * s.cartan0(&bb, &hh, &nv[e])
                        - 2.0 * s.cartan0(&ee, &bb, &nv[h])
                        + 2.0 * s.cartan0(&ee, &hh, &nv[b]);
                    prop_assert!((lhs - rhs).abs() < 1e-8, "koszul {e}{h}{b}: {lhs} {rhs}");
                    // (∇_e g)(h, b) with g as an anisotropic tensor
                    let nab = s.nabla_function(&ee, &s.g[h][b]).value()
                        - s.gv(&s.gamma0(&ee, &hh), &bb)
                        - s.gv(&hh, &s.gamma0(&ee, &bb));
                    prop_assert!(nab.abs() < 1e-9);
                }
            }
            prop_assert!(s.nabla_function(&unit(n, e), &s.l).value().abs() < 1e-10);
        }
    }

    #[test]
    fn curvature_against_affine_curvature((x, v) in sample(), e in vec3(), h in vec3(), b in vec3(),
                                          bm in prop::collection::vec(-0.5..0.5f64, 9)) {
        let m = rand3();
        let s = Site::new(&m, &x, &v, DiffMode::Ad).unwrap();
        let n = 3;
        let bmat = DMatrix::from_row_slice(n, n, &bm);
        // Γ(x, V(x))(h, b) as a jet in x, for V = v + B(x − x₀)
        let zfield = |h: &[f64]| -> Vec<Jet> {
            s.gamma_e(h, &s.constant(&b)).iter().map(|f| s.along(f, &bmat)).collect()
        };
        let gamma_along: Vec<Vec<Vec<Jet>>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| s.along(&s.gamma[i][j][k], &bmat)).collect()).collect())
            .collect();
        let nabla_v = |e: &[f64], z: &[Jet]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut t = 0.0;
                    for j in 0..n {
                        t += e[j] * z[i].gradient()[j];
                        for k in 0..n {
                            t += gamma_along[i][j][k].value() * e[j] * z[k].value();
                        }
                    }
                    t
                })
                .collect()
        };
        let rv = sub(&nabla_v(&e, &zfield(&h)), &nabla_v(&h, &zfield(&e)));
        let dv = |e: &[f64]| -> Vec<f64> {
            let be: Vec<f64> = (0..n).map(|i| (0..n).map(|j| bmat[(i, j)] * e[j]).sum()).collect();
            crate::numerics::add(&be, &s.gamma0(e, &v))
        };
        let want = crate::numerics::add(
            &sub(&rv, &s.p_tensor(&h, &b, &dv(&e))),
            &s.p_tensor(&e, &b, &dv(&h)),
        );
        let r = s.curvature(&e, &h, &b);
        prop_assert!(max_abs(&sub(&r, &want)) < 1e-7 * (1.0 + max_abs(&r)));
        // antisymmetry
        prop_assert!(max_abs(&s.curvature(&e, &e, &b)) < 1e-12);
    }

    #[test]
    fn fiber_derivative_of_nabla((x, v) in sample(), e in vec3(), h in vec3()) {
        let m = rand3();
        let s = Site::new(&m, &x, &v, DiffMode::Ad).unwrap();
        let n = 3;
        // 𝒳ⁱ = gⁱʲ(x, v) wⱼ(x)
        let (xs, _) = seed(&x, &v, s.order).unwrap();
        let w: Vec<Jet> = vec![xs[0].sin() + 1.0, &xs[1] * &xs[2], xs[2].cos()];
        let field = linalg::mat_vec(&s.ginv, &w);
        let x0 = linalg::values(&field);
        let lhs = linalg::values(&s.fiber_deriv(&s.nabla(&e, &field), &h));
        let dfield = s.fiber_deriv(&field, &h);
        let corr = linalg::values(&s.fiber_deriv(&field, &s.gamma0(&e, &h)));
        let nab = sub(&linalg::values(&s.nabla(&e, &dfield)), &corr);
        let last = linalg::values(&s.fiber_deriv(&field, &s.p_tensor(&e, &v, &h)));
        let rhs: Vec<f64> = (0..n)
            .map(|i| s.p_tensor(&e, &x0, &h)[i] + nab[i] - last[i])
            .collect();
        prop_assert!(max_abs(&sub(&lhs, &rhs)) < 1e-6 * (1.0 + max_abs(&lhs)));
    }

    #[test]
    fn flag_curvature_depends_on_the_plane_only((x, v) in sample(), e in vec3(), lam in -2.0..2.0f64, mu in 0.3..3.0f64) {
        let m = rand3();
        let s = Site::new(&m, &x, &v, DiffMode::Ad).unwrap();
        let k0 = s.flag_curvature(&e);
        prop_assume!(k0.is_ok());
        let k0 = k0.unwrap();
        let e2: Vec<f64> = (0..3).map(|i| mu * e[i] + lam * v[i]).collect();
        let k1 = s.flag_curvature(&e2).unwrap();
        prop_assert!((k0 - k1).abs() < 1e-9 * (1.0 + k0.abs()));
    }

    #[test]
    fn p_vanishes_against_the_flagpole((x, v) in sample(), a in vec3(), b in vec3()) {
        let m = rand3();
        let s = Site::new(&m, &x, &v, DiffMode::Ad).unwrap();
        prop_assert!(s.gv(&s.p_tensor(&v, &a, &b), &v).abs() < 1e-10);
    }
}
