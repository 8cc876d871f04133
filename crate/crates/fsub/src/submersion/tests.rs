use proptest::prelude::*;

use super::*;
use crate::geodesics::OdeOptions;
use crate::verify::circle_velocity;
use crate::zoo::{self, MINKOWSKI_BETA};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn amax(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `√L` of the flat Randers metric, written out directly.
fn minkowski_f(v: &[f64]) -> f64 {
    dot(v, v).sqrt() + dot(&MINKOWSKI_BETA, v)
}

/// Golden-section minimum of a convex function on `[lo, hi]`.
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    while hi - lo > 1e-13 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// `J₁` by its power series.
fn bessel_j1(x: f64) -> f64 {
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..30 {
        term *= -(0.25 * x * x) / (k as f64 * (k + 1) as f64);
        sum += term;
    }
    sum
}

#[test]
fn product_metric_has_vanishing_t_and_a() {
    let f = zoo::riemannian_product().unwrap();
    let x = [0.3, -0.2, 0.5, 0.1];
    let v = [0.4, 1.0, -0.3, 0.7];
    let on = ONeill::new(&f.chart, &x, &v, DiffMode::Ad).unwrap();
    let e = [1.0, 0.2, -0.5, 0.3];
    let h = [-0.4, 0.9, 0.1, 0.6];
    assert!(amax(&on.t(&e, &h)) < 1e-12);
    assert!(amax(&on.a(&e, &h)) < 1e-12);
}

#[test]
fn hopf_integrability_tensor_has_unit_norm() {
    let f = zoo::hopf().unwrap();
    let c = &f.chart;
    for (p, vt, xt) in [
        ([1.2, 0.3, 0.5], [0.7, -0.4], [0.2, 1.1]),
        ([0.8, -1.0, 2.0], [0.1, 1.3], [1.0, 0.0]),
        ([2.1, 2.5, -1.5], [-0.6, 0.2], [0.3, 0.9]),
    ] {
        let v = c.lift_vector(&p, &vt, DiffMode::Ad).unwrap();
        let lv = c.total.eval(&p, &v);
        let v: Vec<f64> = v.iter().map(|a| a / lv.sqrt()).collect();
        let on = ONeill::new(c, &p, &v, DiffMode::Ad).unwrap();
        let x = c.lift_vector(&p, &xt, DiffMode::Ad).unwrap();
        let x: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - on.gv(&x, &v) * b).collect();
        let nx = on.gv(&x, &x).sqrt();
        let x: Vec<f64> = x.iter().map(|a| a / nx).collect();
        let axv = on.a(&x, &v);
        assert!((on.gv(&axv, &axv) - 1.0).abs() < 1e-10, "{}", on.gv(&axv, &axv));
    }
}

#[test]
fn randers_lift_minimizes_over_the_fiber() {
    let f = zoo::minkowski_randers().unwrap();
    for a in [[1.0, 0.0], [0.3, -0.8], [-0.5, 0.2]] {
        let h = f.chart.lift_vector(&[0.0; 3], &a, DiffMode::Ad).unwrap();
        let w = golden(|w| minkowski_f(&[a[0], a[1], w]), -10.0, 10.0);
        assert!((h[2] - w).abs() < 1e-7, "{} vs {w}", h[2]);
        assert_eq!(&h[..2], &a[..]);
        assert!(f.chart.lift_is_unique(&[0.0; 3], &a, 5.0, DiffMode::Ad).unwrap());
    }
}

#[test]
fn sampled_lift_jets_match_automatic_ones() {
    let f = zoo::varying_randers().unwrap();
    let x0 = [0.2, -0.3, 0.4];
    let a0 = [0.6, 0.5];
    // two directions mixing position and base vector
    let nv = 2;
    let x: Vec<Jet> = x0
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let mut j = Jet::constant(nv, 3, c);
            j.axpy(0.1 * (i + 1) as f64, &Jet::variable(nv, 3, 0, 0.0));
            j
        })
        .collect();
    let a: Vec<Jet> = a0
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let mut j = Jet::constant(nv, 3, c);
            j.axpy(if i == 0 { 1.0 } else { -0.5 }, &Jet::variable(nv, 3, 1, 0.0));
            j
        })
        .collect();
    let ad = f.chart.lift_jets(&x, &a, DiffMode::Ad).unwrap();
    let fd = f.chart.lift_jets(&x, &a, DiffMode::Fd).unwrap();
    for (p, q) in ad.iter().zip(&fd) {
        assert!((p.value() - q.value()).abs() < 1e-10);
        for (g, h) in p.gradient().iter().zip(q.gradient()) {
            assert!((g - h).abs() < 1e-7, "{g} vs {h}");
        }
    }
}

fn hopf_loop() -> (SubmersionChart, Vec<f64>, f64) {
    let f = zoo::hopf().unwrap();
    (f.chart, vec![1.55, 0.0, 0.0], 0.3)
}

#[test]
fn hopf_holonomy_rotates_by_twice_the_enclosed_area() {
    let (c, p, rho) = hopf_loop();
    let opts = OdeOptions::default();
    let d = [0.0, 0.0, 1.0];
    let t = holonomy_transport(&c, circle_velocity(2, rho), &p, &d, 16, DiffMode::Ad, &opts).unwrap();
    // the loop is a coordinate circle centred at θ₀ − ρ; area on S²(½)
    let theta_c = p[0] - rho;
    let area = 0.25 * std::f64::consts::TAU * rho * bessel_j1(rho) * theta_c.sin();
    assert!((t.displacement - 2.0 * area).abs() < 1e-7, "{} vs {}", t.displacement, 2.0 * area);
    assert!((t.length_after - t.length_before).abs() < 1e-9);
    assert!((t.start_image[0] - p[0]).abs() < 1e-9 && (t.start_image[1] - p[1]).abs() < 1e-9);
}

#[test]
fn reversed_loop_undoes_the_transport() {
    let (c, p, rho) = hopf_loop();
    let opts = OdeOptions::default();
    let fwd = circle_velocity(2, rho);
    let d = [0.0, 0.0, 0.5];
    let t = holonomy_transport(&c, &fwd, &p, &d, 8, DiffMode::Ad, &opts).unwrap();
    let back = |s: f64| fwd(1.0 - s).iter().map(|a| -a).collect::<Vec<_>>();
    let u = holonomy_transport(&c, back, &t.start_image, &d, 8, DiffMode::Ad, &opts).unwrap();
    assert!(amax(&u.start_image.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-9);
}

#[test]
fn corrupted_base_changes_only_the_base() {
    let f = zoo::hopf().unwrap();
    let c = f.chart.corrupted(Corruption::BaseRescale(2.0));
    let x = [1.0, 0.2];
    let v = [0.3, 0.4];
    let plain = zoo::hopf().unwrap().chart;
    assert!((c.base.eval(&x, &v) - 2.0 * plain.base.eval(&x, &v)).abs() < 1e-15);
    assert_eq!(c.total.eval(&[1.0, 0.2, 0.1], &[0.3, 0.4, 0.5]), plain.total.eval(&[1.0, 0.2, 0.1], &[0.3, 0.4, 0.5]));
}

#[test]
fn general_linear_projection_has_orthonormal_kernel() {
    let f = zoo::riemannian_product().unwrap();
    let sigma = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, -1.0, 0.0, 1.0, 3.0, 1.0]);
    let c = SubmersionChart::new("skew", f.chart.total.clone(), f.chart.base.clone(), sigma.clone()).unwrap();
    let k = &c.vertical;
    assert!((&sigma * k).amax() < 1e-12);
    assert!((k.transpose() * k - DMatrix::identity(2, 2)).amax() < 1e-12);
    let x = [0.3, 0.1, -0.2, 0.4];
    let back = c.project(&c.section_point(&c.project(&x)));
    assert!(amax(&back.iter().zip(c.project(&x)).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lifts_are_horizontal_and_preserve_length(
        x in prop::array::uniform3(-0.8..0.8f64),
        a in prop::array::uniform2(-1.0..1.0f64),
    ) {
        prop_assume!(a[0].abs() + a[1].abs() > 0.1);
        let f = zoo::varying_randers().unwrap();
        let c = &f.chart;
        let h = c.lift_vector(&x, &a, DiffMode::Ad).unwrap();
        prop_assert!(c.horizontality_residual(&x, &h, DiffMode::Ad).unwrap() < 1e-12);
        let lt = c.base.eval(&c.project(&x), &a);
        prop_assert!((c.total.eval(&x, &h) - lt).abs() < 1e-12 * (1.0 + lt));
    }

    #[test]
    fn lift_is_positively_homogeneous(
        x in prop::array::uniform3(-0.8..0.8f64),
        a in prop::array::uniform2(-1.0..1.0f64),
        lam in 0.2..5.0f64,
    ) {
        prop_assume!(a[0].abs() + a[1].abs() > 0.1);
        let f = zoo::varying_randers().unwrap();
        let h = f.chart.lift_vector(&x, &a, DiffMode::Ad).unwrap();
        let al = [lam * a[0], lam * a[1]];
        let hl = f.chart.lift_vector(&x, &al, DiffMode::Ad).unwrap();
        for (p, q) in h.iter().zip(&hl) {
            prop_assert!((lam * p - q).abs() < 1e-11 * lam);
        }
    }
}
