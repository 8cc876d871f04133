use super::*;
use proptest::prelude::*;

#[test]
fn constant_seed() {
    for k in 1..=5 {
        let c = Jet::constant(3, k, 3.0);
        assert_eq!(c.value(), 3.0);
        assert!(c.coeffs()[1..].iter().all(|&a| a == 0.0));
    }
}

#[test]
fn square_at_two() {
    let (_, v) = seed(&[], &[2.0], 2).unwrap();
    let f = &v[0] * &v[0];
    assert_eq!(f.coeffs(), &[4.0, 4.0, 1.0]);
    assert_eq!(f.extract(&[2]).unwrap(), 2.0);
}

#[test]
fn euclidean_norm_gradient() {
    let (_, v) = seed(&[], &[3.0, 4.0], 1).unwrap();
    let f = (&v[0] * &v[0] + &v[1] * &v[1]).sqrt();
    assert!((f.value() - 5.0).abs() < 1e-15);
    assert!((f.extract(&[1, 0]).unwrap() - 0.6).abs() < 1e-15);
    assert!((f.extract(&[0, 1]).unwrap() - 0.8).abs() < 1e-15);
}

#[test]
fn extract_examples() {
    let (_, v) = seed(&[], &[1.0, 1.0], 3).unwrap();
    assert_eq!((&v[0] * &v[1]).extract(&[1, 1]).unwrap(), 1.0);
    let (_, w) = seed(&[], &[2.0], 3).unwrap();
    assert_eq!(w[0].powi(3).extract(&[3]).unwrap(), 6.0);
    let c = Jet::constant(2, 3, 7.0);
    assert_eq!(c.extract(&[1, 2]).unwrap(), 0.0);
}

#[test]
fn order_limits() {
    assert!(matches!(
        seed(&[0.0], &[1.0], MAX_ORDER + 1),
        Err(JetError::UnsupportedOrder { .. })
    ));
    assert!(seed(&[0.0], &[1.0], 0).is_err());
    let (x, _) = seed(&[0.0], &[1.0], 2).unwrap();
    assert!(x[0].extract(&[2, 1]).is_err());
    assert!(x[0].extract(&[1]).is_err());
}

#[test]
fn mixed_orders_truncate_to_lower() {
    let a = Jet::variable(2, 4, 0, 1.0);
    let b = Jet::variable(2, 2, 1, 1.0);
    let p = &a * &b;
    assert_eq!(p.order(), 2);
    assert_eq!(p.extract(&[1, 1]).unwrap(), 1.0);
}

#[test]
fn deriv_lowers_order() {
    let (x, _) = seed(&[0.5, 0.0], &[], 4).unwrap();
    let f = x[0].sin() * &x[1];
    let d = f.deriv(1);
    assert_eq!(d.order(), 3);
    assert!((d.value() - 0.5f64.sin()).abs() < 1e-15);
    assert!((d.extract(&[1, 0]).unwrap() - 0.5f64.cos()).abs() < 1e-15);
}

#[test]
fn restrict_collapses_variables() {
    // f(a, b) = a^2 b restricted to a = b = t gives t^3
    let (x, _) = seed(&[0.0, 0.0], &[], 3).unwrap();
    let f = &x[0] * &x[0] * &x[1];
    let g = f.restrict(&[Some(0), Some(0)], 1);
    assert_eq!(g.coeffs(), &[0.0, 0.0, 0.0, 1.0]);
    let h = f.restrict(&[Some(0), None], 1);
    assert!(h.coeffs().iter().all(|&a| a == 0.0));
}

#[test]
fn compose_matches_direct_evaluation() {
    // f(u) = exp(u0) * cos(u1) at (0.2, 0.3); u = (s^2 + s t, sin t)
    let (u, _) = seed(&[0.2, 0.3], &[], 4).unwrap();
    let f = u[0].exp() * u[1].cos();
    let (st, _) = seed(&[0.0, 0.0], &[], 4).unwrap();
    let d0 = &st[0] * &st[0] + &st[0] * &st[1];
    let d1 = st[1].sin();
    let composed = f.compose(&[d0.clone(), d1.clone()]);
    let direct = (d0 + 0.2).exp() * (d1 + 0.3).cos();
    for (a, b) in composed.coeffs().iter().zip(direct.coeffs()) {
        assert!((a - b).abs() < 1e-14, "{a} {b}");
    }
}

#[test]
fn division_and_recip() {
    let (x, _) = seed(&[0.7, -0.4], &[], 5).unwrap();
    let q = (&x[0] * &x[1] + 2.0) / (x[0].cos() + &x[1]);
    let back = &q * &(x[0].cos() + &x[1]);
    let want = &x[0] * &x[1] + 2.0;
    for (a, b) in back.coeffs().iter().zip(want.coeffs()) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn series_functions_against_closed_forms() {
    let (x, _) = seed(&[0.6], &[], 6).unwrap();
    let a = &x[0];
    let checks: Vec<(Jet, Box<dyn Fn(f64) -> f64>)> = vec![
        (a.exp(), Box::new(f64::exp)),
        (a.ln(), Box::new(f64::ln)),
        (a.sqrt(), Box::new(f64::sqrt)),
        (a.tan(), Box::new(f64::tan)),
        (a.tanh(), Box::new(f64::tanh)),
        (a.powf(1.7), Box::new(|t: f64| t.powf(1.7))),
    ];
    // compare sixth-order Taylor polynomials against the function at a nearby point
    for (j, f) in checks {
        let d = 1e-3;
        let approx: f64 = j.coeffs().iter().enumerate().map(|(k, c)| c * d.powi(k as i32)).sum();
        assert!((approx - f(0.6 + d)).abs() < 1e-14, "{j:?}");
    }
}

#[test]
fn sqrt_of_square() {
    let (x, v) = seed(&[1.0], &[2.0], 5).unwrap();
    let s = (&x[0] * &x[0] + &v[0] * &v[0]).sqrt();
    let back = &s * &s;
    let want = &x[0] * &x[0] + &v[0] * &v[0];
    for (a, b) in back.coeffs().iter().zip(want.coeffs()) {
        assert!((a - b).abs() < 1e-14);
    }
}

fn poly_eval<S: Scalar>(coefs: &[(i32, [u8; 3])], x: &[S]) -> S {
    let mut acc = x[0].cst(0.0);
    for (c, e) in coefs {
        let mut m = x[0].cst(*c as f64);
        for (xi, &ei) in x.iter().zip(e) {
            m = m * xi.powi(ei as i32);
        }
        acc = acc + m;
    }
    acc
}

/// Coefficient of δ^α in Π (p_i + δ_i)^{e_i}, by the binomial theorem.
fn expand_monomial(p: &[f64; 3], e: &[u8; 3], alpha: &[u8]) -> f64 {
    let mut out = 1.0;
    for i in 0..3 {
        if alpha[i] > e[i] {
            return 0.0;
        }
        let k = alpha[i] as usize;
        let n = e[i] as usize;
        let binom = (0..k).fold(1.0, |b, j| b * (n - j) as f64 / (j + 1) as f64);
        out *= binom * p[i].powi((n - k) as i32);
    }
    out
}

proptest! {
    #[test]
    fn integer_polynomials_are_exact(
        terms in prop::collection::vec((-5i32..5, prop::array::uniform3(0u8..3)), 1..6),
        p in prop::array::uniform3(-3i32..3),
    ) {
        let pf = [p[0] as f64, p[1] as f64, p[2] as f64];
        let (x, _) = seed(&pf, &[], 5).unwrap();
        let j = poly_eval(&terms, &x);
        for (k, alpha) in j.monomials().enumerate() {
            let want: f64 = terms
                .iter()
                .map(|(c, e)| *c as f64 * expand_monomial(&pf, e, alpha))
                .sum();
            prop_assert_eq!(j.coeffs()[k], want);
        }
    }

    #[test]
    fn plain_value_matches_order_zero(
        p in prop::array::uniform3(0.1f64..2.0),
    ) {
        let f = |x: &[Jet]| (x[0].sin() * &x[1] + x[2].exp()).sqrt() / (&x[0] + 1.0);
        let g = |x: &[f64]| (x[0].sin() * x[1] + x[2].exp()).sqrt() / (x[0] + 1.0);
        let (x, _) = seed(&p, &[], 3).unwrap();
        prop_assert!((f(&x).value() - g(&p)).abs() <= 1e-15 * g(&p).abs().max(1.0));
    }

    #[test]
    fn agrees_with_central_differences(
        p in prop::array::uniform3(0.2f64..1.5),
    ) {
        let g = |x: &[f64]| (x[0] * x[1]).sin() + (x[2] / (1.0 + x[0] * x[0])).exp();
        let (x, _) = seed(&p, &[], 2).unwrap();
        let j = (&x[0] * &x[1]).sin() + (&x[2] / (&x[0] * &x[0] + 1.0)).exp();
        let h = 1e-5;
        for i in 0..3 {
            let mut a = p; a[i] += h;
            let mut b = p; b[i] -= h;
            let fd = (g(&a) - g(&b)) / (2.0 * h);
            let mut alpha = [0usize; 3]; alpha[i] = 1;
            let ad = j.extract(&alpha).unwrap();
            prop_assert!((fd - ad).abs() <= 1e-7 * ad.abs().max(1.0));
            let fd2 = (g(&a) - 2.0 * g(&p) + g(&b)) / (h * h);
            alpha[i] = 2;
            let ad2 = j.extract(&alpha).unwrap();
            prop_assert!((fd2 - ad2).abs() <= 1e-4 * ad2.abs().max(1.0));
        }
    }

    #[test]
    fn chain_rule(t in -1.0f64..1.0) {
        // exp(sin(t)) to third order, hand-expanded
        let (x, _) = seed(&[t], &[], 3).unwrap();
        let j = x[0].sin().exp();
        let (s, c) = t.sin_cos();
        let e = s.exp();
        let d1 = e * c;
        let d2 = e * (c * c - s);
        let d3 = e * (c * c * c - 3.0 * s * c - c);
        prop_assert!((j.extract(&[1]).unwrap() - d1).abs() < 1e-14);
        prop_assert!((j.extract(&[2]).unwrap() - d2).abs() < 1e-14);
        prop_assert!((j.extract(&[3]).unwrap() - d3).abs() < 1e-13);
    }
}
