use super::*;
use crate::submersion::Corruption;
use crate::zoo::{self, BUILTIN};

fn quick(ids: &[&str]) -> Config {
    Config {
        samples: 8,
        seed: 7,
        identities: Some(ids.iter().map(|s| s.to_string()).collect()),
        ..Config::default()
    }
}

#[test]
fn reports_are_reproducible_and_thread_independent() {
    let f = zoo::varying_randers().unwrap();
    let mut cfg = quick(&["unified", "fund-3", "lemma1-gv1", "geodesic-lift"]);
    cfg.jobs = 1;
    let a = run_suite("varying_randers", &f.chart, f.flags, &cfg).unwrap().report.to_json();
    let b = run_suite("varying_randers", &f.chart, f.flags, &cfg).unwrap().report.to_json();
    cfg.jobs = 3;
    let c = run_suite("varying_randers", &f.chart, f.flags, &cfg).unwrap().report.to_json();
    assert_eq!(a, b);
    assert_eq!(a, c);
    cfg.seed = 8;
    let d = run_suite("varying_randers", &f.chart, f.flags, &cfg).unwrap().report.to_json();
    assert_ne!(a, d);
}

#[test]
fn report_round_trips_through_json() {
    let f = zoo::hopf().unwrap();
    let out = run_suite("hopf", &f.chart, f.flags, &quick(&["fund-4", "flag-vert-pole"])).unwrap();
    let r = &out.report;
    assert_eq!(r.schema, SCHEMA);
    assert_eq!(Report::from_json(&r.to_json()).unwrap(), *r);
    // a 1-dim fiber never gives a nondegenerate vertical flag
    assert_eq!(r.identity("flag-vert-pole").unwrap().status, Status::Skipped);
    assert_eq!(r.identity("fund-4").unwrap().status, Status::Pass);
    assert!(r.pass);
}

#[test]
fn selection_and_unknown_ids() {
    let f = zoo::riemannian_product().unwrap();
    let out = run_suite("p", &f.chart, f.flags, &quick(&["dot-top"])).unwrap();
    assert_eq!(out.report.identities.len(), 1);
    assert!(out.report.global.is_empty());
    match run_suite("p", &f.chart, f.flags, &quick(&["fund-9"])) {
        Err(VerifyError::UnknownIdentity(id)) => assert_eq!(id, "fund-9"),
        other => panic!("{:?}", other.err()),
    }
}

#[test]
fn csv_has_one_row_per_residual() {
    let f = zoo::riemannian_product().unwrap();
    let mut cfg = quick(&["unified", "fund-0"]);
    cfg.csv = true;
    let out = run_suite("p", &f.chart, f.flags, &cfg).unwrap();
    let counted: usize = out.report.identities.iter().map(|r| r.count).sum();
    assert_eq!(out.csv.len(), counted);
    let mut buf = Vec::new();
    write_csv(&out.csv, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("identity,kind,sample,residual\n"));
    assert_eq!(text.lines().count(), counted + 1);
}

#[test]
fn rescaled_base_is_rejected_as_invalid() {
    let f = zoo::hopf().unwrap();
    let chart = f.chart.corrupted(Corruption::BaseRescale(1.01));
    match run_suite("hopf", &chart, f.flags, &quick(&["fund-4"])) {
        Err(VerifyError::FixtureInvalid { invariant, .. }) => assert_eq!(invariant, "horizontal-length-preservation"),
        other => panic!("{:?}", other.err()),
    }
}

#[test]
fn negative_controls_exceed_tolerance_tenfold() {
    let cases = [
        ("hopf", Corruption::BaseRescale(1.01), "lemma1-gv1"),
        ("hopf", Corruption::FlipA, "A-bracket"),
        ("varying_randers", Corruption::DropQTildeTerm, "gauss-dual"),
    ];
    for (label, c, id) in cases {
        let f = zoo::builtin(label).unwrap();
        let chart = f.chart.corrupted(c);
        let mut cfg = quick(&[id]);
        cfg.strict = false;
        let r = run_suite(label, &chart, f.flags, &cfg).unwrap().report;
        let res = r.identity(id).unwrap();
        assert!(res.max.unwrap() > 10.0 * res.tolerance, "{label} {c:?}: {:?}", res.max);
        assert!(!r.pass);
    }
}

#[test]
fn definition_invariants_hold_on_every_builtin() {
    let tol = Tolerances::for_mode(DiffMode::Ad);
    for label in BUILTIN {
        let f = zoo::builtin(label).unwrap();
        for g in definition_invariants(&f.chart, 1000, 0, DiffMode::Ad, &tol) {
            assert_eq!(g.status, Status::Pass, "{label} {}: {:?}", g.id, g.max);
            assert!(g.trials >= 1000 || g.id == "projection-rank", "{label} {} drew {}", g.id, g.trials);
        }
    }
}

#[test]
fn residual_is_scale_aware_and_treats_nan_as_failure() {
    assert_eq!(residual(&[vec![1.0, 2.0], vec![-1.0, -2.0]]), 0.0);
    let r = residual(&[vec![1e6], vec![-1e6 - 1.0]]);
    assert!(r < 1e-6 && r > 0.0);
    let tol = Tolerances::for_mode(DiffMode::Fd);
    assert_eq!(tol.of(ToleranceClass::Standard), 1e-4);
    let id = catalogue().into_iter().find(|i| i.id == "unified").unwrap();
    let so = SampleOut {
        x: vec![0.0; 4],
        v: vec![1.0; 4],
        evals: vec![Eval::Res(f64::NAN)],
    };
    let agg = aggregate(&id, &[(0, &so, &so.evals[0])], &tol);
    assert_eq!(agg.status, Status::Fail);
    assert_eq!(agg.max, Some(f64::INFINITY));
}
