use std::path::PathBuf;
use std::process::Command;

use fsub::cli::{run, EXIT_FAIL, EXIT_INVALID, EXIT_IO, EXIT_PASS};
use fsub::verify::{Report, Status, SCHEMA};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(name).display().to_string()
}

/// Runs the CLI in-process; returns exit code, stdout and stderr.
fn fsub(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fsub").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn list_shows_every_builtin_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("list.json");
    let (code, out, _) = fsub(&["list", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().any(|l| l.starts_with("hopf") && l.contains("totally-geodesic")));
    let v = json(&std::fs::read_to_string(&path).unwrap());
    let labels: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["label"].as_str().unwrap()).collect();
    assert_eq!(labels, fsub::zoo::BUILTIN);
    assert_eq!(v[3]["flags"]["riemannian"], Value::Bool(false));
}

#[test]
fn verify_filters_the_catalogue() {
    let (code, out, _) = fsub(&["verify", "--fixture", "hopf", "--samples", "6", "--identities", "fund-4p,lemma1-gv1"]);
    assert_eq!(code, EXIT_PASS);
    let r = Report::from_json(&out).unwrap();
    assert_eq!(r.schema, SCHEMA);
    let ids: Vec<&str> = r.identities.iter().map(|i| i.id.as_str()).collect();
    assert_eq!(ids, ["lemma1-gv1", "fund-4p"]);
    assert!(r.global.is_empty());
    assert!(r.identities.iter().all(|i| i.status == Status::Pass));
}

#[test]
fn reports_are_byte_identical_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let csv = dir.path().join("a.csv");
    let args = |p: &PathBuf| {
        vec![
            "verify".to_string(),
            "--fixture".into(),
            "varying_randers".into(),
            "--samples".into(),
            "5".into(),
            "--seed".into(),
            "11".into(),
            "--identities".into(),
            "unified,fund-3,geodesic-lift".into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    let mut first = args(&a);
    first.extend(["--csv".to_string(), csv.display().to_string(), "--jobs".into(), "2".into()]);
    let (c1, _, _) = fsub(&first.iter().map(String::as_str).collect::<Vec<_>>());
    let (c2, _, _) = fsub(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!((c1, c2), (EXIT_PASS, EXIT_PASS));
    let ja = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ja, std::fs::read_to_string(&b).unwrap());
    assert_eq!(Report::from_json(&ja).unwrap().to_json(), ja);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("identity,kind,sample,residual\n"));
    assert_eq!(rows.lines().count(), 1 + 5 + 5);
}

#[test]
fn invalid_configs_are_rejected_before_any_work() {
    for args in [
        vec!["verify", "--fixture", "hopf", "--identities", "fund-9"],
        vec!["verify", "--fixture", "klein_bottle"],
        vec!["verify", "--fixture", "hopf", "--samples", "0"],
        vec!["verify", "--fixture", "hopf", "--spec", "x.toml"],
        vec!["verify", "--fixture", "hopf", "--profile", "symbolic"],
        vec!["geodesic", "--fixture", "hopf", "--v", "1,0"],
        vec!["geodesic", "--fixture", "hopf", "--x", "0.05,0,0", "--v", "1,0,0"],
        vec!["geodesic", "--fixture", "hopf", "--v", "1,0,0", "--time", "-1"],
        vec!["lift", "--fixture", "hopf", "--v", "1,0,0"],
        vec!["transport", "--fixture", "hopf", "--radius", "5"],
    ] {
        let (code, _, err) = fsub(&args);
        assert_eq!(code, EXIT_INVALID, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn missing_files_are_io_errors() {
    let (code, _, err) = fsub(&["verify", "--spec", "/nonexistent/fixture.toml"]);
    assert_eq!(code, EXIT_IO);
    assert!(err.contains("/nonexistent/fixture.toml"));
    let (code, _, _) = fsub(&["list", "--out", "/nonexistent/dir/list.json"]);
    assert_eq!(code, EXIT_IO);
}

#[test]
fn corrupted_spec_exits_two_naming_the_invariant() {
    let out = Command::new(env!("CARGO_BIN_EXE_fsub"))
        .args(["verify", "--samples", "5", "--spec", &data("specs/kaluza_klein_randers_bad_base.toml")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("horizontal-length-preservation"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn spec_files_verify() {
    let (code, out, err) = fsub(&["verify", "--samples", "8", "--spec", &data("specs/kaluza_klein_randers.toml")]);
    assert_eq!(code, EXIT_PASS, "{err}");
    let r = Report::from_json(&out).unwrap();
    assert_eq!(r.fixture, "kaluza_klein_randers");
    assert!(r.pass);
}

#[test]
fn failing_check_exits_one() {
    let spec = data("tests/data/mislabelled_twist.toml");
    let (code, out, err) = fsub(&["verify", "--samples", "5", "--spec", &spec]);
    assert_eq!(code, EXIT_FAIL);
    assert!(err.contains("holonomy-isometry"), "{err}");
    let r = Report::from_json(&out).unwrap();
    assert_eq!(r.failures(), ["holonomy-isometry"]);
    let (code, out, _) = fsub(&["transport", "--spec", &spec]);
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(json(&out)["status"], "fail");
}

#[test]
fn flat_geodesic_csv_has_constant_velocity() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("arc.csv");
    let (code, out, _) = fsub(&[
        "geodesic",
        "--fixture",
        "minkowski_randers",
        "--x",
        "0.1,-0.2,0.3",
        "--v",
        "0.4,-0.1,0.2",
        "--steps",
        "8",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_PASS);
    let s = json(&out);
    assert_eq!(s["schema"], "fsub-geodesic/1");
    assert_eq!(s["complete"], true);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x0,x1,x2,v0,v1,v2");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        for (i, v0) in [0.4, -0.1, 0.2].iter().enumerate() {
            assert!((r[4 + i] - v0).abs() < 1e-12);
        }
    }
}

#[test]
fn geodesic_leaving_the_chart_is_reported_partial() {
    let (code, out, _) = fsub(&["geodesic", "--fixture", "hopf", "--x", "0.5,0,0", "--v", "-1,0,0", "--time", "2"]);
    assert_eq!(code, EXIT_PASS);
    let s = json(&out);
    assert_eq!(s["complete"], false);
    assert!(s["stopped"].as_str().unwrap().contains("chart"));
}

#[test]
fn lift_reports_sup_deviation() {
    for profile in ["ad", "fd"] {
        let (code, out, _) = fsub(&["lift", "--fixture", "varying_randers", "--v", "0.5,0.2", "--profile", profile]);
        assert_eq!(code, EXIT_PASS);
        let s = json(&out);
        assert_eq!(s["schema"], "fsub-lift/1");
        assert!(s["sup_deviation"].as_f64().unwrap() <= s["deviation_tolerance"].as_f64().unwrap());
    }
}

#[test]
fn hopf_transport_reports_the_holonomy_angle() {
    let (code, out, _) = fsub(&["transport", "--fixture", "hopf", "--x", "1.55,0,0", "--radius", "0.3"]);
    assert_eq!(code, EXIT_PASS);
    let s = json(&out);
    assert_eq!(s["status"], "pass");
    let angle = s["holonomy_angle"].as_f64().unwrap();
    assert!(angle > 0.1 && angle < 0.2, "{angle}");
    let (code, out, _) = fsub(&["transport", "--fixture", "warped_product"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(json(&out)["status"], "skipped");
}
