//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Failures are printed; the process exits nonzero on a failure only when
//! `FSUB_ACCEPTANCE_STRICT=1`.

use std::path::Path;
use std::time::Instant;

use fsub::chern::Site;
use fsub::geodesics::OdeOptions;
use fsub::metric::DiffMode;
use fsub::spec_file::load_spec;
use fsub::submersion::{holonomy_transport, Corruption, SubmersionChart};
use fsub::verify::{
    circle_velocity, draw, geodesic_checks, holonomy_check, run_suite, Config, Report, SampleKind, Status, Tolerances,
};
use fsub::zoo::{self, Flags, BUILTIN};

struct Ledger {
    passed: usize,
    failed: Vec<String>,
}

impl Ledger {
    fn line(&mut self, id: &str, ok: bool, what: &str) {
        println!("{} [{id}] {what}", if ok { "PASS" } else { "FAIL" });
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(id.to_string());
        }
    }

    fn within(&mut self, id: &str, what: &str, value: f64, tol: f64) {
        let ok = value <= tol;
        self.line(id, ok, &format!("{what}: {value:.3e} <= {tol:.0e}"));
    }

    fn runtime(&mut self, id: &str, t: Instant, limit: f64) {
        let s = t.elapsed().as_secs_f64();
        self.line(id, s <= limit, &format!("runtime {s:.2} s <= {limit} s"));
    }
}

fn amax(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_of(it: impl IntoIterator<Item = Option<f64>>) -> f64 {
    it.into_iter().flatten().fold(0.0, f64::max)
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

fn cfg(samples: usize, mode: DiffMode, ids: Option<&[&str]>) -> Config {
    Config {
        samples,
        mode,
        identities: ids.map(|i| i.iter().map(|s| s.to_string()).collect()),
        ..Config::default()
    }
}

fn product(l: &mut Ledger) {
    let t0 = Instant::now();
    let f = zoo::riemannian_product().unwrap();
    let r = run_suite("riemannian_product", &f.chart, f.flags, &cfg(100, DiffMode::Ad, None)).unwrap().report;
    let worst = max_of(r.identities.iter().map(|i| i.max).chain(r.global.iter().map(|g| g.max)));
    l.within("1a", "riemannian_product, every residual over 100 samples", worst, 1e-9);

    let mut tens = [0.0f64; 7];
    for k in 0..100 {
        let (Some((s, on)), _) = draw(&f.chart, SampleKind::Any, k, 0, DiffMode::Ad) else {
            continue;
        };
        let vals = [
            amax(&on.t(&s.e, &s.h)),
            amax(&on.a(&s.e, &s.h)),
            amax(&on.q_hat(&s.e, &s.h)),
            amax(&on.q_tilde(&s.e, &s.h)),
            amax(&on.curvature(&s.e, &s.h, &s.b)),
            amax(&on.r_top(&s.b, &s.e, &s.h)),
            amax(&on.r_bot(&s.b, &s.e, &s.h)),
        ];
        for (m, v) in tens.iter_mut().zip(vals) {
            *m = m.max(v);
        }
    }
    for (name, v) in ["T", "A", "Q^", "Q~", "R", "R^top", "R^bot"].iter().zip(tens) {
        l.within("1b", &format!("riemannian_product, sup |{name}|"), v, 1e-10);
    }
    l.runtime("1c", t0, 5.0);
}

fn hopf(l: &mut Ledger) {
    let t0 = Instant::now();
    let f = zoo::hopf().unwrap();
    let c = &f.chart;
    let (mut kb, mut ax, mut kd, mut pole) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..100 {
        let (Some((s, on)), _) = draw(c, SampleKind::Horizontal, k, 0, DiffMode::Ad) else {
            continue;
        };
        let (v, x) = (on.v().to_vec(), s.xh.clone());
        let base = Site::new(c.base.as_ref(), &c.project(&s.x), &c.project(&v), DiffMode::Ad).unwrap();
        let base_k = base.flag_curvature(&c.project(&x)).unwrap();
        kb = kb.max((base_k - 4.0).abs());
        let d = on.gv(&v, &v) * on.gv(&x, &x) - on.gv(&v, &x).powi(2);
        let axv = on.a(&x, &v);
        let a2 = on.gv(&axv, &axv) / d;
        ax = ax.max((a2 - 1.0).abs());
        let direct = Site::new(c.total.as_ref(), &s.x, &v, DiffMode::Ad).unwrap().flag_curvature(&x).unwrap();
        kd = kd.max((direct - 1.0).abs());
        pole = pole.max((direct - (base_k - 3.0 * a2)).abs());
    }
    l.within("2a", "hopf, |K~ - 4| for the base", kb, 1e-8);
    l.within("2b", "hopf, ||A_x v|^2 - 1| for orthonormal horizontal x, v", ax, 1e-6);
    l.within("2c", "hopf, |K_v(x) - 1| computed directly", kd, 1e-6);
    l.within("2d", "hopf, direct K_v(x) against the horizontal flagpole formula", pole, 1e-6);
    let r = run_suite("hopf", c, f.flags, &cfg(100, DiffMode::Ad, Some(&["flag-vert-pole"]))).unwrap().report;
    let vp = r.identity("flag-vert-pole").unwrap();
    match vp.max {
        Some(m) => l.within("2e", "hopf, vertical flagpole formula against direct K_v(w)", m, 1e-6),
        None => l.line(
            "2e",
            false,
            &format!("hopf, vertical flagpole formula: no nondegenerate vertical flag in a 1-dim fiber ({} skipped)", vp.skipped),
        ),
    }
    l.runtime("2f", t0, 30.0);
}

const FUND: [&str; 10] =
    ["fund-0", "fund-1", "fund-2", "fund-3", "fund-4", "fund-1p", "fund-2p", "fund-0p", "fund-4p", "unified"];

fn varying(l: &mut Ledger) {
    let t0 = Instant::now();
    let f = zoo::varying_randers().unwrap();
    for (mode, tol, tag) in [(DiffMode::Ad, 1e-7, "ad"), (DiffMode::Fd, 1e-4, "fd")] {
        let r = run_suite("varying_randers", &f.chart, f.flags, &cfg(50, mode, Some(&FUND))).unwrap().report;
        for id in FUND {
            let i = r.identity(id).unwrap();
            let tol = if id == "unified" { 1e-7 } else { tol };
            if id == "unified" && mode == DiffMode::Fd {
                continue;
            }
            let m = if i.count == 0 { f64::INFINITY } else { i.max.unwrap_or(f64::INFINITY) };
            l.within("3a", &format!("varying_randers {tag}, {id} over {} samples", i.count), m, tol);
        }
    }
    l.runtime("3b", t0, 60.0);
}

fn lemma_ids() -> Vec<String> {
    fsub::verify::catalogue()
        .into_iter()
        .filter(|i| i.id.starts_with("lemma"))
        .map(|i| i.id.to_string())
        .collect()
}

fn lemmas(l: &mut Ledger) {
    let ids = lemma_ids();
    let standard = Tolerances::for_mode(DiffMode::Ad).standard;
    let spec = load_spec(&Path::new(env!("CARGO_MANIFEST_DIR")).join("specs/kaluza_klein_randers.toml")).unwrap();
    let mut fixtures: Vec<(String, SubmersionChart, Flags)> = BUILTIN
        .iter()
        .map(|b| {
            let f = zoo::builtin(b).unwrap();
            (b.to_string(), f.chart, f.flags)
        })
        .collect();
    fixtures.push((spec.label, spec.chart, spec.flags));
    for (label, chart, flags) in &fixtures {
        let c = Config {
            samples: 30,
            identities: Some(ids.clone()),
            ..Config::default()
        };
        let r = run_suite(label, chart, *flags, &c).unwrap().report;
        let worst = max_of(r.identities.iter().map(|i| i.max));
        let clean = r.identities.iter().all(|i| i.errors == 0 && i.status != Status::Fail);
        l.line(
            "4a",
            clean && worst <= standard,
            &format!("{label}, {} lemma identities: {worst:.3e} <= {standard:.0e}", r.identities.len()),
        );
    }
    let controls = [
        ("hopf", Corruption::BaseRescale(1.01), "lemma1-gv1", "base rescaled by 1.01"),
        ("hopf", Corruption::FlipA, "A-bracket", "sign of A flipped"),
        ("varying_randers", Corruption::DropQTildeTerm, "gauss-dual", "C# term dropped from Q~"),
    ];
    for (label, corr, id, what) in controls {
        let f = zoo::builtin(label).unwrap();
        let chart = f.chart.corrupted(corr);
        let mut c = cfg(30, DiffMode::Ad, Some(&[id]));
        c.strict = false;
        let r = run_suite(label, &chart, f.flags, &c).unwrap().report;
        let i = r.identity(id).unwrap();
        let m = i.max.unwrap_or(0.0);
        l.line(
            "4b",
            m > 10.0 * i.tolerance,
            &format!("{label} with {what}: {id} residual {m:.3e} > 10 x {:.0e}", i.tolerance),
        );
    }
}

fn geodesics(l: &mut Ledger) {
    let tol = Tolerances::for_mode(DiffMode::Ad);
    for label in ["hopf", "varying_randers"] {
        let f = zoo::builtin(label).unwrap();
        for seed in 0..3 {
            let g = geodesic_checks(&f.chart, seed, DiffMode::Ad, &tol);
            let dev = g.iter().find(|r| r.id == "geodesic-lift").unwrap().max.unwrap_or(f64::INFINITY);
            let hor = g.iter().find(|r| r.id == "horizontality-persistence").unwrap().max.unwrap_or(f64::INFINITY);
            l.within("5a", &format!("{label} seed {seed}, lift against total geodesic, sup over unit time"), dev, 1e-6);
            l.within("5b", &format!("{label} seed {seed}, horizontality persistence"), hor, 1e-7);
        }
    }
}

fn holonomy(l: &mut Ledger) {
    let f = zoo::hopf().unwrap();
    let opts = OdeOptions::default();
    for (theta, rho) in [(1.55, 0.3), (2.0, 0.5), (1.0, 0.2)] {
        let p = [theta, 0.0, 0.0];
        let t = holonomy_transport(&f.chart, circle_velocity(2, rho), &p, &[0.0, 0.0, 1.0], 16, DiffMode::Ad, &opts).unwrap();
        l.within(
            "6a",
            &format!("hopf loop at theta {theta} radius {rho}, vertical length change"),
            (t.length_after - t.length_before).abs(),
            1e-6,
        );
        // a coordinate circle centered at theta - rho on S²(1/2)
        let area = 0.25 * std::f64::consts::TAU * rho * bessel_j1(rho) * (theta - rho).sin();
        l.within(
            "6b",
            &format!("hopf loop at theta {theta} radius {rho}, angle against twice the area"),
            (t.displacement - 2.0 * area).abs(),
            1e-5,
        );
    }
    let w = zoo::warped_product().unwrap();
    let g = holonomy_check(&w.chart, &w.flags, 0, DiffMode::Ad, &Tolerances::for_mode(DiffMode::Ad));
    l.line("6c", g.status == Status::Skipped, &format!("warped_product holonomy check is {:?} by flag", g.status));
}

fn determinism(l: &mut Ledger) {
    let run = |label: &str, jobs: usize| -> String {
        let f = zoo::builtin(label).unwrap();
        let mut c = cfg(20, DiffMode::Ad, None);
        c.jobs = jobs;
        run_suite(label, &f.chart, f.flags, &c).unwrap().report.to_json()
    };
    for label in ["hopf", "varying_randers"] {
        let a = run(label, 1);
        let b = run(label, 1);
        let c = run(label, 4);
        let round = Report::from_json(&a).unwrap().to_json();
        l.line("7", a == b && a == c && a == round, &format!("{label}, reports byte-identical across runs, thread counts and a JSON round trip"));
    }
}

fn main() {
    let t0 = Instant::now();
    let mut l = Ledger {
        passed: 0,
        failed: Vec::new(),
    };
    product(&mut l);
    hopf(&mut l);
    varying(&mut l);
    lemmas(&mut l);
    geodesics(&mut l);
    holonomy(&mut l);
    determinism(&mut l);
    l.runtime("all", t0, 180.0);
    println!("{} passed, {} failed {:?}", l.passed, l.failed.len(), l.failed);
    if !l.failed.is_empty() && std::env::var("FSUB_ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
