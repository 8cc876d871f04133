//! Fixture-level checks: definition invariants, geodesic lifts and holonomy.

use std::f64::consts::TAU;

use rand::Rng;

use super::report::{GlobalResult, Status};
use super::sample::{rng_for, unit_vec, SampleKind};
use super::{ToleranceClass, Tolerances};
use crate::error::GeomResult;
use crate::geodesics::{horizontality_persistence, lift_deviation, OdeOptions};
use crate::metric::{ChartBox, DiffMode, Pointwise};
use crate::submersion::{holonomy_transport, SubmersionChart};
use crate::zoo::Flags;

fn result(id: &str, anchor: &str, class: ToleranceClass, tol: &Tolerances, trials: usize, max: Option<f64>) -> GlobalResult {
    let tolerance = tol.of(class);
    let status = match max {
        Some(m) if m <= tolerance => Status::Pass,
        Some(_) => Status::Fail,
        None => Status::Skipped,
    };
    GlobalResult {
        id: id.to_string(),
        anchor: anchor.to_string(),
        class,
        tolerance,
        trials,
        max,
        status,
        note: None,
    }
}

fn fold_max(acc: Option<f64>, r: f64) -> Option<f64> {
    // NaN counts as a failure
    let r = if r.is_nan() { f64::INFINITY } else { r };
    Some(acc.map_or(r, |a| a.max(r)))
}

/// Seeds for the fixture-level streams, apart from the per-sample ones.
const GLOBAL_STREAM: usize = 1 << 30;

/// Rank of `σ`, nondegenerate vertical spaces, `L̃(σv) = L(v)` on
/// horizontal `v`, and 2-homogeneity of `L`.
pub fn definition_invariants(chart: &SubmersionChart, samples: usize, seed: u64, mode: DiffMode, tol: &Tolerances) -> Vec<GlobalResult> {
    let (n, m, r) = chart.dims();
    let sv = chart.sigma.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let rank_defect = if sv.len() == m && smin > 1e-12 * smax { 0.0 } else { 1.0 };

    let bbox = chart.total.chart_box();
    let mut rng = rng_for(seed, SampleKind::Any, GLOBAL_STREAM);
    let mut degenerate = 0usize;
    let mut length: Option<f64> = None;
    let mut homog: Option<f64> = None;
    let mut drawn = 0usize;
    let mut attempts = 0usize;
    while drawn < samples && attempts < 100 * samples.max(1) {
        attempts += 1;
        let x = bbox.sample(&mut rng);
        let scale = rng.gen_range(0.5..2.0);
        let lam = rng.gen_range(0.5..2.0);
        let v: Vec<f64> = unit_vec(&mut rng, n).iter().map(|a| a * scale).collect();
        let vt: Vec<f64> = unit_vec(&mut rng, m).iter().map(|a| a * scale).collect();
        if !chart.total.in_domain(&x) || !chart.total.admissible(&x, &v) {
            continue;
        }
        drawn += 1;
        let l = chart.total.eval(&x, &v);
        let vl: Vec<f64> = v.iter().map(|a| a * lam).collect();
        let lh = chart.total.eval(&x, &vl);
        homog = fold_max(homog, (lh - lam * lam * l).abs() / (1.0 + (lam * lam * l).abs()));
        if r > 0 {
            match Pointwise::new(chart.total.as_ref(), &x, &v, mode) {
                Ok(pw) => {
                    let k = &chart.vertical;
                    let ev = (k.transpose() * &pw.g * k).symmetric_eigen().eigenvalues;
                    let lo = ev.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
                    if !(lo > 1e-9 * pw.g.amax()) {
                        degenerate += 1;
                    }
                }
                Err(_) => degenerate += 1,
            }
        }
        match chart.lift_vector(&x, &vt, mode) {
            Ok(h) => {
                let lt = chart.base.eval(&chart.project(&x), &vt);
                let lh = chart.total.eval(&x, &h);
                length = fold_max(length, (lh - lt).abs() / (1.0 + lt.abs()));
            }
            Err(_) => length = Some(f64::INFINITY),
        }
    }
    let frac = if drawn > 0 { degenerate as f64 / drawn as f64 } else { 1.0 };
    let mut out = vec![
        result("projection-rank", "rank of the projection equals the base dimension", ToleranceClass::Exact, tol, 1, Some(rank_defect)),
        result(
            "vertical-nondegeneracy",
            "fraction of draws with a degenerate vertical Gram matrix",
            ToleranceClass::Exact,
            tol,
            drawn,
            Some(frac),
        ),
        result(
            "horizontal-length-preservation",
            "L(x, lift(v~)) = L~(sigma x, v~)",
            ToleranceClass::Exact,
            tol,
            drawn,
            length,
        ),
        result("conic-homogeneity", "L(x, t v) = t^2 L(x, v)", ToleranceClass::Exact, tol, drawn, homog),
    ];
    // zero tolerance for the counts
    for g in out.iter_mut().take(2) {
        g.tolerance = 0.0;
        if g.max.is_some_and(|m| m > 0.0) {
            g.status = Status::Fail;
        } else {
            g.status = Status::Pass;
        }
    }
    out
}

/// Box shrunk towards its center by `f`.
fn inner_box(b: &ChartBox, f: f64) -> ChartBox {
    let (lo, hi): (Vec<f64>, Vec<f64>) = b
        .lo
        .iter()
        .zip(&b.hi)
        .map(|(l, h)| {
            let c = 0.5 * (l + h);
            let r = 0.5 * (h - l) * f;
            (c - r, c + r)
        })
        .unzip();
    ChartBox::new(lo, hi)
}

pub const GEODESIC_TRIALS: usize = 3;

fn geodesic_trials(chart: &SubmersionChart, seed: u64, mode: DiffMode) -> Vec<(Vec<f64>, Vec<f64>)> {
    let (_, m, _) = chart.dims();
    let b = inner_box(&chart.total.chart_box(), 0.5);
    let mut rng = rng_for(seed, SampleKind::Horizontal, GLOBAL_STREAM);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < GEODESIC_TRIALS && tries < 100 {
        tries += 1;
        let p = b.sample(&mut rng);
        let vt: Vec<f64> = unit_vec(&mut rng, m).iter().map(|a| a * 0.5).collect();
        if chart.total.in_domain(&p) && chart.lift_vector(&p, &vt, mode).is_ok() {
            out.push((p, vt));
        }
    }
    out
}

pub fn geodesic_checks(chart: &SubmersionChart, seed: u64, mode: DiffMode, tol: &Tolerances) -> Vec<GlobalResult> {
    let opts = OdeOptions::for_mode(mode);
    let trials = geodesic_trials(chart, seed, mode);
    let mut dev = None;
    let mut pers = None;
    let mut note = None;
    for (p, vt) in &trials {
        match lift_deviation(chart, p, vt, 1.0, 20, mode, &opts) {
            Ok(d) => dev = fold_max(dev, d),
            Err(e) => {
                dev = Some(f64::INFINITY);
                note = Some(e.to_string());
            }
        }
        match horizontality_persistence(chart, p, vt, 1.0, 20, mode, &opts) {
            Ok(d) => pers = fold_max(pers, d),
            Err(e) => {
                pers = Some(f64::INFINITY);
                note = Some(e.to_string());
            }
        }
    }
    let mut a = result(
        "geodesic-lift",
        "lift of a base geodesic is the total geodesic, sup over unit time",
        ToleranceClass::Trajectory,
        tol,
        trials.len(),
        dev,
    );
    let mut b = result(
        "horizontality-persistence",
        "geodesic with horizontal initial velocity stays horizontal",
        ToleranceClass::Standard,
        tol,
        trials.len(),
        pers,
    );
    a.note = note.clone();
    b.note = note;
    vec![a, b]
}

/// Velocity on `[0, 1]` of a circle of radius `rho` in the first two base
/// coordinates, starting and ending at the base point.
pub fn circle_velocity(m: usize, rho: f64) -> impl Fn(f64) -> Vec<f64> {
    move |t: f64| {
        let mut a = vec![0.0; m];
        a[0] = -rho * TAU * (TAU * t).sin();
        a[1] = rho * TAU * (TAU * t).cos();
        a
    }
}

/// Start point and radius of the loop used by the holonomy check: the
/// center of the chart box and a fifth of the smaller base side.
pub fn default_loop(chart: &SubmersionChart) -> (Vec<f64>, f64) {
    let center = inner_box(&chart.total.chart_box(), 0.0).lo;
    let bb = chart.base_box();
    let rho = 0.2 * (0..2).map(|i| bb.hi[i] - bb.lo[i]).fold(f64::INFINITY, f64::min);
    (center, rho)
}

pub fn holonomy_check(chart: &SubmersionChart, flags: &Flags, seed: u64, mode: DiffMode, tol: &Tolerances) -> GlobalResult {
    let id = "holonomy-isometry";
    let anchor = "transport around a base loop preserves fiber lengths";
    let (_, m, r) = chart.dims();
    if !(flags.totally_geodesic && flags.horizontally_regular) || m < 2 || r == 0 {
        let mut g = result(id, anchor, ToleranceClass::Standard, tol, 0, None);
        g.note = Some("fixture is not flagged totally geodesic and horizontally regular".into());
        return g;
    }
    let opts = OdeOptions::for_mode(mode);
    let (center, rho) = default_loop(chart);
    let mut rng = rng_for(seed, SampleKind::Vertical, GLOBAL_STREAM);
    let mut max = None;
    let mut note = None;
    let trials = 2;
    for _ in 0..trials {
        let d: Vec<f64> = {
            let u = unit_vec(&mut rng, r);
            let k = &chart.vertical;
            (0..k.nrows()).map(|i| 0.5 * (0..r).map(|a| k[(i, a)] * u[a]).sum::<f64>()).collect()
        };
        let res: GeomResult<f64> = holonomy_transport(chart, circle_velocity(m, rho), &center, &d, 16, mode, &opts)
            .map(|t| (t.length_after - t.length_before).abs() / (1.0 + t.length_before));
        match res {
            Ok(x) => max = fold_max(max, x),
            Err(e) => {
                max = Some(f64::INFINITY);
                note = Some(e.to_string());
            }
        }
    }
    let mut g = result(id, anchor, ToleranceClass::Standard, tol, trials, max);
    g.note = note;
    g
}
