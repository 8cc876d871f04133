//! Geodesics and horizontal lifts of curves.
//!
//! Geodesics solve `ẍ = −2G(x, ẋ)` with an embedded Dormand–Prince 5(4)
//! pair under PI step control. Steps are clipped to land on the requested
//! output times, so no dense output is needed.

use std::io::Write;

use serde::Serialize;

use crate::chern::spray;
use crate::error::{GeomError, GeomResult};
use crate::metric::{DiffMode, MetricField};
use crate::submersion::SubmersionChart;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-12,
            h0: 1e-2,
            max_steps: 200_000,
        }
    }
}

impl OdeOptions {
    /// Sampled sprays carry noise well above `1e-11`, which would drive the
    /// step size down without improving the result.
    pub fn for_mode(mode: DiffMode) -> OdeOptions {
        match mode {
            DiffMode::Ad => OdeOptions::default(),
            DiffMode::Fd => OdeOptions {
                rtol: 1e-8,
                atol: 1e-9,
                ..OdeOptions::default()
            },
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Step statistics of one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest normalized error estimate of an accepted step.
    pub max_error: f64,
}

#[derive(Clone, Debug)]
pub struct OdeRun {
    /// States at the grid times that were reached.
    pub ys: Vec<Vec<f64>>,
    pub stats: OdeStats,
    /// Why integration stopped before the last grid time.
    pub stopped: Option<GeomError>,
}

impl OdeRun {
    /// The states at every grid time, or the reason they are missing.
    pub fn complete(self) -> GeomResult<Vec<Vec<f64>>> {
        match self.stopped {
            None => Ok(self.ys),
            Some(e) => Err(e),
        }
    }
}

/// Smallest step tried before a failing right-hand side counts as a
/// boundary of the domain.
const MIN_STEP: f64 = 1e-10;

/// Integrates `y' = f(t, y)` from `grid[0]` and returns `y` at every grid
/// time reached.
///
/// When `f` keeps failing down to steps of `1e-10` the run ends early with
/// the error in [`OdeRun::stopped`].
pub fn dopri5<F>(mut f: F, y0: &[f64], grid: &[f64], opts: &OdeOptions) -> GeomResult<OdeRun>
where
    F: FnMut(f64, &[f64]) -> GeomResult<Vec<f64>>,
{
    let d = y0.len();
    let mut out = vec![y0.to_vec()];
    let mut stats = OdeStats::default();
    let mut t = grid[0];
    let mut y = y0.to_vec();
    let mut h = opts.h0;
    let mut k1 = f(t, &y)?;
    let mut err_prev: f64 = 1e-4;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; d]; 7];
    for &target in &grid[1..] {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(GeomError::NoConvergence {
                    what: "ode integration",
                    iters: opts.max_steps,
                    residual: target - t,
                });
            }
            let last = t + h >= target - 1e-14 * target.abs().max(1.0);
            let hs = if last { target - t } else { h };
            k[0].clone_from(&k1);
            let mut ytmp = vec![0.0; d];
            let mut failed = None;
            for s in 1..7 {
                for i in 0..d {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += hs * A[s][j] * kj[i];
                    }
                    ytmp[i] = acc;
                }
                match f(t + C[s] * hs, &ytmp) {
                    Ok(v) => k[s] = v,
                    Err(e) => {
                        failed = Some(e);
                        break;
                    }
                }
            }
            if let Some(e) = failed {
                if hs <= MIN_STEP {
                    return Ok(OdeRun {
                        ys: out,
                        stats,
                        stopped: Some(e),
                    });
                }
                stats.rejected += 1;
                h = hs * 0.25;
                continue;
            }
            let mut err = 0.0;
            let mut ynew = vec![0.0; d];
            for i in 0..d {
                let mut y5 = y[i];
                let mut y4 = y[i];
                for s in 0..7 {
                    y5 += hs * B5[s] * k[s][i];
                    y4 += hs * B4[s] * k[s][i];
                }
                ynew[i] = y5;
                let sc = opts.atol + opts.rtol * y[i].abs().max(y5.abs());
                err += ((y5 - y4) / sc).powi(2);
            }
            let err = (err / d as f64).sqrt();
            if !err.is_finite() {
                stats.rejected += 1;
                h = hs * 0.25;
                continue;
            }
            if err <= 1.0 {
                stats.accepted += 1;
                stats.max_error = stats.max_error.max(err);
                t = if last { target } else { t + hs };
                y = ynew;
                k1 = k[6].clone();
                // PI controller (Gustafsson)
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                let grow = fac.clamp(0.2, 5.0);
                if !last || hs >= h {
                    h = hs * grow;
                }
                err_prev = err.max(1e-4);
            } else {
                stats.rejected += 1;
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        out.push(y.clone());
    }
    Ok(OdeRun {
        ys: out,
        stats,
        stopped: None,
    })
}

/// Uniform grid `0, T/n, …, T`.
pub fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub stats: OdeStats,
    /// Set when the arc ends early, for instance at the edge of the chart.
    pub stopped: Option<String>,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.x.first().map_or(0, Vec::len);
        let mut head = vec!["t".to_string()];
        head.extend((0..n).map(|i| format!("x{i}")));
        head.extend((0..n).map(|i| format!("v{i}")));
        writeln!(w, "{}", head.join(","))?;
        for (k, t) in self.t.iter().enumerate() {
            let mut row = vec![format!("{t:.17e}")];
            row.extend(self.x[k].iter().map(|a| format!("{a:.17e}")));
            row.extend(self.v[k].iter().map(|a| format!("{a:.17e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// `max_t |L(x, v) − L(x₀, v₀)| / max(1, |L(x₀, v₀)|)`.
    pub fn energy_drift(&self, m: &dyn MetricField) -> f64 {
        let l0 = m.eval(&self.x[0], &self.v[0]);
        self.x
            .iter()
            .zip(&self.v)
            .map(|(x, v)| (m.eval(x, v) - l0).abs())
            .fold(0.0, f64::max)
            / l0.abs().max(1.0)
    }
}

fn split_state(run: &OdeRun, n: usize, t: &[f64]) -> Trajectory {
    let ys = &run.ys;
    Trajectory {
        t: t[..ys.len()].to_vec(),
        x: ys.iter().map(|y| y[..n].to_vec()).collect(),
        v: ys.iter().map(|y| y[n..2 * n].to_vec()).collect(),
        stats: run.stats,
        stopped: run.stopped.as_ref().map(|e| e.to_string()),
    }
}

impl Trajectory {
    /// Whether the arc reached the last requested time.
    pub fn is_complete(&self) -> bool {
        self.stopped.is_none()
    }

    fn require_complete(self) -> GeomResult<Self> {
        match &self.stopped {
            None => Ok(self),
            Some(why) => Err(GeomError::Invalid(format!("arc ended at t = {}: {why}", self.t.last().copied().unwrap_or(0.0)))),
        }
    }
}

fn geodesic_rhs(m: &dyn MetricField, y: &[f64], mode: DiffMode) -> GeomResult<Vec<f64>> {
    let n = y.len() / 2;
    let (x, v) = y.split_at(n);
    if !m.in_domain(x) {
        return Err(GeomError::LeftChartDomain);
    }
    if !m.admissible(x, v) {
        return Err(GeomError::LeftAdmissibleCone);
    }
    let g = spray(m, x, v, mode)?;
    let mut out = v.to_vec();
    out.extend(g.iter().map(|a| -2.0 * a));
    Ok(out)
}

/// The geodesic with `γ(0) = x`, `γ'(0) = v`, sampled on `grid`.
///
/// An arc that leaves the chart domain or the admissible cone is returned
/// up to the last grid time reached, with [`Trajectory::stopped`] set.
pub fn geodesic(
    m: &dyn MetricField,
    x: &[f64],
    v: &[f64],
    grid: &[f64],
    mode: DiffMode,
    opts: &OdeOptions,
) -> GeomResult<Trajectory> {
    let mut y0 = x.to_vec();
    y0.extend_from_slice(v);
    let run = dopri5(|_, y| geodesic_rhs(m, y, mode), &y0, grid, opts)?;
    Ok(split_state(&run, x.len(), grid))
}

/// A base geodesic together with its horizontal lift.
#[derive(Clone, Debug, Serialize)]
pub struct LiftedCurve {
    pub base: Trajectory,
    pub lifted: Trajectory,
}

/// Integrates the base geodesic from `(σp, ṽ)` and its horizontal lift
/// through `p` as one system.
pub fn lift_base_geodesic(
    chart: &SubmersionChart,
    p: &[f64],
    vt: &[f64],
    grid: &[f64],
    mode: DiffMode,
    opts: &OdeOptions,
) -> GeomResult<LiftedCurve> {
    let n = p.len();
    let m = vt.len();
    let r = n - m;
    let mut y0 = chart.project(p);
    y0.extend_from_slice(vt);
    y0.extend_from_slice(p);
    let base = chart.base.as_ref();
    let mut wguess = vec![0.0; r];
    let run = dopri5(
        |_, y| {
            let mut out = geodesic_rhs(base, &y[..2 * m], mode)?;
            let w = chart.lift_components(&y[2 * m..], &y[m..2 * m], &wguess, mode)?;
            let pv = chart.assemble(&y[m..2 * m], &w);
            wguess = w;
            out.extend(pv);
            Ok(out)
        },
        &y0,
        grid,
        opts,
    )?;
    let base_traj = split_state(&run, m, grid);
    let mut lifted = Trajectory {
        t: base_traj.t.clone(),
        x: Vec::new(),
        v: Vec::new(),
        stats: run.stats,
        stopped: base_traj.stopped.clone(),
    };
    for y in &run.ys {
        let x = y[2 * m..].to_vec();
        let v = chart.lift_vector(&x, &y[m..2 * m], mode)?;
        lifted.x.push(x);
        lifted.v.push(v);
    }
    Ok(LiftedCurve {
        base: base_traj,
        lifted,
    })
}

/// Sup-norm distance between the lift of the base geodesic and the total
/// geodesic with the same initial data.
pub fn lift_deviation(
    chart: &SubmersionChart,
    p: &[f64],
    vt: &[f64],
    t_end: f64,
    steps: usize,
    mode: DiffMode,
    opts: &OdeOptions,
) -> GeomResult<f64> {
    let grid = uniform_grid(t_end, steps);
    let lc = lift_base_geodesic(chart, p, vt, &grid, mode, opts)?;
    let lifted = lc.lifted.require_complete()?;
    let v = chart.lift_vector(p, vt, mode)?;
    let direct = geodesic(chart.total.as_ref(), p, &v, &grid, mode, opts)?.require_complete()?;
    Ok(lifted
        .x
        .iter()
        .zip(&direct.x)
        .map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max))
}

/// Largest horizontality residual along the total geodesic from a
/// horizontal initial velocity.
pub fn horizontality_persistence(
    chart: &SubmersionChart,
    p: &[f64],
    vt: &[f64],
    t_end: f64,
    steps: usize,
    mode: DiffMode,
    opts: &OdeOptions,
) -> GeomResult<f64> {
    let v = chart.lift_vector(p, vt, mode)?;
    let grid = uniform_grid(t_end, steps);
    let traj = geodesic(chart.total.as_ref(), p, &v, &grid, mode, opts)?.require_complete()?;
    let mut worst: f64 = 0.0;
    for (x, v) in traj.x.iter().zip(&traj.v) {
        let r = chart.horizontality_residual(x, v, mode)?;
        worst = worst.max(r / crate::metric::vnorm(v).powi(2).max(1e-300));
    }
    Ok(worst)
}
