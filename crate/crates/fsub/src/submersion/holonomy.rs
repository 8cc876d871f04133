//! Holonomy of horizontal transport around closed base loops.

use crate::error::{GeomError, GeomResult};
use crate::geodesics::{dopri5, OdeOptions, Trajectory};
use crate::metric::{DiffMode, MetricField};
use crate::numerics::{cheb_deriv, cheb_eval, cheb_fit, cheb_nodes, clenshaw_curtis};

use super::SubmersionChart;

/// Result of transporting a vertical curve once around a base loop.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Transport {
    /// Image of the curve's start point.
    pub start_image: Vec<f64>,
    pub length_before: f64,
    pub length_after: f64,
    /// Fiber length of the straight segment from the start point to its
    /// image.
    pub displacement: f64,
}

/// Horizontal lift through `p` of the base curve with velocity `base_vel`,
/// sampled on `grid`.
pub fn horizontal_lift<F>(
    chart: &SubmersionChart,
    base_vel: F,
    p: &[f64],
    grid: &[f64],
    mode: DiffMode,
    opts: &OdeOptions,
) -> GeomResult<Trajectory>
where
    F: Fn(f64) -> Vec<f64>,
{
    let r = chart.vertical.ncols();
    let mut wguess = vec![0.0; r];
    let run = dopri5(
        |t, y| {
            let a = base_vel(t);
            let w = chart.lift_components(y, &a, &wguess, mode)?;
            let v = chart.assemble(&a, &w);
            wguess = w;
            Ok(v)
        },
        p,
        grid,
        opts,
    )?;
    let mut v = Vec::with_capacity(run.ys.len());
    for (t, y) in grid.iter().zip(&run.ys) {
        v.push(chart.lift_vector(y, &base_vel(*t), mode)?);
    }
    Ok(Trajectory {
        t: grid[..run.ys.len()].to_vec(),
        x: run.ys,
        v,
        stats: run.stats,
        stopped: run.stopped.map(|e| e.to_string()),
    })
}

/// Endpoint of the horizontal lift through `p` of the loop `c̃` on `[0, 1]`.
fn transport_point<F>(
    chart: &SubmersionChart,
    loop_vel: &F,
    p: &[f64],
    mode: DiffMode,
    opts: &OdeOptions,
) -> GeomResult<Vec<f64>>
where
    F: Fn(f64) -> Vec<f64>,
{
    let arc = horizontal_lift(chart, |t| loop_vel(t), p, &[0.0, 1.0], mode, opts)?;
    match arc.stopped {
        None => Ok(arc.x[1].clone()),
        Some(why) => Err(GeomError::Invalid(format!("transport stopped: {why}"))),
    }
}

/// `∫₀¹ √|L(γ, γ')|` for a curve given by Chebyshev coefficients per
/// coordinate on `s ∈ [0, 1]`.
fn curve_length(m: &dyn MetricField, coeffs: &[Vec<f64>]) -> f64 {
    let deriv: Vec<Vec<f64>> = coeffs.iter().map(|c| cheb_deriv(c)).collect();
    let (nodes, w) = clenshaw_curtis(64);
    nodes
        .iter()
        .zip(&w)
        .map(|(&t, &wt)| {
            let x: Vec<f64> = coeffs.iter().map(|c| cheb_eval(c, t)).collect();
            // d/ds = 2 d/dt for s = (t + 1)/2
            let v: Vec<f64> = deriv.iter().map(|c| 2.0 * cheb_eval(c, t)).collect();
            0.5 * wt * m.eval(&x, &v).abs().sqrt()
        })
        .sum()
}

fn fit_curve(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points[0].len();
    (0..n)
        .map(|i| cheb_fit(&points.iter().map(|p| p[i]).collect::<Vec<_>>()))
        .collect()
}

/// Transports the vertical segment `p + s·d`, `s ∈ [0, 1]`, around the
/// loop whose velocity is `loop_vel`.
///
/// The image curve is rebuilt by Chebyshev interpolation through the
/// transported nodes before its length is integrated.
pub fn holonomy_transport<F>(
    chart: &SubmersionChart,
    loop_vel: F,
    p: &[f64],
    d: &[f64],
    nodes: usize,
    mode: DiffMode,
    opts: &OdeOptions,
) -> GeomResult<Transport>
where
    F: Fn(f64) -> Vec<f64>,
{
    let ts = cheb_nodes(nodes);
    let before: Vec<Vec<f64>> = ts
        .iter()
        .map(|&t| {
            let s = 0.5 * (t + 1.0);
            p.iter().zip(d).map(|(a, b)| a + s * b).collect()
        })
        .collect();
    let after = before
        .iter()
        .map(|q| transport_point(chart, &loop_vel, q, mode, opts))
        .collect::<GeomResult<Vec<_>>>()?;
    let total = chart.total.as_ref();
    let start_image = transport_point(chart, &loop_vel, p, mode, opts)?;
    let seg: Vec<Vec<f64>> = ts
        .iter()
        .map(|&t| {
            let s = 0.5 * (t + 1.0);
            p.iter()
                .zip(&start_image)
                .map(|(a, b)| a + s * (b - a))
                .collect()
        })
        .collect();
    Ok(Transport {
        length_before: curve_length(total, &fit_curve(&before)),
        length_after: curve_length(total, &fit_curve(&after)),
        displacement: curve_length(total, &fit_curve(&seg)),
        start_image,
    })
}
