//! Seeded draws of sample points and identity arguments.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::metric::DiffMode;
use crate::numerics::norm;
use crate::submersion::{ONeill, SubmersionChart};

/// Which reference directions an identity accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Any,
    Vertical,
    Horizontal,
}

impl SampleKind {
    pub const ALL: [SampleKind; 3] = [SampleKind::Any, SampleKind::Vertical, SampleKind::Horizontal];

    fn stream(self) -> u64 {
        match self {
            SampleKind::Any => 1,
            SampleKind::Vertical => 2,
            SampleKind::Horizontal => 3,
        }
    }
}

pub const MAX_REJECTS: usize = 100;

/// One sample point with every argument an identity may ask for.
///
/// Vertical slots are `K·ξ`, horizontal slots are `g_v`-horizontal lifts of
/// random base vectors, and the matrices feed the affine field extensions.
#[derive(Clone, Debug)]
pub struct Sample {
    pub index: usize,
    pub kind: SampleKind,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub e: Vec<f64>,
    pub h: Vec<f64>,
    pub b: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub s: Vec<f64>,
    pub s2: Vec<f64>,
    pub xh: Vec<f64>,
    pub yh: Vec<f64>,
    pub zh: Vec<f64>,
    pub zh2: Vec<f64>,
    /// Random `n`-vector and `n × n` matrices.
    pub c: Vec<f64>,
    pub mat_b: DMatrix<f64>,
    pub mat_d: DMatrix<f64>,
    /// Random base vector and `m × m` matrix.
    pub ct: Vec<f64>,
    pub mat_bt: DMatrix<f64>,
    /// Random fiber vector, `r × r` and `r × n` matrices.
    pub cr: Vec<f64>,
    pub mat_r: DMatrix<f64>,
    pub mat_rn: DMatrix<f64>,
}

/// Per-sample outcome of drawing: accepted, or how many draws were lost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DrawStats {
    pub rejected: usize,
    pub degenerate: usize,
}

pub(crate) fn rng_for(seed: u64, kind: SampleKind, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind.stream() << 40) | index as u64);
    rng
}

pub(crate) fn normal_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub(crate) fn unit_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let d = normal_vec(rng, n);
        let r = norm(&d);
        if r > 1e-8 {
            return d.iter().map(|a| a / r).collect();
        }
    }
}

fn uniform_mat<R: Rng>(rng: &mut R, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

/// `|λ|min / |λ|max` of the vertical Gram matrix, compared to `1e-6`.
fn vertical_gram_ok(on: &ONeill) -> bool {
    let k = &on.chart.vertical;
    if k.ncols() == 0 {
        return true;
    }
    let gram = k.transpose() * &on.site.g0 * k;
    let ev = gram.symmetric_eigen().eigenvalues;
    let hi = ev.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let lo = ev.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    lo >= 1e-6 * hi.max(on.site.g0.amax())
}

/// Draws sample `index` of `kind`; `None` after [`MAX_REJECTS`] failures.
pub fn draw<'a>(
    chart: &'a SubmersionChart,
    kind: SampleKind,
    index: usize,
    seed: u64,
    mode: DiffMode,
) -> (Option<(Sample, ONeill<'a>)>, DrawStats) {
    let mut rng = rng_for(seed, kind, index);
    let (n, m, r) = chart.dims();
    let bbox = chart.total.chart_box();
    let mut stats = DrawStats::default();
    while stats.rejected + stats.degenerate < MAX_REJECTS {
        let x = bbox.sample(&mut rng);
        let scale = rng.gen_range(0.5..2.0);
        let v = match kind {
            SampleKind::Any => unit_vec(&mut rng, n).iter().map(|a| a * scale).collect(),
            SampleKind::Vertical => {
                let d = unit_vec(&mut rng, r);
                on_fiber(chart, &d, scale)
            }
            SampleKind::Horizontal => {
                let d: Vec<f64> = unit_vec(&mut rng, m).iter().map(|a| a * scale).collect();
                match chart.lift_vector(&x, &d, mode) {
                    Ok(v) => v,
                    Err(_) => {
                        stats.rejected += 1;
                        continue;
                    }
                }
            }
        };
        if !chart.total.in_domain(&x) || !chart.total.admissible(&x, &v) {
            stats.rejected += 1;
            continue;
        }
        let on = match ONeill::new(chart, &x, &v, mode) {
            Ok(on) => on,
            Err(GeomError::DegenerateVertical { .. }) => {
                stats.degenerate += 1;
                continue;
            }
            Err(_) => {
                stats.rejected += 1;
                continue;
            }
        };
        if !vertical_gram_ok(&on) {
            stats.degenerate += 1;
            continue;
        }
        let sample = arguments(&mut rng, &on, kind, index, &x, &v);
        return (Some((sample, on)), stats);
    }
    (None, stats)
}

fn on_fiber(chart: &SubmersionChart, d: &[f64], scale: f64) -> Vec<f64> {
    let k = &chart.vertical;
    (0..k.nrows())
        .map(|i| (0..k.ncols()).map(|a| k[(i, a)] * d[a]).sum::<f64>() * scale)
        .collect()
}

fn arguments<R: Rng>(rng: &mut R, on: &ONeill, kind: SampleKind, index: usize, x: &[f64], v: &[f64]) -> Sample {
    let (n, m, r) = on.chart.dims();
    let mut vert = || on_fiber(on.chart, &normal_vec(rng, r), 1.0);
    let (u, w, s, s2) = (vert(), vert(), vert(), vert());
    let mut hor = || on.lift_star(&normal_vec(rng, m));
    let (xh, yh, zh, zh2) = (hor(), hor(), hor(), hor());
    Sample {
        index,
        kind,
        x: x.to_vec(),
        v: v.to_vec(),
        e: normal_vec(rng, n),
        h: normal_vec(rng, n),
        b: normal_vec(rng, n),
        u,
        w,
        s,
        s2,
        xh,
        yh,
        zh,
        zh2,
        c: normal_vec(rng, n),
        mat_b: uniform_mat(rng, n, n),
        mat_d: uniform_mat(rng, n, n),
        ct: normal_vec(rng, m),
        mat_bt: uniform_mat(rng, m, m),
        cr: normal_vec(rng, r),
        mat_r: uniform_mat(rng, r, r),
        mat_rn: uniform_mat(rng, r, n),
    }
}
