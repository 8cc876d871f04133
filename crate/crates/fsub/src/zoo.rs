//! Built-in fixtures with known reference values.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::GeomResult;
use crate::jets::Scalar;
use crate::metric::{ChartBox, Lagrangian, Metric, MetricField};
use crate::submersion::SubmersionChart;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Flags {
    pub riemannian: bool,
    pub totally_geodesic: bool,
    pub horizontally_regular: bool,
    pub flat: bool,
}

/// A value the fixture is known to produce, with where it comes from.
#[derive(Clone, Debug, Serialize)]
pub struct Reference {
    pub quantity: &'static str,
    pub value: Option<f64>,
    pub source: &'static str,
}

pub struct Fixture {
    pub chart: SubmersionChart,
    pub flags: Flags,
    pub summary: &'static str,
    pub references: Vec<Reference>,
}

pub const BUILTIN: [&str; 5] = [
    "riemannian_product",
    "hopf",
    "minkowski_randers",
    "varying_randers",
    "warped_product",
];

pub fn builtin(label: &str) -> Option<Fixture> {
    let f = match label {
        "riemannian_product" => riemannian_product(),
        "hopf" => hopf(),
        "minkowski_randers" => minkowski_randers(),
        "varying_randers" => varying_randers(),
        "warped_product" => warped_product(),
        _ => return None,
    };
    // the builtin definitions are fixed, so construction cannot fail
    Some(f.expect("builtin fixture"))
}

/// `Σ cᵢ vᵢ²` with constant coefficients.
#[derive(Clone, Debug)]
pub struct Diagonal(pub Vec<f64>);

impl Lagrangian for Diagonal {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn lagrangian<S: Scalar>(&self, _x: &[S], v: &[S]) -> S {
        let mut acc = v[0].clone() * v[0].clone() * self.0[0];
        for (vi, &c) in v.iter().zip(&self.0).skip(1) {
            acc = acc + vi.clone() * vi.clone() * c;
        }
        acc
    }
}

fn diagonal(label: &str, c: Vec<f64>, bbox: ChartBox) -> Arc<dyn MetricField> {
    Arc::new(Metric::new(label, Diagonal(c), bbox))
}

pub fn riemannian_product() -> GeomResult<Fixture> {
    let total = diagonal("riemannian_product", vec![1.0; 4], ChartBox::cube(4, 1.0));
    let base = diagonal("riemannian_product/base", vec![1.0; 2], ChartBox::cube(2, 1.0));
    let chart = SubmersionChart::new("riemannian_product", total, base, SubmersionChart::coordinate(4, 2))?;
    Ok(Fixture {
        chart,
        flags: Flags {
            riemannian: true,
            totally_geodesic: true,
            horizontally_regular: true,
            flat: true,
        },
        summary: "Euclidean R^4 onto its first two coordinates",
        references: vec![Reference {
            quantity: "every O'Neill tensor and curvature",
            value: Some(0.0),
            source: "product geometry",
        }],
    })
}

/// Round `S³(1)` in Euler angles `(θ, φ, ψ)`.
#[derive(Clone, Debug)]
pub struct HopfTotal;

impl Lagrangian for HopfTotal {
    fn dim(&self) -> usize {
        3
    }

    fn lagrangian<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let c = x[0].cos();
        let cross = c * v[1].clone() * v[2].clone() * 2.0;
        (v[0].clone() * v[0].clone() + v[1].clone() * v[1].clone() + v[2].clone() * v[2].clone() + cross) * 0.25
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x[0] > 0.1 && x[0] < std::f64::consts::PI - 0.1
    }
}

/// `S²(½)` in spherical coordinates `(θ, φ)`.
#[derive(Clone, Debug)]
pub struct HopfBase;

impl Lagrangian for HopfBase {
    fn dim(&self) -> usize {
        2
    }

    fn lagrangian<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let s = x[0].sin();
        (v[0].clone() * v[0].clone() + s.clone() * s * v[1].clone() * v[1].clone()) * 0.25
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x[0] > 0.1 && x[0] < std::f64::consts::PI - 0.1
    }
}

pub fn hopf() -> GeomResult<Fixture> {
    let tbox = ChartBox::new(vec![0.4, -3.0, -3.0], vec![2.7, 3.0, 3.0]);
    let bbox = ChartBox::new(vec![0.4, -3.0], vec![2.7, 3.0]);
    let total: Arc<dyn MetricField> = Arc::new(Metric::new("hopf", HopfTotal, tbox));
    let base: Arc<dyn MetricField> = Arc::new(Metric::new("hopf/base", HopfBase, bbox));
    let chart = SubmersionChart::new("hopf", total, base, SubmersionChart::coordinate(3, 2))?;
    Ok(Fixture {
        chart,
        flags: Flags {
            riemannian: true,
            totally_geodesic: true,
            horizontally_regular: true,
            flat: false,
        },
        summary: "Hopf fibration S^3(1) -> S^2(1/2) in Euler angles",
        references: vec![
            Reference {
                quantity: "base sectional curvature",
                value: Some(4.0),
                source: "round sphere of radius 1/2",
            },
            Reference {
                quantity: "|A_x v|^2 for unit orthogonal horizontal v, x",
                value: Some(1.0),
                source: "classical O'Neill computation for the Hopf map",
            },
            Reference {
                quantity: "total sectional curvature on horizontal planes",
                value: Some(1.0),
                source: "unit round sphere; equals 4 - 3|A_x v|^2",
            },
            Reference {
                quantity: "holonomy angle around a base loop",
                value: None,
                source: "twice the enclosed area on S^2(1/2)",
            },
        ],
    })
}

/// `(√(a(x)vv) + β(x)v)²`.
pub struct Randers<A, B> {
    pub n: usize,
    pub a: A,
    pub beta: B,
}

/// Coefficient field producing a symmetric matrix or covector of scalars.
pub trait Coefficients: Send + Sync {
    fn matrix<S: Scalar>(&self, x: &[S]) -> Vec<Vec<S>>;
}

pub trait OneForm: Send + Sync {
    fn covector<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

impl<A: Coefficients, B: OneForm> Lagrangian for Randers<A, B> {
    fn dim(&self) -> usize {
        self.n
    }

    fn lagrangian<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let a = self.a.matrix(x);
        let b = self.beta.covector(x);
        let mut q = v[0].cst(0.0);
        let mut l = v[0].cst(0.0);
        for i in 0..self.n {
            l = l + b[i].clone() * v[i].clone();
            for j in 0..self.n {
                q = q + a[i][j].clone() * v[i].clone() * v[j].clone();
            }
        }
        let f = q.sqrt() + l;
        f.clone() * f
    }
}

#[derive(Clone, Debug)]
pub struct ConstMatrix(pub Vec<Vec<f64>>);

impl Coefficients for ConstMatrix {
    fn matrix<S: Scalar>(&self, x: &[S]) -> Vec<Vec<S>> {
        self.0
            .iter()
            .map(|row| row.iter().map(|&c| x[0].cst(c)).collect())
            .collect()
    }
}

impl OneForm for ConstMatrix {
    fn covector<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.0[0].iter().map(|&c| x[0].cst(c)).collect()
    }
}

pub const MINKOWSKI_BETA: [f64; 3] = [0.24, 0.0, 0.32];

pub fn minkowski_randers() -> GeomResult<Fixture> {
    let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
    let lag = Randers {
        n: 3,
        a: ConstMatrix(id),
        beta: ConstMatrix(vec![MINKOWSKI_BETA.to_vec()]),
    };
    let total: Arc<dyn MetricField> = Arc::new(Metric::new("minkowski_randers", lag, ChartBox::cube(3, 1.0)));
    let chart = SubmersionChart::with_induced_base("minkowski_randers", total, SubmersionChart::coordinate(3, 2))?;
    Ok(Fixture {
        chart,
        flags: Flags {
            riemannian: false,
            totally_geodesic: true,
            horizontally_regular: true,
            flat: true,
        },
        summary: "x-independent Randers metric on R^3, |beta| = 0.4 with a vertical component, induced base",
        references: vec![Reference {
            quantity: "Christoffel symbols, T, A",
            value: Some(0.0),
            source: "no position dependence",
        }],
    })
}

#[derive(Clone, Debug)]
pub struct VaryingA;

impl Coefficients for VaryingA {
    fn matrix<S: Scalar>(&self, x: &[S]) -> Vec<Vec<S>> {
        let (x0, x1) = (&x[0], &x[1]);
        let a00 = x0.sin() * 0.2 + 1.0;
        let a11 = x1.cos() * 0.15 + 1.0;
        let a22 = (x0.clone() + x1.clone()).sin() * 0.1 + 1.0;
        let a01 = (x0.clone() - x1.clone()).cos() * 0.1;
        let a02 = x1.sin() * 0.05;
        let a12 = x0.cos() * 0.08;
        vec![
            vec![a00, a01.clone(), a02.clone()],
            vec![a01, a11, a12.clone()],
            vec![a02, a12, a22],
        ]
    }
}

#[derive(Clone, Debug)]
pub struct VaryingBeta;

impl OneForm for VaryingBeta {
    fn covector<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let (x0, x1) = (&x[0], &x[1]);
        vec![
            x1.sin() * 0.15 + 0.05,
            x0.cos() * 0.1,
            (x0.clone() * x1.clone()).sin() * 0.05 + 0.12,
        ]
    }
}

pub fn varying_randers() -> GeomResult<Fixture> {
    let lag = Randers {
        n: 3,
        a: VaryingA,
        beta: VaryingBeta,
    };
    let total: Arc<dyn MetricField> = Arc::new(Metric::new("varying_randers", lag, ChartBox::cube(3, 1.0)));
    let chart = SubmersionChart::with_induced_base("varying_randers", total, SubmersionChart::coordinate(3, 2))?;
    Ok(Fixture {
        chart,
        flags: Flags::default(),
        summary: "Randers metric on R^3 with coefficients varying along the base, induced base",
        references: vec![Reference {
            quantity: "fundamental-equation residuals",
            value: Some(0.0),
            source: "the identity suite, cross-checked in the sampled-derivative profile",
        }],
    })
}

/// `|ṽ|² + f(x₀)² v₂²` with `f = 1 + 0.2 sin x₀`.
#[derive(Clone, Debug)]
pub struct Warped;

impl Lagrangian for Warped {
    fn dim(&self) -> usize {
        3
    }

    fn lagrangian<S: Scalar>(&self, x: &[S], v: &[S]) -> S {
        let f = x[0].sin() * 0.2 + 1.0;
        v[0].clone() * v[0].clone() + v[1].clone() * v[1].clone() + f.clone() * f * v[2].clone() * v[2].clone()
    }
}

pub fn warped_product() -> GeomResult<Fixture> {
    let total: Arc<dyn MetricField> = Arc::new(Metric::new("warped_product", Warped, ChartBox::cube(3, 1.0)));
    let base = diagonal("warped_product/base", vec![1.0; 2], ChartBox::cube(2, 1.0));
    let chart = SubmersionChart::new("warped_product", total, base, SubmersionChart::coordinate(3, 2))?;
    Ok(Fixture {
        chart,
        flags: Flags {
            riemannian: true,
            totally_geodesic: false,
            horizontally_regular: true,
            flat: false,
        },
        summary: "warped product R^2 x_f R with f = 1 + 0.2 sin x0",
        references: vec![
            Reference {
                quantity: "T_u u for unit vertical u",
                value: None,
                source: "-(grad f / f), nonzero wherever cos x0 != 0",
            },
            Reference {
                quantity: "A",
                value: Some(0.0),
                source: "integrable horizontal distribution",
            },
        ],
    })
}
