use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("order {requested} exceeds the supported maximum {max}")]
    UnsupportedOrder { requested: usize, max: usize },
    #[error("multi-index of length {len} for a jet in {nvars} variables")]
    BadIndex { len: usize, nvars: usize },
}

/// Failures of the geometric computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("direction is not admissible")]
    NotAdmissible,
    #[error("point outside the chart domain")]
    LeftChartDomain,
    #[error("fundamental tensor is degenerate (|det| = {det:e})")]
    DegenerateMetric { det: f64 },
    #[error("vertical space is degenerate (pivot {pivot:e})")]
    DegenerateVertical { pivot: f64 },
    #[error("flag is degenerate (denominator {denom:e})")]
    DegenerateFlag { denom: f64 },
    #[error("differential of the projection has rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("{what}: no convergence after {iters} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iters: usize,
        residual: f64,
    },
    #[error("iterate left the admissible cone")]
    LeftAdmissibleCone,
    #[error("metric has no jet evaluation and finite differences were not requested")]
    NoJetEvaluation,
    #[error("{0}")]
    Invalid(String),
}

pub type GeomResult<T> = Result<T, GeomError>;
