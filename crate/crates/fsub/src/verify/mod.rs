//! Sampled verification of the curvature and O'Neill identities.
//!
//! Every sample draws its own ChaCha stream from `(seed, kind, index)`, so
//! reports do not depend on the number of worker threads.

mod catalogue;
mod global;
mod report;
mod sample;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalogue::{catalogue, residual, second_fundamental_h, Ctx, Identity, Outcome};
pub use global::{circle_velocity, default_loop, definition_invariants, geodesic_checks, holonomy_check};
pub use report::{write_csv, CsvRow, GlobalResult, IdentityResult, Report, SampleStats, Status, WorstSample, SCHEMA};
pub use sample::{draw, DrawStats, Sample, SampleKind, MAX_REJECTS};

use crate::error::GeomError;
use crate::metric::DiffMode;
use crate::submersion::SubmersionChart;
use crate::zoo::Flags;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceClass {
    Exact,
    Standard,
    Loose,
    /// Sup distance between integrated curves.
    Trajectory,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub exact: f64,
    pub standard: f64,
    pub loose: f64,
    pub trajectory: f64,
}

impl Tolerances {
    pub fn for_mode(mode: DiffMode) -> Tolerances {
        match mode {
            DiffMode::Ad => Tolerances {
                exact: 1e-9,
                standard: 1e-7,
                loose: 1e-4,
                trajectory: 1e-6,
            },
            DiffMode::Fd => Tolerances {
                exact: 1e-5,
                standard: 1e-4,
                loose: 1e-3,
                trajectory: 1e-4,
            },
        }
    }

    pub fn of(&self, c: ToleranceClass) -> f64 {
        match c {
            ToleranceClass::Exact => self.exact,
            ToleranceClass::Standard => self.standard,
            ToleranceClass::Loose => self.loose,
            ToleranceClass::Trajectory => self.trajectory,
        }
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("fixture invalid: {invariant} ({detail})")]
    FixtureInvalid { invariant: String, detail: String },
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

pub const GLOBAL_IDS: [&str; 3] = ["geodesic-lift", "horizontality-persistence", "holonomy-isometry"];

#[derive(Clone, Debug)]
pub struct Config {
    pub samples: usize,
    pub seed: u64,
    pub mode: DiffMode,
    /// Restricts the run to these ids; `None` runs everything.
    pub identities: Option<Vec<String>>,
    /// Worker threads; `0` uses the rayon default.
    pub jobs: usize,
    /// Abort with [`VerifyError::FixtureInvalid`] when an invariant fails.
    pub strict: bool,
    pub csv: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            samples: 100,
            seed: 0,
            mode: DiffMode::Ad,
            identities: None,
            jobs: 0,
            strict: true,
            csv: false,
        }
    }
}

pub struct RunOutput {
    pub report: Report,
    pub csv: Vec<CsvRow>,
}

enum Eval {
    Res(f64),
    Skip,
    Err(String),
}

struct SampleOut {
    x: Vec<f64>,
    v: Vec<f64>,
    evals: Vec<Eval>,
}

/// Fails on the first id that is neither in the catalogue nor a global check.
pub fn check_identities(ids: &[String]) -> Result<(), VerifyError> {
    let all = catalogue();
    match ids.iter().find(|id| !all.iter().any(|i| i.id == id.as_str()) && !GLOBAL_IDS.contains(&id.as_str())) {
        Some(id) => Err(VerifyError::UnknownIdentity(id.clone())),
        None => Ok(()),
    }
}

fn selected(cfg: &Config) -> Result<(Vec<Identity>, Vec<&'static str>), VerifyError> {
    let all = catalogue();
    let Some(ids) = &cfg.identities else {
        return Ok((all, GLOBAL_IDS.to_vec()));
    };
    check_identities(ids)?;
    let globals = GLOBAL_IDS.iter().copied().filter(|g| ids.iter().any(|i| i == g)).collect();
    Ok((all.into_iter().filter(|i| ids.iter().any(|s| s == i.id)).collect(), globals))
}

fn evaluate(chart: &SubmersionChart, ids: &[&Identity], kind: SampleKind, index: usize, cfg: &Config) -> (Option<SampleOut>, DrawStats) {
    let (drawn, stats) = draw(chart, kind, index, cfg.seed, cfg.mode);
    let Some((s, on)) = drawn else {
        return (None, stats);
    };
    let ctx = Ctx {
        on: &on,
        s: &s,
        mode: cfg.mode,
    };
    let evals = ids
        .iter()
        .map(|id| match (id.eval)(&ctx) {
            Ok(o) => match o.residual() {
                Some(r) => Eval::Res(r),
                None => Eval::Skip,
            },
            Err(GeomError::DegenerateFlag { .. }) => Eval::Skip,
            Err(e) => Eval::Err(e.to_string()),
        })
        .collect();
    (
        Some(SampleOut {
            x: s.x.clone(),
            v: s.v.clone(),
            evals,
        }),
        stats,
    )
}

fn aggregate(id: &Identity, outs: &[(usize, &SampleOut, &Eval)], tol: &Tolerances) -> IdentityResult {
    let tolerance = tol.of(id.class);
    let mut count = 0;
    let mut skipped = 0;
    let mut errors = 0;
    let mut sum = 0.0;
    let mut max: Option<f64> = None;
    let mut worst = None;
    let mut first_error = None;
    for (index, so, ev) in outs {
        match ev {
            Eval::Res(r) => {
                let r = if r.is_nan() { f64::INFINITY } else { *r };
                count += 1;
                sum += r;
                if max.is_none_or(|m| r > m) {
                    max = Some(r);
                    worst = Some(WorstSample {
                        index: *index,
                        x: so.x.clone(),
                        v: so.v.clone(),
                    });
                }
            }
            Eval::Skip => skipped += 1,
            Eval::Err(e) => {
                errors += 1;
                first_error.get_or_insert_with(|| e.clone());
            }
        }
    }
    let status = if id.diagnostic {
        Status::Diagnostic
    } else if errors > 0 || max.is_some_and(|m| m > tolerance) {
        Status::Fail
    } else if count == 0 {
        Status::Skipped
    } else {
        Status::Pass
    };
    IdentityResult {
        id: id.id.to_string(),
        anchor: id.anchor.to_string(),
        kind: id.kind,
        class: id.class,
        tolerance,
        count,
        skipped,
        errors,
        max,
        mean: (count > 0).then(|| sum / count as f64),
        worst,
        status,
        first_error,
    }
}

/// Runs the selected identities on `samples` draws per sample kind.
pub fn run_suite(label: &str, chart: &SubmersionChart, flags: Flags, cfg: &Config) -> Result<RunOutput, VerifyError> {
    let sampled;
    let chart = if cfg.mode == DiffMode::Fd {
        sampled = chart.sampled();
        &sampled
    } else {
        chart
    };
    let tol = Tolerances::for_mode(cfg.mode);
    let (ids, globals) = selected(cfg)?;

    let invariants = definition_invariants(chart, cfg.samples.max(1), cfg.seed, cfg.mode, &tol);
    if cfg.strict {
        if let Some(bad) = invariants.iter().find(|g| g.status == Status::Fail) {
            return Err(VerifyError::FixtureInvalid {
                invariant: bad.id.clone(),
                detail: format!("residual {:e} above {:e}", bad.max.unwrap_or(f64::NAN), bad.tolerance),
            });
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| GeomError::Invalid(e.to_string()))?;

    let mut results: Vec<Option<IdentityResult>> = (0..ids.len()).map(|_| None).collect();
    let mut sampling = Vec::new();
    let mut csv = Vec::new();
    for kind in SampleKind::ALL {
        let of_kind: Vec<(usize, &Identity)> = ids.iter().enumerate().filter(|(_, i)| i.kind == kind).collect();
        if of_kind.is_empty() {
            continue;
        }
        let refs: Vec<&Identity> = of_kind.iter().map(|(_, i)| *i).collect();
        let outs: Vec<(Option<SampleOut>, DrawStats)> =
            pool.install(|| (0..cfg.samples).into_par_iter().map(|k| evaluate(chart, &refs, kind, k, cfg)).collect());
        sampling.push(SampleStats {
            kind,
            drawn: outs.iter().filter(|o| o.0.is_some()).count(),
            rejected: outs.iter().map(|o| o.1.rejected).sum(),
            degenerate: outs.iter().map(|o| o.1.degenerate).sum(),
            abandoned: outs.iter().filter(|o| o.0.is_none()).count(),
        });
        for (j, (slot, id)) in of_kind.iter().enumerate() {
            let per: Vec<(usize, &SampleOut, &Eval)> = outs
                .iter()
                .enumerate()
                .filter_map(|(k, o)| o.0.as_ref().map(|so| (k, so, &so.evals[j])))
                .collect();
            if cfg.csv {
                for (k, _, ev) in &per {
                    if let Eval::Res(r) = ev {
                        csv.push(CsvRow {
                            identity: id.id,
                            kind,
                            sample: *k,
                            residual: *r,
                        });
                    }
                }
            }
            results[*slot] = Some(aggregate(id, &per, &tol));
        }
    }
    let identities: Vec<IdentityResult> = results.into_iter().flatten().collect();

    let mut global = Vec::new();
    if globals.contains(&"geodesic-lift") || globals.contains(&"horizontality-persistence") {
        global.extend(
            geodesic_checks(chart, cfg.seed, cfg.mode, &tol)
                .into_iter()
                .filter(|g| globals.contains(&g.id.as_str())),
        );
    }
    if globals.contains(&"holonomy-isometry") {
        global.push(holonomy_check(chart, &flags, cfg.seed, cfg.mode, &tol));
    }

    let pass = identities.iter().all(|r| r.status != Status::Fail)
        && global.iter().all(|g| g.status != Status::Fail)
        && invariants.iter().all(|g| g.status != Status::Fail);
    Ok(RunOutput {
        report: Report {
            schema: SCHEMA.to_string(),
            fixture: label.to_string(),
            seed: cfg.seed,
            samples: cfg.samples,
            profile: cfg.mode,
            tolerances: tol,
            flags,
            sampling,
            definition_invariants: invariants,
            identities,
            global,
            pass,
        },
        csv,
    })
}

#[cfg(test)]
mod tests;
