//! The `fsub` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for an
//! invalid fixture or configuration, 3 for IO errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::GeomError;
use crate::geodesics::{
    geodesic, horizontality_persistence, lift_base_geodesic, lift_deviation, uniform_grid, OdeOptions, OdeStats,
};
use crate::metric::{DiffMode, MetricField};
use crate::spec_file::{load_spec, SpecError};
use crate::submersion::{holonomy_transport, horizontal_lift, SubmersionChart};
use crate::verify::{self, check_identities, circle_velocity, default_loop, run_suite, Config, Tolerances, VerifyError};
use crate::zoo::{self, Flags, BUILTIN};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fsub", version, about = "Curvature identities and horizontal lifts for pseudo-Finsler submersions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in fixtures.
    List(ListArgs),
    /// Run the identity suite on a fixture and write a JSON report.
    Verify(VerifyArgs),
    /// Integrate a geodesic of the total or base metric.
    Geodesic(GeodesicArgs),
    /// Lift a base geodesic horizontally and compare it with the total geodesic.
    Lift(LiftArgs),
    /// Transport a vertical segment around a base loop.
    Transport(TransportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Profile {
    Ad,
    Fd,
}

impl From<Profile> for DiffMode {
    fn from(p: Profile) -> DiffMode {
        match p {
            Profile::Ad => DiffMode::Ad,
            Profile::Fd => DiffMode::Fd,
        }
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Name of a built-in fixture.
    #[arg(long)]
    fixture: Option<String>,
    /// Path of a TOML spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Common {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value_t = Profile::Ad)]
    profile: Profile,
    /// Write the JSON output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-sample residuals (verify) or the arc (other commands) as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ListArgs {
    /// Also write the list as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated identity ids; all of them by default.
    #[arg(long, value_delimiter = ',')]
    identities: Option<Vec<String>>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct ArcArgs {
    /// Start point, comma-separated; the center of the chart box by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    time: f64,
    /// Number of output intervals.
    #[arg(long, default_value_t = 20)]
    steps: usize,
}

#[derive(Args, Debug)]
struct GeodesicArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    arc: ArcArgs,
    /// Initial velocity, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    v: Vec<f64>,
    /// Use the base metric; `--x` is then a base point.
    #[arg(long)]
    base: bool,
}

#[derive(Args, Debug)]
struct LiftArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    arc: ArcArgs,
    /// Initial base velocity, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    v: Vec<f64>,
}

#[derive(Args, Debug)]
struct TransportArgs {
    #[command(flatten)]
    common: Common,
    /// Start point of the loop and of the vertical segment.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// Radius of the coordinate circle in the first two base coordinates.
    #[arg(long)]
    radius: Option<f64>,
    /// Vertical segment in fiber coordinates; half the first fiber axis by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    direction: Option<Vec<f64>>,
    /// Chebyshev nodes along the segment.
    #[arg(long, default_value_t = 16)]
    nodes: usize,
    /// Output intervals of the lifted loop in the CSV.
    #[arg(long, default_value_t = 64)]
    steps: usize,
}

#[derive(Debug)]
enum CliError {
    Invalid(String),
    Io(String),
    Fail(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
            CliError::Fail(_) => EXIT_FAIL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Io(m) | CliError::Fail(m) => m,
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(format!("invalid spec: {e}")),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Geom(g) => CliError::Fail(g.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

struct Loaded {
    label: String,
    chart: SubmersionChart,
    flags: Flags,
}

fn load(src: &Source, profile: Profile) -> Result<Loaded, CliError> {
    let loaded = match (&src.fixture, &src.spec) {
        (Some(name), _) => {
            let f = zoo::builtin(name).ok_or_else(|| {
                CliError::Invalid(format!("unknown fixture `{name}`; built-ins are {}", BUILTIN.join(", ")))
            })?;
            Loaded {
                label: name.clone(),
                chart: f.chart,
                flags: f.flags,
            }
        }
        (None, Some(path)) => {
            let f = load_spec(path)?;
            Loaded {
                label: f.label,
                chart: f.chart,
                flags: f.flags,
            }
        }
        (None, None) => return Err(CliError::Invalid("one of --fixture or --spec is required".into())),
    };
    Ok(match profile {
        Profile::Ad => loaded,
        Profile::Fd => Loaded {
            chart: loaded.chart.sampled(),
            ..loaded
        },
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    match out {
        Some(p) => write_file(p, s.as_bytes()),
        None => stdout.write_all(s.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn emit_csv(path: Option<&Path>, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
    let Some(path) = path else { return Ok(()) };
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(path, &buf)
}

fn check_arc(a: &ArcArgs) -> Result<(), CliError> {
    if !(a.time.is_finite() && a.time > 0.0) {
        return Err(CliError::Invalid(format!("--time must be positive, got {}", a.time)));
    }
    if a.steps == 0 {
        return Err(CliError::Invalid("--steps must be at least 1".into()));
    }
    Ok(())
}

fn check_len(what: &str, v: &[f64], n: usize) -> Result<(), CliError> {
    if v.len() != n {
        return Err(CliError::Invalid(format!("{what} needs {n} components, got {}", v.len())));
    }
    if v.iter().any(|a| !a.is_finite()) {
        return Err(CliError::Invalid(format!("{what} has a non-finite component")));
    }
    Ok(())
}

fn start_point(m: &dyn MetricField, x: &Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
    let b = m.chart_box();
    let x = match x {
        Some(x) => x.clone(),
        None => b.lo.iter().zip(&b.hi).map(|(l, h)| 0.5 * (l + h)).collect(),
    };
    check_len("--x", &x, m.dim())?;
    if !m.in_domain(&x) {
        return Err(CliError::Invalid(format!("--x {x:?} is outside the chart domain")));
    }
    Ok(x)
}

#[derive(Serialize)]
struct FixtureEntry {
    label: &'static str,
    dims: (usize, usize, usize),
    flags: Flags,
    summary: &'static str,
}

fn cmd_list(a: &ListArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let entries: Vec<FixtureEntry> = BUILTIN
        .iter()
        .map(|l| {
            let f = zoo::builtin(l).expect("builtin");
            FixtureEntry {
                label: l,
                dims: f.chart.dims(),
                flags: f.flags,
                summary: f.summary,
            }
        })
        .collect();
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    for e in &entries {
        let fl = e.flags;
        let set: Vec<&str> = [
            (fl.riemannian, "riemannian"),
            (fl.totally_geodesic, "totally-geodesic"),
            (fl.horizontally_regular, "horizontally-regular"),
            (fl.flat, "flat"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        let flags = if set.is_empty() { "-".to_string() } else { set.join(",") };
        writeln!(stdout, "{:20} n={} m={}  {:50}  {}", e.label, e.dims.0, e.dims.1, flags, e.summary).map_err(io)?;
    }
    if let Some(p) = &a.out {
        let mut s = serde_json::to_string_pretty(&entries).expect("list serializes");
        s.push('\n');
        write_file(p, s.as_bytes())?;
    }
    Ok(EXIT_PASS)
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    if let Some(ids) = &a.identities {
        check_identities(ids)?;
    }
    // the fixture is prepared for the profile inside `run_suite`
    let f = load(&a.common.source, Profile::Ad)?;
    let cfg = Config {
        samples: a.samples as usize,
        seed: a.seed,
        mode: a.common.profile.into(),
        identities: a.identities.clone(),
        jobs: a.jobs,
        strict: true,
        csv: a.common.csv.is_some(),
    };
    let out = run_suite(&f.label, &f.chart, f.flags, &cfg)?;
    let json = out.report.to_json();
    match &a.common.out {
        Some(p) => write_file(p, json.as_bytes())?,
        None => stdout.write_all(json.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
    }
    emit_csv(a.common.csv.as_deref(), |w| verify::write_csv(&out.csv, w))?;
    if out.report.pass {
        Ok(EXIT_PASS)
    } else {
        let mut failed = out.report.failures();
        failed.extend(
            out.report
                .definition_invariants
                .iter()
                .filter(|g| g.status == verify::Status::Fail)
                .map(|g| g.id.as_str()),
        );
        let _ = writeln!(stderr, "failed: {}", failed.join(", "));
        Ok(EXIT_FAIL)
    }
}

#[derive(Serialize)]
struct GeodesicSummary {
    schema: &'static str,
    fixture: String,
    metric: &'static str,
    profile: DiffMode,
    x0: Vec<f64>,
    v0: Vec<f64>,
    time: f64,
    steps: usize,
    complete: bool,
    stopped: Option<String>,
    stats: OdeStats,
    energy_drift: f64,
    end_x: Vec<f64>,
    end_v: Vec<f64>,
}

fn cmd_geodesic(a: &GeodesicArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    check_arc(&a.arc)?;
    let f = load(&a.common.source, a.common.profile)?;
    let m = if a.base { f.chart.base.as_ref() } else { f.chart.total.as_ref() };
    let x = start_point(m, &a.arc.x)?;
    check_len("--v", &a.v, m.dim())?;
    if !m.admissible(&x, &a.v) {
        return Err(CliError::Invalid(format!("--v {:?} is not admissible at {x:?}", a.v)));
    }
    let mode = a.common.profile.into();
    let grid = uniform_grid(a.arc.time, a.arc.steps);
    let tr = geodesic(m, &x, &a.v, &grid, mode, &OdeOptions::for_mode(mode)).map_err(|e| CliError::Fail(e.to_string()))?;
    emit_csv(a.common.csv.as_deref(), |w| tr.write_csv(w))?;
    let summary = GeodesicSummary {
        schema: "fsub-geodesic/1",
        fixture: f.label,
        metric: if a.base { "base" } else { "total" },
        profile: mode,
        x0: x,
        v0: a.v.clone(),
        time: a.arc.time,
        steps: a.arc.steps,
        complete: tr.is_complete(),
        stopped: tr.stopped.clone(),
        stats: tr.stats,
        energy_drift: tr.energy_drift(m),
        end_x: tr.x.last().cloned().unwrap_or_default(),
        end_v: tr.v.last().cloned().unwrap_or_default(),
    };
    emit_json(&summary, a.common.out.as_deref(), stdout)?;
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct LiftSummary {
    schema: &'static str,
    fixture: String,
    profile: DiffMode,
    x0: Vec<f64>,
    base_v0: Vec<f64>,
    lifted_v0: Vec<f64>,
    time: f64,
    steps: usize,
    stats: OdeStats,
    sup_deviation: Option<f64>,
    deviation_tolerance: f64,
    horizontality: Option<f64>,
    horizontality_tolerance: f64,
    note: Option<String>,
    pass: bool,
}

fn cmd_lift(a: &LiftArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    check_arc(&a.arc)?;
    let f = load(&a.common.source, a.common.profile)?;
    let c = &f.chart;
    let x = start_point(c.total.as_ref(), &a.arc.x)?;
    check_len("--v", &a.v, c.dims().1)?;
    let mode: DiffMode = a.common.profile.into();
    let h = c
        .lift_vector(&x, &a.v, mode)
        .map_err(|e| CliError::Invalid(format!("--v {:?} has no horizontal lift at {x:?}: {e}", a.v)))?;
    let opts = OdeOptions::for_mode(mode);
    let grid = uniform_grid(a.arc.time, a.arc.steps);
    let lc = lift_base_geodesic(c, &x, &a.v, &grid, mode, &opts).map_err(|e| CliError::Fail(e.to_string()))?;
    emit_csv(a.common.csv.as_deref(), |w| lc.lifted.write_csv(w))?;
    let mut note = lc.lifted.stopped.clone();
    let mut keep = |r: Result<f64, GeomError>| match r {
        Ok(d) => Some(d),
        Err(e) => {
            note.get_or_insert(e.to_string());
            None
        }
    };
    let dev = keep(lift_deviation(c, &x, &a.v, a.arc.time, a.arc.steps, mode, &opts));
    let hor = keep(horizontality_persistence(c, &x, &a.v, a.arc.time, a.arc.steps, mode, &opts));
    let tol = Tolerances::for_mode(mode);
    let pass = dev.is_some_and(|d| d <= tol.trajectory) && hor.is_some_and(|d| d <= tol.standard);
    let summary = LiftSummary {
        schema: "fsub-lift/1",
        fixture: f.label,
        profile: mode,
        x0: x,
        base_v0: a.v.clone(),
        lifted_v0: h,
        time: a.arc.time,
        steps: a.arc.steps,
        stats: lc.lifted.stats,
        sup_deviation: dev,
        deviation_tolerance: tol.trajectory,
        horizontality: hor,
        horizontality_tolerance: tol.standard,
        note,
        pass,
    };
    emit_json(&summary, a.common.out.as_deref(), stdout)?;
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct TransportSummary {
    schema: &'static str,
    fixture: String,
    profile: DiffMode,
    status: verify::Status,
    note: Option<String>,
    x0: Vec<f64>,
    radius: f64,
    segment: Vec<f64>,
    length_before: Option<f64>,
    length_after: Option<f64>,
    length_error: Option<f64>,
    tolerance: f64,
    /// Fiber length between the start point and its image; the rotation
    /// angle when fibers are unit circles.
    holonomy_angle: Option<f64>,
    start_image: Option<Vec<f64>>,
}

fn cmd_transport(a: &TransportArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    if a.nodes < 2 || a.steps == 0 {
        return Err(CliError::Invalid("--nodes must be at least 2 and --steps at least 1".into()));
    }
    let f = load(&a.common.source, a.common.profile)?;
    let c = &f.chart;
    let (_, m, r) = c.dims();
    if m < 2 || r == 0 {
        return Err(CliError::Invalid(format!("transport needs a base of dimension ≥ 2 and a fiber, got m = {m}, r = {r}")));
    }
    let (center, rho0) = default_loop(c);
    let x = start_point(c.total.as_ref(), &Some(a.x.clone().unwrap_or(center)))?;
    let rho = a.radius.unwrap_or(rho0);
    if !(rho.is_finite() && rho > 0.0) {
        return Err(CliError::Invalid(format!("--radius must be positive, got {rho}")));
    }
    let bb = c.base_box();
    let xt = c.project(&x);
    if xt[0] - 2.0 * rho < bb.lo[0] || xt[1] - rho < bb.lo[1] || xt[1] + rho > bb.hi[1] {
        return Err(CliError::Invalid(format!("the loop of radius {rho} from {xt:?} leaves the base chart")));
    }
    let u = a.direction.clone().unwrap_or_else(|| {
        let mut u = vec![0.0; r];
        u[0] = 0.5;
        u
    });
    check_len("--direction", &u, r)?;
    let k = &c.vertical;
    let d: Vec<f64> = (0..k.nrows()).map(|i| (0..r).map(|j| k[(i, j)] * u[j]).sum()).collect();
    let mode: DiffMode = a.common.profile.into();
    let tol = Tolerances::for_mode(mode);
    let mut summary = TransportSummary {
        schema: "fsub-transport/1",
        fixture: f.label.clone(),
        profile: mode,
        status: verify::Status::Skipped,
        note: None,
        x0: x.clone(),
        radius: rho,
        segment: d.clone(),
        length_before: None,
        length_after: None,
        length_error: None,
        tolerance: tol.standard,
        holonomy_angle: None,
        start_image: None,
    };
    if !(f.flags.totally_geodesic && f.flags.horizontally_regular) {
        summary.note = Some("fixture is not flagged totally geodesic and horizontally regular".into());
        emit_json(&summary, a.common.out.as_deref(), stdout)?;
        return Ok(EXIT_PASS);
    }
    let opts = OdeOptions::for_mode(mode);
    let arc = horizontal_lift(c, circle_velocity(m, rho), &x, &uniform_grid(1.0, a.steps), mode, &opts)
        .map_err(|e| CliError::Fail(e.to_string()))?;
    emit_csv(a.common.csv.as_deref(), |w| arc.write_csv(w))?;
    let code = match holonomy_transport(c, circle_velocity(m, rho), &x, &d, a.nodes, mode, &opts) {
        Ok(t) => {
            let err = (t.length_after - t.length_before).abs() / (1.0 + t.length_before);
            let pass = err <= tol.standard;
            summary.status = if pass { verify::Status::Pass } else { verify::Status::Fail };
            summary.length_before = Some(t.length_before);
            summary.length_after = Some(t.length_after);
            summary.length_error = Some(err);
            summary.holonomy_angle = Some(t.displacement);
            summary.start_image = Some(t.start_image);
            if pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            summary.status = verify::Status::Fail;
            summary.note = Some(e.to_string());
            EXIT_FAIL
        }
    };
    emit_json(&summary, a.common.out.as_deref(), stdout)?;
    Ok(code)
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_INVALID
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_PASS
            };
        }
    };
    let res = match &cli.command {
        Command::List(a) => cmd_list(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
        Command::Geodesic(a) => cmd_geodesic(a, stdout),
        Command::Lift(a) => cmd_lift(a, stdout),
        Command::Transport(a) => cmd_transport(a, stdout),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "fsub: {}", e.message());
            e.code()
        }
    }
}
