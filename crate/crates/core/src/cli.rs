//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 pipeline error (its name
//! is printed on standard error), 3 verification failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::aux::aux_inclusion_check;
use crate::certificate::{replay, BoundCertificate, Pipeline, ReplayOptions};
use crate::convex::{acorn_check, convex_bound, ACORN_SAMPLES};
use crate::domain::ConvexDomainSpec;
use crate::error::SqueezeError;
use crate::frame::build_frame;
use crate::image::{chain_selfcheck, RadiusOptions};
use crate::maps::MapAtom;
use crate::point::CPoint;
use crate::strict::{limit_scan, strict_bound, Approach};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PIPELINE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SQUEEZE_THREADS";

pub const BOUND_HEADER: &str = "q,bound,r_in,r_out,delta_analytic,base_residual";
pub const SCAN_HEADER: &str = "t,lambda_q,r_in,r_out,bound";

/// Certified lower bounds for the squeezing function of convex domains.
///
/// Points are written as semicolon-separated coordinates, each `re,im`,
/// for example "0.5,0;0,0.25". The thread count is capped by SQUEEZE_THREADS.
#[derive(Debug, Parser)]
#[command(name = "squeeze", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame-based bound at interior points of a bounded convex domain.
    BoundConvex(BoundArgs),
    /// Boundary-adapted bound near a strongly convex smooth boundary.
    BoundStrict(BoundArgs),
    /// Strict bounds along a sequence of points approaching a boundary point.
    LimitScan(ScanArgs),
    /// Print the extremal frame at a point as JSON.
    Frame(FrameArgs),
    /// Replay a certificate, or run the auxiliary-domain sandwich check.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Sampling {
    /// Sphere directions for the inner radius [default: 4096 for n ≤ 2, 65536 otherwise]
    #[arg(long)]
    pub directions: Option<usize>,
    /// Boundary samples for outer radii and envelopes
    #[arg(long, default_value_t = 100_000)]
    pub boundary_samples: usize,
    /// Refinement tolerance of the inner radius
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seed of every sampler
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Domain file (JSON)
    #[arg(long)]
    pub domain: PathBuf,
    /// Base point; repeat for several rows
    #[arg(long = "point", required = true)]
    pub points: Vec<String>,
    /// Write the certificate here (single point only)
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub sampling: Sampling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Normal,
    Tangential,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Boundary point p approached by q(t)
    #[arg(long)]
    pub boundary_point: String,
    #[arg(long, value_enum, default_value_t = Mode::Normal)]
    pub mode: Mode,
    /// Tangential exponent α ∈ (1/2, 1)
    #[arg(long, default_value_t = 0.6)]
    pub alpha: f64,
    /// Real unit tangent τ at p (tangential mode)
    #[arg(long)]
    pub tangent: Option<String>,
    /// Comma-separated positive values of t
    #[arg(long, allow_hyphen_values = true)]
    pub t_grid: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub sampling: Sampling,
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long)]
    pub point: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Certificate to replay
    #[arg(long, conflicts_with_all = ["domain", "point", "delta", "rho"])]
    pub certificate: Option<PathBuf>,
    /// Domain for the sandwich check
    #[arg(long, requires_all = ["point", "delta", "rho"])]
    pub domain: Option<PathBuf>,
    #[arg(long)]
    pub point: Option<String>,
    /// δ ∈ (0, 1/2)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Radius of the neighbourhood of the contact point
    #[arg(long)]
    pub rho: Option<f64>,
    /// Samples per check
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

enum Failure {
    Config(String),
    Pipeline(SqueezeError),
    Verify(String),
}

impl From<SqueezeError> for Failure {
    fn from(e: SqueezeError) -> Self {
        Failure::Pipeline(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let result = thread_pool().and_then(|pool| {
        let (result, buf) = pool.install(|| {
            let mut buf = Vec::new();
            (dispatch(&cli.command, &mut buf), buf)
        });
        out.write_all(&buf)
            .map_err(|e| Failure::Config(format!("standard output: {e}")))
            .and(result)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "configuration error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Pipeline(e)) => {
            let _ = writeln!(err, "{}: {e}", e.name());
            EXIT_PIPELINE
        }
        Err(Failure::Verify(msg)) => {
            let _ = writeln!(err, "verification failed: {msg}");
            EXIT_VERIFY
        }
    }
}

fn thread_pool() -> std::result::Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let k: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|k| *k > 0)
            .ok_or_else(|| Failure::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(k);
    }
    builder.build().map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::BoundConvex(a) => cmd_bound(a, Pipeline::Convex, out),
        Command::BoundStrict(a) => cmd_bound(a, Pipeline::Strict, out),
        Command::LimitScan(a) => cmd_limit_scan(a, out),
        Command::Frame(a) => cmd_frame(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    }
}

fn load_domain(path: &Path) -> std::result::Result<ConvexDomainSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    ConvexDomainSpec::from_json(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn parse_point(text: &str, n: usize) -> std::result::Result<CPoint, Failure> {
    let p: CPoint = text.parse().map_err(|e: SqueezeError| Failure::Config(e.to_string()))?;
    if p.dim() != n {
        return Err(Failure::Config(format!("point `{text}` has dimension {}, domain has {n}", p.dim())));
    }
    Ok(p)
}

fn radius_options(s: &Sampling) -> std::result::Result<RadiusOptions, Failure> {
    if s.directions == Some(0) || s.boundary_samples == 0 {
        return Err(Failure::Config("sample counts must be positive".into()));
    }
    if !(s.tol > 0.0 && s.tol < 1.0) {
        return Err(Failure::Config("tolerance must lie in (0, 1)".into()));
    }
    Ok(RadiusOptions {
        directions: s.directions,
        boundary_samples: s.boundary_samples,
        tol: s.tol,
        seed: s.seed,
        refine: true,
    })
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Config(format!("standard output: {e}"))),
    }
}

/// CSV row for one certificate; the point column is quoted.
pub fn bound_row(cert: &BoundCertificate) -> String {
    let delta = cert
        .diagnostics
        .get("delta_analytic")
        .map(|d| d.to_string())
        .unwrap_or_default();
    let residual = cert.chain.apply(&cert.point).map(|w| w.norm()).unwrap_or(f64::INFINITY);
    format!(
        "\"{}\",{},{},{},{},{}",
        cert.point, cert.bound, cert.r_in, cert.r_out, delta, residual
    )
}

fn cmd_bound(a: &BoundArgs, pipeline: Pipeline, out: &mut dyn Write) -> Outcome {
    let domain = load_domain(&a.domain)?;
    let opts = radius_options(&a.sampling)?;
    if a.certificate.is_some() && a.points.len() != 1 {
        return Err(Failure::Config("--certificate needs exactly one --point".into()));
    }
    let points = a
        .points
        .iter()
        .map(|p| parse_point(p, domain.dim()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut csv = format!("{BOUND_HEADER}\n");
    let mut last = None;
    for q in &points {
        let cert = match pipeline {
            Pipeline::Convex => convex_bound(&domain, q, &opts)?,
            Pipeline::Strict => strict_bound(&domain, q, &opts)?,
        };
        csv.push_str(&bound_row(&cert));
        csv.push('\n');
        last = Some(cert);
    }
    if let (Some(path), Some(cert)) = (&a.certificate, &last) {
        emit(Some(path), &cert.to_json(), out)?;
    }
    emit(a.output.as_deref(), &csv, out)
}

/// Parses a comma-separated list of positive reals; empty entries are ignored.
pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let grid = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|t| t.is_finite() && *t > 0.0)
                .ok_or_else(|| format!("grid entry `{s}` is not a positive number"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if grid.is_empty() {
        return Err("t grid is empty".into());
    }
    Ok(grid)
}

fn cmd_limit_scan(a: &ScanArgs, out: &mut dyn Write) -> Outcome {
    let domain = load_domain(&a.domain)?;
    let opts = radius_options(&a.sampling)?;
    let p = parse_point(&a.boundary_point, domain.dim())?;
    let grid = parse_grid(&a.t_grid).map_err(Failure::Config)?;
    let approach = match a.mode {
        Mode::Normal => Approach::Normal,
        Mode::Tangential => {
            if !(a.alpha > 0.5 && a.alpha < 1.0) {
                return Err(Failure::Config("--alpha must lie in (1/2, 1)".into()));
            }
            let tangent = a
                .tangent
                .as_deref()
                .ok_or_else(|| Failure::Config("tangential mode needs --tangent".into()))?;
            Approach::Tangential {
                alpha: a.alpha,
                tangent: parse_point(tangent, domain.dim())?,
            }
        }
    };
    let rows = limit_scan(&domain, &p, &approach, &grid, &opts)?;
    let mut csv = format!("{SCAN_HEADER}\n");
    for r in rows {
        csv.push_str(&format!("{},{},{},{},{}\n", r.t, r.lambda_q, r.r_in, r.r_out, r.bound));
    }
    emit(a.output.as_deref(), &csv, out)
}

fn cmd_frame(a: &FrameArgs, out: &mut dyn Write) -> Outcome {
    let domain = load_domain(&a.domain)?;
    let q = parse_point(&a.point, domain.dim())?;
    let frame = build_frame(&domain, &q)?;
    let text = serde_json::to_string_pretty(&frame).expect("serializable");
    emit(None, &format!("{text}\n"), out)
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    replay: crate::certificate::ReplayReport,
    selfcheck: crate::image::SelfCheckReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    acorn: Option<crate::convex::AcornReport>,
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    if a.samples == 0 {
        return Err(Failure::Config("--samples must be positive".into()));
    }
    if let Some(path) = &a.certificate {
        let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let cert = BoundCertificate::from_json(&text).map_err(|e| Failure::Config(e.to_string()))?;
        let opts = ReplayOptions {
            sphere_samples: a.samples,
            boundary_samples: a.samples,
            seed: a.seed,
        };
        let replay = replay(&cert, &opts);
        let selfcheck = chain_selfcheck(&cert.chain, &cert.domain, 100, a.seed);
        // the stretch map is the first atom of a frame-based chain
        let acorn = match (cert.pipeline, cert.chain.atoms.first()) {
            (Pipeline::Convex, Some(MapAtom::Affine(l))) => {
                Some(acorn_check(&cert.domain, l, ACORN_SAMPLES, a.seed))
            }
            _ => None,
        };
        let passed = replay.passed() && selfcheck.passed && acorn.as_ref().map_or(true, |r| r.passed);
        let report = VerifyReport {
            passed,
            replay,
            selfcheck,
            acorn,
        };
        emit(None, &format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable")), out)?;
        return if passed {
            Ok(())
        } else {
            let failed: Vec<String> = report.replay.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
            Err(Failure::Verify(format!("certificate {} did not replay ({})", path.display(), failed.join(", "))))
        };
    }

    let (Some(dpath), Some(point), Some(delta), Some(rho)) = (&a.domain, &a.point, a.delta, a.rho) else {
        return Err(Failure::Config("verify needs --certificate, or --domain, --point, --delta and --rho".into()));
    };
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Failure::Config("--delta must lie in (0, 1/2)".into()));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Failure::Config("--rho must be positive".into()));
    }
    let domain = load_domain(dpath)?;
    let q = parse_point(point, domain.dim())?;
    match aux_inclusion_check(&domain, &q, delta, rho, a.samples, a.seed) {
        Ok(report) => emit(None, &format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable")), out),
        Err(e @ SqueezeError::InclusionViolated { .. }) => Err(Failure::Verify(e.to_string())),
        Err(e) => Err(Failure::Pipeline(e)),
    }
}
