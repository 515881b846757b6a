//! Command implementations for the `envma` binary.
//!
//! Exit codes: 0 success, 1 a verified property failed, 2 parse, config or
//! I/O error, 3 dimension or θ validation failure, 4 the solver hit its
//! iteration cap (outputs are still written), 5 any other runtime failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::envelope::{
    conjugate_intercept, envelope_eval, oracle_resolution, verify_lemma, verify_oracle, ThetaBox,
};
use crate::error::Error;
use crate::matrix::{admissible_theta, in_theta_box, operator_f, projected_spectrum};
use crate::matrix_io::{fmt_f64, read_matrix_file};
use crate::solver::{
    convergence_study, convergence_to_csv, read_problem, PreparedProblem, ProblemRun, SolveStatus,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_MAX_ITER: i32 = 4;
pub const EXIT_RUNTIME: i32 = 5;

pub const THREADS_ENV: &str = "ENVMA_THREADS";

/// Samples of the oracle comparison run by `verify` (capped by `--samples`).
pub const VERIFY_ORACLE_SAMPLES: usize = 200;

const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "envma",
    version,
    about = "Concave envelope of the complex Monge-Ampère operator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = true)]
pub struct ThetaArgs {
    /// Box parameter; values above 1 are replaced by their reciprocal.
    #[arg(long, conflicts_with_all = ["hessian_lower", "hessian_upper"])]
    pub theta: Option<f64>,
    /// Lower Hessian bound λ; θ = min(λ, 1/Λ).
    #[arg(long, requires = "hessian_upper")]
    pub hessian_lower: Option<f64>,
    /// Upper Hessian bound Λ.
    #[arg(long, requires = "hessian_lower")]
    pub hessian_upper: Option<f64>,
}

impl ThetaArgs {
    fn resolve(&self) -> Result<f64, Error> {
        match (self.theta, self.hessian_lower, self.hessian_upper) {
            (Some(t), _, _) => Ok(t),
            (None, Some(l), Some(u)) => admissible_theta(l, u),
            _ => Err(Error::InvalidArgument(
                "theta or hessian bounds required".into(),
            )),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the envelope of a matrix read from a file.
    Eval {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        theta: ThetaArgs,
    },
    /// Evaluate the intercept g(p) for a slope spectrum.
    Conjugate {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        p: Vec<f64>,
        #[command(flatten)]
        theta: ThetaArgs,
    },
    /// Randomized check of concavity, agreement, ellipticity and invariance.
    Verify {
        #[command(flatten)]
        theta: ThetaArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve a Dirichlet problem described by a config file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a problem at several resolutions and report observed orders.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit code for an error raised outside the solver loop.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::MissingKey(_) | Error::Io { .. } => EXIT_INPUT,
        Error::InvalidDimension(_)
        | Error::EntryCount { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFinite { .. }
        | Error::NotSymmetric(_)
        | Error::NotHermitian(_)
        | Error::NotJCommuting(_)
        | Error::InvalidArgument(_)
        | Error::ResolutionTooCoarse(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

struct Failure {
    code: i32,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            code: exit_code(&error),
            error,
        }
    }
}

/// Anything wrong with a problem file, including out-of-range values, is a
/// config error.
fn config_error(error: Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error,
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error: Error::io(path, e),
    }
}

type CmdResult = Result<i32, Failure>;

fn theta_box(theta: f64, n: usize, err: &mut dyn Write) -> Result<ThetaBox, Failure> {
    let b = ThetaBox::new(theta, n)?;
    if b.was_normalized() {
        let _ = writeln!(
            err,
            "note: theta = {theta} exceeds 1; using its reciprocal {}",
            fmt_f64(b.theta())
        );
    }
    Ok(b)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_f64(v))
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_eval(
    matrix: &Path,
    theta: &ThetaArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let m = read_matrix_file(matrix)?.into_symmetric();
    let b = theta_box(theta.resolve()?, m.n(), err)?;
    let cert = envelope_eval(&m, &b)?;
    let f = match operator_f(&m) {
        Ok(v) => fmt_f64(v),
        Err(Error::NotPositiveDefinite(_)) => "undefined".into(),
        Err(e) => return Err(e.into()),
    };
    let spectrum = projected_spectrum(&m)?;
    let _ = writeln!(out, "theta = {}", fmt_f64(b.theta()));
    let _ = writeln!(out, "n = {}", b.n());
    let _ = writeln!(out, "envelope = {}", fmt_f64(cert.value));
    let _ = writeln!(out, "operator_f = {f}");
    let _ = writeln!(out, "hermitian_eigenvalues = {}", join(&spectrum.values));
    let _ = writeln!(out, "slope_eigenvalues = {}", join(&cert.slope_eigen));
    let _ = writeln!(out, "intercept = {}", fmt_f64(cert.intercept));
    let _ = writeln!(
        out,
        "in_theta_box = {}",
        in_theta_box(&m, b.theta(), MEMBERSHIP_TOL)
    );
    Ok(EXIT_OK)
}

fn cmd_conjugate(
    p: &[f64],
    theta: &ThetaArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let b = theta_box(theta.resolve()?, p.len(), err)?;
    let c = conjugate_intercept(p, &b)?;
    let _ = writeln!(out, "theta = {}", fmt_f64(b.theta()));
    let _ = writeln!(out, "n = {}", b.n());
    let _ = writeln!(out, "slopes = {}", join(p));
    let _ = writeln!(out, "intercept = {}", fmt_f64(c.value));
    let _ = writeln!(out, "maximizer = {}", join(&c.maximizer));
    Ok(EXIT_OK)
}

fn cmd_verify(
    theta: &ThetaArgs,
    n: usize,
    samples: usize,
    seed: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    if samples == 0 {
        return Err(Error::InvalidArgument("--samples must be at least 1".into()).into());
    }
    let b = theta_box(theta.resolve()?, n, err)?;
    let report = verify_lemma(&b, samples, seed)?;
    let _ = write!(out, "{report}");
    let oracle = if n <= 2 {
        let o = verify_oracle(
            &b,
            samples.min(VERIFY_ORACLE_SAMPLES),
            seed,
            oracle_resolution(n),
        )?;
        let _ = write!(out, "{o}");
        Some(o)
    } else {
        let _ = writeln!(out, "oracle_equivalence: skipped for n > 2");
        None
    };

    let failure = report
        .first_failure()
        .map(|(name, c)| (name, c.clone()))
        .or_else(|| {
            oracle
                .as_ref()
                .and_then(|o| o.first_failure.clone())
                .map(|c| ("oracle_equivalence", c))
        });
    match failure {
        None => {
            let _ = writeln!(out, "result = pass");
            Ok(EXIT_OK)
        }
        Some((name, c)) => {
            let _ = writeln!(out, "result = fail");
            let _ = writeln!(out, "# first counterexample: {name}");
            let _ = write!(out, "{}", c.dump());
            Ok(EXIT_PROPERTY_FAILURE)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn cmd_solve(config: &Path, dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let problem = read_problem(config).map_err(config_error)?;
    let prepared = PreparedProblem::new(&problem).map_err(config_error)?;
    let run = ProblemRun::solve(&prepared, &problem)?;
    run.write(dir).map_err(config_error)?;
    let _ = write!(out, "{}", run.report_text());
    let _ = writeln!(
        err,
        "wall_time_seconds = {:.3}",
        run.solution.report.wall_time.as_secs_f64()
    );
    Ok(match run.solution.report.status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::MaxIterExceeded => EXIT_MAX_ITER,
    })
}

fn cmd_convergence(config: &Path, dir: &Path, out: &mut dyn Write) -> CmdResult {
    let problem = read_problem(config).map_err(config_error)?;
    problem.grid().map_err(config_error)?;
    problem.theta_box().map_err(config_error)?;
    if problem.exact.is_none() {
        return Err(config_error(Error::MissingKey("exact".into())));
    }
    let rows = convergence_study(&problem, &problem.refinements)?;
    let csv = convergence_to_csv(&rows);
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    write_file(&dir.join("convergence.csv"), &csv)?;
    let _ = write!(out, "{csv}");
    let capped = rows
        .iter()
        .any(|r| r.status == SolveStatus::MaxIterExceeded);
    Ok(if capped { EXIT_MAX_ITER } else { EXIT_OK })
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Eval { matrix, theta } => cmd_eval(matrix, theta, out, err),
        Command::Conjugate { p, theta } => cmd_conjugate(p, theta, out, err),
        Command::Verify {
            theta,
            n,
            samples,
            seed,
        } => cmd_verify(theta, *n, *samples, *seed, out, err),
        Command::Solve { config, out: dir } => cmd_solve(config, dir, out, err),
        Command::Convergence { config, out: dir } => cmd_convergence(config, dir, out),
    }
}

/// Worker count from `ENVMA_THREADS`; `None` when unset.
pub fn threads_from_env(value: Option<OsString>) -> Result<Option<usize>, String> {
    let Some(raw) = value else { return Ok(None) };
    let text = raw.to_string_lossy();
    match text.trim().parse::<usize>() {
        Ok(k) if k >= 1 => Ok(Some(k)),
        _ => Err(format!(
            "{THREADS_ENV} must be a positive integer, got `{text}`"
        )),
    }
}

/// Parses `args` (including the program name), runs the command on a pool
/// of `threads` workers (the global pool when `None`) and returns the exit
/// code.
pub fn run<I, T>(args: I, threads: Option<usize>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not errors
            if e.exit_code() == 0 {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_INPUT;
        }
    };
    let result = match threads {
        None => dispatch(&cli, out, err),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => {
                // the writers need not be Send, so buffer inside the pool
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| dispatch(&cli, &mut o, &mut e));
                let _ = out.write_all(&o);
                let _ = err.write_all(&e);
                r
            }
            Err(e) => Err(Failure {
                code: EXIT_RUNTIME,
                error: Error::InvalidArgument(format!("cannot start {k} workers: {e}")),
            }),
        },
    };
    let _ = out.flush();
    match result {
        Ok(code) => code,
        Err(Failure { code, error }) => {
            let _ = writeln!(err, "error: {error}");
            code
        }
    }
}

/// Entry point of the binary: real arguments, stdout/stderr and
/// `ENVMA_THREADS`.
pub fn main_entry() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let threads = match threads_from_env(std::env::var_os(THREADS_ENV)) {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INPUT;
        }
    };
    run(std::env::args_os(), threads, &mut out, &mut err)
}
