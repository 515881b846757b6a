//! C ABI over `envma`.
//!
//! Objects are opaque handles created by `*_new` functions and released by
//! the matching `*_free`. Every function returns an [`EnvmaStatus`]; on
//! failure the message is kept per thread and can be copied out with
//! [`envma_last_error`]. Panics are caught at the boundary and reported as
//! `ENVMA_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use envma::envelope::{conjugate_intercept, envelope_eval, EnvelopeCertificate, ThetaBox};
use envma::matrix::{operator_f, SymmetricMatrix};
use envma::matrix_io::read_matrix_file;
use envma::solver::{read_problem, PreparedProblem, ProblemRun, SolveStatus};
use envma::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvmaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidDimension = 2,
    NotSymmetric = 3,
    NotPositiveDefinite = 4,
    NoConvergence = 5,
    InvalidArgument = 6,
    Io = 7,
    Parse = 8,
    MaxIterExceeded = 9,
    LinearSolveFailure = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Box `E_θ` for a fixed complex dimension.
pub struct EnvmaThetaBox(ThetaBox);

/// Real symmetric `2n × 2n` matrix.
pub struct EnvmaMatrix(SymmetricMatrix);

/// Envelope value with its optimal slope and intercept.
pub struct EnvmaCertificate(EnvelopeCertificate);

/// Summary of a solve started from a problem file.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EnvmaSolveSummary {
    pub iterations: usize,
    pub final_residual: f64,
    /// NaN when the problem has no exact solution.
    pub max_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(err: &Error) -> EnvmaStatus {
    match err {
        Error::InvalidDimension(_) | Error::EntryCount { .. } | Error::DimensionMismatch { .. } => {
            EnvmaStatus::InvalidDimension
        }
        Error::NotSymmetric(_) | Error::NotHermitian(_) | Error::NotJCommuting(_) => {
            EnvmaStatus::NotSymmetric
        }
        Error::NotPositiveDefinite(_) | Error::NotPsd(_) => EnvmaStatus::NotPositiveDefinite,
        Error::NoConvergence { .. } => EnvmaStatus::NoConvergence,
        Error::Io { .. } => EnvmaStatus::Io,
        Error::Parse(_) | Error::MissingKey(_) => EnvmaStatus::Parse,
        Error::LinearSolveFailure(_) => EnvmaStatus::LinearSolveFailure,
        _ => EnvmaStatus::InvalidArgument,
    }
}

struct Fail(EnvmaStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(EnvmaStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<EnvmaStatus, Fail>) -> EnvmaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => {
            set_error(String::new());
            status
        }
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EnvmaStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char, what: &str) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Fail(EnvmaStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize) -> Result<EnvmaStatus, Fail> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < values.len() {
        return Err(Fail(
            EnvmaStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(EnvmaStatus::Ok)
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn envma_status_message(status: EnvmaStatus) -> *const c_char {
    let s: &'static CStr = match status {
        EnvmaStatus::Ok => c"ok",
        EnvmaStatus::NullPointer => c"null pointer argument",
        EnvmaStatus::InvalidDimension => c"invalid dimension",
        EnvmaStatus::NotSymmetric => c"matrix is not symmetric",
        EnvmaStatus::NotPositiveDefinite => c"matrix is not positive definite",
        EnvmaStatus::NoConvergence => c"iteration did not converge",
        EnvmaStatus::InvalidArgument => c"invalid argument",
        EnvmaStatus::Io => c"i/o error",
        EnvmaStatus::Parse => c"parse error",
        EnvmaStatus::MaxIterExceeded => c"solver reached its iteration cap",
        EnvmaStatus::LinearSolveFailure => c"linear solve failed",
        EnvmaStatus::BufferTooSmall => c"output buffer too small",
        EnvmaStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes. Returns the full message length without the
/// terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn envma_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Creates the box for `theta` and complex dimension `n`. `theta > 1` is
/// replaced by `1 / theta`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn envma_theta_box_new(
    theta: f64,
    n: usize,
    out: *mut *mut EnvmaThetaBox,
) -> EnvmaStatus {
    guard(|| {
        let b = ThetaBox::new(theta, n)?;
        store(out, Box::into_raw(Box::new(EnvmaThetaBox(b))), "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// # Safety
/// `b` must be null or a handle from [`envma_theta_box_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn envma_theta_box_free(b: *mut EnvmaThetaBox) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// # Safety
/// `b` must be a live box handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn envma_theta_box_theta(
    b: *const EnvmaThetaBox,
    out: *mut f64,
) -> EnvmaStatus {
    guard(|| {
        let b = deref(b, "box")?;
        store(out, b.0.theta(), "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// Creates a matrix from `dim * dim` row-major entries. Entries are
/// symmetrized after a symmetry check.
///
/// # Safety
/// `entries` must point to `dim * dim` readable values and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn envma_matrix_new(
    dim: usize,
    entries: *const f64,
    out: *mut *mut EnvmaMatrix,
) -> EnvmaStatus {
    guard(|| {
        if entries.is_null() {
            return Err(null("entries"));
        }
        let count = dim.checked_mul(dim).ok_or_else(|| {
            Fail(
                EnvmaStatus::InvalidDimension,
                format!("dimension {dim} overflows"),
            )
        })?;
        if count == 0 || dim > envma::matrix::MAX_DIM {
            return Err(Error::InvalidDimension(dim).into());
        }
        let values = std::slice::from_raw_parts(entries, count).to_vec();
        let m = SymmetricMatrix::from_row_major(dim, values)?;
        store(out, Box::into_raw(Box::new(EnvmaMatrix(m))), "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// Reads a matrix file (`sym <2n>` or `herm <n>` header).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn envma_matrix_read(
    path: *const c_char,
    out: *mut *mut EnvmaMatrix,
) -> EnvmaStatus {
    guard(|| {
        let m = read_matrix_file(path_arg(path, "path")?)?.into_symmetric();
        store(out, Box::into_raw(Box::new(EnvmaMatrix(m))), "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn envma_matrix_free(m: *mut EnvmaMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn envma_matrix_dim(m: *const EnvmaMatrix, out: *mut usize) -> EnvmaStatus {
    guard(|| {
        store(out, deref(m, "matrix")?.0.dim(), "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// `F(M)`, the geometric mean of the Hermitian eigenvalues of `proj(M)`.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn envma_operator_f(m: *const EnvmaMatrix, out: *mut f64) -> EnvmaStatus {
    guard(|| {
        let v = operator_f(&deref(m, "matrix")?.0)?;
        store(out, v, "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// Evaluates the envelope and returns its certificate.
///
/// # Safety
/// `m` and `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn envma_envelope_eval(
    m: *const EnvmaMatrix,
    b: *const EnvmaThetaBox,
    out: *mut *mut EnvmaCertificate,
) -> EnvmaStatus {
    guard(|| {
        let cert = envelope_eval(&deref(m, "matrix")?.0, &deref(b, "box")?.0)?;
        store(out, Box::into_raw(Box::new(EnvmaCertificate(cert))), "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// # Safety
/// `c` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn envma_certificate_free(c: *mut EnvmaCertificate) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a live certificate handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn envma_certificate_value(
    c: *const EnvmaCertificate,
    out: *mut f64,
) -> EnvmaStatus {
    guard(|| {
        store(out, deref(c, "certificate")?.0.value, "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// # Safety
/// `c` must be a live certificate handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn envma_certificate_intercept(
    c: *const EnvmaCertificate,
    out: *mut f64,
) -> EnvmaStatus {
    guard(|| {
        store(out, deref(c, "certificate")?.0.intercept, "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// Copies the `n` slope eigenvalues into `buf`.
///
/// # Safety
/// `c` must be a live certificate handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn envma_certificate_slope_eigenvalues(
    c: *const EnvmaCertificate,
    buf: *mut f64,
    len: usize,
) -> EnvmaStatus {
    guard(|| copy_out(&deref(c, "certificate")?.0.slope_eigen, buf, len))
}

/// Copies the `2n × 2n` slope matrix, row-major, into `buf`.
///
/// # Safety
/// `c` must be a live certificate handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn envma_certificate_slope_matrix(
    c: *const EnvmaCertificate,
    buf: *mut f64,
    len: usize,
) -> EnvmaStatus {
    guard(|| copy_out(deref(c, "certificate")?.0.slope_matrix.as_slice(), buf, len))
}

/// Intercept `g(p)` for the `n` slope eigenvalues in `p`.
///
/// # Safety
/// `p` must point to `n` readable values, `b` must be a live handle and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn envma_conjugate_intercept(
    p: *const f64,
    n: usize,
    b: *const EnvmaThetaBox,
    out: *mut f64,
) -> EnvmaStatus {
    guard(|| {
        if p.is_null() {
            return Err(null("p"));
        }
        let slopes = std::slice::from_raw_parts(p, n);
        let v = conjugate_intercept(slopes, &deref(b, "box")?.0)?;
        store(out, v.value, "out")?;
        Ok(EnvmaStatus::Ok)
    })
}

/// Solves the problem in `config_path` and writes `solution.csv`,
/// `residual.csv` and `report.txt` into `out_dir`. Returns
/// `ENVMA_STATUS_MAX_ITER_EXCEEDED` when the iteration cap was hit; the
/// artifacts and summary are still produced.
///
/// # Safety
/// Both paths must be NUL-terminated strings; `summary` may be null.
#[no_mangle]
pub unsafe extern "C" fn envma_solve_config(
    config_path: *const c_char,
    out_dir: *const c_char,
    summary: *mut EnvmaSolveSummary,
) -> EnvmaStatus {
    guard(|| {
        let problem = read_problem(path_arg(config_path, "config_path")?)?;
        let dir = path_arg(out_dir, "out_dir")?;
        let prepared = PreparedProblem::new(&problem)?;
        let run = ProblemRun::solve(&prepared, &problem)?;
        run.write(dir)?;
        if !summary.is_null() {
            summary.write(EnvmaSolveSummary {
                iterations: run.solution.report.iterations,
                final_residual: run.solution.report.final_residual,
                max_error: run.max_error.unwrap_or(f64::NAN),
            });
        }
        match run.solution.report.status {
            SolveStatus::Converged => Ok(EnvmaStatus::Ok),
            SolveStatus::MaxIterExceeded => {
                set_error(String::new());
                Err(Fail(
                    EnvmaStatus::MaxIterExceeded,
                    format!(
                        "stopped after {} iterations with residual {:e}",
                        run.solution.report.iterations, run.solution.report.final_residual
                    ),
                ))
            }
        }
    })
}
