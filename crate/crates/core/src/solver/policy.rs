//! Howard's algorithm for `F̃(D²u) = g`. Policy improvement picks the
//! envelope certificate at every interior point; policy evaluation solves
//! the resulting linear problem.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::envelope::{envelope_eval, envelope_value, ThetaBox};
use crate::error::{Error, Result};
use crate::matrix::{projected_spectrum, SymmetricMatrix};
use crate::matrix_io::fmt_f64;

use super::grid::{discrete_hessian, GridSpec, ScalarField};
use super::linear::{solve_frozen, stencil_row, LinearSolver};

/// Allowed excursion of policy eigenvalues outside `[θ, θ⁻¹]`.
const POLICY_BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub linear: LinearSolver,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 50,
            tol: 1e-9,
            linear: LinearSolver::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterExceeded,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterExceeded => "max_iter_exceeded",
        }
    }
}

/// Slopes and intercepts of the certificates at the interior points, in
/// the order of [`GridSpec::interior`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyField {
    pub points: Vec<usize>,
    pub slopes: Vec<SymmetricMatrix>,
    pub intercepts: Vec<f64>,
}

impl PolicyField {
    /// Extreme Hermitian eigenvalues of `proj(slope)` over all points,
    /// computed directly from the slope matrices.
    pub fn coefficient_bounds(&self) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.slopes {
            let spec = projected_spectrum(s)?;
            lo = lo.min(spec.min());
            hi = hi.max(spec.max());
        }
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Number of policy evaluations performed.
    pub iterations: usize,
    pub final_residual: f64,
    /// Max-norm residual of every iterate, starting with the initial guess.
    pub history: Vec<f64>,
    pub status: SolveStatus,
    pub linear_sweeps: usize,
    pub policy_min_eigenvalue: f64,
    pub policy_max_eigenvalue: f64,
    pub wall_time: Duration,
}

impl SolveReport {
    /// `key = value` lines. Wall time is left out so the text is
    /// reproducible.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "status = {}", self.status.as_str());
        let _ = writeln!(out, "iterations = {}", self.iterations);
        let _ = writeln!(out, "final_residual = {}", fmt_f64(self.final_residual));
        let _ = writeln!(out, "linear_sweeps = {}", self.linear_sweeps);
        let _ = writeln!(
            out,
            "policy_min_eigenvalue = {}",
            fmt_f64(self.policy_min_eigenvalue)
        );
        let _ = writeln!(
            out,
            "policy_max_eigenvalue = {}",
            fmt_f64(self.policy_max_eigenvalue)
        );
        let history: Vec<String> = self.history.iter().map(|&r| fmt_f64(r)).collect();
        let _ = writeln!(out, "residual_history = {}", history.join(","));
        out
    }

    /// True when the history never increases after the first iteration.
    pub fn history_is_monotone(&self) -> bool {
        self.history.windows(2).skip(1).all(|w| w[1] <= w[0])
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: ScalarField,
    pub policy: PolicyField,
    pub report: SolveReport,
}

fn check_shapes(a: &ScalarField, b: &ScalarField, box_n: usize) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::InvalidArgument(
            "fields live on different grids".into(),
        ));
    }
    if a.grid().n() != box_n {
        return Err(Error::DimensionMismatch {
            left: a.grid().n(),
            right: box_n,
        });
    }
    Ok(())
}

/// `F̃(D²u) − g` at interior points, zero on the boundary.
pub fn residual(u: &ScalarField, g: &ScalarField, theta_box: &ThetaBox) -> Result<ScalarField> {
    check_shapes(u, g, theta_box.n())?;
    let interior = u.grid().interior();
    let values: Vec<f64> = interior
        .par_iter()
        .map(|&k| envelope_value(&discrete_hessian(u, k), theta_box).map(|v| v - g.values()[k]))
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; u.grid().len()];
    for (k, v) in interior.into_iter().zip(values) {
        out[k] = v;
    }
    ScalarField::new(u.grid().clone(), out)
}

/// Multilinear interpolation of the `2^{2n}` corner values.
pub fn multilinear_initial_guess(boundary: &ScalarField) -> ScalarField {
    let grid = boundary.grid();
    let dim = grid.dim();
    let last = grid.points_per_axis() - 1;
    let corners: Vec<(usize, f64)> = (0..1usize << dim)
        .map(|mask| {
            let k: usize = (0..dim)
                .filter(|a| mask >> a & 1 == 1)
                .map(|a| last * grid.stride(a))
                .sum();
            (mask, boundary.values()[k])
        })
        .collect();
    let mut values = boundary.values().to_vec();
    for k in grid.interior() {
        let t: Vec<f64> = grid
            .multi_index(k)
            .iter()
            .map(|&i| i as f64 / last as f64)
            .collect();
        values[k] = corners
            .iter()
            .map(|&(mask, c)| {
                (0..dim).fold(c, |w, a| {
                    w * if mask >> a & 1 == 1 { t[a] } else { 1.0 - t[a] }
                })
            })
            .sum();
    }
    ScalarField::new(grid.clone(), values).expect("same grid")
}

struct Improvement {
    policy: PolicyField,
    residual: f64,
}

fn improve(
    u: &ScalarField,
    g: &ScalarField,
    theta_box: &ThetaBox,
    interior: &[usize],
) -> Result<Improvement> {
    let certs: Vec<_> = interior
        .par_iter()
        .map(|&k| envelope_eval(&discrete_hessian(u, k), theta_box))
        .collect::<Result<_>>()?;
    let mut residual: f64 = 0.0;
    let mut slopes = Vec::with_capacity(certs.len());
    let mut intercepts = Vec::with_capacity(certs.len());
    for (&k, c) in interior.iter().zip(certs) {
        residual = residual.max((c.value - g.values()[k]).abs());
        slopes.push(c.slope_matrix);
        intercepts.push(c.intercept);
    }
    Ok(Improvement {
        policy: PolicyField {
            points: interior.to_vec(),
            slopes,
            intercepts,
        },
        residual,
    })
}

/// Solves `F̃(D²u) = g` with `u = boundary` on the boundary layer. On
/// `MaxIterExceeded` the iterate with the smallest residual is returned.
pub fn solve_dirichlet(
    grid: &GridSpec,
    boundary: &ScalarField,
    g: &ScalarField,
    theta_box: &ThetaBox,
    options: &SolveOptions,
) -> Result<Solution> {
    if boundary.grid() != grid {
        return Err(Error::InvalidArgument(
            "boundary data lives on a different grid".into(),
        ));
    }
    check_shapes(boundary, g, theta_box.n())?;
    if !(options.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {}",
            options.tol
        )));
    }
    if let Some(k) = boundary.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "boundary value at point {k} is not finite"
        )));
    }
    if let Some(k) = g.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "right-hand side at point {k} is not finite"
        )));
    }

    let start = Instant::now();
    let interior = grid.interior();
    let mut u = multilinear_initial_guess(boundary);
    let mut history = Vec::new();
    let mut best: Option<(f64, ScalarField, PolicyField)> = None;
    let mut sweeps = 0usize;
    let mut eig_lo = f64::INFINITY;
    let mut eig_hi = f64::NEG_INFINITY;

    let status = loop {
        let Improvement { policy, residual } = improve(&u, g, theta_box, &interior)?;
        let (lo, hi) = policy.coefficient_bounds()?;
        if lo < theta_box.lower() - POLICY_BOUND_TOL || hi > theta_box.upper() + POLICY_BOUND_TOL {
            return Err(Error::LinearSolveFailure(format!(
                "policy eigenvalues [{lo}, {hi}] leave [{}, {}]",
                theta_box.lower(),
                theta_box.upper()
            )));
        }
        eig_lo = eig_lo.min(lo);
        eig_hi = eig_hi.max(hi);
        history.push(residual);
        let improved = best.as_ref().is_none_or(|(r, _, _)| residual < *r);
        if residual <= options.tol {
            best = Some((residual, u.clone(), policy));
            break SolveStatus::Converged;
        }
        if history.len() > options.max_iter {
            if improved {
                best = Some((residual, u.clone(), policy));
            }
            break SolveStatus::MaxIterExceeded;
        }

        let rows: Vec<_> = policy.slopes.iter().map(|s| stencil_row(grid, s)).collect();
        let rhs: Vec<f64> = interior
            .iter()
            .zip(&policy.intercepts)
            .map(|(&k, c)| g.values()[k] - c)
            .collect();
        if improved {
            best = Some((residual, u.clone(), policy));
        }
        sweeps += solve_frozen(&mut u, &interior, &rows, &rhs, options.linear)?;
    };

    let (final_residual, u, policy) = best.expect("at least one improvement step");
    Ok(Solution {
        u,
        policy,
        report: SolveReport {
            iterations: history.len() - 1,
            final_residual,
            history,
            status,
            linear_sweeps: sweeps,
            policy_min_eigenvalue: eig_lo,
            policy_max_eigenvalue: eig_hi,
            wall_time: start.elapsed(),
        },
    })
}
