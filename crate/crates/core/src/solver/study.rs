use crate::envelope::ThetaBox;
use crate::error::{Error, Result};
use crate::matrix::{admissible_theta, in_theta_box, projected_spectrum};

use super::grid::{discrete_hessian, ScalarField};
use super::policy::{solve_dirichlet, Solution, SolveStatus};
use super::problem::Problem;

/// Tolerance used for grid membership in `E_θ`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub points_per_axis: usize,
    pub h: f64,
    pub max_error: f64,
    /// `log(e_prev / e) / log(h_prev / h)`; absent on the first row.
    pub order: Option<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
}

/// Solves `problem` at each resolution and compares with its exact
/// solution.
pub fn convergence_study(problem: &Problem, refinements: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::MissingKey("exact".into()))?;
    let theta_box = problem.theta_box()?;
    let base = problem.grid()?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(refinements.len());
    for &points in refinements {
        let grid = base.with_points(points)?;
        let boundary = problem.boundary.solution_field(&grid)?;
        let g = problem.rhs.rhs_field(&grid)?;
        let want = exact.solution_field(&grid)?;
        let Solution { u, report, .. } =
            solve_dirichlet(&grid, &boundary, &g, &theta_box, &problem.options)?;
        let h = grid.max_spacing();
        let max_error = u.max_abs_diff(&want);
        let order = rows
            .last()
            .map(|prev| (prev.max_error / max_error).ln() / (prev.h / h).ln());
        rows.push(ConvergenceRow {
            points_per_axis: points,
            h,
            max_error,
            order,
            status: report.status,
            iterations: report.iterations,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PremiseReport {
    pub theta: f64,
    /// Fraction of interior points whose discrete Hessian lies in `E_θ`.
    pub membership_fraction: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Discrete check of `λI ⪯ proj(D²u) ⪯ ΛI` with `θ = min(λ, 1/Λ)`.
pub fn check_premises(u: &ScalarField, lower: f64, upper: f64) -> Result<PremiseReport> {
    let theta = admissible_theta(lower, upper)?;
    ThetaBox::new(theta, u.grid().n())?;
    let interior = u.grid().interior();
    let mut inside = 0usize;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &k in &interior {
        let h = discrete_hessian(u, k);
        if in_theta_box(&h, theta, MEMBERSHIP_TOL) {
            inside += 1;
        }
        let spec = projected_spectrum(&h)?;
        lo = lo.min(spec.min());
        hi = hi.max(spec.max());
    }
    Ok(PremiseReport {
        theta,
        membership_fraction: inside as f64 / interior.len() as f64,
        min_eigenvalue: lo,
        max_eigenvalue: hi,
    })
}
