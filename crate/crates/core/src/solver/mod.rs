//! Dirichlet solver for `F̃(D²u) = g` on rectangles in `R^{2n}`, `n ≤ 2`.

mod grid;
mod linear;
mod policy;
mod problem;
mod run;
mod study;

use std::fmt::Write as _;

use crate::matrix_io::fmt_f64;

pub use grid::{discrete_hessian, GridSpec, ScalarField, MIN_POINTS};
pub use linear::{LinearSolver, GAUSS_SEIDEL_MAX_SWEEPS, GAUSS_SEIDEL_TOL};
pub use policy::{
    multilinear_initial_guess, residual, solve_dirichlet, PolicyField, Solution, SolveOptions,
    SolveReport, SolveStatus,
};
pub use problem::{parse_problem, read_field_file, read_problem, FieldSource, Problem, ThetaSpec};
pub use run::{PreparedProblem, ProblemRun};
pub use study::{check_premises, convergence_study, ConvergenceRow, PremiseReport, MEMBERSHIP_TOL};

/// CSV with one row per grid point: coordinates, then the value.
pub fn field_to_csv(field: &ScalarField) -> String {
    let grid = field.grid();
    let mut out = String::new();
    for a in 1..=grid.dim() {
        let _ = write!(out, "x{a},");
    }
    out.push_str("value\n");
    for (k, v) in field.values().iter().enumerate() {
        for c in grid.coords(k) {
            out.push_str(&fmt_f64(c));
            out.push(',');
        }
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    out
}

pub fn convergence_to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("points_per_axis,h,max_error,order,status\n");
    for r in rows {
        let order = r.order.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.points_per_axis,
            fmt_f64(r.h),
            fmt_f64(r.max_error),
            order,
            r.status.as_str()
        );
    }
    out
}
