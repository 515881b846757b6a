use std::fs;
use std::path::Path;

use crate::envelope::ThetaBox;
use crate::error::{Error, Result};
use crate::matrix_io::fmt_f64;

use super::policy::{residual, solve_dirichlet, Solution};
use super::problem::Problem;
use super::{field_to_csv, GridSpec, ScalarField};

/// Everything a problem file needs before solving: grid, box and sampled
/// fields. Errors here are configuration errors.
#[derive(Debug, Clone)]
pub struct PreparedProblem {
    pub grid: GridSpec,
    pub theta_box: ThetaBox,
    pub boundary: ScalarField,
    pub rhs: ScalarField,
    pub exact: Option<ScalarField>,
}

impl PreparedProblem {
    pub fn new(problem: &Problem) -> Result<Self> {
        let grid = problem.grid()?;
        let theta_box = problem.theta_box()?;
        let boundary = problem.boundary.solution_field(&grid)?;
        let rhs = problem.rhs.rhs_field(&grid)?;
        let exact = problem
            .exact
            .as_ref()
            .map(|e| e.solution_field(&grid))
            .transpose()?;
        Ok(PreparedProblem {
            grid,
            theta_box,
            boundary,
            rhs,
            exact,
        })
    }
}

/// A finished solve with its residual field.
#[derive(Debug, Clone)]
pub struct ProblemRun {
    pub solution: Solution,
    pub residual: ScalarField,
    pub theta_box: ThetaBox,
    pub max_error: Option<f64>,
}

impl ProblemRun {
    pub fn solve(prepared: &PreparedProblem, problem: &Problem) -> Result<Self> {
        let p = prepared;
        let solution =
            solve_dirichlet(&p.grid, &p.boundary, &p.rhs, &p.theta_box, &problem.options)?;
        let residual = residual(&solution.u, &p.rhs, &p.theta_box)?;
        let max_error = p.exact.as_ref().map(|e| solution.u.max_abs_diff(e));
        Ok(ProblemRun {
            solution,
            residual,
            theta_box: p.theta_box,
            max_error,
        })
    }

    /// Contents of `report.txt`.
    pub fn report_text(&self) -> String {
        let mut out = format!(
            "theta = {}\nn = {}\npoints_per_axis = {}\n",
            fmt_f64(self.theta_box.theta()),
            self.theta_box.n(),
            self.solution.u.grid().points_per_axis()
        );
        out.push_str(&self.solution.report.to_key_value());
        if let Some(e) = self.max_error {
            out.push_str(&format!("max_error = {}\n", fmt_f64(e)));
        }
        out
    }

    /// Writes `solution.csv`, `residual.csv` and `report.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("solution.csv", field_to_csv(&self.solution.u)),
            ("residual.csv", field_to_csv(&self.residual)),
            ("report.txt", self.report_text()),
        ];
        for (name, text) in files {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
