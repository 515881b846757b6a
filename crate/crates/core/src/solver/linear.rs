//! Policy evaluation: the linear Dirichlet problem `½ tr(S(x) D²u) = r(x)`
//! for frozen slopes `S(x)`.

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

use super::grid::{GridSpec, ScalarField};

pub const GAUSS_SEIDEL_TOL: f64 = 1e-12;
pub const GAUSS_SEIDEL_MAX_SWEEPS: usize = 100_000;
const PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    /// Banded LU for `n = 1`, Gauss-Seidel for `n = 2`.
    #[default]
    Auto,
    BandedLu,
    GaussSeidel,
}

/// Stencil of the frozen operator at one interior point: the weight of the
/// centre and of each neighbour offset.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StencilRow {
    pub centre: f64,
    pub neighbours: Vec<(isize, f64)>,
}

/// Centered differences for `tr(A D²u)` with `A = S/2`.
pub(crate) fn stencil_row(grid: &GridSpec, slope: &SymmetricMatrix) -> StencilRow {
    let dim = grid.dim();
    let mut centre = 0.0;
    let mut neighbours = Vec::with_capacity(2 * dim * dim);
    for a in 0..dim {
        let (sa, ha) = (grid.stride(a) as isize, grid.spacing(a));
        let w = 0.5 * slope.get(a, a) / (ha * ha);
        centre -= 2.0 * w;
        neighbours.push((sa, w));
        neighbours.push((-sa, w));
        for b in a + 1..dim {
            let (sb, hb) = (grid.stride(b) as isize, grid.spacing(b));
            // both off-diagonal entries of A contribute
            let w = slope.get(a, b) / (4.0 * ha * hb);
            if w != 0.0 {
                neighbours.push((sa + sb, w));
                neighbours.push((sa - sb, -w));
                neighbours.push((-sa + sb, -w));
                neighbours.push((-sa - sb, w));
            }
        }
    }
    StencilRow { centre, neighbours }
}

/// Overwrites the interior of `u` with the solution of the frozen problem.
/// Returns the number of sweeps (1 for the direct solver).
pub(crate) fn solve_frozen(
    u: &mut ScalarField,
    interior: &[usize],
    rows: &[StencilRow],
    rhs: &[f64],
    solver: LinearSolver,
) -> Result<usize> {
    let solver = match solver {
        LinearSolver::Auto if u.grid().n() == 1 => LinearSolver::BandedLu,
        LinearSolver::Auto => LinearSolver::GaussSeidel,
        s => s,
    };
    match solver {
        LinearSolver::GaussSeidel => gauss_seidel(u, interior, rows, rhs),
        _ => banded_lu(u, interior, rows, rhs).map(|()| 1),
    }
}

fn gauss_seidel(
    u: &mut ScalarField,
    interior: &[usize],
    rows: &[StencilRow],
    rhs: &[f64],
) -> Result<usize> {
    let v = u.values_mut();
    for sweep in 1..=GAUSS_SEIDEL_MAX_SWEEPS {
        let mut change: f64 = 0.0;
        let mut size: f64 = 1.0;
        for ((&k, row), &r) in interior.iter().zip(rows).zip(rhs) {
            let mut s = r;
            for &(off, w) in &row.neighbours {
                s -= w * v[(k as isize + off) as usize];
            }
            let next = s / row.centre;
            change = change.max((next - v[k]).abs());
            size = size.max(next.abs());
            v[k] = next;
        }
        if !change.is_finite() {
            return Err(Error::LinearSolveFailure(format!(
                "Gauss-Seidel diverged at sweep {sweep}"
            )));
        }
        if change <= GAUSS_SEIDEL_TOL * size {
            return Ok(sweep);
        }
    }
    Err(Error::LinearSolveFailure(format!(
        "Gauss-Seidel did not reach {GAUSS_SEIDEL_TOL:e} in {GAUSS_SEIDEL_MAX_SWEEPS} sweeps"
    )))
}

fn banded_lu(
    u: &mut ScalarField,
    interior: &[usize],
    rows: &[StencilRow],
    rhs: &[f64],
) -> Result<()> {
    let unknowns = interior.len();
    let mut slot = vec![usize::MAX; u.grid().len()];
    for (i, &k) in interior.iter().enumerate() {
        slot[k] = i;
    }
    let v = u.values_mut();

    let mut width = 0usize;
    for (i, (&k, row)) in interior.iter().zip(rows).enumerate() {
        for &(off, _) in &row.neighbours {
            let j = slot[(k as isize + off) as usize];
            if j != usize::MAX {
                width = width.max(j.abs_diff(i));
            }
        }
    }
    let span = 2 * width + 1;
    let mut band = vec![0.0; unknowns * span];
    let at = |i: usize, j: usize| i * span + j + width - i;
    let mut b = rhs.to_vec();
    for (i, (&k, row)) in interior.iter().zip(rows).enumerate() {
        band[at(i, i)] += row.centre;
        for &(off, w) in &row.neighbours {
            let kk = (k as isize + off) as usize;
            match slot[kk] {
                usize::MAX => b[i] -= w * v[kk],
                j => band[at(i, j)] += w,
            }
        }
    }

    for k in 0..unknowns {
        let end = (k + width + 1).min(unknowns);
        let pivot = band[at(k, k)];
        let scale = (k..end).fold(0.0f64, |m, j| m.max(band[at(k, j)].abs()));
        if !(pivot.abs() > PIVOT_TOL * scale) {
            return Err(Error::LinearSolveFailure(format!(
                "zero pivot in banded elimination at unknown {k}"
            )));
        }
        for i in k + 1..end {
            let l = band[at(i, k)] / pivot;
            if l == 0.0 {
                continue;
            }
            for j in k..end {
                band[at(i, j)] -= l * band[at(k, j)];
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = vec![0.0; unknowns];
    for i in (0..unknowns).rev() {
        let end = (i + width + 1).min(unknowns);
        let s = (i + 1..end).fold(b[i], |s, j| s - band[at(i, j)] * x[j]);
        x[i] = s / band[at(i, i)];
    }
    if x.iter().any(|t| !t.is_finite()) {
        return Err(Error::LinearSolveFailure(
            "non-finite solution of banded system".into(),
        ));
    }
    for (&k, xi) in interior.iter().zip(x) {
        v[k] = xi;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::grid::discrete_hessian;

    fn poisson(grid: &GridSpec, solver: LinearSolver) -> ScalarField {
        // ½ tr(2I D²u) = Δu = 2·dim for u = |x|²
        let exact = ScalarField::from_fn(grid, |x| x.iter().map(|t| t * t).sum());
        let mut u = exact.clone();
        let interior = grid.interior();
        for &k in &interior {
            u.values_mut()[k] = 0.0;
        }
        let slope = SymmetricMatrix::scaled_identity(grid.dim(), 2.0);
        let rows: Vec<_> = interior.iter().map(|_| stencil_row(grid, &slope)).collect();
        let rhs = vec![2.0 * grid.dim() as f64; interior.len()];
        solve_frozen(&mut u, &interior, &rows, &rhs, solver).unwrap();
        assert!(u.max_abs_diff(&exact) < 1e-10, "{}", u.max_abs_diff(&exact));
        u
    }

    #[test]
    fn direct_and_iterative_agree() {
        let g = GridSpec::new(1, vec![-1.0, 0.0], vec![1.0, 3.0], 11).unwrap();
        let a = poisson(&g, LinearSolver::BandedLu);
        let b = poisson(&g, LinearSolver::GaussSeidel);
        assert!(a.max_abs_diff(&b) < 1e-10);
        poisson(
            &GridSpec::cube(2, -1.0, 1.0, 6).unwrap(),
            LinearSolver::Auto,
        );
    }

    #[test]
    fn stencil_reproduces_discrete_hessian() {
        let g = GridSpec::cube(1, 0.0, 1.0, 7).unwrap();
        let u = ScalarField::from_fn(&g, |x| (x[0] * 3.0).sin() + x[0] * x[1] * x[1]);
        let s = SymmetricMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 2.0]]).unwrap();
        let row = stencil_row(&g, &s);
        for k in g.interior() {
            let h = discrete_hessian(&u, k);
            let direct = 0.5 * crate::matrix::trace_inner(&s, &h);
            let v = u.values();
            let via = row
                .neighbours
                .iter()
                .fold(row.centre * v[k], |acc, &(o, w)| {
                    acc + w * v[(k as isize + o) as usize]
                });
            assert!((direct - via).abs() < 1e-10, "{direct} {via}");
        }
    }

    #[test]
    fn singular_operator_is_reported() {
        let g = GridSpec::cube(1, 0.0, 1.0, 5).unwrap();
        let mut u = ScalarField::constant(&g, 0.0);
        let interior = g.interior();
        let rows: Vec<_> = interior
            .iter()
            .map(|_| stencil_row(&g, &SymmetricMatrix::zeros(2)))
            .collect();
        let rhs = vec![1.0; interior.len()];
        let err = solve_frozen(&mut u, &interior, &rows, &rhs, LinearSolver::BandedLu);
        assert!(matches!(err, Err(Error::LinearSolveFailure(_))));
    }
}
