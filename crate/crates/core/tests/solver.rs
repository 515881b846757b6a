use std::path::Path;

use envma::solver::{
    convergence_study, parse_problem, solve_dirichlet, FieldSource, GridSpec, ScalarField,
    SolveOptions, SolveStatus,
};
use envma::ThetaBox;

const QUARTIC: &str = "\
n = 1
lo = 1
hi = 2
pointsPerAxis = 17
theta = 0.0625
boundary = quartic_radial
rhs = quartic_radial
refinements = 17, 33, 65
";

#[test]
fn quadratic_is_exact_in_four_real_dimensions() {
    let grid = GridSpec::cube(2, -1.0, 1.0, 9).unwrap();
    let b = ThetaBox::new(0.4, 2).unwrap();
    let exact = FieldSource::Quadratic.solution_field(&grid).unwrap();
    let g = FieldSource::Quadratic.rhs_field(&grid).unwrap();
    let s = solve_dirichlet(&grid, &exact, &g, &b, &SolveOptions::default()).unwrap();
    assert_eq!(s.report.status, SolveStatus::Converged);
    assert!(
        s.u.max_abs_diff(&exact) <= 1e-9,
        "{}",
        s.u.max_abs_diff(&exact)
    );
    assert!(s.report.history_is_monotone(), "{:?}", s.report.history);
}

#[test]
fn quartic_converges_at_second_order() {
    let p = parse_problem(QUARTIC, Path::new(".")).unwrap();
    let rows = convergence_study(&p, &p.refinements).unwrap();
    for r in &rows[1..] {
        assert!(r.order.unwrap() >= 1.8, "{rows:?}");
    }
}

#[test]
fn residual_history_is_monotone_on_the_quartic_problem() {
    let p = parse_problem(QUARTIC, Path::new(".")).unwrap();
    let grid = p.grid().unwrap();
    let s = solve_dirichlet(
        &grid,
        &p.boundary.solution_field(&grid).unwrap(),
        &p.rhs.rhs_field(&grid).unwrap(),
        &p.theta_box().unwrap(),
        &p.options,
    )
    .unwrap();
    assert_eq!(s.report.status, SolveStatus::Converged);
    assert!(s.report.history_is_monotone(), "{:?}", s.report.history);
}

#[test]
fn discrete_comparison_on_shipped_problems() {
    let p = parse_problem(QUARTIC, Path::new(".")).unwrap();
    let grid = p.grid().unwrap();
    let b = p.theta_box().unwrap();
    let boundary = p.boundary.solution_field(&grid).unwrap();
    let g2 = p.rhs.rhs_field(&grid).unwrap();
    let g1 = ScalarField::from_fn(&grid, |x| {
        FieldSource::QuarticRadial.rhs_value(x).unwrap() + 0.5 + 0.1 * x[0]
    });
    let u1 = solve_dirichlet(&grid, &boundary, &g1, &b, &p.options)
        .unwrap()
        .u;
    let u2 = solve_dirichlet(&grid, &boundary, &g2, &b, &p.options)
        .unwrap()
        .u;
    for (a, c) in u1.values().iter().zip(u2.values()) {
        assert!(*a <= c + 1e-8);
    }
}
