//! Acceptance criteria, one test each. Every test prints a single
//! `[PASS]` or `[FAIL]` line; run with `--nocapture` to see them all.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use envma::envelope::{
    conjugate_intercept, ellipticity_gap, envelope_value, oracle_resolution, verify_lemma,
    verify_oracle, ThetaBox,
};
use envma::matrix::{operator_f, SymmetricMatrix};
use envma::sampling::{random_in_theta_box, random_psd, random_symmetric, sample_rng};
use envma::solver::{
    check_premises, convergence_study, field_to_csv, read_problem, solve_dirichlet, FieldSource,
    GridSpec, SolveOptions, SolveStatus,
};

const SEED: u64 = 20_240_611;
const THETAS: [f64; 3] = [0.3, 0.5, 0.9];
const DIMS: [usize; 2] = [1, 2];

const ORACLE_SAMPLES: usize = 200;
const ORACLE_BUDGET: Duration = Duration::from_secs(120);
const AGREEMENT_SAMPLES: usize = 1000;
const AGREEMENT_REL_TOL: f64 = 1e-8;
const AGREEMENT_BUDGET: Duration = Duration::from_secs(30);
const ELLIPTICITY_SAMPLES: usize = 1000;
const ELLIPTICITY_SLACK: f64 = 1e-9;
const ELLIPTICITY_BUDGET: Duration = Duration::from_secs(60);
const CONCAVITY_SAMPLES: usize = 1000;
const CONCAVITY_SLACK: f64 = 1e-9;
const SPOT_TOL: f64 = 1e-8;
const QUADRATIC_TOL: f64 = 1e-9;
const QUADRATIC_N2_BUDGET: Duration = Duration::from_secs(60);
const MIN_ORDER: f64 = 1.8;
const WORKER_COUNTS: [usize; 3] = [1, 2, 4];

fn verdict(id: u32, name: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id} ({name}): {detail}");
}

fn problem(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("problems")
        .join(name)
}

fn configs() -> impl Iterator<Item = ThetaBox> {
    DIMS.into_iter().flat_map(|n| {
        THETAS
            .into_iter()
            .map(move |t| ThetaBox::new(t, n).unwrap())
    })
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut failed = 0;
    for b in configs() {
        let r = verify_oracle(&b, ORACLE_SAMPLES, SEED, oracle_resolution(b.n())).unwrap();
        failed += r.failed;
        lines.push(format!(
            "n={} θ={}: worst {:.2e} (tol {:.2e}, {} failed)",
            b.n(),
            b.theta(),
            r.worst_error,
            r.tolerance,
            r.failed
        ));
    }
    let elapsed = start.elapsed();
    let passed = failed == 0 && elapsed <= ORACLE_BUDGET;
    let detail = format!("{}; {:.1}s", lines.join("; "), elapsed.as_secs_f64());
    verdict(1, "envelope oracle equivalence", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_2_agreement_on_the_box() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut failed = 0;
    for b in configs() {
        let mut bad = 0;
        let mut worst: f64 = 0.0;
        for i in 0..AGREEMENT_SAMPLES {
            let m = random_in_theta_box(&mut sample_rng(SEED, i as u64), &b);
            let f = operator_f(&m).unwrap();
            let rel = (envelope_value(&m, &b).unwrap() - f).abs() / f.abs().max(1.0);
            worst = worst.max(rel);
            if rel > AGREEMENT_REL_TOL {
                bad += 1;
            }
        }
        failed += bad;
        lines.push(format!(
            "n={} θ={}: {bad} failed, worst rel {:.2e}",
            b.n(),
            b.theta(),
            worst
        ));
    }
    let elapsed = start.elapsed();
    let passed = failed == 0 && elapsed <= AGREEMENT_BUDGET;
    let detail = format!("{}; {:.1}s", lines.join("; "), elapsed.as_secs_f64());
    verdict(2, "agreement with F on E_θ", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_3_uniform_ellipticity() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut failed = 0;
    for b in configs() {
        let (mut bad, mut lambda_bad, mut loose_bad) = (0, 0, 0);
        let mut min_ratio = f64::INFINITY;
        let mut max_ratio: f64 = 0.0;
        for i in 0..ELLIPTICITY_SAMPLES {
            let mut rng = sample_rng(SEED, i as u64);
            let m = random_symmetric(&mut rng, 2 * b.n(), 3.0);
            let p = random_psd(&mut rng, 2 * b.n());
            let gap = ellipticity_gap(&m, &p, &b).unwrap();
            if gap.gap < gap.norm_lower(&b) - ELLIPTICITY_SLACK
                || gap.gap > gap.upper + ELLIPTICITY_SLACK
            {
                bad += 1;
            }
            if gap.gap < gap.lower - ELLIPTICITY_SLACK {
                lambda_bad += 1;
            }
            if gap.gap < gap.loose_lower(&b) - ELLIPTICITY_SLACK {
                loose_bad += 1;
            }
            if gap.norm > 0.0 {
                min_ratio = min_ratio.min(gap.gap / gap.norm);
                max_ratio = max_ratio.max(gap.gap / gap.norm);
            }
        }
        failed += bad;
        lines.push(format!(
            "n={} θ={}: {bad} failed θ‖P‖ ≤ gap ≤ 2nθ⁻¹‖P‖ (gap/‖P‖ in [{min_ratio:.4}, {max_ratio:.4}]; \
             θ·λmax(proj P) bound {lambda_bad} failed, θ/(4n)·‖P‖ bound {loose_bad} failed)",
            b.n(),
            b.theta()
        ));
    }
    let elapsed = start.elapsed();
    let passed = failed == 0 && elapsed <= ELLIPTICITY_BUDGET;
    let detail = format!("{}; {:.1}s", lines.join("; "), elapsed.as_secs_f64());
    verdict(3, "uniform ellipticity", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_4_midpoint_concavity() {
    let mut lines = Vec::new();
    let mut failed = 0;
    for b in configs() {
        let mut bad = 0;
        let mut worst = f64::INFINITY;
        for i in 0..CONCAVITY_SAMPLES {
            let mut rng = sample_rng(SEED, i as u64);
            let dim = 2 * b.n();
            let (m1, m2) = match i % 3 {
                0 => (
                    random_in_theta_box(&mut rng, &b),
                    random_in_theta_box(&mut rng, &b),
                ),
                1 => (
                    random_in_theta_box(&mut rng, &b),
                    random_symmetric(&mut rng, dim, 3.0),
                ),
                _ => (
                    random_symmetric(&mut rng, dim, 3.0),
                    random_symmetric(&mut rng, dim, 3.0),
                ),
            };
            let mid = envelope_value(&(&m1 + &m2).scaled(0.5), &b).unwrap();
            let slack =
                mid - 0.5 * (envelope_value(&m1, &b).unwrap() + envelope_value(&m2, &b).unwrap());
            worst = worst.min(slack);
            if slack < -CONCAVITY_SLACK {
                bad += 1;
            }
        }
        failed += bad;
        lines.push(format!(
            "n={} θ={}: {bad} failed, min slack {worst:.2e}",
            b.n(),
            b.theta()
        ));
    }
    let passed = failed == 0;
    let detail = lines.join("; ");
    verdict(4, "midpoint concavity", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_5_scalar_spot_values() {
    let b = ThetaBox::new(0.5, 1).unwrap();
    let env = |mu: f64| envelope_value(&SymmetricMatrix::scaled_identity(2, mu), &b).unwrap();
    let conj = |p: f64| conjugate_intercept(&[p], &b).unwrap().value;
    let checks = [
        ("F̃(4)", env(4.0), 3.0),
        ("F̃(0)", env(0.0), -0.5),
        ("F̃(1)", env(1.0), 1.0),
        ("g(1/2)", conj(0.5), 1.0),
        ("g(2)", conj(2.0), -0.5),
    ];
    let passed = checks
        .iter()
        .all(|(_, got, want)| (got - want).abs() <= SPOT_TOL);
    let detail = checks
        .iter()
        .map(|(name, got, want)| format!("{name} = {got:.12} (want {want})"))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(5, "closed-form scalar values", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_6_quadratic_exactness() {
    let mut lines = Vec::new();
    let mut passed = true;
    for (n, points) in [(1, 17), (2, 9)] {
        let grid = GridSpec::cube(n, -1.0, 1.0, points).unwrap();
        let b = ThetaBox::new(0.4, n).unwrap();
        let exact = FieldSource::Quadratic.solution_field(&grid).unwrap();
        let g = FieldSource::Quadratic.rhs_field(&grid).unwrap();
        let start = Instant::now();
        let s = solve_dirichlet(&grid, &exact, &g, &b, &SolveOptions::default()).unwrap();
        let elapsed = start.elapsed();
        let err = s.u.max_abs_diff(&exact);
        let ok = s.report.status == SolveStatus::Converged
            && err <= QUADRATIC_TOL
            && (n == 1 || elapsed <= QUADRATIC_N2_BUDGET);
        passed &= ok;
        lines.push(format!(
            "n={n} {points}^{}: max error {err:.2e}, {} iterations, {:.2}s",
            2 * n,
            s.report.iterations,
            elapsed.as_secs_f64()
        ));
    }
    let detail = lines.join("; ");
    verdict(6, "solver quadratic exactness", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_7_convergence_order() {
    let p = read_problem(&problem("quartic_n1.cfg")).unwrap();
    let rows = convergence_study(&p, &[17, 33, 65]).unwrap();
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
    let passed = orders.len() == 2 && orders.iter().all(|&o| o >= MIN_ORDER);
    let detail = rows
        .iter()
        .map(|r| match r.order {
            Some(o) => format!(
                "N={} error {:.3e} order {o:.4}",
                r.points_per_axis, r.max_error
            ),
            None => format!("N={} error {:.3e}", r.points_per_axis, r.max_error),
        })
        .collect::<Vec<_>>()
        .join("; ");
    verdict(7, "solver convergence order", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_8_premise_check() {
    let grid = GridSpec::cube(1, -1.0, 1.0, 17).unwrap();
    let u = FieldSource::Quadratic.solution_field(&grid).unwrap();
    let r = check_premises(&u, 2.0, 2.0).unwrap();
    let passed = r.theta == 0.5 && r.membership_fraction == 1.0;
    let detail = format!(
        "θ = {}, membership {}, proj(D²u) eigenvalues in [{}, {}]",
        r.theta, r.membership_fraction, r.min_eigenvalue, r.max_eigenvalue
    );
    verdict(8, "premise check", passed, &detail);
    assert!(passed, "{detail}");
}

fn library_outputs() -> Vec<u8> {
    let b = ThetaBox::new(0.5, 2).unwrap();
    let lemma = verify_lemma(&b, 200, SEED).unwrap();
    let oracle = verify_oracle(&b, 50, SEED, oracle_resolution(2)).unwrap();
    let p = read_problem(&problem("quadratic_n2.cfg")).unwrap();
    let grid = p.grid().unwrap();
    let s = solve_dirichlet(
        &grid,
        &p.boundary.solution_field(&grid).unwrap(),
        &p.rhs.rhs_field(&grid).unwrap(),
        &p.theta_box().unwrap(),
        &p.options,
    )
    .unwrap();
    format!(
        "{lemma}{oracle}{}{}",
        field_to_csv(&s.u),
        s.report.to_key_value()
    )
    .into_bytes()
}

fn binary_outputs(threads: usize, dir: &Path) -> Vec<u8> {
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_envma"))
            .args(args)
            .env("ENVMA_THREADS", threads.to_string())
            .output()
            .unwrap()
    };
    let verify = run(&[
        "verify",
        "--theta",
        "0.5",
        "--n",
        "1",
        "--samples",
        "300",
        "--seed",
        "17",
    ]);
    let out = dir.join(format!("solve{threads}"));
    let cfg = problem("quartic_n1.cfg");
    run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let mut bytes = verify.stdout;
    for f in ["solution.csv", "residual.csv", "report.txt"] {
        bytes.extend(fs::read(out.join(f)).unwrap());
    }
    bytes
}

#[test]
fn criterion_9_determinism_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut lib = Vec::new();
    let mut bin = Vec::new();
    for k in WORKER_COUNTS {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .unwrap();
        lib.push(pool.install(library_outputs));
        bin.push(binary_outputs(k, dir.path()));
    }
    let same = |v: &[Vec<u8>]| v.windows(2).all(|w| w[0] == w[1]);
    let passed = same(&lib) && same(&bin) && lib.iter().chain(&bin).all(|b| !b.is_empty());
    let detail = format!(
        "library outputs identical for {WORKER_COUNTS:?} workers: {}; binary outputs: {}",
        same(&lib),
        same(&bin)
    );
    verdict(9, "determinism", passed, &detail);
    assert!(passed, "{detail}");
}
