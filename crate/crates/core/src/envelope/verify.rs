//! Randomized check of the envelope's structural properties: concavity,
//! agreement with `F` on `E_θ`, two-sided ellipticity, factorization
//! through `proj`, and invariance under J-commuting rotations.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::Result;
use crate::matrix::{operator_f, project, SymmetricMatrix};
use crate::matrix_io::{fmt_f64, format_symmetric};
use crate::sampling::{
    random_in_theta_box, random_psd, random_symmetric, random_unitary_embedding, sample_rng,
};

use super::{ellipticity_gap, envelope_value, BruteForceOracle, ThetaBox};

pub const PROPERTY_NAMES: [&str; 5] = [
    "concavity",
    "agreement",
    "ellipticity",
    "projection",
    "unitary_invariance",
];

const CONCAVITY_SLACK: f64 = 1e-9;
const AGREEMENT_REL_TOL: f64 = 1e-8;
const ELLIPTICITY_SLACK: f64 = 1e-9;
const INVARIANCE_TOL: f64 = 1e-10;
const MAX_SHIFT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub sample: usize,
    pub detail: String,
    pub matrices: Vec<(&'static str, SymmetricMatrix)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyTally {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub theta_box: ThetaBox,
    pub samples: usize,
    pub seed: u64,
    pub properties: Vec<PropertyTally>,
    /// Extremes of `(F̃(M+P) - F̃(M)) / ‖P‖` over the ellipticity samples.
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.failed == 0)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyTally> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn first_failure(&self) -> Option<(&'static str, &Counterexample)> {
        self.properties
            .iter()
            .find_map(|p| p.first_failure.as_ref().map(|c| (p.name, c)))
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theta = {}", fmt_f64(self.theta_box.theta()))?;
        writeln!(f, "n = {}", self.theta_box.n())?;
        writeln!(f, "samples = {}", self.samples)?;
        writeln!(f, "seed = {}", self.seed)?;
        for p in &self.properties {
            writeln!(f, "{}: passed = {} failed = {}", p.name, p.passed, p.failed)?;
        }
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "none".into());
        writeln!(f, "ellipticity_ratio_min = {}", opt(self.min_ratio))?;
        writeln!(f, "ellipticity_ratio_max = {}", opt(self.max_ratio))
    }
}

impl Counterexample {
    /// Matrices in the text matrix format, each preceded by a `# label` line.
    pub fn dump(&self) -> String {
        let mut out = format!("# sample {}: {}\n", self.sample, self.detail);
        for (label, m) in &self.matrices {
            let _ = writeln!(out, "# {label}");
            out.push_str(&format_symmetric(m));
        }
        out
    }
}

struct SampleOutcome {
    failures: [Option<Counterexample>; 5],
    ratio: Option<f64>,
}

fn check_sample(b: &ThetaBox, seed: u64, index: usize) -> Result<SampleOutcome> {
    let mut rng = sample_rng(seed, index as u64);
    let dim = 2 * b.n();
    let m1 = random_symmetric(&mut rng, dim, MAX_SHIFT);
    let m2 = random_symmetric(&mut rng, dim, MAX_SHIFT);
    let inside = random_in_theta_box(&mut rng, b);
    let p = random_psd(&mut rng, dim);
    let w = random_unitary_embedding(&mut rng, b.n());

    let fail = |detail: String, matrices: Vec<(&'static str, SymmetricMatrix)>| {
        Some(Counterexample {
            sample: index,
            detail,
            matrices,
        })
    };
    let mut failures: [Option<Counterexample>; 5] = Default::default();

    let f1 = envelope_value(&m1, b)?;
    let f2 = envelope_value(&m2, b)?;
    let mid = envelope_value(&(&m1 + &m2).scaled(0.5), b)?;
    let slack = mid - 0.5 * (f1 + f2);
    if slack < -CONCAVITY_SLACK {
        failures[0] = fail(
            format!("midpoint slack {}", fmt_f64(slack)),
            vec![("M1", m1.clone()), ("M2", m2)],
        );
    }

    let fe = envelope_value(&inside, b)?;
    let f = operator_f(&inside)?;
    let rel = (fe - f).abs() / f.abs().max(1.0);
    if rel > AGREEMENT_REL_TOL {
        failures[1] = fail(
            format!(
                "envelope {} vs F {} (relative {})",
                fmt_f64(fe),
                fmt_f64(f),
                fmt_f64(rel)
            ),
            vec![("M", inside)],
        );
    }

    let gap = ellipticity_gap(&m1, &p, b)?;
    if !gap.holds(ELLIPTICITY_SLACK) {
        failures[2] = fail(
            format!(
                "gap {} outside [{}, {}]",
                fmt_f64(gap.gap),
                fmt_f64(gap.lower),
                fmt_f64(gap.upper)
            ),
            vec![("M", m1.clone()), ("P", p)],
        );
    }
    let ratio = (gap.norm > 0.0).then(|| gap.gap / gap.norm);

    let fp = envelope_value(&project(&m1), b)?;
    if (fp - f1).abs() > INVARIANCE_TOL * f1.abs().max(1.0) {
        failures[3] = fail(
            format!("F̃(M) = {} but F̃(proj M) = {}", fmt_f64(f1), fmt_f64(fp)),
            vec![("M", m1.clone())],
        );
    }

    let rotated = m1.conjugated(&w);
    let fr = envelope_value(&rotated, b)?;
    if (fr - f1).abs() > INVARIANCE_TOL * f1.abs().max(1.0) {
        failures[4] = fail(
            format!("F̃(M) = {} but F̃(W M Wᵀ) = {}", fmt_f64(f1), fmt_f64(fr)),
            vec![("M", m1), ("WMWt", rotated)],
        );
    }

    Ok(SampleOutcome { failures, ratio })
}

/// Runs `samples` seeded trials. Samples are evaluated in parallel on the
/// ambient rayon pool and reduced in index order, so the report does not
/// depend on the worker count.
pub fn verify_lemma(theta_box: &ThetaBox, samples: usize, seed: u64) -> Result<LemmaReport> {
    let outcomes: Vec<SampleOutcome> = (0..samples)
        .into_par_iter()
        .map(|i| check_sample(theta_box, seed, i))
        .collect::<Result<_>>()?;

    let mut properties: Vec<PropertyTally> = PROPERTY_NAMES
        .iter()
        .map(|&name| PropertyTally {
            name,
            passed: 0,
            failed: 0,
            first_failure: None,
        })
        .collect();
    let mut min_ratio: Option<f64> = None;
    let mut max_ratio: Option<f64> = None;
    for outcome in outcomes {
        for (tally, failure) in properties.iter_mut().zip(outcome.failures) {
            match failure {
                None => tally.passed += 1,
                Some(c) => {
                    tally.failed += 1;
                    tally.first_failure.get_or_insert(c);
                }
            }
        }
        if let Some(r) = outcome.ratio {
            min_ratio = Some(min_ratio.map_or(r, |m| m.min(r)));
            max_ratio = Some(max_ratio.map_or(r, |m| m.max(r)));
        }
    }
    Ok(LemmaReport {
        theta_box: *theta_box,
        samples,
        seed,
        properties,
        min_ratio,
        max_ratio,
    })
}

/// Grid resolution of the oracle used by [`verify_oracle`].
pub fn oracle_resolution(n: usize) -> usize {
    if n == 1 {
        2048
    } else {
        128
    }
}

/// Streams used by the oracle check start here so they never overlap the
/// `verify_lemma` samples of the same seed.
const ORACLE_STREAM_OFFSET: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub resolution: usize,
    pub samples: usize,
    pub tolerance: f64,
    pub worst_error: f64,
    pub failed: usize,
    pub first_failure: Option<Counterexample>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "oracle_equivalence: passed = {} failed = {} resolution = {} worst_error = {} tolerance = {}",
            self.samples - self.failed,
            self.failed,
            self.resolution,
            fmt_f64(self.worst_error),
            fmt_f64(self.tolerance)
        )
    }
}

/// Compares the envelope with the brute-force oracle on `samples` seeded
/// random matrices, within `5 / resolution`. Only `n ≤ 2`.
pub fn verify_oracle(
    theta_box: &ThetaBox,
    samples: usize,
    seed: u64,
    resolution: usize,
) -> Result<OracleReport> {
    let oracle = BruteForceOracle::new(theta_box, resolution)?;
    let tolerance = 5.0 / resolution as f64;
    let dim = 2 * theta_box.n();
    let errors: Vec<(SymmetricMatrix, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, ORACLE_STREAM_OFFSET + i as u64);
            let m = random_symmetric(&mut rng, dim, MAX_SHIFT);
            let exact = envelope_value(&m, theta_box)?;
            let grid = oracle.eval(&m)?;
            Ok((m, exact, grid))
        })
        .collect::<Result<_>>()?;
    let mut report = OracleReport {
        resolution,
        samples,
        tolerance,
        worst_error: 0.0,
        failed: 0,
        first_failure: None,
    };
    for (i, (m, exact, grid)) in errors.into_iter().enumerate() {
        let err = (exact - grid).abs();
        report.worst_error = report.worst_error.max(err);
        if !(err <= tolerance) {
            report.failed += 1;
            report.first_failure.get_or_insert(Counterexample {
                sample: i,
                detail: format!("envelope {} vs oracle {}", fmt_f64(exact), fmt_f64(grid)),
                matrices: vec![("M", m)],
            });
        }
    }
    Ok(report)
}
