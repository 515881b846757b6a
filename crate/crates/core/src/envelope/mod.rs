//! The concave envelope `F̃` of `F = det(proj ·)^{1/2n}` over the matrix box
//! `E_θ = { N : θ I ≤ proj(N) ≤ θ⁻¹ I }`.
//!
//! `F̃(M)` is the infimum of `⟨proj N, M⟩ + c` over slopes `N ∈ E_θ` and
//! intercepts `c` such that the affine function majorizes `F` on `E_θ`.
//! The pairing is the Hermitian trace `Re tr_C`, i.e. half the real trace
//! on `Sym(2n)`.
//!
//! Both the objective and the constraint set are invariant under unitary
//! conjugation, so everything reduces to the Hermitian eigenvalues `μ` of
//! `proj(M)`:
//!
//! ```text
//! F̃(μ) = min_{p ∈ [θ, θ⁻¹]ⁿ} ⟨p, μ⟩ + g(p)
//!       = max_{x ∈ [θ, θ⁻¹]ⁿ} G(x) + Σ_i min_{p_i} p_i (μ_i - x_i)
//! ```
//!
//! with `G(x) = (∏ x_i)^{1/n}` and `g(p) = max_x G(x) - ⟨p, x⟩` the minimal
//! intercept. The saddle point is found exactly by a one-dimensional
//! monotone root search on the gauge `γ = G(x)`; see [`envelope_reduced`].

mod brute;
mod conjugate;
mod verify;

pub use brute::{envelope_eval_bruteforce, BruteForceOracle};
pub use conjugate::{conjugate_intercept, ConjugateValue, KKT_TOL, MAX_ACTIVE_SET_PASSES};
pub use verify::{
    oracle_resolution, verify_lemma, verify_oracle, Counterexample, LemmaReport, OracleReport,
    PropertyTally, PROPERTY_NAMES,
};

use crate::error::{Error, Result};
use crate::matrix::{
    collapse_pairs, geometric_mean, hermitian_pairing, project, projected_spectrum, spectral_norm,
    SymmetricMatrix,
};

/// Largest complex dimension accepted by [`ThetaBox`].
pub const MAX_N: usize = crate::matrix::MAX_DIM / 2;

/// The box parameter `θ ∈ (0, 1]` and complex dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaBox {
    theta: f64,
    n: usize,
    normalized: bool,
}

impl ThetaBox {
    /// `θ > 1` is replaced by `1/θ`, which describes the same box.
    pub fn new(theta: f64, n: usize) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidArgument(format!(
                "complex dimension must be in 1..={MAX_N}, got {n}"
            )));
        }
        let normalized = theta > 1.0;
        Ok(ThetaBox {
            theta: if normalized { 1.0 / theta } else { theta },
            n,
            normalized,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether the requested `θ` exceeded one and was inverted.
    pub fn was_normalized(&self) -> bool {
        self.normalized
    }

    pub fn lower(&self) -> f64 {
        self.theta
    }

    pub fn upper(&self) -> f64 {
        1.0 / self.theta
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower() - tol && v <= self.upper() + tol
    }
}

/// Envelope of a spectrum together with its saddle point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEnvelope {
    pub value: f64,
    /// Optimal slope eigenvalues `p*`, aligned with the input `μ`.
    pub slopes: Vec<f64>,
    /// Minimal intercept `g(p*)`.
    pub intercept: f64,
    /// Maximizer `x*` of `G(x) - ⟨p*, x⟩` over the box.
    pub maximizer: Vec<f64>,
}

/// Evaluates `F̃` on a Hermitian spectrum `mu`.
///
/// For a fixed gauge `γ` the optimal `x_i` solves a one-dimensional concave
/// problem, `x_i(γ) = clamp(clamp(μ_i, γθ/n, γ/(nθ)), θ, θ⁻¹)`, and the
/// saddle point is the fixed point `G(x(γ)) = γ`. In `s = ln γ` the map
/// `ln G(x(e^s)) - s` is piecewise linear and nonincreasing, with kinks only
/// where one of the clamps switches, so the root is located exactly by
/// scanning the sorted kinks and interpolating inside the bracketing piece.
pub fn envelope_reduced(mu: &[f64], theta_box: &ThetaBox) -> Result<ReducedEnvelope> {
    let n = theta_box.n();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            left: mu.len(),
            right: n,
        });
    }
    if mu.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "spectrum contains a non-finite value".into(),
        ));
    }
    let nf = n as f64;
    let theta = theta_box.theta();
    let (lo, hi) = (theta_box.lower(), theta_box.upper());

    let point = |gamma: f64| -> Vec<f64> {
        mu.iter()
            .map(|&m| {
                m.clamp(gamma * theta / nf, gamma / (nf * theta))
                    .clamp(lo, hi)
            })
            .collect()
    };
    let defect = |gamma: f64| geometric_mean(&point(gamma)).ln() - gamma.ln();

    let mut kinks = vec![lo, hi, nf, nf * theta * theta, nf / (theta * theta)];
    for &m in mu.iter().filter(|&&m| m > 0.0) {
        kinks.push(nf * m / theta);
        kinks.push(nf * m * theta);
    }
    kinks.retain(|&k| k >= lo && k <= hi);
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();

    let values: Vec<f64> = kinks.iter().map(|&k| defect(k)).collect();
    let j = values
        .iter()
        .position(|&v| v <= 0.0)
        .unwrap_or(values.len() - 1);
    let gamma = if j == 0 {
        kinks[0]
    } else {
        let (sa, sb) = (kinks[j - 1].ln(), kinks[j].ln());
        let (da, db) = (values[j - 1], values[j]);
        (sa + da * (sb - sa) / (da - db))
            .exp()
            .clamp(kinks[j - 1], kinks[j])
    };

    let x = point(gamma);
    let gx = geometric_mean(&x);
    let slopes: Vec<f64> = x
        .iter()
        .zip(mu)
        .map(|(&xi, &mi)| {
            if xi < mi {
                lo
            } else if xi > mi {
                hi
            } else {
                (gx / (nf * xi)).clamp(lo, hi)
            }
        })
        .collect();
    let intercept = gx - dot(&slopes, &x);
    let value = gx
        + slopes
            .iter()
            .zip(mu.iter().zip(&x))
            .map(|(p, (m, xi))| p * (m - xi))
            .sum::<f64>();
    Ok(ReducedEnvelope {
        value,
        slopes,
        intercept,
        maximizer: x,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `F̃(M)` with an optimality certificate `(slope_matrix, intercept)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCertificate {
    pub value: f64,
    /// Hermitian eigenvalues of `proj(M)`, ascending.
    pub spectrum: Vec<f64>,
    /// Optimal slope eigenvalues, paired with `spectrum`.
    pub slope_eigen: Vec<f64>,
    pub intercept: f64,
    /// `N*`, J-commuting, diagonal in the eigenbasis of `proj(M)`; doubles
    /// as the Bellman policy.
    pub slope_matrix: SymmetricMatrix,
    pub maximizer: Vec<f64>,
}

impl EnvelopeCertificate {
    /// The certifying affine function `X ↦ ⟨N*, X⟩ + c*`.
    pub fn affine_value(&self, x: &SymmetricMatrix) -> f64 {
        hermitian_pairing(&self.slope_matrix, x) + self.intercept
    }
}

/// Spectrum-only view of a matrix: the Hermitian eigenvalues of `proj(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenReduced {
    pub values: Vec<f64>,
}

impl EigenReduced {
    pub fn of(m: &SymmetricMatrix) -> Result<Self> {
        Ok(EigenReduced {
            values: projected_spectrum(m)?.values,
        })
    }
}

fn check_dim(m: &SymmetricMatrix, theta_box: &ThetaBox) -> Result<()> {
    if m.n() != theta_box.n() {
        return Err(Error::DimensionMismatch {
            left: m.n(),
            right: theta_box.n(),
        });
    }
    Ok(())
}

/// Evaluates `F̃(M)` and assembles the certificate.
pub fn envelope_eval(m: &SymmetricMatrix, theta_box: &ThetaBox) -> Result<EnvelopeCertificate> {
    check_dim(m, theta_box)?;
    let pm = project(m);
    let eig = pm.eigen()?;
    let spectrum = collapse_pairs(&eig.values);
    let red = envelope_reduced(&spectrum, theta_box)?;

    // eigenvalues of the real embedding come in J-invariant pairs (2k, 2k+1)
    let d = m.dim();
    let mut s = vec![0.0; d * d];
    for (k, &p) in red.slopes.iter().enumerate() {
        for col in [2 * k, 2 * k + 1] {
            let v = eig.vector(col);
            for i in 0..d {
                for j in 0..d {
                    s[i * d + j] += p * v[i] * v[j];
                }
            }
        }
    }
    let slope_matrix = project(&SymmetricMatrix::symmetrized(d, s));

    Ok(EnvelopeCertificate {
        value: red.value,
        spectrum,
        slope_eigen: red.slopes,
        intercept: red.intercept,
        slope_matrix,
        maximizer: red.maximizer,
    })
}

/// `F̃(M)` only.
pub fn envelope_value(m: &SymmetricMatrix, theta_box: &ThetaBox) -> Result<f64> {
    check_dim(m, theta_box)?;
    let spec = projected_spectrum(m)?;
    Ok(envelope_reduced(&spec.values, theta_box)?.value)
}

/// `F̃(M + P) - F̃(M)` against the two-sided ellipticity bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityGap {
    /// `θ · λ_max(proj P)`.
    pub lower: f64,
    pub gap: f64,
    /// `2n θ⁻¹ ‖P‖`.
    pub upper: f64,
    /// Spectral norm `‖P‖`.
    pub norm: f64,
}

impl EllipticityGap {
    /// `θ ‖P‖`.
    pub fn norm_lower(&self, theta_box: &ThetaBox) -> f64 {
        theta_box.theta() * self.norm
    }

    /// `θ / (4n) · ‖P‖`.
    pub fn loose_lower(&self, theta_box: &ThetaBox) -> f64 {
        theta_box.theta() / (4.0 * theta_box.n() as f64) * self.norm
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.gap >= self.lower - slack && self.gap <= self.upper + slack
    }
}

pub fn ellipticity_gap(
    m: &SymmetricMatrix,
    p: &SymmetricMatrix,
    theta_box: &ThetaBox,
) -> Result<EllipticityGap> {
    check_dim(m, theta_box)?;
    check_dim(p, theta_box)?;
    let eig = p.eigen()?;
    let norm = spectral_norm(p)?;
    let min = eig.values[0];
    if min < -1e-12 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd(min));
    }
    let lam_max = projected_spectrum(p)?.max().max(0.0);
    let gap = envelope_value(&(m + p), theta_box)? - envelope_value(m, theta_box)?;
    let theta = theta_box.theta();
    Ok(EllipticityGap {
        lower: theta * lam_max,
        gap,
        upper: 2.0 * theta_box.n() as f64 / theta * norm,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{embed, HermitianMatrix};

    fn half() -> ThetaBox {
        ThetaBox::new(0.5, 1).unwrap()
    }

    /// Grid search over (p, x) ∈ [θ, θ⁻¹]² for n = 1: min_p max_x x + p(μ - x).
    fn grid_oracle_1d(mu: f64, theta: f64, steps: usize) -> f64 {
        let (lo, hi) = (theta, 1.0 / theta);
        let node = |k: usize| lo + (hi - lo) * k as f64 / steps as f64;
        (0..=steps)
            .map(|i| {
                let p = node(i);
                let inner = (0..=steps)
                    .map(|k| node(k) * (1.0 - p))
                    .fold(f64::MIN, f64::max);
                p * mu + inner
            })
            .fold(f64::MAX, f64::min)
    }

    #[test]
    fn one_dimensional_spot_values_match_grid_oracle() {
        // frozen from grid_oracle_1d(mu, 0.5, 15_000) (step 1e-4); the optima sit on grid nodes
        for (mu, expected) in [(4.0, 3.0), (0.0, -0.5), (1.0, 1.0), (8.0, 5.0), (5.0, 3.5)] {
            let oracle = grid_oracle_1d(mu, 0.5, 15_000);
            assert!((oracle - expected).abs() < 1e-9, "oracle {oracle} at {mu}");
            let got = envelope_reduced(&[mu], &half()).unwrap().value;
            assert!((got - expected).abs() < 1e-12, "F̃({mu}) = {got}");
        }
    }

    #[test]
    fn certificate_slopes_for_branches() {
        let hi = envelope_reduced(&[4.0], &half()).unwrap();
        assert_eq!(hi.slopes, vec![0.5]);
        let lo = envelope_reduced(&[0.0], &half()).unwrap();
        assert_eq!(lo.slopes, vec![2.0]);
    }

    #[test]
    fn envelope_eval_on_identity_agrees_with_f() {
        let cert = envelope_eval(&SymmetricMatrix::identity(2), &half()).unwrap();
        assert!((cert.value - 1.0).abs() < 1e-14);
        let back = cert.affine_value(&SymmetricMatrix::identity(2));
        assert!((back - cert.value).abs() < 1e-14);
    }

    #[test]
    fn theta_one_collapses_to_single_affine_function() {
        let b = ThetaBox::new(1.0, 2).unwrap();
        let m = embed(&HermitianMatrix::diagonal(&[3.0, -1.0]));
        let cert = envelope_eval(&m, &b).unwrap();
        // slopes are all 1, intercept g(1) = max over {1} of 1 - 2 = -1
        assert!((cert.value - (3.0 - 1.0 - 1.0)).abs() < 1e-14);
        assert_eq!(cert.slope_eigen, vec![1.0, 1.0]);
    }

    #[test]
    fn theta_above_one_is_normalized() {
        let b = ThetaBox::new(1.5, 1).unwrap();
        assert!((b.theta() - 2.0 / 3.0).abs() < 1e-16);
        assert!(b.was_normalized());
        assert!(ThetaBox::new(0.0, 1).is_err());
        assert!(ThetaBox::new(0.5, 9).is_err());
    }

    #[test]
    fn certificate_value_matches_affine_form() {
        let b = ThetaBox::new(0.3, 2).unwrap();
        let m = SymmetricMatrix::from_fn(4, |i, j| ((i + 2 * j) % 5) as f64 * 0.7 - 1.0);
        let cert = envelope_eval(&m, &b).unwrap();
        let affine = cert.affine_value(&m);
        assert!((affine - cert.value).abs() <= 1e-9 * cert.value.abs().max(1.0));
        for p in &cert.slope_eigen {
            assert!(b.contains(*p, 1e-15));
        }
    }

    #[test]
    fn ellipticity_examples() {
        let b = half();
        let i2 = SymmetricMatrix::identity(2);
        let e = ellipticity_gap(&i2, &i2, &b).unwrap();
        assert!((e.gap - 1.0).abs() < 1e-14);
        assert!((e.lower - 0.5).abs() < 1e-15 && (e.upper - 4.0).abs() < 1e-15);

        let zero = SymmetricMatrix::zeros(2);
        let e = ellipticity_gap(&i2, &zero, &b).unwrap();
        assert_eq!((e.lower, e.gap, e.upper), (0.0, 0.0, 0.0));

        let m4 = SymmetricMatrix::scaled_identity(2, 4.0);
        let e = ellipticity_gap(&m4, &i2, &b).unwrap();
        assert!((e.gap - 0.5).abs() < 1e-14);

        let neg = SymmetricMatrix::diagonal(&[1.0, -0.1]).unwrap();
        assert!(matches!(
            ellipticity_gap(&i2, &neg, &b),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn homogeneity_fails_outside_the_box() {
        let b = half();
        let f4 = envelope_reduced(&[4.0], &b).unwrap().value;
        let f8 = envelope_reduced(&[8.0], &b).unwrap().value;
        assert!((f8 - 5.0).abs() < 1e-14);
        assert!((f8 - 2.0 * f4).abs() > 0.5);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let b = ThetaBox::new(0.5, 2).unwrap();
        assert!(matches!(
            envelope_eval(&SymmetricMatrix::identity(2), &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
