use crate::error::{Error, Result};
use crate::matrix::geometric_mean;

use super::{dot, ThetaBox};

pub const MAX_ACTIVE_SET_PASSES: usize = 100;

/// Relative stationarity residual `|G(x)/γ - 1|` accepted as converged.
pub const KKT_TOL: f64 = 1e-11;

/// `g(p) = max_{x ∈ [θ, θ⁻¹]ⁿ} (∏ x_i)^{1/n} - ⟨p, x⟩` and its maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateValue {
    pub value: f64,
    pub maximizer: Vec<f64>,
    pub passes: usize,
}

impl ConjugateValue {
    /// `∇g(p) = -x*(p)`.
    pub fn gradient(&self) -> Vec<f64> {
        self.maximizer.iter().map(|x| -x).collect()
    }
}

/// Minimal intercept for slope eigenvalues `p`, by active-set iteration.
///
/// Free coordinates satisfy `x_i = G(x) / (n p_i)`; the rest sit on the box.
/// With the active set frozen the stationarity system has the closed form
/// `G^{n-k} = ∏_{clamped} x_i / ∏_{free} (n p_i)` for `k < n` free
/// coordinates. Each pass re-solves it for the current set and re-clamps;
/// a bracket on the gauge `G` falls back to bisection if a pass leaves it.
pub fn conjugate_intercept(p: &[f64], theta_box: &ThetaBox) -> Result<ConjugateValue> {
    let n = theta_box.n();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: n,
        });
    }
    let (lo_b, hi_b) = (theta_box.lower(), theta_box.upper());
    if let Some(bad) = p
        .iter()
        .find(|&&v| !(v >= lo_b * (1.0 - 1e-12) && v <= hi_b * (1.0 + 1e-12)))
    {
        return Err(Error::InvalidArgument(format!(
            "slope {bad} outside [{lo_b}, {hi_b}]"
        )));
    }
    let p: Vec<f64> = p.iter().map(|v| v.clamp(lo_b, hi_b)).collect();
    let nf = n as f64;
    let at = |gamma: f64| -> Vec<f64> {
        p.iter()
            .map(|pi| (gamma / (nf * pi)).clamp(lo_b, hi_b))
            .collect()
    };

    let (mut lo, mut hi) = (lo_b, hi_b);
    let mut gamma = (lo * hi).sqrt();
    for pass in 1..=MAX_ACTIVE_SET_PASSES {
        let x = at(gamma);
        let gx = geometric_mean(&x);
        if (gx - gamma).abs() <= KKT_TOL * gamma {
            return Ok(ConjugateValue {
                value: gx - dot(&p, &x),
                maximizer: x,
                passes: pass,
            });
        }
        if gx > gamma {
            lo = gamma;
        } else {
            hi = gamma;
        }

        let mut clamped_log = 0.0;
        let mut free_log = 0.0;
        let mut free = 0;
        for (xi, pi) in x.iter().zip(&p) {
            let t = gamma / (nf * pi);
            if t > lo_b && t < hi_b {
                free += 1;
                free_log += (nf * pi).ln();
            } else {
                clamped_log += xi.ln();
            }
        }
        let candidate = if free < n {
            ((clamped_log - free_log) / (n - free) as f64).exp()
        } else {
            f64::NAN
        };
        gamma = if candidate > lo && candidate < hi {
            candidate
        } else {
            (lo * hi).sqrt()
        };
    }
    Err(Error::NoConvergence {
        routine: "conjugate active-set",
        limit: MAX_ACTIVE_SET_PASSES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Uniform grid search of G(x) - ⟨p, x⟩ for n ≤ 2.
    fn grid_conjugate(p: &[f64], theta: f64, steps: usize) -> f64 {
        let (lo, hi) = (theta, 1.0 / theta);
        let node = |k: usize| lo + (hi - lo) * k as f64 / steps as f64;
        match p.len() {
            1 => (0..=steps)
                .map(|k| node(k) * (1.0 - p[0]))
                .fold(f64::MIN, f64::max),
            2 => {
                let mut best = f64::MIN;
                for a in 0..=steps {
                    for b in 0..=steps {
                        let (x, y) = (node(a), node(b));
                        best = best.max((x * y).sqrt() - p[0] * x - p[1] * y);
                    }
                }
                best
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn scalar_examples() {
        let b = ThetaBox::new(0.5, 1).unwrap();
        let c = conjugate_intercept(&[1.0], &b).unwrap();
        assert!(c.value.abs() < 1e-15);
        let c = conjugate_intercept(&[0.5], &b).unwrap();
        assert!((c.value - 1.0).abs() < 1e-12);
        assert!((c.maximizer[0] - 2.0).abs() < 1e-12);
        assert!((grid_conjugate(&[0.5], 0.5, 1_500_000) - 1.0).abs() < 1e-6);
        let c = conjugate_intercept(&[2.0], &b).unwrap();
        assert!((c.value + 0.5).abs() < 1e-12);
        assert!((c.maximizer[0] - 0.5).abs() < 1e-12);
        assert!((grid_conjugate(&[2.0], 0.5, 1_500_000) + 0.5).abs() < 1e-6);
    }

    #[test]
    fn two_dimensional_matches_grid() {
        let b = ThetaBox::new(0.4, 2).unwrap();
        for p in [
            [0.4, 2.5],
            [0.7, 0.7],
            [1.3, 0.45],
            [2.5, 2.5],
            [0.5, 0.5],
            [0.9, 0.3 / 0.4],
        ] {
            let exact = conjugate_intercept(&p, &b).unwrap();
            let grid = grid_conjugate(&p, 0.4, 1200);
            assert!(
                exact.value >= grid - 1e-12,
                "{p:?}: {} < {grid}",
                exact.value
            );
            assert!(
                exact.value - grid < 5e-5,
                "{p:?}: {} vs {grid}",
                exact.value
            );
        }
    }

    #[test]
    fn rejects_slopes_outside_box() {
        let b = ThetaBox::new(0.5, 1).unwrap();
        assert!(matches!(
            conjugate_intercept(&[3.0], &b),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            conjugate_intercept(&[1.0, 1.0], &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn degenerate_box_is_a_point() {
        let b = ThetaBox::new(1.0, 3).unwrap();
        let c = conjugate_intercept(&[1.0, 1.0, 1.0], &b).unwrap();
        assert_eq!(c.maximizer, vec![1.0; 3]);
        assert!((c.value + 2.0).abs() < 1e-15);
        assert_eq!(c.passes, 1);
    }
}
