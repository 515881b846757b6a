//! Discretization oracle for `F̃`, independent of the saddle-point solver.
//!
//! Slope eigenvalues and inner points both range over uniform grids of the
//! box. The table of discrete intercepts `max_x G(x) - ⟨p, x⟩` depends only
//! on the box, so it is computed once per oracle and reused across
//! matrices. Every ordering of the slope grid is visited, which covers all
//! pairings of slopes with eigenvalues.

use crate::error::{Error, Result};
use crate::matrix::{projected_spectrum, SymmetricMatrix};

use super::ThetaBox;

pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone)]
pub struct BruteForceOracle {
    theta_box: ThetaBox,
    resolution: usize,
    nodes: Vec<f64>,
    intercepts: Vec<f64>,
}

impl BruteForceOracle {
    /// Cost is `resolution^{2n}`; only `n ≤ 2` is supported.
    pub fn new(theta_box: &ThetaBox, resolution: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooCoarse(resolution));
        }
        let n = theta_box.n();
        if n > 2 {
            return Err(Error::InvalidArgument(format!(
                "brute-force oracle supports n <= 2, got n = {n}"
            )));
        }
        let (lo, hi) = (theta_box.lower(), theta_box.upper());
        let step = (hi - lo) / (resolution - 1) as f64;
        let nodes: Vec<f64> = (0..resolution).map(|k| lo + step * k as f64).collect();

        let intercepts = if n == 1 {
            nodes
                .iter()
                .map(|p| {
                    nodes
                        .iter()
                        .map(|x| x - p * x)
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        } else {
            let roots: Vec<f64> = nodes.iter().map(|x| x.sqrt()).collect();
            let r = resolution;
            let mut table = vec![0.0; r * r];
            for i in 0..r {
                for j in 0..=i {
                    let (pi, pj) = (nodes[i], nodes[j]);
                    let mut best = f64::NEG_INFINITY;
                    for k in 0..r {
                        let (sk, xk) = (roots[k], nodes[k]);
                        let row = roots
                            .iter()
                            .zip(&nodes)
                            .map(|(sl, xl)| sk * sl - pj * xl)
                            .fold(f64::NEG_INFINITY, f64::max);
                        best = best.max(row - pi * xk);
                    }
                    table[i * r + j] = best;
                    table[j * r + i] = best;
                }
            }
            table
        };

        Ok(BruteForceOracle {
            theta_box: *theta_box,
            resolution,
            nodes,
            intercepts,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn theta_box(&self) -> &ThetaBox {
        &self.theta_box
    }

    /// Discrete envelope of a Hermitian spectrum.
    pub fn eval_spectrum(&self, mu: &[f64]) -> Result<f64> {
        let n = self.theta_box.n();
        if mu.len() != n {
            return Err(Error::DimensionMismatch {
                left: mu.len(),
                right: n,
            });
        }
        let r = self.resolution;
        let best = if n == 1 {
            self.nodes
                .iter()
                .zip(&self.intercepts)
                .map(|(p, c)| p * mu[0] + c)
                .fold(f64::INFINITY, f64::min)
        } else {
            let mut best = f64::INFINITY;
            for i in 0..r {
                for j in 0..r {
                    let v =
                        self.nodes[i] * mu[0] + self.nodes[j] * mu[1] + self.intercepts[i * r + j];
                    best = best.min(v);
                }
            }
            best
        };
        Ok(best)
    }

    pub fn eval(&self, m: &SymmetricMatrix) -> Result<f64> {
        if m.n() != self.theta_box.n() {
            return Err(Error::DimensionMismatch {
                left: m.n(),
                right: self.theta_box.n(),
            });
        }
        self.eval_spectrum(&projected_spectrum(m)?.values)
    }
}

/// One-shot brute-force evaluation; prefer [`BruteForceOracle`] when
/// evaluating many matrices against the same box.
pub fn envelope_eval_bruteforce(
    m: &SymmetricMatrix,
    theta_box: &ThetaBox,
    resolution: usize,
) -> Result<f64> {
    BruteForceOracle::new(theta_box, resolution)?.eval(m)
}
