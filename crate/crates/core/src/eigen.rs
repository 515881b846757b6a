//! Cyclic Jacobi eigensolver for the small dense symmetric matrices used
//! throughout the crate (dimension at most 16).

use crate::error::{Error, Result};

/// Sweep budget before [`Error::NoConvergence`] is reported.
pub const MAX_SWEEPS: usize = 50;

/// Eigen-decomposition `A = V diag(values) Vᵀ` with eigenvalues ascending.
/// `vectors` is row-major and column `k` is the eigenvector of `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.vectors[i * d + k]).collect()
    }
}

/// Diagonalizes the symmetric row-major `dim × dim` matrix `a` by cyclic
/// Jacobi rotations. Only the upper triangle is trusted.
pub fn jacobi_eigen(a: &[f64], dim: usize) -> Result<SymmetricEigen> {
    assert_eq!(a.len(), dim * dim, "jacobi_eigen: buffer length");
    let mut m = a.to_vec();
    for i in 0..dim {
        for j in 0..i {
            m[i * dim + j] = m[j * dim + i];
        }
    }
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }

    let frob2: f64 = m.iter().map(|x| x * x).sum();
    let target = (f64::EPSILON * f64::EPSILON) * frob2;

    let mut sweeps = 0;
    loop {
        let off2: f64 = (0..dim)
            .flat_map(|i| (i + 1..dim).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * m[i * dim + j] * m[i * dim + j])
            .sum();
        if off2 <= target || off2 == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                routine: "jacobi eigensolver",
                limit: MAX_SWEEPS,
            });
        }
        sweeps += 1;
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = m[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * dim + p];
                let aqq = m[q * dim + q];
                // rotation annihilating (p, q), small-angle branch for stability
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut m, dim, p, q, c, s);
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| m[i * dim + i].total_cmp(&m[j * dim + j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * dim + i]).collect();
    let mut vectors = vec![0.0; dim * dim];
    for (new, &old) in order.iter().enumerate() {
        for r in 0..dim {
            vectors[r * dim + new] = v[r * dim + old];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Applies `M ← Gᵀ M G` for the plane rotation G acting on indices (p, q).
fn rotate(m: &mut [f64], dim: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..dim {
        let mkp = m[k * dim + p];
        let mkq = m[k * dim + q];
        m[k * dim + p] = c * mkp - s * mkq;
        m[k * dim + q] = s * mkp + c * mkq;
    }
    for k in 0..dim {
        let mpk = m[p * dim + k];
        let mqk = m[q * dim + k];
        m[p * dim + k] = c * mpk - s * mqk;
        m[q * dim + k] = s * mpk + c * mqk;
    }
    m[p * dim + q] = 0.0;
    m[q * dim + p] = 0.0;
}
