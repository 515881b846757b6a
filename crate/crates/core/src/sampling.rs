//! Seeded random matrices for property checks. Every draw is keyed by
//! `(seed, stream)` so parallel workers reproduce the same samples.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envelope::ThetaBox;
use crate::matrix::{embed, project, HermitianMatrix, SymmetricMatrix};

pub type SampleRng = ChaCha8Rng;

pub fn sample_rng(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// I.i.d. uniform `[-1, 1]` entries, shifted by `s·I` with `s ~ U[0, max_shift]`.
pub fn random_symmetric(rng: &mut impl Rng, dim: usize, max_shift: f64) -> SymmetricMatrix {
    let entries: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let base = SymmetricMatrix::symmetrized(dim, entries);
    let s = if max_shift > 0.0 {
        rng.gen_range(0.0..=max_shift)
    } else {
        0.0
    };
    &base + &SymmetricMatrix::scaled_identity(dim, s)
}

/// `B Bᵀ` with `B` of random rank between 1 and `dim`.
pub fn random_psd(rng: &mut impl Rng, dim: usize) -> SymmetricMatrix {
    let rank = rng.gen_range(1..=dim);
    let b: Vec<f64> = (0..dim * rank).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    SymmetricMatrix::from_fn(dim, |i, j| {
        (0..rank).map(|k| b[i * rank + k] * b[j * rank + k]).sum()
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianMatrix {
    let re: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let im: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (re[i * n + j] + re[j * n + i]);
            b[i * n + j] = 0.5 * (im[i * n + j] - im[j * n + i]);
        }
    }
    HermitianMatrix::new(n, a, b).expect("random Hermitian is well formed")
}

/// Real embedding `[[Re U, -Im U], [Im U, Re U]]` of a random unitary `U`
/// (Gram-Schmidt on a random complex matrix). The result is orthogonal and
/// commutes with `J`.
pub fn random_unitary_embedding(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
            .collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let d = 2 * n;
    let mut w = vec![0.0; d * d];
    for i in 0..n {
        for j in 0..n {
            let z = cols[j][i];
            w[i * d + j] = z.re;
            w[i * d + j + n] = -z.im;
            w[(i + n) * d + j] = z.im;
            w[(i + n) * d + j + n] = z.re;
        }
    }
    w
}

/// A matrix in `E_θ`: `U diag(x) U*` with `x ~ U[θ, θ⁻¹]ⁿ`, plus a random
/// J-anti-invariant part that `proj` removes.
pub fn random_in_theta_box(rng: &mut impl Rng, theta_box: &ThetaBox) -> SymmetricMatrix {
    let n = theta_box.n();
    let (lo, hi) = (theta_box.lower(), theta_box.upper());
    let x: Vec<f64> = (0..n)
        .map(|_| if lo < hi { rng.gen_range(lo..=hi) } else { lo })
        .collect();
    let w = random_unitary_embedding(rng, n);
    let inside = embed(&HermitianMatrix::diagonal(&x)).conjugated(&w);
    let noise = random_symmetric(rng, 2 * n, 0.0);
    let anti = &noise - &project(&noise);
    let scale: f64 = rng.gen_range(0.0..=1.0);
    &inside + &anti.scaled(scale)
}
