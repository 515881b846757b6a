//! Concave, uniformly elliptic extension of the complex Monge-Ampère
//! operator and a policy-iteration Dirichlet solver for `F̃(D²u) = g`.
//!
//! * [`matrix`]: the complex structure, Hermitian embedding, projection and
//!   the determinant operator `F`.
//! * [`envelope`]: the concave envelope `F̃` over `E_θ`, its certificates,
//!   a brute-force oracle and the randomized property checker.
//! * [`solver`]: grids, finite differences and Howard's algorithm.
//! * [`cli`]: the command implementations behind the `envma` binary.

pub mod cli;
pub mod eigen;
pub mod envelope;
pub mod error;
pub mod matrix;
pub mod matrix_io;
pub mod sampling;
pub mod solver;

pub use envelope::{
    conjugate_intercept, ellipticity_gap, envelope_eval, envelope_eval_bruteforce, envelope_value,
    verify_lemma, EnvelopeCertificate, ThetaBox,
};
pub use error::{Error, Result};
pub use matrix::{
    admissible_theta, embed, extract, herm_eigenvalues, in_theta_box, operator_f, project,
    spectral_norm, trace_inner, ComplexStructure, EigenSpectrum, HermitianMatrix, SymmetricMatrix,
};
