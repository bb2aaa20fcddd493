//! Seeded random states. Every generator consumes a caller-supplied
//! `RngCore`, so a fixed seed regenerates identical instances.
//!
//! Pure states are Haar distributed: i.i.d. complex Gaussian amplitudes,
//! normalized. Mixed states are marginals of a Haar pure state on the system
//! plus an environment.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::qmat::linalg::{complete_orthonormal, inner, norm, Matrix, C64};
use crate::qmat::{DensityOperator, RegisterSystem, StateVector};
use crate::Result;

/// Uniform in `[0, 1)` with 53 random bits.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal by Box–Muller.
pub fn gaussian<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

pub fn complex_gaussian<R: RngCore + ?Sized>(rng: &mut R) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

/// Haar random unit vector of length `d`.
pub fn haar_vector<R: RngCore + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    let n = norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

pub fn pure_state<R: RngCore + ?Sized>(rng: &mut R, system: RegisterSystem) -> StateVector {
    let v = haar_vector(rng, system.dim());
    StateVector::from_parts(system, v)
}

/// Marginal of a Haar pure state on `system ⊗ C^env_dim` (rank ≤ `env_dim`).
pub fn mixed_state<R: RngCore + ?Sized>(
    rng: &mut R,
    system: RegisterSystem,
    env_dim: usize,
) -> DensityOperator {
    let d = system.dim();
    let v = haar_vector(rng, d * env_dim);
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..env_dim {
                acc += v[i * env_dim + e] * v[j * env_dim + e].conj();
            }
            m[(i, j)] = acc;
            m[(j, i)] = acc.conj();
        }
    }
    DensityOperator::from_parts(system, m, true)
}

/// Full-rank mixed state (environment as large as the system).
pub fn full_rank_state<R: RngCore + ?Sized>(
    rng: &mut R,
    system: RegisterSystem,
) -> DensityOperator {
    let d = system.dim();
    mixed_state(rng, system, d)
}

/// Random probability vector: normalized squared moduli of a Haar vector.
pub fn probability_vector<R: RngCore + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    haar_vector(rng, d).iter().map(|z| z.norm_sqr()).collect()
}

/// Diagonal state with Haar-induced populations.
pub fn diagonal_state<R: RngCore + ?Sized>(
    rng: &mut R,
    system: RegisterSystem,
) -> Result<DensityOperator> {
    let p = probability_vector(rng, system.dim());
    let total: f64 = p.iter().sum();
    let p: Vec<f64> = p.iter().map(|x| x / total).collect();
    DensityOperator::from_diagonal(system, &p)
}

/// Haar unitary via Gram–Schmidt on Gaussian columns.
pub fn unitary<R: RngCore + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        for _ in 0..2 {
            for b in &cols {
                let ov = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= ov * y;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    Matrix::from_columns(&complete_orthonormal(cols, d))
}

/// Isometry `C^d_in → C^d_out` as the first `d_in` columns of a Haar unitary.
/// Panics unless `d_in ≤ d_out`.
pub fn isometry<R: RngCore + ?Sized>(rng: &mut R, d_in: usize, d_out: usize) -> Matrix {
    assert!(
        d_in <= d_out,
        "no isometry from dimension {d_in} into {d_out}"
    );
    let u = unitary(rng, d_out);
    Matrix::from_fn(d_out, d_in, |i, j| u[(i, j)])
}

/// Random rank-`rank` orthogonal projector on `C^d`.
pub fn projector<R: RngCore + ?Sized>(rng: &mut R, d: usize, rank: usize) -> Matrix {
    let u = unitary(rng, d);
    let mut p = Matrix::zeros(d, d);
    for k in 0..rank.min(d) {
        let col = u.column(k);
        p = &p + &Matrix::outer(&col, &col);
    }
    p
}

/// Random `0 ⪯ A ⪯ I`: Haar eigenbasis, uniform eigenvalues in `[0, 1]`.
pub fn contraction<R: RngCore + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    let u = unitary(rng, d);
    let vals: Vec<f64> = (0..d).map(|_| uniform(rng)).collect();
    u.matmul(&Matrix::diag_real(&vals)).matmul(&u.adjoint())
}

/// Kraus operators of a random channel `C^d_in → C^d_out` with `num_kraus`
/// operators, cut from a Haar isometry into `C^d_out ⊗ C^num_kraus`.
/// Panics unless `d_in ≤ d_out · num_kraus`.
pub fn kraus_operators<R: RngCore + ?Sized>(
    rng: &mut R,
    d_in: usize,
    d_out: usize,
    num_kraus: usize,
) -> Vec<Matrix> {
    let v = isometry(rng, d_in, d_out * num_kraus);
    (0..num_kraus)
        .map(|k| Matrix::from_fn(d_out, d_in, |o, i| v[(o * num_kraus + k, i)]))
        .collect()
}
