//! Independent reference computations shared by the integration tests. None
//! of these call into the routine they are used to check.
#![allow(dead_code)]

use num_complex::Complex64;
use qsr_core::qmat::linalg::Matrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p^{⊗n}` as a flat vector.
pub fn product_distribution(p: &[f64], n: usize) -> Vec<f64> {
    let mut v = vec![1.0];
    for _ in 0..n {
        v = v
            .iter()
            .flat_map(|a| p.iter().map(move |b| a * b))
            .collect();
    }
    v
}

/// Minimal `Σ wᵢqᵢ` over tests with `Σ wᵢpᵢ ≥ 1 − ε`, found by visiting every
/// vertex of the feasible polytope: each subset accepted outright, optionally
/// topped up by a fractional weight on one outcome outside it.
pub fn type_ii_by_vertices(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let d = p.len();
    assert!(d <= 12, "vertex enumeration is exponential");
    let target = 1.0 - eps;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << d) {
        let inside = |i: usize| mask & (1 << i) != 0;
        let (ps, qs): (f64, f64) = (0..d)
            .filter(|&i| inside(i))
            .fold((0.0, 0.0), |(a, b), i| (a + p[i], b + q[i]));
        if ps >= target - 1e-15 {
            best = best.min(qs);
            continue;
        }
        for j in (0..d).filter(|&j| !inside(j) && p[j] > 0.0) {
            let w = (target - ps) / p[j];
            if w <= 1.0 {
                best = best.min(qs + w * q[j]);
            }
        }
    }
    best
}

fn entry(m: &Matrix, i: usize, j: usize) -> Complex64 {
    m[(i, j)]
}

/// Eigenvalues of a 2×2 Hermitian matrix, from the characteristic polynomial.
pub fn qubit_eigenvalues(m: &Matrix) -> [f64; 2] {
    let (a, d) = (entry(m, 0, 0).re, entry(m, 1, 1).re);
    let b = entry(m, 0, 1).norm();
    let r = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
    [0.5 * (a + d - r), 0.5 * (a + d + r)]
}

fn det2(m: &Matrix) -> f64 {
    (entry(m, 0, 0) * entry(m, 1, 1) - entry(m, 0, 1) * entry(m, 1, 0)).re
}

/// `F(ρ, σ)² = Tr(ρσ) + 2√(det ρ det σ)` for qubits.
pub fn qubit_fidelity(rho: &Matrix, sigma: &Matrix) -> f64 {
    let mut tr = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            tr += (entry(rho, i, j) * entry(sigma, j, i)).re;
        }
    }
    (tr + 2.0 * (det2(rho).max(0.0) * det2(sigma).max(0.0)).sqrt())
        .max(0.0)
        .sqrt()
}

fn h(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// `min_t D(ρ‖diag(t, 1−t))` by a grid followed by golden-section refinement.
pub fn qubit_coherence_by_search(rho: &Matrix) -> f64 {
    let s: f64 = qubit_eigenvalues(rho).iter().map(|&x| h(x)).sum();
    let (p0, p1) = (entry(rho, 0, 0).re, entry(rho, 1, 1).re);
    let objective = |t: f64| -s - p0 * t.log2() - p1 * (1.0 - t).log2();
    let grid = 2000;
    let mut best_t = 0.5;
    let mut best = f64::INFINITY;
    for k in 1..grid {
        let t = k as f64 / grid as f64;
        let v = objective(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let (mut lo, mut hi) = (
        (best_t - 1.0 / grid as f64).max(1e-12),
        (best_t + 1.0 / grid as f64).min(1.0 - 1e-12),
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if objective(a) < objective(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    objective(0.5 * (lo + hi)).min(best)
}

/// `(1/n) Σ_j ρ_{P Q_j} ⊗ σ^{⊗(n−1)}` on `P Q_1 … Q_n`, written entry by entry.
pub fn convex_split_by_entries(
    rho_pq: &Matrix,
    sigma: &Matrix,
    d_p: usize,
    d_q: usize,
    n: usize,
) -> Matrix {
    let dim = d_p * d_q.pow(n as u32);
    let digits = |mut x: usize| {
        let mut out = vec![0usize; n];
        for slot in out.iter_mut().rev() {
            *slot = x % d_q;
            x /= d_q;
        }
        out
    };
    let mut tau = Matrix::zeros(dim, dim);
    let block = d_q.pow(n as u32);
    for row in 0..dim {
        let (pr, qr) = (row / block, digits(row % block));
        for col in 0..dim {
            let (pc, qc) = (col / block, digits(col % block));
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let mut term = rho_pq[(pr * d_q + qr[j], pc * d_q + qc[j])];
                for i in (0..n).filter(|&i| i != j) {
                    term *= sigma[(qr[i], qc[i])];
                }
                acc += term;
            }
            tau[(row, col)] = acc / n as f64;
        }
    }
    tau
}
