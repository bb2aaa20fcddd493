//! Convex split: `τ = (1/n) Σ_j ρ_{PQ_j} ⊗ σ^{⊗(n−1)}` placed so that copy `j`
//! carries the correlated `Q`. Its fidelity with `ρ_P ⊗ σ^{⊗n}` approaches 1
//! once `n` exceeds `2^{D_max(ρ_PQ‖ρ_P⊗σ_Q)}`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{ceil_tolerant, check_budget, BOUND_SLACK};
use crate::entropy::SUPPORT_TOL;
use crate::entropy::{kernel_weight, max_relative_entropy_matrices};
use crate::qmat::linalg::{HermitianEigen, Matrix, C64, ZERO};
use crate::qmat::{fidelity_matrices, partial_trace, DensityOperator, Register, RegisterSystem};
use crate::{Error, Result};

/// Label of the `j`-th copy (1-based) of register `q`.
pub fn copy_label(q: &str, j: usize) -> String {
    format!("{q}_{j}")
}

/// How [`convex_split_fidelity`] evaluates the fidelity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FidelityRoute {
    /// Materialize both `(d_P d_Q^n)`-dimensional operators.
    Dense,
    /// Permutation-symmetric block decomposition; `Q` must be a qubit.
    SymmetricBlocks,
    /// Symmetric blocks when `d_Q = 2`, dense otherwise.
    Auto,
}

/// `ρ_PQ` reordered as `P ⊗ Q`, with `Q` the registers of `σ_Q`.
struct Roles {
    p: RegisterSystem,
    q: RegisterSystem,
    rho: Matrix,
    rho_p: Matrix,
    sigma: Matrix,
}

impl Roles {
    fn new(rho_pq: &DensityOperator, sigma_q: &DensityOperator) -> Result<Self> {
        let q_labels = sigma_q.system().labels();
        for l in &q_labels {
            let dim = rho_pq.system().dim_of(l)?;
            if dim != sigma_q.system().dim_of(l)? {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: sigma_q.system().dim_of(l)?,
                });
            }
        }
        let p_labels = rho_pq.system().complement(&q_labels)?;
        let mut order = p_labels.clone();
        order.extend_from_slice(&q_labels);
        let rho = rho_pq.reorder(&order)?;
        let rho_q = partial_trace(&rho, &q_labels)?;
        let se = HermitianEigen::new(sigma_q.matrix());
        if kernel_weight(rho_q.matrix(), &se) > SUPPORT_TOL {
            return Err(Error::SupportViolation);
        }
        let rho_p = if p_labels.is_empty() {
            Matrix::identity(1)
        } else {
            partial_trace(&rho, &p_labels)?.into_matrix()
        };
        Ok(Self {
            p: rho.system().select(&p_labels)?,
            q: sigma_q.system().clone(),
            rho: rho.into_matrix(),
            rho_p,
            sigma: sigma_q.matrix().clone(),
        })
    }

    fn d_p(&self) -> usize {
        self.p.dim()
    }

    fn d_q(&self) -> usize {
        self.q.dim()
    }

    fn output_system(&self, n: usize) -> Result<RegisterSystem> {
        let mut regs: Vec<Register> = self.p.registers().to_vec();
        for j in 1..=n {
            for r in self.q.registers() {
                regs.push(Register {
                    label: copy_label(&r.label, j),
                    dim: r.dim,
                });
            }
        }
        RegisterSystem::new(regs)
    }

    /// `(p, q_1 … q_n)` for every flat index of `P ⊗ Q^n`.
    fn digits(&self, n: usize) -> Vec<(usize, Vec<usize>)> {
        let dq = self.d_q();
        let block = dq.pow(n as u32);
        (0..self.d_p() * block)
            .map(|s| {
                let mut rest = s % block;
                let mut qs = alloc::vec![0usize; n];
                for slot in qs.iter_mut().rev() {
                    *slot = rest % dq;
                    rest /= dq;
                }
                (s / block, qs)
            })
            .collect()
    }

    fn dense_dim(&self, n: usize, budget: usize) -> Result<usize> {
        let dim = (self.d_q() as u128)
            .checked_pow(n as u32)
            .map(|x| x * self.d_p() as u128);
        match dim {
            Some(d) if d * d <= budget as u128 => Ok(d as usize),
            Some(d) => Err(Error::BudgetExceeded {
                required: usize::try_from(d * d).unwrap_or(usize::MAX),
                budget,
            }),
            None => Err(Error::BudgetExceeded {
                required: usize::MAX,
                budget,
            }),
        }
    }

    /// Dense `τ`, assembled entrywise so no intermediate term is stored.
    fn tau(&self, n: usize, budget: usize) -> Result<Matrix> {
        let dim = self.dense_dim(n, budget)?;
        let digits = self.digits(n);
        let dq = self.d_q();
        let inv_n = 1.0 / n as f64;
        Ok(Matrix::from_fn(dim, dim, |s, t| {
            let (p, qs) = &digits[s];
            let (pp, qt) = &digits[t];
            let mut acc = ZERO;
            for j in 0..n {
                let mut term = self.rho[(p * dq + qs[j], pp * dq + qt[j])];
                for i in (0..n).filter(|&i| i != j) {
                    if term == ZERO {
                        break;
                    }
                    term *= self.sigma[(qs[i], qt[i])];
                }
                acc += term;
            }
            acc * inv_n
        }))
    }

    /// Dense `ρ_P ⊗ σ^{⊗n}`.
    fn product(&self, n: usize, budget: usize) -> Result<Matrix> {
        let dim = self.dense_dim(n, budget)?;
        let digits = self.digits(n);
        Ok(Matrix::from_fn(dim, dim, |s, t| {
            let (p, qs) = &digits[s];
            let (pp, qt) = &digits[t];
            qs.iter()
                .zip(qt)
                .fold(self.rho_p[(*p, *pp)], |acc, (&a, &b)| {
                    acc * self.sigma[(a, b)]
                })
        }))
    }

    /// `Tr √(√ω τ √ω)` with `ω = ρ_P ⊗ σ^{⊗n}`, using that the operator
    /// commutes with permutations of the copies. On the irrep labelled by
    /// `k` singlet pairs (spin `m/2`, `m = n − 2k`, multiplicity
    /// `C(n,k)(m+1)/(n−k+1)`) the sum `Σ_j X_j ⊗ D^{⊗(n−1)}` acts as the
    /// derivative of `det(D)^k Sym^m(D)` along `X`, a tridiagonal matrix in
    /// the Dicke basis.
    fn symmetric_fidelity(&self, n: usize, budget: usize) -> Result<f64> {
        if self.d_q() != 2 {
            return Err(Error::InvalidParameter(format!(
                "symmetric-block fidelity needs a qubit Q, got dimension {}",
                self.d_q()
            )));
        }
        let d_p = self.d_p();
        check_budget(d_p.saturating_mul(n + 1), budget)?;
        // Rotate σ to diag(s0, s1); the fidelity is invariant under U^{⊗n}.
        let se = HermitianEigen::new(&self.sigma);
        let w = Matrix::identity(d_p).kron(&se.vectors);
        let rho = w.adjoint_matmul(&self.rho.matmul(&w));
        let s: Vec<f64> = se.values.iter().map(|x| x.max(0.0)).collect();
        let half = crate::qmat::linalg::psd_sqrt(&self.rho_p)
            .kron(&Matrix::diag_real(&[libm::sqrt(s[0]), libm::sqrt(s[1])]));
        let b = half.matmul(&rho).matmul(&half);
        let (d0, d1) = (s[0] * s[0], s[1] * s[1]);
        let inv_n = 1.0 / n as f64;

        let mut total = 0.0;
        let mut binom = 1.0f64; // C(n, k)
        for k in 0..=n / 2 {
            if k > 0 {
                binom = binom * (n - k + 1) as f64 / k as f64;
            }
            let m = n - 2 * k;
            let mult = binom * (m + 1) as f64 / (n - k + 1) as f64;
            let size = d_p * (m + 1);
            let mut g = Matrix::zeros(size, size);
            for a in 0..d_p {
                for c in 0..d_p {
                    let x = [
                        [b[(2 * a, 2 * c)], b[(2 * a, 2 * c + 1)]],
                        [b[(2 * a + 1, 2 * c)], b[(2 * a + 1, 2 * c + 1)]],
                    ];
                    let t = dicke_block(&x, d0, d1, k, m);
                    for i in 0..=m {
                        for j in 0..=m {
                            g[(a * (m + 1) + i, c * (m + 1) + j)] = t[(i, j)] * inv_n;
                        }
                    }
                }
            }
            let trace_sqrt: f64 = HermitianEigen::new(&g)
                .values
                .iter()
                .map(|&v| libm::sqrt(v.max(0.0)))
                .sum();
            total += mult * trace_sqrt;
        }
        Ok(total.clamp(0.0, 1.0))
    }
}

/// `x^e` with `e ≥ 0` and `0^0 = 1`.
fn pw(x: f64, e: usize) -> f64 {
    libm::pow(x, e as f64)
}

/// Action of `d/dt det(D+tX)^k Sym^m(D+tX)` at `t = 0` in the normalized
/// Dicke basis `|m, i⟩` (`i` excitations), `D = diag(d0, d1)`.
fn dicke_block(x: &[[C64; 2]; 2], d0: f64, d1: f64, k: usize, m: usize) -> Matrix {
    let det_k = pw(d0 * d1, k);
    let det_grad = x[0][0] * d1 + x[1][1] * d0;
    Matrix::from_fn(m + 1, m + 1, |row, col| {
        if row == col {
            let i = col;
            let mut v = ZERO;
            if m > i {
                v += x[0][0] * ((m - i) as f64 * pw(d0, m - i - 1) * pw(d1, i));
            }
            if i > 0 {
                v += x[1][1] * (i as f64 * pw(d0, m - i) * pw(d1, i - 1));
            }
            v *= det_k;
            if k > 0 {
                v += det_grad * (k as f64 * pw(d0 * d1, k - 1) * pw(d0, m - i) * pw(d1, i));
            }
            v
        } else if row == col + 1 {
            let i = col;
            x[1][0]
                * (det_k * libm::sqrt(((m - i) * (i + 1)) as f64) * pw(d0, m - i - 1) * pw(d1, i))
        } else if col == row + 1 {
            let i = col;
            x[0][1] * (det_k * libm::sqrt((i * (m - i + 1)) as f64) * pw(d0, m - i) * pw(d1, i - 1))
        } else {
            ZERO
        }
    })
}

/// The convex-split state on `P, Q_1 … Q_n` (copies labelled by [`copy_label`]),
/// where `Q` is the register set of `sigma_q` and `P` the rest of `rho_pq`.
/// `budget` caps the number of matrix entries.
pub fn convex_split_state(
    rho_pq: &DensityOperator,
    sigma_q: &DensityOperator,
    n: usize,
    budget: usize,
) -> Result<DensityOperator> {
    check_copies(n)?;
    let roles = Roles::new(rho_pq, sigma_q)?;
    let m = roles.tau(n, budget)?;
    Ok(DensityOperator::from_parts(
        roles.output_system(n)?,
        m,
        rho_pq.is_normalized() && sigma_q.is_normalized(),
    ))
}

/// `F(τ, ρ_P ⊗ σ^{⊗n})`.
pub fn convex_split_fidelity(
    rho_pq: &DensityOperator,
    sigma_q: &DensityOperator,
    n: usize,
    route: FidelityRoute,
    budget: usize,
) -> Result<f64> {
    check_copies(n)?;
    let roles = Roles::new(rho_pq, sigma_q)?;
    let route = match route {
        FidelityRoute::Auto if roles.d_q() == 2 => FidelityRoute::SymmetricBlocks,
        FidelityRoute::Auto => FidelityRoute::Dense,
        r => r,
    };
    match route {
        FidelityRoute::SymmetricBlocks => roles.symmetric_fidelity(n, budget),
        _ => Ok(fidelity_matrices(
            &roles.tau(n, budget)?,
            &roles.product(n, budget)?,
        )),
    }
}

fn check_copies(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter(
            "convex split needs n ≥ 1 copies".into(),
        ))
    } else {
        Ok(())
    }
}

/// Result of [`convex_split_bound_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexSplitCheck {
    /// Unsmoothed `D_max(ρ_PQ‖ρ_P⊗σ_Q)`.
    pub k: f64,
    pub n: usize,
    pub fidelity_sq: f64,
    /// `1 − (√δ + 2ε)²`
    pub bound: f64,
}

/// Runs the convex split at `n = ⌈2^k/δ⌉` and checks `F² ≥ 1 − (√δ + 2ε)²`.
/// `k` is the unsmoothed max-relative entropy, which upper-bounds every
/// smoothed value, so the check is valid for any `ε ≥ 0` including 0.
pub fn convex_split_bound_check(
    rho_pq: &DensityOperator,
    sigma_q: &DensityOperator,
    eps: f64,
    delta: f64,
    budget: usize,
) -> Result<ConvexSplitCheck> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidEpsilon(delta));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let roles = Roles::new(rho_pq, sigma_q)?;
    let k = max_relative_entropy_matrices(&roles.rho, &roles.rho_p.kron(&roles.sigma));
    if !k.finite {
        return Err(Error::SupportViolation);
    }
    let k = k.value.max(0.0);
    let n_real = ceil_tolerant(libm::pow(2.0, k) / delta);
    if n_real > budget as f64 {
        return Err(Error::BudgetExceeded {
            required: n_real as usize,
            budget,
        });
    }
    let n = (n_real as usize).max(1);
    let f = convex_split_fidelity(rho_pq, sigma_q, n, FidelityRoute::Auto, budget)?;
    let root = libm::sqrt(delta) + 2.0 * eps;
    let check = ConvexSplitCheck {
        k,
        n,
        fidelity_sq: f * f,
        bound: 1.0 - root * root,
    };
    if check.fidelity_sq < check.bound - BOUND_SLACK {
        return Err(Error::BoundViolated {
            what: "convex split fidelity".into(),
            measured: check.fidelity_sq,
            bound: check.bound,
        });
    }
    Ok(check)
}
