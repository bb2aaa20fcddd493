//! Entropic quantities in bits.
//!
//! Relative-entropy-type functions return [`EntropicValue`] so that support
//! violations surface as an explicit `+∞` instead of a NaN. Eigenvalues at or
//! below [`EIG_ZERO`](crate::EIG_ZERO) count as zero everywhere.

use alloc::vec::Vec;

use crate::coherence::{dephase_all, CollapsingMap};
use crate::qmat::linalg::{trace_norm, HermitianEigen, Matrix, C64};
use crate::qmat::{partial_trace, DensityOperator};
use crate::{Error, Result, EIG_ZERO, TAU_NORM, TAU_PSD};

/// Kernel mass of `ρ` outside `supp σ` above which the support test fails.
pub const SUPPORT_TOL: f64 = 1e-10;
/// `‖[ρ,σ]‖₁` at or below which a pair is treated as commuting.
pub const COMMUTE_TOL: f64 = 1e-9;

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// A value in bits, or `+∞` (`finite == false`) after a support violation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropicValue {
    pub value: f64,
    pub finite: bool,
}

impl EntropicValue {
    pub fn finite(value: f64) -> Self {
        Self {
            value,
            finite: true,
        }
    }

    pub fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            finite: false,
        }
    }

    /// `f64::INFINITY` when not finite.
    pub fn as_f64(self) -> f64 {
        if self.finite {
            self.value
        } else {
            f64::INFINITY
        }
    }

    /// `self ≤ other + tol`, with `+∞ ≤ +∞`.
    pub fn le_with_tol(self, other: EntropicValue, tol: f64) -> bool {
        match (self.finite, other.finite) {
            (_, false) => true,
            (false, true) => false,
            (true, true) => self.value <= other.value + tol,
        }
    }
}

/// Probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| p < -TAU_PSD || p.is_nan()) {
            return Err(Error::InvalidState("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TAU_NORM {
            return Err(Error::InvalidState(alloc::format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p.max(0.0)).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }
}

/// `−Σ p log₂ p` over entries above the zero threshold.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > EIG_ZERO)
        .map(|&x| -x * log2(x))
        .sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    shannon_entropy(&rho.eigenvalues())
}

fn check_pair(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    if rho.system() != sigma.system() {
        return Err(Error::SystemMismatch);
    }
    Ok(())
}

/// Largest eigenvalue of `ρ` compressed to `ker σ`.
pub(crate) fn kernel_weight(rho: &Matrix, sigma: &HermitianEigen) -> f64 {
    let ker: Vec<usize> = (0..sigma.dim())
        .filter(|&k| sigma.values[k] <= EIG_ZERO)
        .collect();
    if ker.is_empty() {
        return 0.0;
    }
    let v = Matrix::from_fn(rho.rows(), ker.len(), |i, j| sigma.vectors[(i, ker[j])]);
    HermitianEigen::new(&v.adjoint_matmul(&rho.matmul(&v))).max_value()
}

/// `Tr ρ log₂ ρ − Tr ρ log₂ σ`, `+∞` when `supp ρ ⊄ supp σ`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<EntropicValue> {
    check_pair(rho, sigma)?;
    Ok(relative_entropy_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn relative_entropy_matrices(rho: &Matrix, sigma: &Matrix) -> EntropicValue {
    let se = HermitianEigen::new(sigma);
    if kernel_weight(rho, &se) > SUPPORT_TOL {
        return EntropicValue::infinite();
    }
    let re = HermitianEigen::new(rho);
    let neg_entropy: f64 = re
        .values
        .iter()
        .filter(|&&x| x > EIG_ZERO)
        .map(|&x| x * log2(x))
        .sum();
    let mut cross = 0.0;
    for k in 0..se.dim() {
        let s = se.values[k];
        if s <= EIG_ZERO {
            continue;
        }
        let v = se.vector(k);
        let w = quad_form(rho, &v);
        cross += w * log2(s);
    }
    EntropicValue::finite((neg_entropy - cross).max(0.0))
}

/// `⟨v|A|v⟩` (real part).
fn quad_form(a: &Matrix, v: &[C64]) -> f64 {
    let av = a.mul_vec(v);
    v.iter().zip(&av).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `log₂ λ_max(σ^{−1/2} ρ σ^{−1/2})` on `supp σ`.
pub fn max_relative_entropy(
    rho: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<EntropicValue> {
    check_pair(rho, sigma)?;
    Ok(max_relative_entropy_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn max_relative_entropy_matrices(rho: &Matrix, sigma: &Matrix) -> EntropicValue {
    let se = HermitianEigen::new(sigma);
    if kernel_weight(rho, &se) > SUPPORT_TOL {
        return EntropicValue::infinite();
    }
    let inv_sqrt = se.map(|x| {
        if x > EIG_ZERO {
            1.0 / libm::sqrt(x)
        } else {
            0.0
        }
    });
    let m = inv_sqrt.matmul(rho).matmul(&inv_sqrt);
    let top = HermitianEigen::new(&m).max_value();
    if top <= 0.0 {
        return EntropicValue::finite(f64::NEG_INFINITY);
    }
    EntropicValue::finite(log2(top))
}

/// Upper bound on the ε-smoothed max-relative entropy obtained by deleting
/// the smallest eigenvalues of `ρ` (total mass at most `ε²`, so the pruned
/// state stays within purified distance `ε`) and renormalizing. A heuristic,
/// not the optimum over the ε-ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrunedMaxRelativeEntropy {
    pub value: EntropicValue,
    pub pruned_mass: f64,
}

pub fn max_relative_entropy_pruned(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
) -> Result<PrunedMaxRelativeEntropy> {
    check_pair(rho, sigma)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let e = rho.eigen();
    let total: f64 = e.values.iter().map(|x| x.max(0.0)).sum();
    let mut best = PrunedMaxRelativeEntropy {
        value: max_relative_entropy_matrices(rho.matrix(), sigma.matrix()),
        pruned_mass: 0.0,
    };
    let mut mass = 0.0;
    for k in 0..e.dim().saturating_sub(1) {
        mass += e.values[k].max(0.0);
        if mass > eps * eps * total {
            break;
        }
        let kept = 1.0 - mass / total;
        let pruned = e.map(|_| 0.0);
        let pruned = (k + 1..e.dim()).fold(pruned, |acc, j| {
            let v = e.vector(j);
            &acc + &Matrix::outer(&v, &v).scale(e.values[j].max(0.0) / (total * kept))
        });
        let value = max_relative_entropy_matrices(&pruned, sigma.matrix());
        if value.le_with_tol(best.value, 0.0) {
            best = PrunedMaxRelativeEntropy {
                value,
                pruned_mass: mass / total,
            };
        }
    }
    Ok(best)
}

/// Outcome of an optimal (possibly randomized) test between `ρ` and `σ`.
#[derive(Clone, Debug)]
pub struct HypothesisTest {
    /// `−log₂ Tr(Πσ)`
    pub value: EntropicValue,
    /// `Tr(Πσ)`
    pub type_ii: f64,
    /// `Tr(Πρ)`
    pub accepted: f64,
    /// The test `0 ⪯ Π ⪯ I`.
    pub operator: Matrix,
    /// Whether the classical Neyman–Pearson branch was used.
    pub commuting: bool,
}

/// Neyman–Pearson test on a pair of nonnegative vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalTest {
    pub weights: Vec<f64>,
    pub value: EntropicValue,
    pub type_ii: f64,
    pub accepted: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

fn value_from_type_ii(beta: f64) -> EntropicValue {
    if beta <= 0.0 {
        EntropicValue::infinite()
    } else {
        EntropicValue::finite(-log2(beta))
    }
}

/// Greedy likelihood-ratio test: include outcomes by decreasing `p/q` until
/// the accepted mass reaches `1 − ε`, with a fractional weight on the last.
/// If `Σp < 1 − ε` no test is feasible and the identity test is returned.
pub fn classical_hypothesis_test(p: &[f64], q: &[f64], eps: f64) -> Result<ClassicalTest> {
    check_eps(eps)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let target = 1.0 - eps;
    let total: f64 = p.iter().map(|x| x.max(0.0)).sum();
    if total < target {
        let beta: f64 = q.iter().map(|x| x.max(0.0)).sum();
        return Ok(ClassicalTest {
            weights: alloc::vec![1.0; p.len()],
            value: value_from_type_ii(beta),
            type_ii: beta,
            accepted: total,
        });
    }
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    // Ratio p/q, with q ≈ 0 ranked first.
    let key = |i: usize| -> f64 {
        if q[i] <= EIG_ZERO {
            f64::INFINITY
        } else {
            p[i] / q[i]
        }
    };
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)));
    let mut weights = alloc::vec![0.0; p.len()];
    let mut mass = 0.0;
    for &i in &order {
        if mass >= target {
            break;
        }
        let need = target - mass;
        if p[i] <= need {
            weights[i] = 1.0;
            mass += p[i];
        } else {
            weights[i] = need / p[i];
            mass = target;
        }
    }
    let beta: f64 = weights
        .iter()
        .zip(q)
        .map(|(w, &qi)| if qi <= EIG_ZERO { 0.0 } else { w * qi })
        .sum();
    Ok(ClassicalTest {
        value: value_from_type_ii(beta),
        type_ii: beta,
        accepted: mass,
        weights,
    })
}

/// Orthonormal basis diagonalizing both members of a commuting pair.
fn joint_eigenbasis(rho: &Matrix, sigma: &Matrix) -> Matrix {
    let d = rho.rows();
    let se = HermitianEigen::new(sigma);
    let scale = se
        .values
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1e-300);
    let mut basis = Matrix::zeros(d, d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (se.values[end] - se.values[start]).abs() <= 1e-8 * scale {
            end += 1;
        }
        let block = Matrix::from_fn(d, end - start, |i, j| se.vectors[(i, start + j)]);
        let compressed = block.adjoint_matmul(&rho.matmul(&block));
        let inner = HermitianEigen::new(&compressed);
        let rotated = block.matmul(&inner.vectors);
        for j in 0..(end - start) {
            for i in 0..d {
                basis[(i, start + j)] = rotated[(i, j)];
            }
        }
        start = end;
    }
    basis
}

/// `D_H^ε(ρ‖σ) = −log₂ min { Tr(Πσ) : 0 ⪯ Π ⪯ I, Tr(Πρ) ≥ 1−ε }`.
pub fn hypothesis_testing_relative_entropy(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
) -> Result<EntropicValue> {
    Ok(hypothesis_test(rho, sigma, eps)?.value)
}

/// Optimal test for `D_H^ε`, with the operator that attains it.
///
/// Commuting pairs use [`classical_hypothesis_test`] in a joint eigenbasis.
/// Otherwise `μ` is bisected so that the positive part of `ρ − μσ` brackets
/// acceptance `1 − ε`, and the two bracketing projectors are mixed so that
/// `Tr(Πρ) = 1 − ε` exactly.
pub fn hypothesis_test(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
) -> Result<HypothesisTest> {
    check_pair(rho, sigma)?;
    check_eps(eps)?;
    hypothesis_test_matrices(rho.matrix(), sigma.matrix(), eps)
}

pub(crate) fn hypothesis_test_matrices(
    rho: &Matrix,
    sigma: &Matrix,
    eps: f64,
) -> Result<HypothesisTest> {
    check_eps(eps)?;
    let d = rho.rows();
    let commutator = &rho.matmul(sigma) - &sigma.matmul(rho);
    if trace_norm(&commutator) <= COMMUTE_TOL {
        let basis = if rho.is_diagonal(EIG_ZERO) && sigma.is_diagonal(EIG_ZERO) {
            Matrix::identity(d)
        } else {
            joint_eigenbasis(rho, sigma)
        };
        let p: Vec<f64> = (0..d)
            .map(|k| quad_form(rho, &basis.column(k)).max(0.0))
            .collect();
        let q: Vec<f64> = (0..d)
            .map(|k| quad_form(sigma, &basis.column(k)).max(0.0))
            .collect();
        let t = classical_hypothesis_test(&p, &q, eps)?;
        let operator = basis
            .matmul(&Matrix::diag_real(&t.weights))
            .matmul(&basis.adjoint());
        return Ok(HypothesisTest {
            value: t.value,
            type_ii: t.type_ii,
            accepted: t.accepted,
            operator,
            commuting: true,
        });
    }
    let target = 1.0 - eps;
    let finish = |op: Matrix| -> HypothesisTest {
        let beta = op.trace_product(sigma).re.max(0.0);
        let acc = op.trace_product(rho).re;
        HypothesisTest {
            value: value_from_type_ii(beta),
            type_ii: beta,
            accepted: acc,
            operator: op,
            commuting: false,
        }
    };
    let total = rho.trace().re;
    if total < target {
        return Ok(finish(Matrix::identity(d)));
    }
    let se = HermitianEigen::new(sigma);
    if kernel_weight(rho, &se) > 0.0 {
        let pk = se.spectral_projector(|x| x <= EIG_ZERO);
        let in_kernel = pk.trace_product(rho).re;
        if in_kernel >= target {
            let mut t = finish(pk.scale(target / in_kernel));
            t.value = EntropicValue::infinite();
            t.type_ii = 0.0;
            return Ok(t);
        }
    }
    let positive_part = |mu: f64| -> (Matrix, f64) {
        let e = HermitianEigen::new(&(rho - &sigma.scale(mu)));
        let p = e.spectral_projector(|x| x > 0.0);
        let acc = p.trace_product(rho).re;
        (p, acc)
    };
    let (mut p_lo, mut f_lo) = positive_part(0.0);
    let mut mu_lo = 0.0;
    if f_lo < target {
        // Numerical zero eigenvalues of ρ: the support projector still accepts Tr ρ.
        p_lo = Matrix::identity(d);
        f_lo = total;
    }
    let mut mu_hi = 1.0;
    let (mut p_hi, mut f_hi) = positive_part(mu_hi);
    let mut guard = 0;
    while f_hi >= target {
        mu_lo = mu_hi;
        p_lo = p_hi;
        f_lo = f_hi;
        mu_hi *= 2.0;
        let next = positive_part(mu_hi);
        p_hi = next.0;
        f_hi = next.1;
        guard += 1;
        if guard > 2000 {
            return Err(Error::InvalidParameter(
                "hypothesis test bracket did not close".into(),
            ));
        }
    }
    for _ in 0..200 {
        if mu_hi - mu_lo <= 1e-15 * mu_hi.max(1e-300) {
            break;
        }
        let mid = 0.5 * (mu_lo + mu_hi);
        let (p, f) = positive_part(mid);
        if f >= target {
            mu_lo = mid;
            p_lo = p;
            f_lo = f;
        } else {
            mu_hi = mid;
            p_hi = p;
            f_hi = f;
        }
    }
    let t = if f_lo - f_hi > 0.0 {
        ((target - f_hi) / (f_lo - f_hi)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let op = &p_hi.scale(1.0 - t) + &p_lo.scale(t);
    Ok(finish(op))
}

/// `D_F^ε`: hypothesis testing restricted to free measurement operators,
/// evaluated by collapsing both arguments and testing the collapsed pair.
pub fn restricted_hypothesis_testing(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
    collapsing: &dyn CollapsingMap,
) -> Result<EntropicValue> {
    Ok(restricted_hypothesis_test(rho, sigma, eps, collapsing)?.value)
}

/// As [`restricted_hypothesis_testing`], returning the (free) optimal test.
pub fn restricted_hypothesis_test(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
    collapsing: &dyn CollapsingMap,
) -> Result<HypothesisTest> {
    check_pair(rho, sigma)?;
    check_eps(eps)?;
    if !collapsing.surjective_wrt_free_ops() {
        return Err(Error::InvalidParameter(alloc::format!(
            "collapsing map `{}` is not surjective onto free measurement operators",
            collapsing.name()
        )));
    }
    let labels = rho.system().labels();
    let r = collapsing.collapse(rho, &labels)?;
    let s = collapsing.collapse(sigma, &labels)?;
    hypothesis_test_matrices(r.matrix(), s.matrix(), eps)
}

fn entropy_of(rho: &DensityOperator, labels: &[&str]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    Ok(von_neumann_entropy(&partial_trace(rho, labels)?))
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Result<Vec<&'a str>> {
    for x in a {
        if b.contains(x) {
            return Err(Error::InvalidParameter(alloc::format!(
                "label `{x}` appears in two parts"
            )));
        }
    }
    let mut out = a.to_vec();
    out.extend_from_slice(b);
    Ok(out)
}

/// `S(A) + S(B) − S(AB)`
pub fn mutual_information(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<f64> {
    let ab = union(a, b)?;
    Ok(entropy_of(rho, a)? + entropy_of(rho, b)? - entropy_of(rho, &ab)?)
}

/// `S(AB) − S(B)`
pub fn conditional_entropy(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<f64> {
    let ab = union(a, b)?;
    Ok(entropy_of(rho, &ab)? - entropy_of(rho, b)?)
}

/// `I(A:B|C)`, computed as `I(A:BC) − I(A:C)` and cross-checked against
/// `S(A|C) − S(A|BC)`.
pub fn conditional_mutual_information(
    rho: &DensityOperator,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    let bc = union(b, c)?;
    union(a, &bc)?;
    let via_mi = mutual_information(rho, a, &bc)? - mutual_information(rho, a, c)?;
    let via_ce = conditional_entropy(rho, a, c)? - conditional_entropy(rho, a, &bc)?;
    if (via_mi - via_ce).abs() > 1e-10 {
        return Err(Error::BoundViolated {
            what: "conditional mutual information cross-check".into(),
            measured: via_mi,
            bound: via_ce,
        });
    }
    Ok(via_mi)
}

/// `R_c(ρ) = S(Δρ) − S(ρ)`, dephasing every register.
pub fn relative_entropy_of_coherence(rho: &DensityOperator) -> f64 {
    (von_neumann_entropy(&dephase_all(rho)) - von_neumann_entropy(rho)).max(0.0)
}

/// `V(ρ‖σ) = Tr ρ (log₂ρ − log₂σ)² − D(ρ‖σ)²`
pub fn relative_entropy_variance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_pair(rho, sigma)?;
    let d = relative_entropy(rho, sigma)?;
    if !d.finite {
        return Err(Error::SupportViolation);
    }
    let log_support = |x: f64| if x > EIG_ZERO { log2(x) } else { 0.0 };
    let l = &rho.eigen().map(log_support) - &sigma.eigen().map(log_support);
    let second = rho.matrix().matmul(&l).trace_product(&l).re;
    Ok((second - d.value * d.value).max(0.0))
}

/// Standard normal CDF.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// `Φ⁻¹(ε)`: rational initial guess refined by Halley steps on `erfc`.
pub fn gaussian_quantile(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.38357751867269e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let p = eps;
    let p_low = 0.02425;
    let mut x = if p < p_low {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..3 {
        let e = gaussian_cdf(x) - p;
        let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

/// `2√(ln(1/(2ε)))`, the natural-log bound on `|Φ⁻¹(ε)|` for `ε ≤ 1/2`.
pub fn gaussian_quantile_bound(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidEpsilon(eps));
    }
    Ok(2.0 * libm::sqrt(libm::log(1.0 / (2.0 * eps))))
}

/// `n D(ρ‖σ) + √(n V(ρ‖σ)) Φ⁻¹(ε)`, the two-term expansion of
/// `D_H^ε(ρ^{⊗n}‖σ^{⊗n})`.
pub fn second_order_rate(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    n: usize,
    eps: f64,
) -> Result<f64> {
    let d = relative_entropy(rho, sigma)?;
    if !d.finite {
        return Err(Error::SupportViolation);
    }
    let v = relative_entropy_variance(rho, sigma)?;
    let nf = n as f64;
    Ok(nf * d.value + libm::sqrt(nf * v) * gaussian_quantile(eps)?)
}

/// `p^{⊗n}` in lexicographic order of outcomes.
pub fn product_distribution(p: &[f64], n: usize) -> Vec<f64> {
    let mut out = alloc::vec![1.0];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|&a| p.iter().map(move |&b| a * b))
            .collect();
    }
    out
}

/// `D_H^ε(ρ^{⊗n}‖σ^{⊗n})`. Diagonal pairs use the Neyman–Pearson test on
/// product distributions with `d^n ≤ budget`; other pairs build both tensor
/// powers densely with `d^{2n} ≤ budget`.
pub fn iid_hypothesis_testing(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    n: usize,
    eps: f64,
    budget: usize,
) -> Result<EntropicValue> {
    check_pair(rho, sigma)?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "tensor power needs at least one copy".into(),
        ));
    }
    let d = rho.dim();
    let outcomes = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    let diagonal =
        rho.matrix().is_diagonal(crate::TAU_HERM) && sigma.matrix().is_diagonal(crate::TAU_HERM);
    let required = if diagonal {
        outcomes
    } else {
        outcomes.saturating_mul(outcomes)
    };
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    if diagonal {
        let p = product_distribution(&rho.matrix().real_diagonal(), n);
        let q = product_distribution(&sigma.matrix().real_diagonal(), n);
        return Ok(classical_hypothesis_test(&p, &q, eps)?.value);
    }
    let power = |m: &Matrix| (1..n).fold(m.clone(), |acc, _| acc.kron(m));
    let system = crate::qmat::RegisterSystem::from_pairs(&[("X", outcomes)])?;
    let rho_n = DensityOperator::new(system.clone(), power(rho.matrix()))?;
    let sigma_n = DensityOperator::new(system, power(sigma.matrix()))?;
    hypothesis_testing_relative_entropy(&rho_n, &sigma_n, eps)
}

/// Right-hand side of Fannes' inequality `|S(ρ₁) − S(ρ₂)| ≤ ε log₂ d + 1`
/// for purified distance `ε`.
pub fn fannes_bound(purified_distance: f64, dim: usize) -> f64 {
    purified_distance * log2(dim as f64) + 1.0
}

/// Continuity bound for the relative entropy of coherence,
/// `ε(log₂ M + log₂ d) + ε log₂(1/ε) + 4ε` with `ε = ‖ρ − ρ'‖₁ ≤ 1/3`;
/// `log₂ d` is `inf_τ ‖log₂ τ‖∞` over incoherent states, attained at `I/d`.
pub fn coherence_continuity_bound(trace_distance: f64, dim: usize) -> f64 {
    let e = trace_distance;
    let logd = log2(dim as f64);
    let tail = if e > 0.0 { e * log2(1.0 / e) } else { 0.0 };
    e * (logd + logd) + tail + 4.0 * e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::Dephasing;
    use crate::qmat::{RegisterSystem, StateVector};
    use alloc::vec;

    #[test]
    fn iid_routes_agree_on_diagonal_pairs() {
        let sys = RegisterSystem::qubits(&["X"]).unwrap();
        let rho = DensityOperator::from_diagonal(sys.clone(), &[0.8, 0.2]).unwrap();
        let sigma = DensityOperator::from_diagonal(sys, &[0.4, 0.6]).unwrap();
        for n in 1..=3 {
            let classical = iid_hypothesis_testing(&rho, &sigma, n, 0.1, 1 << 13)
                .unwrap()
                .value;
            let power = |m: &Matrix| (1..n).fold(m.clone(), |acc, _| acc.kron(m));
            let big = RegisterSystem::from_pairs(&[("X", 1 << n)]).unwrap();
            let dense = hypothesis_testing_relative_entropy(
                &DensityOperator::new(big.clone(), power(rho.matrix())).unwrap(),
                &DensityOperator::new(big, power(sigma.matrix())).unwrap(),
                0.1,
            )
            .unwrap()
            .value;
            assert!((classical - dense).abs() < 1e-9);
        }
        assert!(matches!(
            iid_hypothesis_testing(&rho, &sigma, 14, 0.1, 1 << 13),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    fn qubit() -> RegisterSystem {
        RegisterSystem::qubits(&["A"]).unwrap()
    }

    fn diag(p: &[f64]) -> DensityOperator {
        let labels: Vec<alloc::string::String> = vec!["A".into()];
        let sys = RegisterSystem::from_pairs(&[(labels[0].as_str(), p.len())]).unwrap();
        DensityOperator::from_diagonal(sys, p).unwrap()
    }

    fn plus() -> DensityOperator {
        StateVector::normalized(qubit(), vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)])
            .unwrap()
            .to_density()
    }

    #[test]
    fn binary_entropy_of_three_quarters() {
        let s = von_neumann_entropy(&diag(&[0.75, 0.25]));
        assert!((s - (2.0 - 0.75 * log2(3.0))).abs() < 1e-14);
        assert!((s - 0.811278).abs() < 1e-6);
        assert!((von_neumann_entropy(&diag(&[0.25; 4])) - 2.0).abs() < 1e-14);
        assert!(von_neumann_entropy(&plus()).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_examples() {
        let zero = diag(&[1.0, 0.0]);
        let one = diag(&[0.0, 1.0]);
        let mixed = diag(&[0.5, 0.5]);
        assert!(relative_entropy(&mixed, &mixed).unwrap().value.abs() < 1e-14);
        assert!((relative_entropy(&zero, &mixed).unwrap().value - 1.0).abs() < 1e-14);
        assert!(!relative_entropy(&zero, &one).unwrap().finite);
        assert!((max_relative_entropy(&plus(), &mixed).unwrap().value - 1.0).abs() < 1e-13);
        assert!(max_relative_entropy(&plus(), &plus()).unwrap().value.abs() < 1e-12);
        assert!(!max_relative_entropy(&zero, &one).unwrap().finite);
    }

    #[test]
    fn dmax_of_commuting_pair_is_max_ratio() {
        let p = [0.5, 0.3, 0.2];
        let q = [0.2, 0.5, 0.3];
        let v = max_relative_entropy(&diag(&p), &diag(&q)).unwrap().value;
        assert!((v - log2(2.5)).abs() < 1e-13);
    }

    #[test]
    fn neyman_pearson_examples() {
        let t = classical_hypothesis_test(&[1.0, 0.0], &[0.5, 0.5], 1e-9).unwrap();
        assert!((t.value.value - 1.0).abs() < 1e-8);
        for eps in [0.05, 0.3, 0.9] {
            let r = diag(&[0.2, 0.3, 0.5]);
            let v = hypothesis_testing_relative_entropy(&r, &r, eps).unwrap();
            assert!((v.value - log2(1.0 / (1.0 - eps))).abs() < 1e-12);
        }
        assert!(matches!(
            hypothesis_testing_relative_entropy(&diag(&[0.5, 0.5]), &diag(&[0.5, 0.5]), 1.0),
            Err(Error::InvalidEpsilon(_))
        ));
        assert!(matches!(
            hypothesis_testing_relative_entropy(&diag(&[0.5, 0.5]), &diag(&[0.5, 0.5]), 0.0),
            Err(Error::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn infeasible_test_falls_back_to_identity() {
        let t = classical_hypothesis_test(&[0.3, 0.2], &[0.5, 0.5], 0.1).unwrap();
        assert_eq!(t.weights, vec![1.0, 1.0]);
        assert!(t.value.value.abs() < 1e-15);
    }

    #[test]
    fn restricted_test_on_plus_states() {
        let sys = RegisterSystem::qubits(&["B", "C"]).unwrap();
        let pp = StateVector::normalized(sys.clone(), vec![C64::new(0.5, 0.0); 4])
            .unwrap()
            .to_density();
        let mixed = DensityOperator::maximally_mixed(sys);
        let v = restricted_hypothesis_testing(&pp, &mixed, 0.1, &Dephasing).unwrap();
        assert!((v.value - log2(1.0 / 0.9)).abs() < 1e-12);
        assert!((v.value - 0.152).abs() < 1e-3);
        // Unrestricted, the pure state is far easier to distinguish.
        let u = hypothesis_testing_relative_entropy(&pp, &mixed, 0.1).unwrap();
        assert!(u.value > 2.0);
    }

    #[test]
    fn noncommuting_test_attains_target_acceptance() {
        let zero = diag(&[1.0, 0.0]);
        let rho =
            DensityOperator::new(qubit(), Matrix::from_real(2, 2, &[0.7, 0.2, 0.2, 0.3])).unwrap();
        let t = hypothesis_test(&rho, &plus(), 0.2).unwrap();
        assert!(!t.commuting);
        assert!((t.accepted - 0.8).abs() < 1e-12);
        let t2 = hypothesis_test(&plus(), &zero, 0.2).unwrap();
        assert!((t2.accepted - 0.8).abs() < 1e-12);
        assert!(t2.value.finite);
    }

    #[test]
    fn infinite_when_acceptance_fits_in_kernel() {
        let sigma = diag(&[1.0, 0.0]);
        let rho = DensityOperator::new(qubit(), Matrix::from_real(2, 2, &[0.05, 0.1, 0.1, 0.95]))
            .unwrap();
        let t = hypothesis_test(&rho, &sigma, 0.1).unwrap();
        assert!(!t.value.finite);
    }

    #[test]
    fn information_quantities_on_ghz_and_bell() {
        let sys = RegisterSystem::qubits(&["R", "B", "C"]).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[0] = C64::new(1.0, 0.0);
        amps[7] = C64::new(1.0, 0.0);
        let ghz = StateVector::normalized(sys, amps).unwrap().to_density();
        assert!((mutual_information(&ghz, &["R"], &["B"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(
            (conditional_mutual_information(&ghz, &["C"], &["R"], &["B"]).unwrap() - 1.0).abs()
                < 1e-12
        );

        let bsys = RegisterSystem::qubits(&["A", "B"]).unwrap();
        let mut b = vec![C64::new(0.0, 0.0); 4];
        b[0] = C64::new(1.0, 0.0);
        b[3] = C64::new(1.0, 0.0);
        let bell = StateVector::normalized(bsys, b).unwrap().to_density();
        assert!((mutual_information(&bell, &["A"], &["B"]).unwrap() - 2.0).abs() < 1e-12);
        assert!((conditional_entropy(&bell, &["A"], &["B"]).unwrap() + 1.0).abs() < 1e-12);
        assert!(mutual_information(&bell, &["A"], &["A"]).is_err());
    }

    #[test]
    fn coherence_of_simple_states() {
        assert!((relative_entropy_of_coherence(&plus()) - 1.0).abs() < 1e-13);
        assert!(relative_entropy_of_coherence(&diag(&[0.3, 0.7])).abs() < 1e-13);
    }

    #[test]
    fn gaussian_quantile_values() {
        assert!(gaussian_quantile(0.5).unwrap().abs() < 1e-15);
        let q = gaussian_quantile(0.1).unwrap();
        assert!((q + 1.2815515655446004).abs() < 1e-12);
        assert!(q.abs() <= gaussian_quantile_bound(0.1).unwrap());
        for &p in &[1e-9, 1e-4, 0.01, 0.3, 0.77, 0.99, 1.0 - 1e-7] {
            let x = gaussian_quantile(p).unwrap();
            assert!((gaussian_cdf(x) - p).abs() < 1e-10 * p.max(1e-3), "p={p}");
        }
        let r = diag(&[0.6, 0.4]);
        assert!(second_order_rate(&r, &r, 10, 0.1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn variance_of_commuting_pair() {
        let p = [0.6, 0.4];
        let q = [0.3, 0.7];
        let llr: Vec<f64> = p.iter().zip(&q).map(|(a, b)| log2(a / b)).collect();
        let mean: f64 = p.iter().zip(&llr).map(|(a, l)| a * l).sum();
        let var: f64 = p
            .iter()
            .zip(&llr)
            .map(|(a, l)| a * (l - mean) * (l - mean))
            .sum();
        let got = relative_entropy_variance(&diag(&p), &diag(&q)).unwrap();
        assert!((got - var).abs() < 1e-13);
    }

    #[test]
    fn pruned_dmax_never_exceeds_unsmoothed() {
        let r = diag(&[0.9, 0.099, 0.001]);
        let s = diag(&[0.45, 0.45, 0.1]);
        let raw = max_relative_entropy(&r, &s).unwrap();
        let pr = max_relative_entropy_pruned(&r, &s, 0.1).unwrap();
        assert!(pr.value.le_with_tol(raw, 1e-12));
        assert!(pr.pruned_mass <= 0.01 + 1e-15);
    }
}
