//! Measurement inequalities the protocols rely on, evaluated on concrete
//! instances. Each check returns both sides and errors if `lhs` falls on the
//! wrong side of `rhs` by more than [`BOUND_SLACK`](super::BOUND_SLACK).

use alloc::string::String;

use super::BOUND_SLACK;
use crate::qmat::linalg::{psd_sqrt, HermitianEigen, Matrix};
use crate::qmat::{fidelity, fidelity_matrices, purified_distance, DensityOperator};
use crate::{Error, Result, TAU_HERM};

/// Both sides of a checked inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
}

fn enforce(what: &str, lhs: f64, rhs: f64, lhs_is_upper_bounded: bool) -> Result<BoundCheck> {
    let ok = if lhs_is_upper_bounded {
        lhs <= rhs + BOUND_SLACK
    } else {
        lhs >= rhs - BOUND_SLACK
    };
    if ok {
        Ok(BoundCheck { lhs, rhs })
    } else {
        Err(Error::BoundViolated {
            what: String::from(what),
            measured: lhs,
            bound: rhs,
        })
    }
}

fn check_square(rho: &DensityOperator, op: &Matrix) -> Result<()> {
    if op.rows() != rho.dim() || op.cols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: op.rows(),
        });
    }
    Ok(())
}

fn check_projector(p: &Matrix) -> Result<()> {
    if p.hermitian_deviation() > TAU_HERM || (&p.matmul(p) - p).max_abs() > 1e-8 {
        return Err(Error::InvalidParameter(
            "operator is not an orthogonal projector".into(),
        ));
    }
    Ok(())
}

fn check_effect(a: &Matrix) -> Result<()> {
    let e = HermitianEigen::new(&a.hermitian_part());
    if a.hermitian_deviation() > TAU_HERM
        || e.min_value() < -TAU_HERM
        || e.max_value() > 1.0 + TAU_HERM
    {
        return Err(Error::InvalidParameter(
            "operator is not between 0 and I".into(),
        ));
    }
    Ok(())
}

/// `F(ρ, AρA/Tr(A²ρ)) ≥ √Tr(A²ρ)` for `0 ⪯ A ⪯ I`. A branch of zero
/// probability satisfies the inequality trivially (`lhs = rhs = 0`).
pub fn gentle_measurement_check(rho: &DensityOperator, a: &Matrix) -> Result<BoundCheck> {
    check_square(rho, a)?;
    check_effect(a)?;
    let post = a.conjugate_by(rho.matrix());
    let p = post.trace().re;
    if p <= 1e-15 {
        return Ok(BoundCheck { lhs: 0.0, rhs: 0.0 });
    }
    let lhs = fidelity_matrices(rho.matrix(), &post.scale(1.0 / p));
    enforce("gentle measurement", lhs, libm::sqrt(p), false)
}

/// `Tr(Πσ) ≥ 1 − (2ε + δ)²` with `ε = P(ρ, σ)` and `δ = √(1 − Tr(Πρ))`.
pub fn close_states_check(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    pi: &Matrix,
) -> Result<BoundCheck> {
    check_square(rho, pi)?;
    check_effect(pi)?;
    let eps = purified_distance(rho, sigma)?;
    let delta = libm::sqrt((1.0 - pi.trace_product(rho.matrix()).re).max(0.0));
    let lhs = pi.trace_product(sigma.matrix()).re;
    let root = 2.0 * eps + delta;
    enforce("measurement on close states", lhs, 1.0 - root * root, false)
}

/// `P(Π'_k…Π'_1 ρ Π'_1…Π'_k / Tr(…), ρ) ≤ (Σ_i Tr(Π_i ρ))^{1/4}` with
/// `Π'_i = I − Π_i`. When the sequence annihilates `ρ` the left side is
/// taken as 1.
pub fn sequential_projector_bound_check(
    rho: &DensityOperator,
    projectors: &[Matrix],
) -> Result<BoundCheck> {
    let d = rho.dim();
    let mut chain = Matrix::identity(d);
    let mut hit = 0.0;
    for p in projectors {
        check_square(rho, p)?;
        check_projector(p)?;
        hit += p.trace_product(rho.matrix()).re;
        chain = (&Matrix::identity(d) - p).matmul(&chain);
    }
    let post = chain.conjugate_by(rho.matrix());
    let kept = post.trace().re;
    // With no weight on any projector the chain fixes ρ exactly; skip the
    // fidelity, whose round-off is amplified by the square root.
    let lhs = if kept <= 1e-14 {
        1.0
    } else if hit <= 1e-14 {
        0.0
    } else {
        let f = fidelity_matrices(rho.matrix(), &post.scale(1.0 / kept));
        libm::sqrt((1.0 - f * f).max(0.0))
    };
    enforce(
        "sequential projectors",
        lhs,
        libm::pow(hit.max(0.0), 0.25),
        true,
    )
}

/// `P(ρ, τ) ≤ P(ρ, σ) + P(σ, τ)`.
pub fn purified_triangle_check(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    tau: &DensityOperator,
) -> Result<BoundCheck> {
    let lhs = purified_distance(rho, tau)?;
    let rhs = purified_distance(rho, sigma)? + purified_distance(sigma, tau)?;
    enforce("purified distance triangle", lhs, rhs, true)
}

/// `F(ρ, σ)` computed by two routes: `‖√ρ√σ‖₁` and `Tr √(√ρ σ √ρ)`.
pub fn fidelity_routes(rho: &DensityOperator, sigma: &DensityOperator) -> Result<(f64, f64)> {
    let direct = fidelity(rho, sigma)?;
    let sr = psd_sqrt(rho.matrix());
    let inner = sr.matmul(sigma.matrix()).matmul(&sr);
    let alt: f64 = HermitianEigen::new(&inner.hermitian_part())
        .values
        .iter()
        .map(|&x| libm::sqrt(x.max(0.0)))
        .sum();
    Ok((direct, alt))
}
