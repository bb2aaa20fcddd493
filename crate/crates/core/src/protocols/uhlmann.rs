//! Uhlmann isometry between two purifications of states on a shared system.

use alloc::vec::Vec;

use crate::qmat::linalg::{svd, Matrix, ZERO};
use crate::qmat::{Isometry, RegisterSystem, StateVector};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct UhlmannIsometry {
    /// Maps the source's private registers into the target's.
    pub isometry: Isometry,
    /// `|⟨target|(I ⊗ V)|source⟩|`, equal to the fidelity of the shared marginals.
    pub overlap: f64,
}

/// Amplitudes of `psi` as a `shared × private` matrix, plus the private system.
fn as_bipartite(psi: &StateVector, shared: &[&str]) -> Result<(Matrix, RegisterSystem)> {
    let private = psi.system().complement(shared)?;
    let sp = psi.system().split(shared)?;
    let m = Matrix::from_fn(sp.d_sel(), sp.d_rest(), |s, r| {
        psi.amplitudes()[sp.index(s, r)]
    });
    let private_sys = if private.is_empty() {
        RegisterSystem::trivial()
    } else {
        psi.system().select(&private)?
    };
    Ok((m, private_sys))
}

/// `V'` maximizing `|Tr(V' K)|` over isometries, with `K = Ξᵀ conj(M)` the
/// `source × target` cross-overlap. From `K = U Σ W†`, `V' = W U†` attains
/// `‖K‖₁`.
pub(crate) fn uhlmann_parts(source: &Matrix, target: &Matrix) -> Result<(Matrix, f64)> {
    if source.rows() != target.rows() {
        return Err(Error::DimensionMismatch {
            expected: target.rows(),
            found: source.rows(),
        });
    }
    let (dx, dy) = (source.cols(), target.cols());
    if dx > dy {
        return Err(Error::InvalidParameter(alloc::format!(
            "source purifier dimension {dx} exceeds target purifier dimension {dy}"
        )));
    }
    let k = source.transpose().matmul(&target.conj());
    let dec = svd(&k);
    let overlap: f64 = dec.singular_values.iter().sum();
    // V'[y, x] = Σ_i W[y, i] conj(U[x, i]) over the dx leading singular vectors.
    let v = Matrix::from_fn(dy, dx, |y, x| {
        let mut acc = ZERO;
        for i in 0..dx {
            acc += dec.v[(y, i)] * dec.u[(x, i)].conj();
        }
        acc
    });
    Ok((v, overlap))
}

/// Isometry `V: C → B` with `(I_A ⊗ V)|σ⟩_{AC}` as close as possible to
/// `|ρ⟩_{AB}`; the overlap equals `F(ρ_A, σ_A)`.
pub fn uhlmann_isometry(
    target: &StateVector,
    source: &StateVector,
    shared: &[&str],
) -> Result<UhlmannIsometry> {
    let dims_t: Vec<usize> = shared
        .iter()
        .map(|l| target.system().dim_of(l))
        .collect::<Result<_>>()?;
    let dims_s: Vec<usize> = shared
        .iter()
        .map(|l| source.system().dim_of(l))
        .collect::<Result<_>>()?;
    if dims_t != dims_s {
        return Err(Error::SystemMismatch);
    }
    let (m, b_sys) = as_bipartite(target, shared)?;
    let (xi, c_sys) = as_bipartite(source, shared)?;
    let (v, overlap) = uhlmann_parts(&xi, &m)?;
    Ok(UhlmannIsometry {
        isometry: Isometry::new(c_sys, b_sys, v)?,
        overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{fidelity, purify};
    use crate::random;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn apply(
        target_sys: &RegisterSystem,
        shared: &[&str],
        source: &StateVector,
        u: &UhlmannIsometry,
    ) -> StateVector {
        let (xi, _) = as_bipartite(source, shared).unwrap();
        let v = u.isometry.matrix();
        let theta = xi.matmul(&v.transpose());
        StateVector::new(target_sys.clone(), theta.as_slice().to_vec()).unwrap()
    }

    #[test]
    fn identical_purifications_overlap_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random::pure_state(&mut rng, RegisterSystem::qubits(&["A", "B"]).unwrap());
        let u = uhlmann_isometry(&psi, &psi, &["A"]).unwrap();
        assert!((u.overlap - 1.0).abs() < 1e-10);
        let theta = apply(psi.system(), &["A"], &psi, &u);
        assert!((theta.overlap(&psi).unwrap().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn same_marginal_different_purifier_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random::mixed_state(&mut rng, RegisterSystem::qubits(&["A"]).unwrap(), 2);
        let source = purify(&rho, "C").unwrap();
        let big = random::isometry(&mut rng, 2, 3);
        let src = source.amplitudes();
        // Embed the purifier into a qutrit B by a random isometry.
        let mut amps = alloc::vec![ZERO; 6];
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..2 {
                    amps[a * 3 + b] += big[(b, c)] * src[a * 2 + c];
                }
            }
        }
        let target = StateVector::new(
            RegisterSystem::from_pairs(&[("A", 2), ("B", 3)]).unwrap(),
            amps,
        )
        .unwrap();
        let u = uhlmann_isometry(&target, &source, &["A"]).unwrap();
        assert!((u.overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn overlap_equals_fidelity_of_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=4 {
            let tsys = RegisterSystem::from_pairs(&[("A", d), ("B", d)]).unwrap();
            let ssys = RegisterSystem::from_pairs(&[("A", d), ("C", d - 1)]).unwrap();
            let target = random::pure_state(&mut rng, tsys.clone());
            let source = random::pure_state(&mut rng, ssys);
            let u = uhlmann_isometry(&target, &source, &["A"]).unwrap();
            let f = fidelity(
                &target.reduced(&["A"]).unwrap(),
                &source.reduced(&["A"]).unwrap(),
            )
            .unwrap();
            assert!((u.overlap - f).abs() < 1e-8);
            let theta = apply(&tsys, &["A"], &source, &u);
            assert!((theta.overlap(&target).unwrap().norm() - f).abs() < 1e-8);
        }
    }

    #[test]
    fn larger_source_purifier_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let target = random::pure_state(
            &mut rng,
            RegisterSystem::from_pairs(&[("A", 2), ("B", 2)]).unwrap(),
        );
        let source = random::pure_state(
            &mut rng,
            RegisterSystem::from_pairs(&[("A", 2), ("C", 3)]).unwrap(),
        );
        assert!(uhlmann_isometry(&target, &source, &["A"]).is_err());
    }
}
