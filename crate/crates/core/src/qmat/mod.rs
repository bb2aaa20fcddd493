//! Dense linear algebra over labeled multi-register Hilbert spaces.
//!
//! Register order is the tensor order. Operations that take label sets
//! permute by index arithmetic; no permutation matrix is ever built.

mod channel;
pub mod linalg;
mod registers;
mod state;

use alloc::vec::Vec;

pub use channel::{Isometry, KrausChannel, Povm};
pub use linalg::{Matrix, C64};
pub use registers::{Register, RegisterSystem, Split};
pub use state::{apply_local, DensityOperator, StateVector};

use crate::{Error, Result, EIG_ZERO};

/// Kronecker product on the concatenated register system.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    let system = a.system().concat(b.system())?;
    Ok(DensityOperator::from_parts(
        system,
        a.matrix().kron(b.matrix()),
        a.is_normalized() && b.is_normalized(),
    ))
}

/// Marginal on `keep`; kept registers retain their original relative order.
pub fn partial_trace(rho: &DensityOperator, keep: &[&str]) -> Result<DensityOperator> {
    let sys = rho.system().restrict(keep)?;
    let order = sys.labels();
    let sp = rho.system().split(&order)?;
    let (ds, dr) = (sp.d_sel(), sp.d_rest());
    let m = rho.matrix();
    let mut out = Matrix::zeros(ds, ds);
    for i in 0..ds {
        for j in 0..ds {
            let mut acc = linalg::ZERO;
            for r in 0..dr {
                acc += m[(sp.index(i, r), sp.index(j, r))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityOperator::from_parts(sys, out, rho.is_normalized()))
}

/// Canonical purification `Σ √λ_i |e_i⟩|i⟩` with purifier dimension equal to
/// the numerical rank.
pub fn purify(rho: &DensityOperator, purifier_label: &str) -> Result<StateVector> {
    let e = rho.eigen();
    let kept: Vec<usize> = (0..e.dim())
        .rev()
        .filter(|&k| e.values[k] > EIG_ZERO)
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidState(
            "zero operator has no purification".into(),
        ));
    }
    let r = kept.len();
    let system = rho.system().with(purifier_label, r)?;
    let d = rho.dim();
    let norm = libm::sqrt(kept.iter().map(|&k| e.values[k]).sum::<f64>());
    let mut amps = alloc::vec![linalg::ZERO; d * r];
    for (i, &k) in kept.iter().enumerate() {
        let w = libm::sqrt(e.values[k]) / norm;
        for s in 0..d {
            amps[s * r + i] = e.vectors[(s, k)] * w;
        }
    }
    StateVector::new(system, amps)
}

fn same_system(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.system() != b.system() {
        return Err(Error::SystemMismatch);
    }
    Ok(())
}

/// `‖√ρ √σ‖₁`
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_system(rho, sigma)?;
    Ok(fidelity_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn fidelity_matrices(rho: &Matrix, sigma: &Matrix) -> f64 {
    let prod = linalg::psd_sqrt(rho).matmul(&linalg::psd_sqrt(sigma));
    linalg::trace_norm(&prod).clamp(0.0, 1.0)
}

/// `√(1 − F²)`
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok(libm::sqrt((1.0 - f * f).max(0.0)))
}

/// `‖ρ − σ‖₁`
pub fn trace_norm_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_system(rho, sigma)?;
    Ok(linalg::trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// `Σ K ρ K†`. Rejects trace-decreasing channels; see [`apply_channel_subnormalized`].
pub fn apply_channel(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    if !ch.is_trace_preserving() {
        return Err(Error::NotTracePreserving(ch.trace_preserving_deviation()));
    }
    apply_channel_subnormalized(ch, rho)
}

/// Like [`apply_channel`] but accepts trace non-increasing maps; the output
/// is flagged subnormalized unless the map is trace preserving.
pub fn apply_channel_subnormalized(
    ch: &KrausChannel,
    rho: &DensityOperator,
) -> Result<DensityOperator> {
    if ch.input() != rho.system() {
        return Err(Error::SystemMismatch);
    }
    Ok(DensityOperator::from_parts(
        ch.output().clone(),
        ch.apply_matrix(rho.matrix()),
        rho.is_normalized() && ch.is_trace_preserving(),
    ))
}

/// Isometry `V = Σ_i K_i ⊗ |i⟩_E` and the environment label it appends.
pub fn stinespring_dilation(ch: &KrausChannel) -> Result<(Isometry, alloc::string::String)> {
    let env = ch.output().fresh_label("E");
    let r = ch.kraus().len();
    let output = ch.output().with(&env, r)?;
    let (dout, din) = (ch.output().dim(), ch.input().dim());
    let mut v = Matrix::zeros(dout * r, din);
    for (i, k) in ch.kraus().iter().enumerate() {
        for o in 0..dout {
            for c in 0..din {
                v[(o * r + i, c)] = k[(o, c)];
            }
        }
    }
    Ok((Isometry::new(ch.input().clone(), output, v)?, env))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ket(system: RegisterSystem, amps: &[C64]) -> StateVector {
        StateVector::normalized(system, amps.to_vec()).unwrap()
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let a = StateVector::basis(RegisterSystem::qubits(&["A"]).unwrap(), &[0])
            .unwrap()
            .to_density();
        let b = StateVector::basis(RegisterSystem::qubits(&["B"]).unwrap(), &[1])
            .unwrap()
            .to_density();
        let ab = tensor(&a, &b).unwrap();
        let expect = StateVector::basis(RegisterSystem::qubits(&["A", "B"]).unwrap(), &[0, 1])
            .unwrap()
            .to_density();
        assert_eq!(ab.matrix(), expect.matrix());
        assert!(matches!(tensor(&a, &a), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn ghz_marginal_is_classical_mixture() {
        let sys = RegisterSystem::qubits(&["R", "B", "C"]).unwrap();
        let mut amps = vec![c(0.0, 0.0); 8];
        amps[0] = c(1.0, 0.0);
        amps[7] = c(1.0, 0.0);
        let ghz = ket(sys, &amps).to_density();
        let rb = partial_trace(&ghz, &["R", "B"]).unwrap();
        let expect = Matrix::diag_real(&[0.5, 0.0, 0.0, 0.5]);
        assert!((rb.matrix() - &expect).max_abs() < 1e-15);
        assert_eq!(partial_trace(&ghz, &["R", "B", "C"]).unwrap(), ghz);
        assert!(matches!(
            partial_trace(&ghz, &["Z"]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn partial_trace_keeps_original_order() {
        let a = DensityOperator::from_diagonal(
            RegisterSystem::from_pairs(&[("A", 2)]).unwrap(),
            &[0.9, 0.1],
        )
        .unwrap();
        let b = DensityOperator::from_diagonal(
            RegisterSystem::from_pairs(&[("B", 3)]).unwrap(),
            &[0.2, 0.3, 0.5],
        )
        .unwrap();
        let ab = tensor(&a, &b).unwrap();
        let back = partial_trace(&ab, &["B", "A"]).unwrap();
        assert_eq!(back.system().labels(), vec!["A", "B"]);
        assert!((partial_trace(&ab, &["B"]).unwrap().matrix() - b.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn purification_of_maximally_mixed_qubit() {
        let rho = DensityOperator::maximally_mixed(RegisterSystem::qubits(&["A"]).unwrap());
        let psi = purify(&rho, "P").unwrap();
        assert_eq!(psi.system().dim_of("P").unwrap(), 2);
        for a in psi.amplitudes() {
            assert!(a.norm() < 1e-15 || (a.norm() - libm::sqrt(0.5)).abs() < 1e-15);
        }
        let back = psi.reduced(&["A"]).unwrap();
        assert!((back.matrix() - rho.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn purification_of_pure_state_has_trivial_purifier() {
        let psi = ket(
            RegisterSystem::qubits(&["A"]).unwrap(),
            &[c(0.6, 0.0), c(0.0, 0.8)],
        );
        let p = purify(&psi.to_density(), "P").unwrap();
        assert_eq!(p.system().dim_of("P").unwrap(), 1);
        assert!(
            (p.overlap(
                &psi.tensor(
                    &StateVector::basis(RegisterSystem::from_pairs(&[("P", 1)]).unwrap(), &[0])
                        .unwrap()
                )
                .unwrap()
            )
            .unwrap()
            .norm()
                - 1.0)
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn fidelity_basics() {
        let q = RegisterSystem::qubits(&["A"]).unwrap();
        let zero = StateVector::basis(q.clone(), &[0]).unwrap().to_density();
        let one = StateVector::basis(q.clone(), &[1]).unwrap().to_density();
        let plus = ket(q, &[c(1.0, 0.0), c(1.0, 0.0)]).to_density();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-14);
        assert!((fidelity(&zero, &plus).unwrap() - libm::sqrt(0.5)).abs() < 1e-14);
        assert!((purified_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
        assert!((trace_norm_distance(&zero, &one).unwrap() - 2.0).abs() < 1e-14);
        assert!(trace_norm_distance(&plus, &plus).unwrap() < 1e-14);
    }

    #[test]
    fn dephasing_channel_kills_coherence() {
        let q = RegisterSystem::qubits(&["A"]).unwrap();
        let plus = ket(q.clone(), &[c(1.0, 0.0), c(1.0, 0.0)]).to_density();
        let out = apply_channel(&KrausChannel::dephasing(q.clone()), &plus).unwrap();
        assert!((out.matrix() - &Matrix::identity(2).scale(0.5)).max_abs() < 1e-15);
        let id = apply_channel(&KrausChannel::identity(q), &plus).unwrap();
        assert_eq!(id, plus);
    }

    #[test]
    fn non_trace_preserving_rejected() {
        let q = RegisterSystem::qubits(&["A"]).unwrap();
        let k = Matrix::diag_real(&[1.0, 0.5]);
        assert!(matches!(
            KrausChannel::new(q.clone(), q.clone(), vec![k.clone()]),
            Err(Error::NotTracePreserving(_))
        ));
        let sub = KrausChannel::subnormalized(q.clone(), q.clone(), vec![k]).unwrap();
        let rho = DensityOperator::maximally_mixed(q);
        assert!(apply_channel(&sub, &rho).is_err());
        let out = apply_channel_subnormalized(&sub, &rho).unwrap();
        assert!(!out.is_normalized());
        assert!((out.trace() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn stinespring_of_identity_and_dephasing() {
        let q = RegisterSystem::qubits(&["A"]).unwrap();
        let (v, env) = stinespring_dilation(&KrausChannel::identity(q.clone())).unwrap();
        assert_eq!(v.output().dim_of(&env).unwrap(), 1);
        assert_eq!(v.matrix(), &Matrix::identity(2));

        let deph = KrausChannel::dephasing(q.clone());
        let (v, env) = stinespring_dilation(&deph).unwrap();
        let plus = ket(q, &[c(1.0, 0.0), c(1.0, 0.0)]).to_density();
        let wide = v.apply_density(&plus).unwrap();
        let back = partial_trace(&wide, &["A"]).unwrap();
        assert!((back.matrix() - apply_channel(&deph, &plus).unwrap().matrix()).max_abs() < 1e-15);
        // Copies the basis index into the environment.
        assert_eq!(v.matrix()[(3, 1)], c(1.0, 0.0));
        assert_eq!(wide.system().labels(), vec!["A", env.as_str()]);
    }

    #[test]
    fn invalid_density_rejected() {
        let q = RegisterSystem::qubits(&["A"]).unwrap();
        assert!(DensityOperator::new(q.clone(), Matrix::diag_real(&[1.2, -0.2])).is_err());
        assert!(DensityOperator::new(q.clone(), Matrix::diag_real(&[0.7, 0.2])).is_err());
        let sub =
            DensityOperator::subnormalized(q.clone(), Matrix::diag_real(&[0.7, 0.2])).unwrap();
        assert!(!sub.is_normalized());
        let nh = Matrix::from_vec(
            2,
            2,
            vec![c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        );
        assert!(DensityOperator::new(q, nh).is_err());
    }

    #[test]
    fn reorder_round_trip() {
        let sys = RegisterSystem::from_pairs(&[("A", 2), ("B", 3)]).unwrap();
        let amps: Vec<C64> = (0..6).map(|k| c(k as f64, 0.5 * k as f64)).collect();
        let psi = StateVector::normalized(sys, amps).unwrap();
        let swapped = psi.reorder(&["B", "A"]).unwrap();
        assert_eq!(swapped.amplitudes()[1], psi.amplitudes()[3]);
        assert_eq!(swapped.reorder(&["A", "B"]).unwrap(), psi);
        let rho = psi.to_density();
        let rs = rho.reorder(&["B", "A"]).unwrap();
        assert!((rs.matrix() - swapped.to_density().matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn local_application_matches_kron() {
        let sys = RegisterSystem::from_pairs(&[("A", 2), ("B", 3)]).unwrap();
        let amps: Vec<C64> = (0..6).map(|k| c(1.0 + k as f64, -0.3 * k as f64)).collect();
        let psi = StateVector::normalized(sys, amps).unwrap();
        let x = Matrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let got = psi.apply_local(&x, &["A"]).unwrap();
        let full = x.kron(&Matrix::identity(3));
        let expect = full.mul_vec(psi.amplitudes());
        for (g, e) in got.amplitudes().iter().zip(&expect) {
            assert!((g - e).norm() < 1e-15);
        }
    }
}
