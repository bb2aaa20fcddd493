mod common;

use qsr_core::entropy::{
    classical_hypothesis_test, hypothesis_test, relative_entropy_of_coherence,
};
use qsr_core::protocols::{
    convex_split_fidelity, convex_split_state, uhlmann_isometry, FidelityRoute,
};
use qsr_core::qmat::{fidelity, purify, DensityOperator, RegisterSystem};
use qsr_core::random;

fn qubit(label: &str) -> RegisterSystem {
    RegisterSystem::qubits(&[label]).unwrap()
}

#[test]
fn neyman_pearson_matches_vertex_enumeration() {
    let mut rng = common::rng(11);
    for trial in 0..200 {
        let d = 2 + trial % 5;
        let p = random::probability_vector(&mut rng, d);
        let q = random::probability_vector(&mut rng, d);
        for eps in [0.05, 0.1, 0.25] {
            let t = classical_hypothesis_test(&p, &q, eps).unwrap();
            let oracle = common::type_ii_by_vertices(&p, &q, eps);
            assert!(
                (t.type_ii - oracle).abs() < 1e-12,
                "d={d} eps={eps}: {} vs {oracle}",
                t.type_ii
            );
        }
    }
}

#[test]
fn commuting_quantum_pair_uses_its_eigenbasis() {
    // Same spectra rotated by a shared unitary: the optimum is basis independent.
    let mut rng = common::rng(12);
    for _ in 0..20 {
        let p = random::probability_vector(&mut rng, 3);
        let q = random::probability_vector(&mut rng, 3);
        let u = random::unitary(&mut rng, 3);
        let sys = RegisterSystem::from_pairs(&[("X", 3)]).unwrap();
        let rotate = |w: &[f64]| {
            let d = DensityOperator::from_diagonal(sys.clone(), w).unwrap();
            DensityOperator::new(sys.clone(), u.conjugate_by(d.matrix())).unwrap()
        };
        let t = hypothesis_test(&rotate(&p), &rotate(&q), 0.1).unwrap();
        assert!(t.commuting);
        assert!((t.type_ii - common::type_ii_by_vertices(&p, &q, 0.1)).abs() < 1e-8);
    }
}

#[test]
fn qubit_fidelity_matches_closed_form() {
    let mut rng = common::rng(13);
    for _ in 0..100 {
        let rho = random::full_rank_state(&mut rng, qubit("A"));
        let rank = 1 + rng_bit(&mut rng);
        let sigma = random::mixed_state(&mut rng, qubit("A"), rank);
        let f = fidelity(&rho, &sigma).unwrap();
        assert!((f - common::qubit_fidelity(rho.matrix(), sigma.matrix())).abs() < 1e-7);
    }
}

fn rng_bit(rng: &mut rand_chacha::ChaCha8Rng) -> usize {
    usize::from(random::uniform(rng) < 0.5)
}

#[test]
fn uhlmann_overlap_matches_closed_form_fidelity() {
    let mut rng = common::rng(14);
    for _ in 0..50 {
        let rho = random::full_rank_state(&mut rng, qubit("A"));
        let sigma = random::full_rank_state(&mut rng, qubit("A"));
        let target = purify(&rho, "B").unwrap();
        let source = purify(&sigma, "C").unwrap();
        let u = uhlmann_isometry(&target, &source, &["A"]).unwrap();
        assert!((u.overlap - common::qubit_fidelity(rho.matrix(), sigma.matrix())).abs() < 1e-9);
    }
}

#[test]
fn coherence_matches_search_over_incoherent_states() {
    let mut rng = common::rng(15);
    for _ in 0..100 {
        let rho = random::full_rank_state(&mut rng, qubit("A"));
        let searched = common::qubit_coherence_by_search(rho.matrix());
        assert!((relative_entropy_of_coherence(&rho) - searched).abs() < 1e-9);
    }
}

#[test]
fn convex_split_state_matches_entrywise_construction() {
    let mut rng = common::rng(16);
    let pq = RegisterSystem::qubits(&["P", "Q"]).unwrap();
    for n in 1..=3 {
        let rho = random::full_rank_state(&mut rng, pq.clone());
        let sigma = random::full_rank_state(&mut rng, qubit("Q"));
        let tau = convex_split_state(&rho, &sigma, n, 1 << 13).unwrap();
        let oracle = common::convex_split_by_entries(rho.matrix(), sigma.matrix(), 2, 2, n);
        assert!((tau.matrix() - &oracle).max_abs() < 1e-14);
    }
}

#[test]
fn convex_split_fidelity_routes_agree_on_qutrit_p() {
    let mut rng = common::rng(17);
    let sys = RegisterSystem::from_pairs(&[("P", 3), ("Q", 2)]).unwrap();
    for n in 1..=4 {
        let rho = random::full_rank_state(&mut rng, sys.clone());
        let sigma = random::full_rank_state(&mut rng, qubit("Q"));
        let dense = convex_split_fidelity(&rho, &sigma, n, FidelityRoute::Dense, 1 << 16).unwrap();
        let blocks =
            convex_split_fidelity(&rho, &sigma, n, FidelityRoute::SymmetricBlocks, 1 << 16)
                .unwrap();
        assert!((dense - blocks).abs() < 1e-9);
    }
}
