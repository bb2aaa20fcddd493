//! Resource theory of coherence with respect to the computational basis of
//! every register, plus the abstract interface other theories plug into.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::entropy::{log2, relative_entropy, relative_entropy_of_coherence, EntropicValue};
use crate::qmat::linalg::{complete_orthonormal, HermitianEigen, Matrix, C64, ZERO};
use crate::qmat::{DensityOperator, KrausChannel, Povm, RegisterSystem, StateVector};
use crate::{Error, Result, TAU_HERM};

/// Entries with modulus at or below this count as zero in incoherence tests.
pub const INCOHERENCE_TOL: f64 = 1e-10;

/// Maps `i ↦` index of the digits of `i` restricted to `labels`.
fn selected_digit_index(system: &RegisterSystem, labels: &[&str]) -> Result<Vec<usize>> {
    let sp = system.split(labels)?;
    let mut sel = vec![0usize; system.dim()];
    for s in 0..sp.d_sel() {
        for r in 0..sp.d_rest() {
            sel[sp.index(s, r)] = s;
        }
    }
    Ok(sel)
}

/// `Δ_labels` on a raw operator over `system`.
pub fn dephase_operator(op: &Matrix, system: &RegisterSystem, labels: &[&str]) -> Result<Matrix> {
    if op.rows() != system.dim() || op.cols() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: op.rows(),
        });
    }
    let sel = selected_digit_index(system, labels)?;
    Ok(Matrix::from_fn(op.rows(), op.cols(), |i, j| {
        if sel[i] == sel[j] {
            op[(i, j)]
        } else {
            ZERO
        }
    }))
}

/// Removes coherences between computational basis states of the named
/// registers.
pub fn dephase(rho: &DensityOperator, labels: &[&str]) -> Result<DensityOperator> {
    let m = dephase_operator(rho.matrix(), rho.system(), labels)?;
    Ok(crate::qmat::DensityOperator::from_parts(
        rho.system().clone(),
        m,
        rho.is_normalized(),
    ))
}

/// Dephases every register.
pub fn dephase_all(rho: &DensityOperator) -> DensityOperator {
    DensityOperator::from_parts(
        rho.system().clone(),
        rho.matrix().diagonal_part(),
        rho.is_normalized(),
    )
}

/// A trace-preserving collapsing map `Δ`, applied register by register
/// (`Δ_RS = Δ_R ⊗ Δ_S`).
pub trait CollapsingMap {
    fn name(&self) -> &str;
    /// `Δ_labels(ρ)`
    fn collapse(&self, rho: &DensityOperator, labels: &[&str]) -> Result<DensityOperator>;
    /// `Δ†_labels(O)`
    fn collapse_adjoint(
        &self,
        op: &Matrix,
        system: &RegisterSystem,
        labels: &[&str],
    ) -> Result<Matrix>;
    /// Every free measurement operator is `Δ†(O)` for some `0 ⪯ O ⪯ I`.
    fn surjective_wrt_free_ops(&self) -> bool;
}

/// Complete dephasing; self-adjoint and idempotent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Dephasing;

impl CollapsingMap for Dephasing {
    fn name(&self) -> &str {
        "dephasing"
    }

    fn collapse(&self, rho: &DensityOperator, labels: &[&str]) -> Result<DensityOperator> {
        dephase(rho, labels)
    }

    fn collapse_adjoint(
        &self,
        op: &Matrix,
        system: &RegisterSystem,
        labels: &[&str],
    ) -> Result<Matrix> {
        dephase_operator(op, system, labels)
    }

    fn surjective_wrt_free_ops(&self) -> bool {
        true
    }
}

/// `inf_{σ free} D(ρ‖σ)` as reported by a theory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResourceDivergence {
    pub value: EntropicValue,
    /// False when only the single-copy quantity was evaluated and the
    /// regularized limit may be smaller.
    pub regularization_evaluated: bool,
}

/// Free states, free operations and free measurement operators.
pub trait ResourceTheory {
    fn name(&self) -> &str;
    fn is_free_state(&self, rho: &DensityOperator) -> bool;
    fn is_free_operation(&self, ch: &KrausChannel) -> bool;
    /// Membership in the set of measurement operators whose flagging channel is free.
    fn is_free_measurement_operator(&self, op: &Matrix) -> bool;
    fn collapsing_map(&self) -> Option<&dyn CollapsingMap>;
    fn resource_divergence(&self, rho: &DensityOperator) -> Result<ResourceDivergence>;
}

/// Coherence: free states are diagonal, free operations are incoherent
/// operations, free measurement operators are diagonal effects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Coherence;

impl ResourceTheory for Coherence {
    fn name(&self) -> &str {
        "coherence"
    }

    fn is_free_state(&self, rho: &DensityOperator) -> bool {
        rho.matrix().is_diagonal(INCOHERENCE_TOL)
    }

    fn is_free_operation(&self, ch: &KrausChannel) -> bool {
        ch.is_trace_preserving() && is_incoherent_channel(ch).incoherent
    }

    fn is_free_measurement_operator(&self, op: &Matrix) -> bool {
        if !op.is_square() || !op.is_diagonal(INCOHERENCE_TOL) {
            return false;
        }
        op.diagonal()
            .iter()
            .all(|z| z.im.abs() <= TAU_HERM && z.re >= -TAU_HERM && z.re <= 1.0 + TAU_HERM)
    }

    fn collapsing_map(&self) -> Option<&dyn CollapsingMap> {
        Some(&Dephasing)
    }

    fn resource_divergence(&self, rho: &DensityOperator) -> Result<ResourceDivergence> {
        Ok(ResourceDivergence {
            value: EntropicValue::finite(relative_entropy_of_coherence(rho)),
            regularization_evaluated: true,
        })
    }
}

/// A theory given by an explicit finite list of free states. Free operations
/// are only spot-checked (they must map every listed state onto a listed
/// state); there is no collapsing map.
#[derive(Clone, Debug)]
pub struct FiniteFreeStates {
    pub name: String,
    pub states: Vec<DensityOperator>,
}

impl FiniteFreeStates {
    fn matches(&self, rho: &DensityOperator) -> bool {
        self.states.iter().any(|s| {
            s.dim() == rho.dim() && (s.matrix() - rho.matrix()).max_abs() <= INCOHERENCE_TOL
        })
    }
}

impl ResourceTheory for FiniteFreeStates {
    fn name(&self) -> &str {
        &self.name
    }

    fn is_free_state(&self, rho: &DensityOperator) -> bool {
        self.matches(rho)
    }

    fn is_free_operation(&self, ch: &KrausChannel) -> bool {
        ch.is_trace_preserving()
            && self
                .states
                .iter()
                .filter(|s| s.dim() == ch.input().dim())
                .all(|s| {
                    let out = ch.apply_matrix(s.matrix());
                    self.states.iter().any(|t| {
                        t.dim() == out.rows() && (t.matrix() - &out).max_abs() <= INCOHERENCE_TOL
                    })
                })
    }

    fn is_free_measurement_operator(&self, _op: &Matrix) -> bool {
        false
    }

    fn collapsing_map(&self) -> Option<&dyn CollapsingMap> {
        None
    }

    fn resource_divergence(&self, rho: &DensityOperator) -> Result<ResourceDivergence> {
        let mut best = EntropicValue::infinite();
        for s in self.states.iter().filter(|s| s.dim() == rho.dim()) {
            let s = s.with_system(rho.system().clone())?;
            let d = relative_entropy(rho, &s)?;
            if d.le_with_tol(best, 0.0) {
                best = d;
            }
        }
        Ok(ResourceDivergence {
            value: best,
            regularization_evaluated: false,
        })
    }
}

/// Shipped theories by name.
pub fn theory_by_name(name: &str) -> Option<Box<dyn ResourceTheory>> {
    match name {
        "coherence" => Some(Box::new(Coherence)),
        _ => None,
    }
}

/// Kraus operator `operator` sends basis state `column` into a superposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IncoherenceWitness {
    pub operator: usize,
    pub column: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IncoherenceCheck {
    pub incoherent: bool,
    pub witness: Option<IncoherenceWitness>,
}

/// Every Kraus operator has at most one entry above [`INCOHERENCE_TOL`] per column.
pub fn is_incoherent_channel(ch: &KrausChannel) -> IncoherenceCheck {
    for (k, op) in ch.kraus().iter().enumerate() {
        for col in 0..op.cols() {
            let nonzero = (0..op.rows())
                .filter(|&r| op[(r, col)].norm() > INCOHERENCE_TOL)
                .count();
            if nonzero > 1 {
                return IncoherenceCheck {
                    incoherent: false,
                    witness: Some(IncoherenceWitness {
                        operator: k,
                        column: col,
                    }),
                };
            }
        }
    }
    IncoherenceCheck {
        incoherent: true,
        witness: None,
    }
}

/// Trace-preserving channel whose Kraus operators are certified incoherent.
#[derive(Clone, Debug, PartialEq)]
pub struct IncoherentKrausSet {
    channel: KrausChannel,
}

impl IncoherentKrausSet {
    pub fn new(channel: KrausChannel) -> Result<Self> {
        if !channel.is_trace_preserving() {
            return Err(Error::NotTracePreserving(
                channel.trace_preserving_deviation(),
            ));
        }
        match is_incoherent_channel(&channel).witness {
            None => Ok(Self { channel }),
            Some(w) => Err(Error::NotFree(alloc::format!(
                "Kraus operator {} maps basis state {} to a superposition",
                w.operator,
                w.column
            ))),
        }
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn kraus(&self) -> &[Matrix] {
        self.channel.kraus()
    }
}

/// Uniform superposition over the computational basis of `system`.
pub fn maximally_coherent_vector(system: RegisterSystem) -> StateVector {
    let d = system.dim();
    let a = C64::new(1.0 / libm::sqrt(d as f64), 0.0);
    StateVector::new(system, vec![a; d]).expect("uniform superposition is normalized")
}

/// `|+⟩^{⊗n}` on qubits labeled `q1 … qn`.
pub fn maximally_coherent_state(num_qubits: usize) -> Result<DensityOperator> {
    let labels: Vec<String> = (1..=num_qubits).map(|k| alloc::format!("q{k}")).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    Ok(maximally_coherent_vector(RegisterSystem::qubits(&refs)?).to_density())
}

pub fn hadamard() -> Matrix {
    let h = 1.0 / core::f64::consts::SQRT_2;
    Matrix::from_real(2, 2, &[h, h, h, -h])
}

/// `diag(1, 1, 1, −1)`: sends `(|0⟩|+⟩ + |1⟩|−⟩)/√2` to `|+⟩|+⟩`.
pub fn controlled_z() -> Matrix {
    Matrix::diag_real(&[1.0, 1.0, 1.0, -1.0])
}

/// Maximum coherence-relative-entropy constant of a register of dimension `dim`.
pub fn coherence_converse_constant(dim: usize) -> f64 {
    log2(dim as f64)
}

/// Unitary realization of a measurement on `system ⊗ pointer`.
#[derive(Clone, Debug)]
pub struct Neumark {
    pub unitary: Matrix,
    pub system: RegisterSystem,
    pub pointer: String,
}

impl Neumark {
    /// `(I ⊗ ⟨i|) U (ρ ⊗ |0⟩⟨0|) U† (I ⊗ |i⟩)`, unnormalized.
    pub fn branch(&self, rho: &Matrix, outcome: usize) -> Matrix {
        let m = self
            .system
            .dim_of(&self.pointer)
            .expect("pointer register exists");
        let d = rho.rows();
        // Column block of U acting on pointer |0⟩, restricted to pointer output |i⟩.
        let a = Matrix::from_fn(d, d, |s, t| self.unitary[(s * m + outcome, t * m)]);
        a.conjugate_by(rho)
    }
}

/// Stacks `Σ_i A_i ⊗ |i⟩` as the pointer-`|0⟩` columns of a unitary and
/// completes the rest with an orthonormal complement.
pub fn neumark_dilation(povm: &Povm) -> Result<Neumark> {
    let pointer = povm.system().fresh_label("P");
    let m = povm.len();
    let system = povm.system().with(&pointer, m)?;
    let d = povm.system().dim();
    let dim = d * m;
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for t in 0..d {
        let mut col = vec![ZERO; dim];
        for (i, a) in povm.operators().iter().enumerate() {
            for s in 0..d {
                col[s * m + i] = a[(s, t)];
            }
        }
        columns.push(col);
    }
    let full = complete_orthonormal(columns, dim);
    if full.len() != dim {
        return Err(Error::IncompletePovm(1.0));
    }
    // Place the isometry columns at pointer |0⟩ and the complement elsewhere.
    let mut ordered = vec![Vec::new(); dim];
    let mut rest = full[d..].iter();
    for t in 0..d {
        ordered[t * m] = full[t].clone();
        for p in 1..m {
            ordered[t * m + p] = rest.next().expect("complement size").clone();
        }
    }
    let unitary = Matrix::from_columns(&ordered);
    let dev = (&unitary.adjoint_matmul(&unitary) - &Matrix::identity(dim)).max_abs();
    if dev > TAU_HERM {
        return Err(Error::IncompletePovm(dev));
    }
    Ok(Neumark {
        unitary,
        system,
        pointer,
    })
}

/// `Tr(ρ log₂ σ)` for a PSD `σ`, restricted to its support.
pub fn cross_log_trace(rho: &Matrix, sigma: &Matrix) -> f64 {
    let log_sigma =
        HermitianEigen::new(sigma).map(|x| if x > crate::EIG_ZERO { log2(x) } else { 0.0 });
    rho.trace_product(&log_sigma).re
}
