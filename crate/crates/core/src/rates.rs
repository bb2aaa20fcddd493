//! Asymptotic rates for redistributing `C` of a pure `|Φ⟩_{RABC}` from Alice
//! (holding `A C`) to Bob (holding `B`), with and without a coherence
//! constraint on Bob, plus one-shot bounds and consistency audits.
//!
//! Rates are per copy. Qubit rates count quantum communication; cobit rates
//! count coherent classical bits, two per qubit under free superdense coding.
//! Quantities marked "cobits" below are in that unit, all others in qubits.

use alloc::format;
use alloc::vec::Vec;

use crate::coherence::{dephase, Coherence, ResourceTheory};
use crate::entropy::{
    conditional_entropy, conditional_mutual_information, log2, mutual_information,
    relative_entropy, relative_entropy_of_coherence, von_neumann_entropy, EntropicValue,
};
use crate::protocols::{QsrInstance, ROLES};
use crate::qmat::{partial_trace, tensor, DensityOperator, Register, RegisterSystem, StateVector};
use crate::{Error, Result};

/// Agreement demanded between equivalent closed forms.
pub const FORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateUnit {
    Qubits,
    Cobits,
}

impl RateUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            RateUnit::Qubits => "qubits",
            RateUnit::Cobits => "cobits",
        }
    }

    fn per_qubit(self) -> f64 {
        match self {
            RateUnit::Qubits => 1.0,
            RateUnit::Cobits => 2.0,
        }
    }
}

/// Every closed-form rate for one instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateReport {
    /// `½ I(C:R|B)`
    pub q_min_std: f64,
    /// `S(C|B)`, qubits plus ebits.
    pub q_plus_e_min_std: f64,
    /// `S(Δ(ρ_BC)) − S(Δ(ρ_B))`, a necessary bound on `Q + E + C`.
    pub sum_bound_slepian_wolf: f64,
    /// `½{I(C:R|B) + R_c(ρ_BC) − R_c(ρ_B)}`
    pub q_min_incoherent: f64,
    /// `½{S(ρ_C) + S(Δ(ρ_C))}`
    pub q_min_schumacher_incoherent: f64,
    /// `½{I(C:RB) + R_c(ρ_C)}`: splitting with Bob's `B` folded into the reference.
    pub q_min_splitting_incoherent: f64,
    /// Classical bits, twice `q_min_incoherent`.
    pub classical_rate_incoherent: f64,
    /// Unit of the four `q_min_*` fields.
    pub units: RateUnit,
}

impl RateReport {
    /// Column names, in [`RateReport::values`] order.
    pub const FIELDS: [&'static str; 7] = [
        "q_min_std",
        "q_plus_e_min_std",
        "sum_bound_slepian_wolf",
        "q_min_incoherent",
        "q_min_schumacher_incoherent",
        "q_min_splitting_incoherent",
        "classical_rate_incoherent",
    ];

    /// The report in qubits. Absent roles are treated as trivial registers.
    pub fn compute(psi: &StateVector) -> Result<Self> {
        let psi = QsrInstance::pad_roles(psi)?;
        let (q, q_plus_e) = standard_qsr_rates(&psi)?;
        let q_inc = incoherent_qsr_rate(&psi)?;
        let rho_c = psi.reduced(&["C"])?;
        Ok(Self {
            q_min_std: q,
            q_plus_e_min_std: q_plus_e,
            sum_bound_slepian_wolf: slepian_wolf_sum_bound(&psi)?,
            q_min_incoherent: q_inc,
            q_min_schumacher_incoherent: incoherent_schumacher_rate(&rho_c)?,
            q_min_splitting_incoherent: incoherent_splitting_rate(&fold(&psi, "B", "R")?)?,
            classical_rate_incoherent: classical_rate_incoherent(&psi)?,
            units: RateUnit::Qubits,
        })
    }

    /// Entries of the largest marginal density matrix [`RateReport::compute`] builds.
    pub fn cost(psi: &StateVector) -> Result<usize> {
        let psi = QsrInstance::pad_roles(psi)?;
        let smallest = ROLES
            .iter()
            .map(|r| psi.system().dim_of(r))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
            .unwrap_or(1);
        let d = psi.dim() / smallest.max(1);
        Ok(d.saturating_mul(d))
    }

    /// [`RateReport::compute`] after checking [`RateReport::cost`] against `budget`.
    pub fn compute_within(psi: &StateVector, budget: usize) -> Result<Self> {
        let required = Self::cost(psi)?;
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
        Self::compute(psi)
    }

    /// Re-expresses the qubit-rate fields in `units`; the others are unchanged.
    pub fn in_units(mut self, units: RateUnit) -> Self {
        let scale = units.per_qubit() / self.units.per_qubit();
        for field in [
            &mut self.q_min_std,
            &mut self.q_min_incoherent,
            &mut self.q_min_schumacher_incoherent,
            &mut self.q_min_splitting_incoherent,
        ] {
            *field *= scale;
        }
        self.units = units;
        self
    }

    pub fn values(&self) -> [f64; 7] {
        [
            self.q_min_std,
            self.q_plus_e_min_std,
            self.sum_bound_slepian_wolf,
            self.q_min_incoherent,
            self.q_min_schumacher_incoherent,
            self.q_min_splitting_incoherent,
            self.classical_rate_incoherent,
        ]
    }

    /// Unit of each field, in [`RateReport::FIELDS`] order.
    pub fn field_units(&self) -> [&'static str; 7] {
        let q = self.units.as_str();
        [q, "qubits+ebits", "bits", q, q, q, "bits"]
    }
}

fn density(psi: &StateVector) -> Result<DensityOperator> {
    Ok(QsrInstance::pad_roles(psi)?.to_density())
}

fn require_trivial(psi: &StateVector, role: &str) -> Result<()> {
    if psi.system().contains(role) && psi.system().dim_of(role)? > 1 {
        return Err(Error::InvalidParameter(format!(
            "register {role} must be absent or one-dimensional here"
        )));
    }
    Ok(())
}

/// Merges register `from` into `into` (as `into ⊗ from`), keeping role order.
pub fn fold(psi: &StateVector, from: &str, into: &str) -> Result<StateVector> {
    let psi = QsrInstance::pad_roles(psi)?;
    let mut order: Vec<&str> = ROLES.iter().copied().filter(|&l| l != from).collect();
    let at = order
        .iter()
        .position(|&l| l == into)
        .ok_or_else(|| Error::UnknownLabel(into.into()))?;
    order.insert(at + 1, from);
    let arranged = psi.reorder(&order)?;
    let regs: Vec<Register> = order
        .iter()
        .filter(|&&l| l != from)
        .map(|&l| {
            let dim = if l == into {
                psi.system().dim_of(into)? * psi.system().dim_of(from)?
            } else {
                psi.system().dim_of(l)?
            };
            Ok(Register {
                label: l.into(),
                dim,
            })
        })
        .collect::<Result<_>>()?;
    let mut regs = regs;
    regs.push(Register {
        label: from.into(),
        dim: 1,
    });
    let merged = StateVector::new(RegisterSystem::new(regs)?, arranged.amplitudes().to_vec())?;
    merged.reorder(&ROLES)
}

/// `|Φ⟩^{⊗n}` with each role's copies merged into one register.
pub fn tensor_power(psi: &StateVector, n: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "tensor power needs at least one copy".into(),
        ));
    }
    let psi = QsrInstance::pad_roles(psi)?;
    let mut acc = psi.clone();
    for _ in 1..n {
        let mut copy = psi.clone();
        for role in ROLES {
            copy = copy.relabel(role, &format!("{role}'"))?;
        }
        let joined = acc.tensor(&copy)?;
        let mut order = Vec::new();
        let primes: Vec<_> = ROLES.iter().map(|r| format!("{r}'")).collect();
        for (role, primed) in ROLES.iter().zip(&primes) {
            order.push(*role);
            order.push(primed.as_str());
        }
        let arranged = joined.reorder(&order)?;
        let regs = ROLES
            .iter()
            .map(|&r| {
                Ok(Register {
                    label: r.into(),
                    dim: acc.system().dim_of(r)? * psi.system().dim_of(r)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        acc = StateVector::new(RegisterSystem::new(regs)?, arranged.amplitudes().to_vec())?;
    }
    Ok(acc)
}

/// `(Q, Q+E) = (½ I(C:R|B), S(C|B))`.
pub fn standard_qsr_rates(psi: &StateVector) -> Result<(f64, f64)> {
    let rho = density(psi)?;
    let q = 0.5 * conditional_mutual_information(&rho, &["C"], &["R"], &["B"])?;
    Ok((q, conditional_entropy(&rho, &["C"], &["B"])?))
}

/// `S(Δ(ρ_BC)) − S(Δ(ρ_B))`. Only a necessary condition on `Q + E + C`; no
/// protocol attaining it is claimed.
pub fn slepian_wolf_sum_bound(psi: &StateVector) -> Result<f64> {
    let rho_bc = dephase(
        &QsrInstance::pad_roles(psi)?.reduced(&["B", "C"])?,
        &["B", "C"],
    )?;
    Ok(von_neumann_entropy(&rho_bc) - von_neumann_entropy(&partial_trace(&rho_bc, &["B"])?))
}

/// The incoherent redistribution rate in three equivalent forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncoherentRateForms {
    /// Qubits: `½{I(C:R|B) + R_c(ρ_BC) − R_c(ρ_B)}` from entropies.
    pub qubit_form: f64,
    /// Cobits: `I(R:C|B) + D(Φ_BC‖Δ(Φ_BC)) − D(Φ_B‖Δ(Φ_B))` from relative entropies.
    pub chain_form: f64,
    /// Cobits: `D(Φ_RBC‖Φ_RB ⊗ σ_C) − D(Δ(Φ_BC)‖Δ(Φ_B) ⊗ σ_C)`.
    pub divergence_form: f64,
}

impl IncoherentRateForms {
    /// Largest pairwise gap, comparing in cobits.
    pub fn max_disagreement(&self) -> f64 {
        let a = 2.0 * self.qubit_form;
        let (b, c) = (self.chain_form, self.divergence_form);
        (a - b).abs().max((a - c).abs()).max((b - c).abs())
    }
}

fn finite(v: EntropicValue) -> Result<f64> {
    if v.finite {
        Ok(v.value)
    } else {
        Err(Error::SupportViolation)
    }
}

/// Evaluates all three forms; `σ_C` must be diagonal with `supp ρ_C ⊆ supp σ_C`.
pub fn incoherent_qsr_rate_forms(
    psi: &StateVector,
    sigma_c: &DensityOperator,
) -> Result<IncoherentRateForms> {
    let psi = QsrInstance::pad_roles(psi)?;
    if !Coherence.is_free_state(sigma_c) {
        return Err(Error::NotFree("sigma_C must be diagonal".into()));
    }
    let sigma_c = sigma_c.with_system(psi.system().restrict(&["C"])?)?;
    let rho = psi.to_density();
    let cmi = conditional_mutual_information(&rho, &["C"], &["R"], &["B"])?;
    let rho_bc = psi.reduced(&["B", "C"])?;
    let rho_b = psi.reduced(&["B"])?;

    let qubit_form = 0.5
        * (cmi + relative_entropy_of_coherence(&rho_bc) - relative_entropy_of_coherence(&rho_b));

    let d_bc = finite(relative_entropy(&rho_bc, &dephase(&rho_bc, &["B", "C"])?)?)?;
    let d_b = finite(relative_entropy(&rho_b, &dephase(&rho_b, &["B"])?)?)?;
    let chain_form = cmi + d_bc - d_b;

    let rho_rbc = psi.reduced(&["R", "B", "C"])?;
    let outer = finite(relative_entropy(
        &rho_rbc,
        &tensor(&psi.reduced(&["R", "B"])?, &sigma_c)?,
    )?)?;
    let deph_bc = dephase(&rho_bc, &["B", "C"])?;
    let inner = finite(relative_entropy(
        &deph_bc,
        &tensor(&dephase(&rho_b, &["B"])?, &sigma_c)?,
    )?)?;
    Ok(IncoherentRateForms {
        qubit_form,
        chain_form,
        divergence_form: outer - inner,
    })
}

/// `½{I(C:R|B) + R_c(ρ_BC) − R_c(ρ_B)}` in qubits, cross-checked against the
/// two cobit forms with `σ_C = Δ(ρ_C)`.
pub fn incoherent_qsr_rate(psi: &StateVector) -> Result<f64> {
    let sigma_c = dephase(&QsrInstance::pad_roles(psi)?.reduced(&["C"])?, &["C"])?;
    let forms = incoherent_qsr_rate_forms(psi, &sigma_c)?;
    let gap = forms.max_disagreement();
    if gap > FORM_TOL {
        return Err(Error::BoundViolated {
            what: "incoherent rate forms".into(),
            measured: gap,
            bound: FORM_TOL,
        });
    }
    Ok(forms.qubit_form)
}

/// `½{S(ρ_C) + S(Δ(ρ_C))}`
pub fn incoherent_schumacher_rate(rho_c: &DensityOperator) -> Result<f64> {
    let labels = rho_c.system().labels();
    Ok(0.5 * (von_neumann_entropy(rho_c) + von_neumann_entropy(&dephase(rho_c, &labels)?)))
}

/// `½{I(C:R) + R_c(ρ_BC) − R_c(ρ_B)}` for `|Φ⟩_{RBC}` (`A` trivial).
pub fn incoherent_slepian_wolf_rate(psi: &StateVector) -> Result<f64> {
    require_trivial(psi, "A")?;
    let psi = QsrInstance::pad_roles(psi)?;
    let rho = psi.to_density();
    let mi = mutual_information(&rho, &["C"], &["R"])?;
    let gain = relative_entropy_of_coherence(&psi.reduced(&["B", "C"])?)
        - relative_entropy_of_coherence(&psi.reduced(&["B"])?);
    Ok(0.5 * (mi + gain))
}

/// `½{I(C:R) + R_c(ρ_C)}` for `|Φ⟩_{RAC}` (`B` trivial).
pub fn incoherent_splitting_rate(psi: &StateVector) -> Result<f64> {
    require_trivial(psi, "B")?;
    let psi = QsrInstance::pad_roles(psi)?;
    let mi = mutual_information(&psi.to_density(), &["C"], &["R"])?;
    Ok(0.5 * (mi + relative_entropy_of_coherence(&psi.reduced(&["C"])?)))
}

/// Minimal forward classical rate with free superdense coding: twice the
/// incoherent qubit rate.
pub fn classical_rate_incoherent(psi: &StateVector) -> Result<f64> {
    Ok(2.0 * incoherent_qsr_rate(psi)?)
}

/// Splitting rate in cobits for an arbitrary theory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplittingRate {
    /// `I(R:C) + inf_{σ free} D(ρ_C‖σ)`
    pub value: EntropicValue,
    /// False when only the single-copy divergence was evaluated, so the
    /// regularized rate may be smaller.
    pub regularization_evaluated: bool,
}

/// `I(R:C) + lim (1/n) inf_σ D(ρ_C^{⊗n}‖σ)` for `|Φ⟩_{RAC}`, in cobits.
pub fn splitting_rate_general(
    psi: &StateVector,
    theory: &dyn ResourceTheory,
) -> Result<SplittingRate> {
    require_trivial(psi, "B")?;
    let psi = QsrInstance::pad_roles(psi)?;
    let mi = mutual_information(&psi.to_density(), &["C"], &["R"])?;
    let div = theory.resource_divergence(&psi.reduced(&["C"])?)?;
    let value = if div.value.finite {
        EntropicValue::finite(mi + div.value.value)
    } else {
        EntropicValue::infinite()
    };
    Ok(SplittingRate {
        value,
        regularization_evaluated: div.regularization_evaluated,
    })
}

/// `D_max − D_F + 2 log₂(2/(ε₁γ²))`, the one-shot cobit cost.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneShotBound {
    /// Unsmoothed `D_max(Φ_RBC‖Φ_RB ⊗ σ_C)`; the smoothed infimum is at most this.
    pub dmax_term: f64,
    /// `D_F^{ε₂⁴}(Φ_BC‖Φ_B ⊗ σ_C)`
    pub d_f: EntropicValue,
    /// `2 log₂(2/(ε₁γ²))`
    pub constant: f64,
    /// The bound; `−∞` when `D_F` is infinite.
    pub value: f64,
    /// Always true: the smoothing over `B^{ε₁}(Φ)` is not performed.
    pub unsmoothed: bool,
}

pub fn one_shot_achievability_bound(instance: &QsrInstance) -> Result<OneShotBound> {
    let p = instance.parameters()?;
    let constant = 2.0 * log2(2.0 / (instance.eps1() * instance.gamma() * instance.gamma()));
    let value = if p.d_f.finite {
        p.k - p.d_f.value + constant
    } else {
        f64::NEG_INFINITY
    };
    Ok(OneShotBound {
        dmax_term: p.k,
        d_f: p.d_f,
        constant,
        value,
        unsmoothed: true,
    })
}

/// Achievability and converse expressions, each computed by its own route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConverseAudit {
    /// Redistribution, cobits: divergence form with `σ_C = Δ(ρ_C)`.
    pub redistribution_achievable: f64,
    /// Redistribution, cobits: `I(R:C|B) + D(Φ_BC‖Δ) − D(Φ_B‖Δ)`.
    pub redistribution_converse: f64,
    /// Splitting (with `B` folded into `R`), cobits: `D(Φ_RC‖Φ_R ⊗ Δ(Φ_C))`.
    pub splitting_achievable: f64,
    /// Splitting, cobits: `I(R:C) + R_c(ρ_C)`.
    pub splitting_converse: f64,
}

impl ConverseAudit {
    pub fn max_gap(&self) -> f64 {
        (self.redistribution_achievable - self.redistribution_converse)
            .abs()
            .max((self.splitting_achievable - self.splitting_converse).abs())
    }
}

/// Errors if any achievability expression differs from its converse by more
/// than [`FORM_TOL`].
pub fn audit_converse_equals_achievability(psi: &StateVector) -> Result<ConverseAudit> {
    let psi = QsrInstance::pad_roles(psi)?;
    let sigma_c = dephase(&psi.reduced(&["C"])?, &["C"])?;
    let forms = incoherent_qsr_rate_forms(&psi, &sigma_c)?;

    let split = fold(&psi, "B", "R")?;
    let rho_rc = split.reduced(&["R", "C"])?;
    let rho_c = split.reduced(&["C"])?;
    let achievable = finite(relative_entropy(
        &rho_rc,
        &tensor(&split.reduced(&["R"])?, &dephase(&rho_c, &["C"])?)?,
    )?)?;
    let converse = splitting_rate_general(&split, &Coherence)?.value;

    let audit = ConverseAudit {
        redistribution_achievable: forms.divergence_form,
        redistribution_converse: forms.chain_form,
        splitting_achievable: achievable,
        splitting_converse: finite(converse)?,
    };
    let gap = audit.max_gap();
    if gap > FORM_TOL {
        return Err(Error::BoundViolated {
            what: "converse versus achievability".into(),
            measured: gap,
            bound: FORM_TOL,
        });
    }
    Ok(audit)
}

/// `R_c(ρ_AB) − R_c(ρ_B)` against its ceiling `2 log₂ d_A`, with `A` the
/// registers of `rho` outside `b_labels`.
pub fn coherence_gain_check(rho: &DensityOperator, b_labels: &[&str]) -> Result<(f64, f64)> {
    let a_labels = rho.system().complement(b_labels)?;
    let d_a = rho.system().dim_of_all(&a_labels)?;
    let gain = relative_entropy_of_coherence(rho)
        - relative_entropy_of_coherence(&partial_trace(rho, b_labels)?);
    Ok((gain, 2.0 * log2(d_a as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::linalg::{C64, ZERO};
    use crate::random;
    use core::f64::consts::FRAC_1_SQRT_2;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(labels: &[&str], amps: &[(usize, f64)]) -> StateVector {
        let sys = RegisterSystem::qubits(labels).unwrap();
        let mut v = alloc::vec![ZERO; sys.dim()];
        for &(i, a) in amps {
            v[i] = C64::new(a, 0.0);
        }
        StateVector::new(sys, v).unwrap()
    }

    fn plus_c() -> StateVector {
        state(&["C"], &[(0, FRAC_1_SQRT_2), (1, FRAC_1_SQRT_2)])
    }

    fn ghz(labels: &[&str]) -> StateVector {
        state(
            labels,
            &[(0, FRAC_1_SQRT_2), ((1 << labels.len()) - 1, FRAC_1_SQRT_2)],
        )
    }

    fn random_four_qubit(rng: &mut ChaCha8Rng) -> StateVector {
        random::pure_state(rng, RegisterSystem::qubits(&ROLES).unwrap())
    }

    #[test]
    fn report_cost_tracks_the_largest_marginal() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let sys = RegisterSystem::qubits(&["R", "B", "C"]).unwrap();
        let mut v = alloc::vec![C64::new(0.0, 0.0); 8];
        v[0] = C64::new(h, 0.0);
        v[7] = C64::new(h, 0.0);
        let ghz = StateVector::new(sys, v).unwrap();
        // A is padded to dimension 1, so the largest marginal is R B C itself.
        assert_eq!(RateReport::cost(&ghz).unwrap(), 64);
        assert_eq!(
            RateReport::cost(&tensor_power(&ghz, 2).unwrap()).unwrap(),
            64 * 64
        );
        assert!(matches!(
            RateReport::compute_within(&ghz, 63),
            Err(Error::BudgetExceeded { required: 64, .. })
        ));
        assert!(RateReport::compute_within(&ghz, 64).is_ok());
    }

    #[test]
    fn product_state_needs_nothing() {
        let psi = state(&["R", "A", "B", "C"], &[(0, 1.0)]);
        let (q, qe) = standard_qsr_rates(&psi).unwrap();
        assert!(q.abs() < 1e-12 && qe.abs() < 1e-12);
    }

    #[test]
    fn ghz_on_rbc() {
        let psi = ghz(&["R", "B", "C"]);
        let (q, qe) = standard_qsr_rates(&psi).unwrap();
        assert!((q - 0.5).abs() < 1e-12);
        assert!(qe.abs() < 1e-12);
        let r = RateReport::compute(&psi).unwrap();
        assert!((r.q_min_std - 0.5).abs() < 1e-12);
    }

    #[test]
    fn plus_state_costs_half_a_qubit() {
        let psi = plus_c();
        assert!((incoherent_qsr_rate(&psi).unwrap() - 0.5).abs() < 1e-12);
        assert!((classical_rate_incoherent(&psi).unwrap() - 1.0).abs() < 1e-12);
        assert!((incoherent_schumacher_rate(&psi.to_density()).unwrap() - 0.5).abs() < 1e-12);
        assert!((slepian_wolf_sum_bound(&psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_input_reduces_to_standard_rates() {
        let rho =
            DensityOperator::from_diagonal(RegisterSystem::qubits(&["C"]).unwrap(), &[0.3, 0.7])
                .unwrap();
        let s = von_neumann_entropy(&rho);
        assert!((incoherent_schumacher_rate(&rho).unwrap() - s).abs() < 1e-12);
        let psi = ghz(&["R", "C"]);
        assert!((incoherent_qsr_rate(&psi).unwrap() - 0.5 * 2.0).abs() < 1e-12);
        assert!((incoherent_splitting_rate(&psi).unwrap() - 1.0).abs() < 1e-12);
        // Classically correlated R:C with I(C:R) = 1 and ρ_C = I/2.
        assert!((incoherent_splitting_rate(&ghz(&["R", "A", "C"])).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn slepian_wolf_with_trivial_b_is_splitting() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random::pure_state(&mut rng, RegisterSystem::qubits(&["R", "C"]).unwrap());
        let sw = incoherent_slepian_wolf_rate(&psi).unwrap();
        let sp = incoherent_splitting_rate(&psi).unwrap();
        assert_eq!(sw, sp);
    }

    #[test]
    fn maximally_entangled_split_costs_two_cobits() {
        let psi = ghz(&["R", "C"]);
        let r = splitting_rate_general(&psi, &Coherence).unwrap();
        assert!((r.value.value - 2.0).abs() < 1e-12 && r.regularization_evaluated);
        assert!((r.value.value - 2.0 * incoherent_splitting_rate(&psi).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn wrong_side_information_is_rejected() {
        let psi = ghz(&["R", "A", "C"]);
        assert!(incoherent_slepian_wolf_rate(&psi).is_err());
        assert!(incoherent_splitting_rate(&ghz(&["R", "B", "C"])).is_err());
    }

    #[test]
    fn three_forms_agree_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = RegisterSystem::qubits(&["C"]).unwrap();
        for _ in 0..20 {
            let psi = random_four_qubit(&mut rng);
            let forms =
                incoherent_qsr_rate_forms(&psi, &DensityOperator::maximally_mixed(c.clone()))
                    .unwrap();
            assert!(forms.max_disagreement() < FORM_TOL, "{forms:?}");
            audit_converse_equals_achievability(&psi).unwrap();
        }
    }

    #[test]
    fn incoherent_rate_dominates_standard_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let r = RateReport::compute(&random_four_qubit(&mut rng)).unwrap();
            assert!(r.q_min_incoherent >= r.q_min_std - 1e-9);
            assert!(r.values().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn cobit_units_double_qubit_fields_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = RateReport::compute(&random_four_qubit(&mut rng)).unwrap();
        let c = q.in_units(RateUnit::Cobits);
        for (i, name) in RateReport::FIELDS.iter().enumerate() {
            let factor = if name.starts_with("q_min") { 2.0 } else { 1.0 };
            assert_eq!(c.values()[i], factor * q.values()[i], "{name}");
        }
        assert_eq!(c.in_units(RateUnit::Qubits), q);
    }

    #[test]
    fn rates_are_additive_over_two_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = random_four_qubit(&mut rng);
        let one = RateReport::compute(&psi).unwrap().values();
        let two = RateReport::compute(&tensor_power(&psi, 2).unwrap())
            .unwrap()
            .values();
        for (a, b) in one.iter().zip(&two) {
            assert!((2.0 * a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn one_shot_constant_at_tenth() {
        let psi = ghz(&["R", "B"]).tensor(&plus_c()).unwrap();
        let inst = QsrInstance::new(psi, 0.1, 0.1, 0.1).unwrap();
        let b = one_shot_achievability_bound(&inst).unwrap();
        assert!((b.constant - 2.0 * log2(2000.0)).abs() < 1e-12);
        assert!((b.constant - 21.93).abs() < 5e-3);
        assert!(b.unsmoothed);
    }

    #[test]
    fn one_shot_bound_without_correlations() {
        let rb = state(&["R", "B"], &[(0, 0.6), (3, 0.8)]);
        let ac = state(&["A", "C"], &[(0, libm::sqrt(0.3)), (3, libm::sqrt(0.7))]);
        let inst = QsrInstance::new(rb.tensor(&ac).unwrap(), 0.2, 0.3, 0.2).unwrap();
        let b = one_shot_achievability_bound(&inst).unwrap();
        assert!(b.dmax_term.abs() < 1e-9);
        assert!((b.value - (b.constant - b.d_f.value)).abs() < 1e-9);
    }

    #[test]
    fn one_shot_bound_decreases_with_eps2() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let psi = random_four_qubit(&mut rng);
        let mut last = f64::INFINITY;
        for eps2 in [0.2, 0.4, 0.6, 0.8] {
            let b = one_shot_achievability_bound(
                &QsrInstance::new(psi.clone(), 0.3, eps2, 0.3).unwrap(),
            )
            .unwrap();
            assert!(b.value <= last + 1e-9);
            last = b.value;
        }
    }

    #[test]
    fn coherence_gain_is_bounded_for_bell_pair() {
        let bell = ghz(&["A", "B"]).to_density();
        let (gain, ceiling) = coherence_gain_check(&bell, &["B"]).unwrap();
        assert!((gain - 1.0).abs() < 1e-12 && (ceiling - 2.0).abs() < 1e-12);
    }
}
