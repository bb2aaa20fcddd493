//! Executable protocol simulations. Each run returns a [`ProtocolTranscript`]
//! recording who did what, the resources spent, and the fidelity reached.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::AddAssign;

use crate::qmat::DensityOperator;
use crate::{Error, Result};

mod bounds;
mod convex_split;
mod creation;
mod qsr;
mod uhlmann;

pub use bounds::{
    close_states_check, fidelity_routes, gentle_measurement_check, purified_triangle_check,
    sequential_projector_bound_check, BoundCheck,
};
pub use convex_split::{
    convex_split_bound_check, convex_split_fidelity, convex_split_state, copy_label,
    ConvexSplitCheck, FidelityRoute,
};
pub use creation::{coherence_creation, CreationOptions};
pub use qsr::{
    decoder_input, qsr_decoder_p1, qsr_full, BranchEnsemble, DecoderRun, DecoderSetup, QsrInstance,
    QsrParameters, QsrRun, ROLES,
};
pub use uhlmann::{uhlmann_isometry, UhlmannIsometry};

/// Slack applied when a simulation asserts a proven inequality.
pub const BOUND_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Actor {
    Alice,
    Bob,
    Referee,
}

impl Actor {
    pub fn as_str(self) -> &'static str {
        match self {
            Actor::Alice => "alice",
            Actor::Bob => "bob",
            Actor::Referee => "referee",
        }
    }
}

/// Resources spent; also used as a per-step delta.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ResourceCounters {
    pub qubits_sent: u64,
    pub cobits_sent: u64,
    pub singlets_consumed: u64,
    pub coherent_qubits_out: u64,
}

impl AddAssign for ResourceCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.qubits_sent += rhs.qubits_sent;
        self.cobits_sent += rhs.cobits_sent;
        self.singlets_consumed += rhs.singlets_consumed;
        self.coherent_qubits_out += rhs.coherent_qubits_out;
    }
}

#[derive(Clone, Debug)]
pub struct Step {
    pub description: String,
    pub actor: Actor,
    pub deltas: ResourceCounters,
    /// Whether the operation is free for its actor; `None` when unrestricted.
    pub free_operation: Option<bool>,
    pub snapshot: Option<DensityOperator>,
}

#[derive(Clone, Debug)]
pub struct ProtocolTranscript {
    pub protocol: String,
    pub steps: Vec<Step>,
    pub counters: ResourceCounters,
    /// Fidelity of the final state with the target, in `[0, 1]`.
    pub achieved_fidelity: f64,
    /// Named scalar diagnostics, in insertion order.
    pub metrics: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl ProtocolTranscript {
    pub fn new(protocol: &str) -> Self {
        Self {
            protocol: protocol.into(),
            steps: Vec::new(),
            counters: ResourceCounters::default(),
            achieved_fidelity: 0.0,
            metrics: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Appends a step and accumulates its deltas into the counters.
    pub fn push(&mut self, step: Step) {
        self.counters += step.deltas;
        self.steps.push(step);
    }

    pub fn step(
        &mut self,
        actor: Actor,
        description: impl Into<String>,
        deltas: ResourceCounters,
        free: Option<bool>,
    ) {
        self.push(Step {
            description: description.into(),
            actor,
            deltas,
            free_operation: free,
            snapshot: None,
        });
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }

    pub fn set_metric(&mut self, name: &str, value: f64) {
        match self.metrics.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = value,
            None => self.metrics.push((name.into(), value)),
        }
    }

    pub fn set_fidelity(&mut self, f: f64) {
        self.achieved_fidelity = f.clamp(0.0, 1.0);
    }

    /// True when every step with a verdict is free.
    pub fn all_restricted_steps_free(&self) -> bool {
        self.steps.iter().all(|s| s.free_operation != Some(false))
    }
}

pub(crate) fn check_budget(required: usize, budget: usize) -> Result<()> {
    if required > budget {
        Err(Error::BudgetExceeded { required, budget })
    } else {
        Ok(())
    }
}

/// `⌈x⌉`, forgiving round-off just above an integer.
pub(crate) fn ceil_tolerant(x: f64) -> f64 {
    libm::ceil(x - 1e-9 * x.abs().max(1.0))
}
