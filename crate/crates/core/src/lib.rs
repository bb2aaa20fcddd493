//! Quantum state redistribution under local coherence constraints, at desk
//! scale.
//!
//! The crate is `no_std` (it needs `alloc`). Layers, bottom up:
//!
//! * [`qmat`]: labeled multi-register states, channels, fidelities.
//! * [`entropy`]: entropies, relative entropies, hypothesis testing.
//! * [`coherence`]: dephasing, incoherent operations, resource theories.
//! * [`protocols`]: coherence creation, convex split, Uhlmann decoding and the
//!   one-shot redistribution protocol, each producing a [`protocols::ProtocolTranscript`].
//! * [`rates`]: closed-form rate expressions and their cross-checks.
//! * [`random`]: seeded Haar states and friends for sweeps and tests.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod coherence;
pub mod entropy;
mod error;
pub mod protocols;
pub mod qmat;
pub mod random;
pub mod rates;

pub use error::{Error, Result};

/// Normalization tolerance for traces and vector norms.
pub const TAU_NORM: f64 = 1e-9;
/// Hermiticity tolerance.
pub const TAU_HERM: f64 = 1e-9;
/// Most negative eigenvalue accepted (and clamped) in a PSD operator.
pub const TAU_PSD: f64 = 1e-9;
/// Reconstruction tolerance for marginals, dilations and channel outputs.
pub const TAU_RECON: f64 = 1e-8;
/// Eigenvalues at or below this are treated as exactly zero.
pub const EIG_ZERO: f64 = 1e-12;
/// Default cap on complex amplitudes held by one simulation.
pub const DEFAULT_BUDGET: usize = 1 << 13;
