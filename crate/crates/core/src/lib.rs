//! Pulsed-force sequences for fast two-ion geometric phase gates that do not
//! depend on the optical phase of the driving walking wave.
//!
//! The crate evaluates square-pulse trains in closed form ([`phasespace`]),
//! turns them into gate infidelities ([`fidelity`]), checks every closed form
//! against brute-force quadrature ([`oracle`]), searches for new sequences
//! ([`optimizer`]) and reproduces the standard study set ([`studies`]).
//! File formats and the command implementations live in [`cli`].
//!
//! Units: `omega_c = 1`, times in `1/omega_c`, amplitudes in `omega_c`.

// NaN-rejecting bounds checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fidelity;
pub mod optimizer;
pub mod oracle;
pub mod phasespace;
pub mod sequence;
pub mod studies;
pub mod trap;

pub use error::{Error, Result};
pub use fidelity::{
    averaged_epsilon, condition_residuals, gate_metrics, normalize_psi, spin_echo, ConditionResiduals,
    GateAnalysis, GateMetrics,
};
pub use sequence::{
    expand_shaped, expand_shaped_symmetric, expand_symmetric, validate, Parametrization, Pulse,
    PulseSequence, SymmetricParams,
};
pub use trap::{CouplingTable, Mode, SpinState, TrapConfig};
