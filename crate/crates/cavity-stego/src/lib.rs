//! Deterministic simulator and analysis harness for a quantum steganography
//! protocol that hides a five-bit payload inside entanglement swapping
//! between GHZ and Bell states, realized with two-atom cavity interactions.
//!
//! The crate is organized along the protocol's own seams:
//!
//! - [`state`]: exact state-vector algebra over labeled qubit registers.
//! - [`cavity`]: the effective two-atom cavity gate and the five-atom
//!   evolution pipeline.
//! - [`codec`]: the classical code tables (outcome collections, the swap
//!   table, the pair code) re-derived by brute force, plus the payload
//!   encoder and decoder.
//! - [`golden`]: transcriptions of the published tables and closed-form
//!   states, used as cross-checks against the derived values.
//! - [`protocol`]: the full hide/decode round between Alice and Bob with
//!   eavesdropping checks, producing a replayable [`protocol::Transcript`].
//! - [`adversary`]: eavesdropper models (intercept-resend, unitary probe)
//!   and their analytic error rates.
//! - [`harness`]: the command implementations behind the CLI, emitting
//!   machine-readable reports.
//!
//! Every run is a pure function of its seed; the same configuration always
//! produces a byte-identical transcript.

pub mod adversary;
pub mod cavity;
pub mod codec;
pub mod golden;
pub mod harness;
pub mod protocol;
pub mod state;

pub use cavity::{evolution_gate, pipeline, reference_gate, CavityParams, TwoAtomGate};
pub use codec::{choose_m, decode_payload, encode_payload, tables, HidePlan, Payload, Tables};
pub use protocol::{run_round, RoundConfig, Transcript};
pub use state::{BellKind, GhzFamily, GhzKind, MeasBasis, QubitLabel, Role, StateVector};
