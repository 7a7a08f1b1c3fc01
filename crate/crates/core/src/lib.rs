//! Finite-dimensional quantum theory as a family of process theories.
//!
//! Processes are completely positive maps stored as Choi operators
//! ([`systems`]). Wiring diagrams written in the `.pd` language are parsed,
//! type checked against a theory's wiring capabilities and evaluated by
//! tensor contraction ([`diagram`]). [`theories`] holds the membership
//! predicates and the constructions on top of plain CP maps: the unital
//! subtheory, renormalised composition, the quotient by positive scalars and
//! the noisy generators. [`groups`] adds finite-group representations,
//! intertwiners and the causal/retrocausal no-signalling conditions,
//! [`higher_order`] bends wires to realise process matrices, and
//! [`theorems`] runs seeded numerical checks of the structural results.

pub mod check;
pub mod diagram;
pub mod groups;
pub mod higher_order;
pub mod numerics;
pub mod par;
pub mod random;
pub mod systems;
pub mod theorems;
pub mod theories;

pub use numerics::{CMatrix, Tolerances, C64};
pub use systems::{Orientation, ProcessTensor, Scalar, SystemType, WireFactor, WireKind};
