//! Exact desk-scale toolkit for shallow sampling circuits.
//!
//! The quantum side simulates constant-depth circuits built from the
//! non-unitary rotation `A_θ`, its multi-qubit variants and their
//! unitarizations. The classical side models `d`-local functions and the
//! statistical tests used to separate them from the circuit outputs.
//!
//! Bit ordering is global: qubit (or bit) `0` is the most significant bit of a
//! basis index. All qubit and bit indices in the public API are zero-based.

pub mod adversary;
pub mod bintree;
pub mod bits;
pub mod circuits;
pub mod compiler;
pub mod error;
pub mod gatezoo;
pub mod statekit;
pub mod targets;

pub use bits::BitString;
pub use error::{Error, Result};
pub use statekit::{LinearOp, StateVector};
pub use targets::Pmf;
