//! Simulation core for quantum prover interactive proofs.
//!
//! Everything here is `no_std` + `alloc`: finite-field arithmetic, qudit
//! simulators, qubit Clifford tableaus, the Clifford and signed-polynomial
//! authentication schemes, and the verifier/prover state machines.

#![no_std]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod error;
pub mod galois;
pub mod linalg;
pub mod qsim;
pub mod clifford;
pub mod code_poly;
pub mod qas_clifford;
pub mod qas_poly;
pub mod stats;
pub mod lemmas;
pub mod protocol;

pub use error::{Error, Result};
