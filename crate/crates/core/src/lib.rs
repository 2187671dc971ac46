#![cfg_attr(not(test), no_std)]
//! Core of the energy-surface optimiser: Pauli algebra, statevector
//! simulation, Gaussian-process surrogates, acquisition and the
//! information-sharing run loop. `no_std` with `alloc`.

extern crate alloc;

pub mod acquisition;
pub mod error;
pub mod family;
pub mod gp;
pub mod hamiltonian;
mod linalg;
pub mod optimize;
pub mod orchestrator;
pub mod pauli;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use hamiltonian::Hamiltonian;
pub use pauli::{Pauli, PauliString};
