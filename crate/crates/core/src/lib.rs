//! Pure-state simulation of complete hyperentangled Bell-state analysis
//! (polarization ⊗ spatial mode) built from cross-Kerr nondemolition
//! parity checks, with teleportation and entanglement swapping on top.

pub mod cli;
pub mod elements;
pub mod error;
pub mod hbsa;
pub mod hilbert;
pub mod kerr;
pub mod protocols;

pub use error::{Error, Result};
