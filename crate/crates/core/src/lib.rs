//! Lattice Dirac field in Fock space, evolved in the Heisenberg and
//! Schrödinger pictures under a pure-gauge potential pulse.

pub mod audit;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod gauge;
pub mod heisenberg;
pub mod krylov;
pub mod lattice;
pub mod observables;
pub mod report;
pub mod linalg;
pub mod schrodinger;
pub mod sparse;
pub mod system;

pub use error::{LabError, Result};
