//! Simulation and analysis of a single large spin J driven by a one-axis-twisting
//! Hamiltonian: cat-state preparation, projective readout, interferometric gain,
//! density-matrix tomography and magnetic dephasing.

pub mod angular;
pub mod budget;
pub mod density;
pub mod dephasing;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod harness;
pub mod linalg;
pub mod measurement;
pub mod metrology;
pub mod rng;
pub mod spin;
pub mod tomography;

pub use density::DensityMatrix;
pub use error::{Result, SpinError};
pub use spin::{basis_state, expectation, rotate, variance, Direction, QuantumState, SpinOperatorSet, SpinQuantumNumber, StateVector};
