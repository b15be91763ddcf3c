//! Simulation of the two-spin NMR quantum Fourier transform.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: dense complex matrices, states, tensor products and
//!   phase-invariant distances.
//! - [`circuit`]: the Coppersmith QFT network, the ideal DFT and bit reversal.
//! - [`pulse`]: pulse sequences, gate-to-pulse compilers, and the rotation
//!   convention calibrated against the gate targets.
//! - [`nmr`]: thermal and pseudo-pure states, evolution with rf errors, and
//!   the end-to-end experiment.
//! - [`tomography`]: simulated readouts and least-squares reconstruction.
//! - [`verify`] and [`pipeline`]: the checks and runs behind the CLI.

pub mod circuit;
pub mod error;
pub mod golden;
pub mod linalg;
pub mod nmr;
pub mod pipeline;
pub mod pulse;
pub mod system;
pub mod tomography;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityKind, DensityMatrix, StateVector, UnitaryMatrix};
pub use system::SpinSystem;
