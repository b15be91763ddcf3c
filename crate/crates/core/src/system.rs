use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, pauli, ComplexMatrix};

/// Default scalar coupling between ³¹P and ¹H, in Hz.
pub const DEFAULT_J_HZ: f64 = 647.451;

/// Weakly coupled two-spin (AX) system in the doubly rotating frame.
///
/// Spin 0 carries qubit 0 (the most significant basis bit), spin 1 carries
/// qubit 1. Larmor offsets are kept for completeness; in the doubly rotating
/// frame they never enter the dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    labels: [String; 2],
    larmor_offsets: [f64; 2],
    j_hz: f64,
    /// Weights of I_z on each spin in the thermal deviation matrix.
    thermal_weights: [f64; 2],
}

impl Default for SpinSystem {
    fn default() -> Self {
        Self {
            labels: ["P".to_string(), "H".to_string()],
            larmor_offsets: [0.0, 0.0],
            j_hz: DEFAULT_J_HZ,
            thermal_weights: [1.0, 1.0],
        }
    }
}

impl SpinSystem {
    pub fn new(labels: [&str; 2], j_hz: f64) -> Result<Self> {
        if !(j_hz > 0.0) || !j_hz.is_finite() {
            return Err(Error::NonPositiveCoupling(j_hz));
        }
        if labels[0] == labels[1] {
            return Err(Error::InvalidSpinSystem(format!(
                "spin labels must differ, both are '{}'",
                labels[0]
            )));
        }
        if labels.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidSpinSystem("empty spin label".into()));
        }
        Ok(Self {
            labels: [labels[0].to_string(), labels[1].to_string()],
            ..Self::default()
        }
        .with_j(j_hz))
    }

    /// Default P/H labels with the given coupling.
    pub fn with_coupling(j_hz: f64) -> Result<Self> {
        Self::new(["P", "H"], j_hz)
    }

    fn with_j(mut self, j_hz: f64) -> Self {
        self.j_hz = j_hz;
        self
    }

    pub fn with_larmor_offsets(mut self, offsets: [f64; 2]) -> Self {
        self.larmor_offsets = offsets;
        self
    }

    pub fn with_thermal_weights(mut self, weights: [f64; 2]) -> Self {
        self.thermal_weights = weights;
        self
    }

    pub fn j_hz(&self) -> f64 {
        self.j_hz
    }

    pub fn labels(&self) -> [&str; 2] {
        [&self.labels[0], &self.labels[1]]
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn larmor_offsets(&self) -> [f64; 2] {
        self.larmor_offsets
    }

    pub fn thermal_weights(&self) -> [f64; 2] {
        self.thermal_weights
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownSpin(label.to_string()))
    }

    /// Embeds a single-spin operator on spin `index` of the 4-dimensional space.
    pub fn embed(&self, index: usize, op: &ComplexMatrix) -> ComplexMatrix {
        match index {
            0 => kron(op, &pauli::identity2()),
            1 => kron(&pauli::identity2(), op),
            _ => panic!("spin index {index} out of range"),
        }
    }
}

/// Spin-½ angular momentum components (σ/2).
pub mod spin_ops {
    use crate::linalg::{pauli, ComplexMatrix};

    pub fn ix() -> ComplexMatrix {
        pauli::x().scale_real(0.5)
    }

    pub fn iy() -> ComplexMatrix {
        pauli::y().scale_real(0.5)
    }

    pub fn iz() -> ComplexMatrix {
        pauli::z().scale_real(0.5)
    }

    /// I₊ = I_x + iI_y.
    pub fn raising() -> ComplexMatrix {
        ix().add(&iy().scale(crate::linalg::I)).expect("2x2")
    }
}
