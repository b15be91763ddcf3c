//! Reference matrices and states shipped as fixture files.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityKind, DensityMatrix, StateVector, UnitaryMatrix};
use crate::pulse::RotationConvention;

#[derive(Debug, Deserialize)]
pub struct Fixture {
    pub comment: String,
    pub matrix: ComplexMatrix,
}

fn fixture(text: &str) -> Fixture {
    serde_json::from_str(text).expect("checked-in fixture parses")
}

pub const HADAMARD_JSON: &str = include_str!("../fixtures/hadamard.json");
pub const CONTROLLED_PHASE_JSON: &str = include_str!("../fixtures/controlled_phase_half_pi.json");
pub const QFT_OUTPUT_01_JSON: &str = include_str!("../fixtures/qft_output_01.json");
pub const DFT_OUTPUT_01_JSON: &str = include_str!("../fixtures/dft_output_01.json");
pub const DFT_DENSITY_01_JSON: &str = include_str!("../fixtures/dft_density_01_scaled.json");
pub const CNOT_ASSIGNMENT_JSON: &str = include_str!("../fixtures/cnot_assignment.json");

pub fn hadamard() -> UnitaryMatrix {
    UnitaryMatrix::new(fixture(HADAMARD_JSON).matrix).expect("unitary fixture")
}

/// diag(1, 1, 1, i).
pub fn controlled_phase_half_pi() -> UnitaryMatrix {
    UnitaryMatrix::new(fixture(CONTROLLED_PHASE_JSON).matrix).expect("unitary fixture")
}

fn column_state(text: &str) -> StateVector {
    StateVector::new(fixture(text).matrix.as_slice().to_vec()).expect("normalized fixture")
}

/// Two-qubit QFT network output for |01⟩, before the reversed readout.
pub fn qft_output_01() -> StateVector {
    column_state(QFT_OUTPUT_01_JSON)
}

/// Ideal DFT of |01⟩.
pub fn dft_output_01() -> StateVector {
    column_state(DFT_OUTPUT_01_JSON)
}

/// 4ρ for the ideal DFT of |01⟩.
pub fn dft_density_01_scaled() -> ComplexMatrix {
    fixture(DFT_DENSITY_01_JSON).matrix
}

/// ρ for the ideal DFT of |01⟩, as a full density matrix.
pub fn dft_density_01() -> DensityMatrix {
    DensityMatrix::new(dft_density_01_scaled().scale_real(0.25), DensityKind::Full)
        .expect("fixture is a pure state")
}

#[derive(Debug, Clone, Deserialize)]
pub struct CnotRole {
    pub control: String,
    pub target: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CnotAssignment {
    pub comment: String,
    pub exact_under: RotationConvention,
    pub variants: BTreeMap<String, CnotRole>,
}

impl CnotAssignment {
    pub fn for_variant(&self, variant: u8) -> Result<(&str, &str)> {
        let role = self
            .variants
            .get(&variant.to_string())
            .ok_or(Error::UnknownCnotVariant(variant))?;
        Ok((&role.control, &role.target))
    }

    /// Lowest-numbered variant whose frozen roles match.
    pub fn variant_for(&self, control: &str, target: &str) -> Result<u8> {
        self.variants
            .iter()
            .find(|(_, r)| r.control == control && r.target == target)
            .map(|(k, _)| k.parse().expect("numeric variant key"))
            .ok_or_else(|| {
                Error::InvalidGate(format!("no CNOT sequence with control {control}, target {target}"))
            })
    }
}

pub fn cnot_assignment() -> CnotAssignment {
    serde_json::from_str(CNOT_ASSIGNMENT_JSON).expect("checked-in fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    #[test]
    fn density_fixture_is_outer_product_of_dft_state() {
        let psi = dft_output_01();
        let outer = psi.projector().scale_real(4.0);
        assert!(outer.approx_eq(&dft_density_01_scaled(), 1e-15));
        assert_eq!(dft_density_01_scaled()[(3, 0)], C64::new(0.0, -1.0));
        assert!(dft_density_01_scaled().is_hermitian(0.0));
    }

    #[test]
    fn cnot_roles() {
        let a = cnot_assignment();
        assert_eq!(a.for_variant(1).unwrap(), ("P", "H"));
        assert_eq!(a.for_variant(2).unwrap(), ("H", "P"));
        assert_eq!(a.variant_for("H", "P").unwrap(), 2);
        assert!(a.for_variant(9).is_err());
    }
}
