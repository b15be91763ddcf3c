//! Pulse-level verification: every compiled sequence against its gate target
//! under the calibrated rotation convention.

use std::fmt::Write as _;

use serde::Serialize;

use crate::circuit::{build_qft, circuit_unitary, gate_matrix, Gate};
use crate::error::Result;
use crate::golden;
use crate::linalg::{phase_invariant_distance, StateVector, UnitaryMatrix};
use crate::pulse::{
    calibrate_convention, compile_b, compile_cnot, compile_hadamard, compile_lowered_qft,
    compile_prep_01, compile_qft_pulse_program, compile_reversal_network, sequence_unitary,
    Calibration, PulseSequence, RotationConvention,
};
use crate::system::SpinSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Requirement {
    Required,
    Informational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRow {
    pub name: String,
    pub target: String,
    pub requirement: Requirement,
    pub distance: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub j_hz: f64,
    pub tolerance: f64,
    pub calibration: Calibration,
    pub rows: Vec<VerificationRow>,
}

impl VerificationReport {
    pub fn convention(&self) -> RotationConvention {
        self.calibration.convention
    }

    /// True when every required row is within tolerance.
    pub fn all_required_pass(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.requirement == Requirement::Required)
            .all(|r| r.passes)
    }

    pub fn row(&self, name: &str) -> Option<&VerificationRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "J = {} Hz, tolerance {:e}", self.j_hz, self.tolerance);
        let _ = writeln!(out, "convention {}", self.convention());
        for c in &self.calibration.candidates {
            let _ = writeln!(
                out,
                "  candidate {}: hadamard {:.3e}  B(0,1) {:.3e}  program |01> {:.3e}{}",
                c.convention,
                c.hadamard,
                c.controlled_phase,
                c.program_column,
                if c.passes { "  ok" } else { "" }
            );
        }
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
        let twidth = self.rows.iter().map(|r| r.target.len()).max().unwrap_or(0);
        for r in &self.rows {
            let verdict = match (r.requirement, r.passes) {
                (Requirement::Required, true) => "PASS",
                (Requirement::Required, false) => "FAIL",
                (Requirement::Informational, _) => "info",
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:<twidth$}  {:>12.6e}  {verdict}",
                r.name, r.target, r.distance
            );
        }
        let _ = writeln!(
            out,
            "verdict: {}",
            if self.all_required_pass() { "PASS" } else { "FAIL" }
        );
        out
    }
}

fn udist(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<f64> {
    phase_invariant_distance(a, b)
}

fn row(name: &str, target: &str, requirement: Requirement, distance: f64, tol: f64) -> VerificationRow {
    VerificationRow {
        name: name.into(),
        target: target.into(),
        requirement,
        distance,
        passes: distance < tol,
    }
}

/// Calibrates the convention for `sys` and measures every compiled sequence
/// against its target up to global phase.
pub fn verify_pulses(sys: &SpinSystem, tolerance: f64) -> Result<VerificationReport> {
    let calibration = calibrate_convention(sys)?;
    let conv = calibration.convention;
    let unitary = |seq: &PulseSequence| sequence_unitary(seq, sys, conv);
    let mut rows = Vec::new();

    for q in 0..2 {
        let label = sys.label(q);
        let d = udist(
            &unitary(&compile_hadamard(label))?,
            &gate_matrix(&Gate::A(q), 2)?,
        )?;
        rows.push(row(&format!("hadamard {label}"), &format!("A({q})"), Requirement::Required, d, tolerance));
    }

    let d = udist(&unitary(&compile_b(0, 1, sys)?)?, &gate_matrix(&Gate::qft_phase(0, 1), 2)?)?;
    rows.push(row("B(0,1)", "diag(1,1,1,i)", Requirement::Required, d, tolerance));

    for variant in 1..=3u8 {
        let seq = compile_cnot(variant, sys)?;
        let target = seq.target_gate.expect("CNOT sequences carry their target");
        let label = match target {
            Gate::Cnot { control, target } => {
                format!("CNOT {}->{}", sys.label(control), sys.label(target))
            }
            _ => unreachable!("CNOT target"),
        };
        let d = udist(&unitary(&seq)?, &gate_matrix(&target, 2)?)?;
        rows.push(row(&format!("CNOT{variant}"), &label, Requirement::Required, d, tolerance));
    }

    let d = udist(
        &unitary(&compile_reversal_network(sys)?)?,
        &gate_matrix(&Gate::BitReverseReadout, 2)?,
    )?;
    rows.push(row("CNOT1-CNOT2-CNOT3", "swap", Requirement::Required, d, tolerance));

    let prep = unitary(&compile_prep_01(sys)?)?;
    let d = phase_invariant_distance(&prep.column(0).as_column(), &StateVector::basis(4, 1).as_column())?;
    rows.push(row("prep-01 |00>", "|01>", Requirement::Required, d, tolerance));

    let expected_column = golden::qft_output_01().as_column();
    let qft = circuit_unitary(&build_qft(2))?;
    for (name, seq, requirement) in [
        ("qft lowered", compile_lowered_qft(sys)?, Requirement::Required),
        ("qft printed", compile_qft_pulse_program(sys)?, Requirement::Informational),
    ] {
        let u = unitary(&seq)?;
        let column = phase_invariant_distance(&u.column(1).as_column(), &expected_column)?;
        rows.push(row(&format!("{name} |01>"), "(1,-1,i,-i)/2", requirement, column, tolerance));
        let full = udist(&u, &qft)?;
        rows.push(row(&format!("{name} full"), "QFT network", requirement, full, tolerance));
    }

    Ok(VerificationReport {
        j_hz: sys.j_hz(),
        tolerance,
        calibration,
        rows,
    })
}
