//! Pulse-level intermediate representation and the gate-to-pulse compilers.
//!
//! Pulses are ideal δ rotations; free evolution between them is pure scalar
//! coupling `exp(i·s·2πJ·I_zA I_zB·t)` (doubly rotating frame, no chemical
//! shift). Simultaneous pulses act on distinct spins and therefore commute.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::golden;
use crate::linalg::{pauli, ComplexMatrix, UnitaryMatrix, C64, I};
use crate::system::SpinSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// One rf rotation `exp(i·s·angle·I_axis)` on a named spin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rf {
    pub spin: String,
    pub axis: Axis,
    /// Signed angle in radians, in (−2π, 2π].
    pub angle: f64,
}

impl Rf {
    pub fn new(spin: &str, axis: Axis, angle: f64) -> Self {
        Self {
            spin: spin.to_string(),
            axis,
            angle,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.angle.is_finite() || self.angle <= -2.0 * PI || self.angle > 2.0 * PI {
            return Err(Error::InvalidPulse(format!(
                "angle {} outside (-2pi, 2pi]",
                self.angle
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PulseEvent {
    Rf(Rf),
    /// Pulses on distinct spins applied at the same instant.
    Simultaneous { pulses: Vec<Rf> },
    Delay { seconds: f64 },
}

impl PulseEvent {
    pub fn rf(spin: &str, axis: Axis, angle: f64) -> Self {
        PulseEvent::Rf(Rf::new(spin, axis, angle))
    }

    pub fn pair(a: Rf, b: Rf) -> Self {
        PulseEvent::Simultaneous { pulses: vec![a, b] }
    }

    pub fn delay(seconds: f64) -> Self {
        PulseEvent::Delay { seconds }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PulseEvent::Rf(rf) => rf.validate(),
            PulseEvent::Simultaneous { pulses } => {
                if pulses.is_empty() {
                    return Err(Error::InvalidPulse("empty simultaneous group".into()));
                }
                for (i, p) in pulses.iter().enumerate() {
                    p.validate()?;
                    if pulses[..i].iter().any(|q| q.spin == p.spin) {
                        return Err(Error::InvalidPulse(format!(
                            "spin '{}' pulsed twice in one simultaneous group",
                            p.spin
                        )));
                    }
                }
                Ok(())
            }
            PulseEvent::Delay { seconds } => {
                if !seconds.is_finite() || *seconds < 0.0 {
                    return Err(Error::InvalidPulse(format!("delay {seconds} s")));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSequence {
    pub name: String,
    pub events: Vec<PulseEvent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_gate: Option<Gate>,
}

#[derive(Deserialize)]
struct SequenceJson {
    name: String,
    events: Vec<PulseEvent>,
    #[serde(default)]
    target_gate: Option<Gate>,
}

impl<'de> Deserialize<'de> for PulseSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SequenceJson::deserialize(d)?;
        let seq = PulseSequence {
            name: raw.name,
            events: raw.events,
            target_gate: raw.target_gate,
        };
        seq.validate().map_err(serde::de::Error::custom)?;
        Ok(seq)
    }
}

impl PulseSequence {
    pub fn new(name: impl Into<String>, events: Vec<PulseEvent>) -> Result<Self> {
        let seq = Self {
            name: name.into(),
            events,
            target_gate: None,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            events: Vec::new(),
            target_gate: None,
        }
    }

    pub fn with_target(mut self, gate: Gate) -> Self {
        self.target_gate = Some(gate);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.events.iter().try_for_each(PulseEvent::validate)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Concatenation in time order.
    pub fn then(mut self, next: &PulseSequence) -> Self {
        self.events.extend(next.events.iter().cloned());
        self
    }

    pub fn concat(name: impl Into<String>, parts: &[PulseSequence]) -> Self {
        Self {
            name: name.into(),
            events: parts.iter().flat_map(|p| p.events.iter().cloned()).collect(),
            target_gate: None,
        }
    }

    /// Human-readable form, e.g. `(pi/2)_X^H - 1/(2J) - (pi/2)_X^H`.
    /// Delays are expressed as fractions of 1/J when `j_hz` makes that exact.
    pub fn notation(&self, j_hz: f64) -> String {
        self.events
            .iter()
            .map(|e| match e {
                PulseEvent::Rf(rf) => format_rf(rf),
                PulseEvent::Simultaneous { pulses } => pulses.iter().map(format_rf).collect(),
                PulseEvent::Delay { seconds } => format_delay(*seconds, j_hz),
            })
            .collect::<Vec<_>>()
            .join(" - ")
    }
}

fn format_rf(rf: &Rf) -> String {
    let axis = match rf.axis {
        Axis::X => 'X',
        Axis::Y => 'Y',
    };
    format!("({})_{axis}^{}", format_angle(rf.angle), rf.spin)
}

/// Writes `angle` as a dyadic multiple of π when it is one.
pub fn format_angle(angle: f64) -> String {
    let ratio = angle / PI;
    for denom in (0..=10).map(|p| 1u32 << p) {
        let num = ratio * denom as f64;
        if (num - num.round()).abs() < 1e-12 && num.round() != 0.0 {
            let n = num.round() as i64;
            let sign = if n < 0 { "-" } else { "" };
            let mag = n.unsigned_abs();
            let head = if mag == 1 { "pi".to_string() } else { format!("{mag}pi") };
            return if denom == 1 {
                format!("{sign}{head}")
            } else {
                format!("{sign}{head}/{denom}")
            };
        }
    }
    if angle == 0.0 {
        return "0".into();
    }
    format!("{angle}")
}

fn format_delay(seconds: f64, j_hz: f64) -> String {
    let inv = 1.0 / (seconds * j_hz);
    if seconds > 0.0 && (inv - inv.round()).abs() < 1e-9 {
        let n = inv.round() as u64;
        return if n == 1 { "1/J".into() } else { format!("1/({n}J)") };
    }
    format!("{seconds}s")
}

/// Signs in `exp(i·rf_sign·φ·I_axis)` and `exp(i·coupling_sign·2πJ·I_zA I_zB·t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationConvention {
    pub rf_sign: i8,
    pub coupling_sign: i8,
}

impl RotationConvention {
    /// Tie-break order for calibration.
    pub const CANDIDATES: [RotationConvention; 4] = [
        RotationConvention { rf_sign: 1, coupling_sign: 1 },
        RotationConvention { rf_sign: 1, coupling_sign: -1 },
        RotationConvention { rf_sign: -1, coupling_sign: 1 },
        RotationConvention { rf_sign: -1, coupling_sign: -1 },
    ];

    pub fn new(rf_sign: i8, coupling_sign: i8) -> Result<Self> {
        if rf_sign.abs() != 1 || coupling_sign.abs() != 1 {
            return Err(Error::InvalidPulse(format!(
                "convention signs must be ±1, got ({rf_sign}, {coupling_sign})"
            )));
        }
        Ok(Self { rf_sign, coupling_sign })
    }
}

impl fmt::Display for RotationConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(rf {:+}, coupling {:+})", self.rf_sign, self.coupling_sign)
    }
}

/// `exp(i·θ·I_axis)` on one spin-½: `cos(θ/2)·1 + i·sin(θ/2)·σ_axis`.
pub fn spin_rotation(axis: Axis, theta: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let sigma = match axis {
        Axis::X => pauli::x(),
        Axis::Y => pauli::y(),
    };
    ComplexMatrix::identity(2)
        .scale_real(c)
        .add(&sigma.scale(I * s))
        .expect("2x2")
}

/// `exp(i·sign·2πJ·I_zA I_zB·t)`, diagonal with phases `±πJt/2`.
pub fn coupling_evolution(j_hz: f64, seconds: f64, sign: i8) -> ComplexMatrix {
    let half = f64::from(sign) * 2.0 * PI * j_hz * seconds * 0.25;
    let plus = C64::from_polar(1.0, half);
    let minus = C64::from_polar(1.0, -half);
    ComplexMatrix::diagonal(&[plus, minus, minus, plus])
}

/// Unitary of one event with every rf angle passed through `angle_map`
/// (the hook used by error injection). Delays are never perturbed.
pub fn event_unitary(
    event: &PulseEvent,
    sys: &SpinSystem,
    conv: RotationConvention,
    angle_map: &mut dyn FnMut(f64) -> f64,
) -> Result<ComplexMatrix> {
    let sign = f64::from(conv.rf_sign);
    let mut rf_unitary = |rf: &Rf| -> Result<ComplexMatrix> {
        let spin = sys.index_of(&rf.spin)?;
        let theta = sign * angle_map(rf.angle);
        Ok(sys.embed(spin, &spin_rotation(rf.axis, theta)))
    };
    match event {
        PulseEvent::Rf(rf) => rf_unitary(rf),
        PulseEvent::Simultaneous { pulses } => {
            let mut acc = ComplexMatrix::identity(4);
            for p in pulses {
                acc = rf_unitary(p)?.matmul(&acc)?;
            }
            Ok(acc)
        }
        PulseEvent::Delay { seconds } => {
            Ok(coupling_evolution(sys.j_hz(), *seconds, conv.coupling_sign))
        }
    }
}

/// Time-ordered product of the event unitaries of `seq`.
pub fn sequence_unitary(
    seq: &PulseSequence,
    sys: &SpinSystem,
    conv: RotationConvention,
) -> Result<UnitaryMatrix> {
    let mut acc = ComplexMatrix::identity(4);
    for e in &seq.events {
        acc = event_unitary(e, sys, conv, &mut |a| a)?.matmul(&acc)?;
    }
    Ok(UnitaryMatrix::from_trusted(acc))
}

fn check_coupling(sys: &SpinSystem) -> Result<()> {
    if !(sys.j_hz() > 0.0) {
        return Err(Error::NonPositiveCoupling(sys.j_hz()));
    }
    Ok(())
}

/// Walsh–Hadamard: `(π/2)_X − (π/2)_X − (−π/2)_Y` on one spin.
pub fn compile_hadamard(spin: &str) -> PulseSequence {
    PulseSequence {
        name: format!("A^{spin}"),
        events: vec![
            PulseEvent::rf(spin, Axis::X, PI / 2.0),
            PulseEvent::rf(spin, Axis::X, PI / 2.0),
            PulseEvent::rf(spin, Axis::Y, -PI / 2.0),
        ],
        target_gate: None,
    }
}

/// Rotation angle φ and delay τ of the controlled-phase sequence for qubits
/// `separation` apart: `φ = π/2^(n+1)`, `τ = 1/(J·2^(n+1))`.
pub fn b_parameters(separation: usize, j_hz: f64) -> (f64, f64) {
    let scale = 2f64.powi(separation as i32 + 1);
    (PI / scale, 1.0 / (j_hz * scale))
}

fn controlled_phase_events(sys: &SpinSystem, phi: f64, tau: f64) -> Vec<PulseEvent> {
    let [a, b] = sys.labels();
    let both = |axis, angle| PulseEvent::pair(Rf::new(a, axis, angle), Rf::new(b, axis, angle));
    vec![
        both(Axis::Y, -PI / 2.0),
        both(Axis::X, -phi),
        both(Axis::Y, PI / 2.0),
        PulseEvent::delay(tau / 2.0),
        both(Axis::X, PI),
        PulseEvent::delay(tau / 2.0),
        both(Axis::X, PI),
    ]
}

/// Controlled phase between qubits `j < k`, with qubit j on the system's first
/// spin and qubit k on its second:
/// `(−π/2)_Y(−π/2)_Y − (−φ)_X(−φ)_X − (π/2)_Y(π/2)_Y − τ/2 − (π)_X(π)_X − τ/2 − (π)_X(π)_X`.
pub fn compile_b(j: usize, k: usize, sys: &SpinSystem) -> Result<PulseSequence> {
    if j >= k {
        return Err(Error::InvalidGate(format!("B requires j < k, got j={j}, k={k}")));
    }
    check_coupling(sys)?;
    let (phi, tau) = b_parameters(k - j, sys.j_hz());
    Ok(PulseSequence {
        name: format!("B{j}{k}"),
        events: controlled_phase_events(sys, phi, tau),
        target_gate: Some(Gate::qft_phase(j, k)),
    })
}

/// Same pulse pattern for an arbitrary phase θ ≥ 0: `φ = θ/2`, `τ = θ/(2πJ)`.
pub fn compile_controlled_phase(theta: f64, sys: &SpinSystem) -> Result<PulseSequence> {
    check_coupling(sys)?;
    if !(0.0..=2.0 * PI).contains(&theta) {
        return Err(Error::InvalidPulse(format!(
            "controlled phase {theta} outside [0, 2pi]; the delay would be negative or the rotation out of range"
        )));
    }
    let seq = PulseSequence {
        name: format!("B({})", format_angle(theta)),
        events: controlled_phase_events(sys, theta / 2.0, theta / (2.0 * PI * sys.j_hz())),
        target_gate: Some(Gate::B { j: 0, k: 1, theta }),
    };
    seq.validate()?;
    Ok(seq)
}

/// The three printed CNOT sequences of the bit-reversal network. Variants 1
/// and 3 are identical.
pub fn compile_cnot(variant: u8, sys: &SpinSystem) -> Result<PulseSequence> {
    check_coupling(sys)?;
    let (p, h) = (label_of(sys, "P")?, label_of(sys, "H")?);
    let half = PI / 2.0;
    let wait = PulseEvent::delay(1.0 / (2.0 * sys.j_hz()));
    let events = match variant {
        1 | 3 => vec![
            PulseEvent::rf(h, Axis::Y, half),
            wait,
            PulseEvent::pair(Rf::new(p, Axis::Y, -half), Rf::new(h, Axis::Y, -half)),
            PulseEvent::pair(Rf::new(p, Axis::X, -half), Rf::new(h, Axis::X, half)),
            PulseEvent::rf(p, Axis::Y, half),
        ],
        2 => vec![
            PulseEvent::rf(p, Axis::Y, half),
            wait,
            PulseEvent::pair(Rf::new(p, Axis::Y, -half), Rf::new(h, Axis::Y, -half)),
            PulseEvent::pair(Rf::new(p, Axis::X, half), Rf::new(h, Axis::X, -half)),
            PulseEvent::rf(h, Axis::Y, half),
        ],
        other => return Err(Error::UnknownCnotVariant(other)),
    };
    let assignment = golden::cnot_assignment();
    let (control, target) = assignment.for_variant(variant)?;
    let index = |label: &str| sys.index_of(label);
    Ok(PulseSequence {
        name: format!("CNOT{variant}"),
        events,
        target_gate: Some(Gate::Cnot {
            control: index(control)?,
            target: index(target)?,
        }),
    })
}

fn label_of<'a>(sys: &'a SpinSystem, label: &str) -> Result<&'a str> {
    let i = sys.index_of(label)?;
    Ok(sys.label(i))
}

/// CNOT 1 · CNOT 2 · CNOT 3 in time order.
pub fn compile_reversal_network(sys: &SpinSystem) -> Result<PulseSequence> {
    let parts = [compile_cnot(1, sys)?, compile_cnot(2, sys)?, compile_cnot(3, sys)?];
    Ok(PulseSequence::concat("reverse-cnot", &parts).with_target(Gate::BitReverseReadout))
}

/// The printed two-spin DFT program:
/// `(π)_X^P − (−π/2)_Y^P − (π/2)_Y^P(π/2)_Y^H − (π/4)_X^P(π/4)_X^H −
///  (−π/2)_Y^P(−π/2)_X^H − 1/(4J) − (π)_X^P − (−π/2)_X^H`.
///
/// Kept verbatim. It does not map |01⟩ to the QFT output under any of the
/// four sign conventions; [`compile_lowered_qft`] is the program that does.
pub fn compile_qft_pulse_program(sys: &SpinSystem) -> Result<PulseSequence> {
    check_coupling(sys)?;
    let [p, h] = sys.labels();
    let half = PI / 2.0;
    Ok(PulseSequence {
        name: "qft-printed".into(),
        events: vec![
            PulseEvent::rf(p, Axis::X, PI),
            PulseEvent::rf(p, Axis::Y, -half),
            PulseEvent::pair(Rf::new(p, Axis::Y, half), Rf::new(h, Axis::Y, half)),
            PulseEvent::pair(Rf::new(p, Axis::X, PI / 4.0), Rf::new(h, Axis::X, PI / 4.0)),
            PulseEvent::pair(Rf::new(p, Axis::Y, -half), Rf::new(h, Axis::X, -half)),
            PulseEvent::delay(1.0 / (4.0 * sys.j_hz())),
            PulseEvent::rf(p, Axis::X, PI),
            PulseEvent::rf(h, Axis::X, -half),
        ],
        target_gate: None,
    })
}

/// Two-qubit QFT lowered gate by gate: A on the first spin, B(0,1), A on the
/// second spin.
pub fn compile_lowered_qft(sys: &SpinSystem) -> Result<PulseSequence> {
    let mut seq = compile_circuit(&crate::circuit::build_qft(2), sys)?;
    seq.name = "qft-lowered".into();
    Ok(seq)
}

/// `(π/2)_Y^H − 1/(2J) − (π/2)_X^H`: moves |00⟩ population to |01⟩.
pub fn compile_prep_01(sys: &SpinSystem) -> Result<PulseSequence> {
    check_coupling(sys)?;
    let h = sys.label(1);
    Ok(PulseSequence {
        name: "prep-01".into(),
        events: vec![
            PulseEvent::rf(h, Axis::Y, PI / 2.0),
            PulseEvent::delay(1.0 / (2.0 * sys.j_hz())),
            PulseEvent::rf(h, Axis::X, PI / 2.0),
        ],
        target_gate: None,
    })
}

/// Population-permuting sequence for temporal averaging, with the roles of
/// the spins given by `first`/`second`:
/// `(π/2)_X^first − 1/(2J) − (π/2)_Y^first(π/2)_X^second − 1/(2J) − (π/2)_Y^second`.
fn permutation_sequence(name: &str, first: &str, second: &str, j_hz: f64) -> PulseSequence {
    let half = PI / 2.0;
    let wait = PulseEvent::delay(1.0 / (2.0 * j_hz));
    PulseSequence {
        name: name.into(),
        events: vec![
            PulseEvent::rf(first, Axis::X, half),
            wait.clone(),
            PulseEvent::pair(Rf::new(first, Axis::Y, half), Rf::new(second, Axis::X, half)),
            wait,
            PulseEvent::rf(second, Axis::Y, half),
        ],
        target_gate: None,
    }
}

/// Temporal-averaging sequence P1 (starts on the first spin).
pub fn compile_temporal_p1(sys: &SpinSystem) -> Result<PulseSequence> {
    check_coupling(sys)?;
    let [p, h] = sys.labels();
    Ok(permutation_sequence("P1", p, h, sys.j_hz()))
}

/// Temporal-averaging sequence P2 (starts on the second spin).
pub fn compile_temporal_p2(sys: &SpinSystem) -> Result<PulseSequence> {
    check_coupling(sys)?;
    let [p, h] = sys.labels();
    Ok(permutation_sequence("P2", h, p, sys.j_hz()))
}

/// Lowers a two-qubit circuit: A → Hadamard sequence, B → controlled phase,
/// CNOT → the matching printed variant, bit reversal → the three-CNOT network.
pub fn compile_circuit(circuit: &Circuit, sys: &SpinSystem) -> Result<PulseSequence> {
    if circuit.qubits() != 2 {
        return Err(Error::InvalidGate(format!(
            "pulse lowering needs exactly 2 qubits, circuit has {}",
            circuit.qubits()
        )));
    }
    let assignment = golden::cnot_assignment();
    let mut parts = Vec::with_capacity(circuit.gates().len());
    for gate in circuit.gates() {
        let seq = match *gate {
            Gate::A(q) => compile_hadamard(sys.label(q)).with_target(*gate),
            Gate::B { j, k, theta } => {
                if Gate::qft_phase(j, k) == *gate {
                    compile_b(j, k, sys)?
                } else {
                    compile_controlled_phase(theta, sys)?.with_target(*gate)
                }
            }
            Gate::Cnot { control, target } => {
                let variant =
                    assignment.variant_for(sys.label(control), sys.label(target))?;
                compile_cnot(variant, sys)?
            }
            Gate::BitReverseReadout => compile_reversal_network(sys)?,
        };
        parts.push(seq);
    }
    Ok(PulseSequence::concat("circuit", &parts))
}

/// Which global-phase-free checks `calibrate_convention` enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalibrationChecks {
    pub hadamard: bool,
    pub controlled_phase: bool,
    pub program_column: bool,
}

impl Default for CalibrationChecks {
    fn default() -> Self {
        Self {
            hadamard: true,
            controlled_phase: true,
            program_column: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateScore {
    pub convention: RotationConvention,
    /// Worse of the two spins.
    pub hadamard: f64,
    pub controlled_phase: f64,
    /// Distance of the lowered program's image of |01⟩ from the expected state.
    pub program_column: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub convention: RotationConvention,
    pub candidates: Vec<CandidateScore>,
}

pub fn score_convention(sys: &SpinSystem, conv: RotationConvention) -> Result<CandidateScore> {
    use crate::circuit::gate_matrix;
    use crate::linalg::phase_invariant_distance as dist;

    let mut hadamard = 0.0_f64;
    for q in 0..2 {
        let u = sequence_unitary(&compile_hadamard(sys.label(q)), sys, conv)?;
        hadamard = hadamard.max(dist(&u, &*gate_matrix(&Gate::A(q), 2)?)?);
    }
    let b = sequence_unitary(&compile_b(0, 1, sys)?, sys, conv)?;
    let controlled_phase = dist(&b, &*gate_matrix(&Gate::qft_phase(0, 1), 2)?)?;
    let program = sequence_unitary(&compile_lowered_qft(sys)?, sys, conv)?;
    let program_column = dist(&program.column(1).as_column(), &golden::qft_output_01().as_column())?;
    Ok(CandidateScore {
        convention: conv,
        hadamard,
        controlled_phase,
        program_column,
        passes: false,
    })
}

/// Picks the first convention (in [`RotationConvention::CANDIDATES`] order)
/// under which the compiled Hadamard, B(0,1) and lowered two-qubit program hit
/// their targets up to global phase.
pub fn calibrate_convention(sys: &SpinSystem) -> Result<Calibration> {
    calibrate_with(sys, CalibrationChecks::default(), crate::linalg::tol::UNITARY)
}

pub fn calibrate_with(
    sys: &SpinSystem,
    checks: CalibrationChecks,
    tolerance: f64,
) -> Result<Calibration> {
    let mut candidates = Vec::with_capacity(4);
    for conv in RotationConvention::CANDIDATES {
        let mut score = score_convention(sys, conv)?;
        score.passes = (!checks.hadamard || score.hadamard < tolerance)
            && (!checks.controlled_phase || score.controlled_phase < tolerance)
            && (!checks.program_column || score.program_column < tolerance);
        candidates.push(score);
    }
    match candidates.iter().find(|c| c.passes) {
        Some(best) => Ok(Calibration {
            convention: best.convention,
            candidates,
        }),
        None => {
            let table = candidates
                .iter()
                .map(|c| {
                    format!(
                        "  {}: hadamard {:.3e}, B(0,1) {:.3e}, program |01> {:.3e}",
                        c.convention, c.hadamard, c.controlled_phase, c.program_column
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            Err(Error::CalibrationFailed(table))
        }
    }
}
