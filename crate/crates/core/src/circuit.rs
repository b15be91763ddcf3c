//! Gate networks for the Coppersmith decomposition of the quantum Fourier
//! transform, the ideal DFT they are checked against, and bit reversal.
//!
//! Basis labels are `|q₀q₁…q_{L−1}⟩` with qubit 0 as the most significant bit,
//! so basis index `i` holds qubit `q` in bit `L − 1 − q`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{tol, ComplexMatrix, UnitaryMatrix, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateJson", into = "GateJson")]
pub enum Gate {
    /// Walsh–Hadamard on one qubit.
    A(usize),
    /// Phase `e^{iθ}` on `|1_j 1_k⟩`, identity elsewhere.
    B { j: usize, k: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    /// Read the register in reversed bit order. A classical relabeling; its
    /// matrix is the bit-reversal permutation.
    BitReverseReadout,
}

impl Gate {
    /// The controlled phase the QFT builder places between qubits `j < k`.
    pub fn qft_phase(j: usize, k: usize) -> Gate {
        Gate::B {
            j,
            k,
            theta: PI / 2f64.powi((k - j) as i32),
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::A(q) => vec![q],
            Gate::B { j, k, .. } => vec![j, k],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::BitReverseReadout => vec![],
        }
    }

    pub fn validate(&self, qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= qubits {
                return Err(Error::QubitOutOfRange { index: q, qubits });
            }
        }
        match *self {
            Gate::B { j, k, theta } => {
                if j >= k {
                    return Err(Error::InvalidGate(format!("B requires j < k, got j={j}, k={k}")));
                }
                if !theta.is_finite() {
                    return Err(Error::InvalidGate("B phase must be finite".into()));
                }
            }
            Gate::Cnot { control, target } if control == target => {
                return Err(Error::InvalidGate(format!(
                    "CNOT control and target are both {control}"
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GateJson {
    gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

impl From<Gate> for GateJson {
    fn from(g: Gate) -> Self {
        let (gate, j, k, theta) = match g {
            Gate::A(q) => ("A", Some(q), None, None),
            Gate::B { j, k, theta } => ("B", Some(j), Some(k), Some(theta)),
            Gate::Cnot { control, target } => ("CNOT", Some(control), Some(target), None),
            Gate::BitReverseReadout => ("REVERSE", None, None, None),
        };
        GateJson {
            gate: gate.to_string(),
            j,
            k,
            theta,
        }
    }
}

impl TryFrom<GateJson> for Gate {
    type Error = String;

    fn try_from(g: GateJson) -> std::result::Result<Self, String> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| format!("gate {} is missing field '{name}'", g.gate))
        };
        match g.gate.as_str() {
            "A" => Ok(Gate::A(need(g.j, "j")?)),
            "B" => {
                let (j, k) = (need(g.j, "j")?, need(g.k, "k")?);
                if j >= k {
                    return Err(format!("B requires j < k, got j={j}, k={k}"));
                }
                let theta = g.theta.unwrap_or(PI / 2f64.powi((k - j) as i32));
                Ok(Gate::B { j, k, theta })
            }
            "CNOT" => Ok(Gate::Cnot {
                control: need(g.j, "j")?,
                target: need(g.k, "k")?,
            }),
            "REVERSE" => Ok(Gate::BitReverseReadout),
            other => Err(format!("unknown gate kind '{other}'")),
        }
    }
}

/// Time-ordered gate list over `qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct CircuitJson {
    qubits: usize,
    gates: Vec<Gate>,
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CircuitJson::deserialize(d)?;
        Circuit::new(raw.qubits, raw.gates).map_err(serde::de::Error::custom)
    }
}

impl Circuit {
    pub fn new(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if qubits == 0 {
            return Err(Error::InvalidGate("circuit needs at least one qubit".into()));
        }
        for g in &gates {
            g.validate(qubits)?;
        }
        Ok(Self { qubits, gates })
    }

    pub fn empty(qubits: usize) -> Self {
        assert!(qubits > 0, "circuit needs at least one qubit");
        Self {
            qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn single_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::A(_))).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::B { .. } | Gate::Cnot { .. }))
            .count()
    }
}

fn bit(index: usize, qubit: usize, qubits: usize) -> usize {
    (index >> (qubits - 1 - qubit)) & 1
}

fn reverse_bits(index: usize, qubits: usize) -> usize {
    (0..qubits).fold(0, |acc, b| (acc << 1) | ((index >> b) & 1))
}

/// 2^L × 2^L matrix of `gate` acting on an `qubits`-qubit register.
pub fn gate_matrix(gate: &Gate, qubits: usize) -> Result<UnitaryMatrix> {
    gate.validate(qubits)?;
    let dim = 1usize << qubits;
    let m = match *gate {
        Gate::A(q) => {
            let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let mask = 1usize << (qubits - 1 - q);
            ComplexMatrix::from_fn(dim, dim, |r, c| {
                if (r & !mask) != (c & !mask) {
                    ZERO
                } else if bit(r, q, qubits) == 1 && bit(c, q, qubits) == 1 {
                    -s
                } else {
                    s
                }
            })
        }
        Gate::B { j, k, theta } => {
            let phase = C64::from_polar(1.0, theta);
            let diag: Vec<C64> = (0..dim)
                .map(|i| {
                    if bit(i, j, qubits) == 1 && bit(i, k, qubits) == 1 {
                        phase
                    } else {
                        ONE
                    }
                })
                .collect();
            ComplexMatrix::diagonal(&diag)
        }
        Gate::Cnot { control, target } => {
            let flip = 1usize << (qubits - 1 - target);
            permutation_matrix(dim, |c| {
                if bit(c, control, qubits) == 1 {
                    c ^ flip
                } else {
                    c
                }
            })
        }
        Gate::BitReverseReadout => permutation_matrix(dim, |c| reverse_bits(c, qubits)),
    };
    Ok(UnitaryMatrix::from_trusted(m))
}

/// Matrix sending basis state `c` to `image(c)`.
fn permutation_matrix(dim: usize, image: impl Fn(usize) -> usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for c in 0..dim {
        m[(image(c), c)] = ONE;
    }
    m
}

/// Coppersmith network: for each qubit j, A(j) followed by B(j, k) for every
/// later qubit k. Output is the DFT in bit-reversed order.
pub fn build_qft(qubits: usize) -> Circuit {
    let mut gates = Vec::with_capacity(qubits * (qubits + 1) / 2);
    for j in 0..qubits {
        gates.push(Gate::A(j));
        for k in j + 1..qubits {
            gates.push(Gate::qft_phase(j, k));
        }
    }
    Circuit::new(qubits, gates).expect("builder emits valid gates")
}

/// Product of the gate matrices, later gates on the left.
pub fn circuit_unitary(circuit: &Circuit) -> Result<UnitaryMatrix> {
    let dim = 1usize << circuit.qubits;
    let mut acc = ComplexMatrix::identity(dim);
    for g in &circuit.gates {
        acc = gate_matrix(g, circuit.qubits)?.matmul(&acc)?;
    }
    Ok(UnitaryMatrix::from_trusted(acc))
}

/// Entry `(c, a) = exp(2πi·a·c/q)/√q`.
pub fn dft_matrix(q: usize) -> Result<UnitaryMatrix> {
    if q == 0 || !q.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(q));
    }
    let norm = 1.0 / (q as f64).sqrt();
    let m = ComplexMatrix::from_fn(q, q, |c, a| {
        // reduce the exponent mod q before converting to keep the angle exact
        let k = (a * c) % q;
        C64::from_polar(norm, 2.0 * PI * k as f64 / q as f64)
    });
    Ok(UnitaryMatrix::from_trusted(m))
}

/// `perm[i]` is the bit reversal of `i` over `qubits` bits.
pub fn bit_reversal_permutation(qubits: usize) -> Vec<usize> {
    (0..1usize << qubits).map(|i| reverse_bits(i, qubits)).collect()
}

/// CNOT(0,1) · CNOT(1,0) · CNOT(0,1), the two-qubit swap.
pub fn bit_reversal_circuit(qubits: usize) -> Result<Circuit> {
    if qubits != 2 {
        return Err(Error::UnsupportedReversal(qubits));
    }
    Circuit::new(
        2,
        vec![
            Gate::Cnot { control: 0, target: 1 },
            Gate::Cnot { control: 1, target: 0 },
            Gate::Cnot { control: 0, target: 1 },
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReversalSide {
    /// Reversal applied to the input: `U_qft · P_rev`.
    Pre,
    /// Reversal applied to the output: `P_rev · U_qft`.
    Post,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DftCheck {
    pub qubits: usize,
    pub side: ReversalSide,
    pub distance: f64,
    /// Distance obtained on the side that was not selected.
    pub other_distance: f64,
}

/// Decides by direct computation on which side the bit reversal must sit for
/// the QFT circuit to equal the DFT up to global phase. Ties go to `Post`.
pub fn circuit_dft_check(qubits: usize) -> Result<DftCheck> {
    circuit_dft_check_with_tol(qubits, tol::UNITARY)
}

pub fn circuit_dft_check_with_tol(qubits: usize, tolerance: f64) -> Result<DftCheck> {
    if qubits == 0 {
        return Err(Error::InvalidGate("need at least one qubit".into()));
    }
    // Column by column so large registers never need a dense 2^L × 2^L
    // product. Column a of P·U is P(U e_a); column a of U·P is U e_{rev(a)}.
    let circuit = build_qft(qubits);
    let q = 1usize << qubits;
    let rev = bit_reversal_permutation(qubits);
    let norm = 1.0 / (q as f64).sqrt();
    let dft_entry = |c: usize, a: usize| C64::from_polar(norm, 2.0 * PI * ((a * c) % q) as f64 / q as f64);
    let columns = |f: &mut dyn FnMut(usize, &[C64])| -> Result<()> {
        for a in 0..q {
            f(a, &simulate_basis(&circuit, a)?);
        }
        Ok(())
    };
    // overlaps tr(D†·P·U) and tr(D†·U·P)
    let (mut post_overlap, mut pre_overlap) = (ZERO, ZERO);
    columns(&mut |a, u| {
        for (c, &amp) in u.iter().enumerate() {
            post_overlap += dft_entry(rev[c], a).conj() * amp;
            pre_overlap += dft_entry(c, rev[a]).conj() * amp;
        }
    })?;
    let unit = |z: C64| if z.norm() > 0.0 { z / z.norm() } else { ONE };
    let (post_phase, pre_phase) = (unit(post_overlap), unit(pre_overlap));
    let (mut post_sq, mut pre_sq) = (0.0, 0.0);
    columns(&mut |a, u| {
        for (c, &amp) in u.iter().enumerate() {
            post_sq += (amp - post_phase * dft_entry(rev[c], a)).norm_sqr();
            pre_sq += (amp - pre_phase * dft_entry(c, rev[a])).norm_sqr();
        }
    })?;
    let (post, pre) = (post_sq.sqrt(), pre_sq.sqrt());
    let (side, distance, other_distance) = if post <= pre {
        (ReversalSide::Post, post, pre)
    } else {
        (ReversalSide::Pre, pre, post)
    };
    if distance >= tolerance {
        return Err(Error::DftMismatch { pre, post });
    }
    Ok(DftCheck {
        qubits,
        side,
        distance,
        other_distance,
    })
}

/// State-vector image of basis state `index` under `circuit`.
pub fn simulate_basis(circuit: &Circuit, index: usize) -> Result<Vec<C64>> {
    let dim = 1usize << circuit.qubits;
    if index >= dim {
        return Err(Error::InvalidMatrix(format!("basis index {index} out of range for dimension {dim}")));
    }
    let mut state = vec![ZERO; dim];
    state[index] = ONE;
    for g in &circuit.gates {
        apply_gate(g, circuit.qubits, &mut state);
    }
    Ok(state)
}

fn apply_gate(gate: &Gate, qubits: usize, state: &mut [C64]) {
    match *gate {
        Gate::A(q) => {
            let mask = 1usize << (qubits - 1 - q);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..state.len() {
                if i & mask == 0 {
                    let (a, b) = (state[i], state[i | mask]);
                    state[i] = (a + b) * s;
                    state[i | mask] = (a - b) * s;
                }
            }
        }
        Gate::B { j, k, theta } => {
            let phase = C64::from_polar(1.0, theta);
            for (i, amp) in state.iter_mut().enumerate() {
                if bit(i, j, qubits) == 1 && bit(i, k, qubits) == 1 {
                    *amp *= phase;
                }
            }
        }
        Gate::Cnot { control, target } => {
            let flip = 1usize << (qubits - 1 - target);
            for i in 0..state.len() {
                if bit(i, control, qubits) == 1 && i & flip == 0 {
                    state.swap(i, i | flip);
                }
            }
        }
        Gate::BitReverseReadout => {
            let old = state.to_vec();
            for (i, amp) in old.into_iter().enumerate() {
                state[reverse_bits(i, qubits)] = amp;
            }
        }
    }
}
