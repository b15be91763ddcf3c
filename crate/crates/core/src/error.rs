use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("state vector is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("reference matrix is identically zero")]
    ZeroReference,
    #[error("qubit index {index} out of range for {qubits} qubits")]
    QubitOutOfRange { index: usize, qubits: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("three-CNOT bit reversal is only defined for 2 qubits, got {0}")]
    UnsupportedReversal(usize),
    #[error("neither bit-reversal side reproduces the DFT (pre: {pre:.3e}, post: {post:.3e})")]
    DftMismatch { pre: f64, post: f64 },
    #[error("unknown spin '{0}'")]
    UnknownSpin(String),
    #[error("J must be positive (got {0} Hz)")]
    NonPositiveCoupling(f64),
    #[error("invalid spin system: {0}")]
    InvalidSpinSystem(String),
    #[error("unknown CNOT variant {0} (expected 1, 2 or 3)")]
    UnknownCnotVariant(u8),
    #[error("invalid pulse event: {0}")]
    InvalidPulse(String),
    #[error("no rotation convention satisfies the calibration targets:\n{0}")]
    CalibrationFailed(String),
    #[error("invalid error model: {0}")]
    InvalidErrorModel(String),
    #[error("reconstruction map is rank deficient (rank {rank}, need {required})")]
    RankDeficient { rank: usize, required: usize },
    #[error("tomography record does not match readout set: {0}")]
    RecordMismatch(String),
    #[error("invalid readout set: {0}")]
    InvalidReadoutSet(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
