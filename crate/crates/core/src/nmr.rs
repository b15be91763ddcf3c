//! Two-spin experiment engine: thermal deviation states, temporal averaging,
//! pulse-sequence evolution with injected rf errors, and peak readout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::circuit::bit_reversal_permutation;
use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, DensityKind, DensityMatrix, StateVector, C64, ONE, ZERO};
use crate::pulse::{
    compile_lowered_qft, compile_prep_01, compile_qft_pulse_program, compile_reversal_network,
    compile_temporal_p1, compile_temporal_p2, event_unitary, PulseSequence, RotationConvention,
};
use crate::system::{spin_ops, SpinSystem};

/// Rf miscalibration: every angle is scaled by `1 + angle_scale` and then
/// shifted by zero-mean Gaussian jitter of width `jitter_sigma` radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorModel {
    #[serde(default)]
    pub angle_scale: f64,
    #[serde(default)]
    pub jitter_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ErrorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl ErrorModel {
    pub const fn ideal() -> Self {
        Self {
            angle_scale: 0.0,
            jitter_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn new(angle_scale: f64, jitter_sigma: f64, seed: u64) -> Result<Self> {
        let m = Self {
            angle_scale,
            jitter_sigma,
            seed,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.angle_scale.is_finite() || self.angle_scale <= -1.0 {
            return Err(Error::InvalidErrorModel(format!(
                "angle_scale must be > -1, got {}",
                self.angle_scale
            )));
        }
        if !self.jitter_sigma.is_finite() || self.jitter_sigma < 0.0 {
            return Err(Error::InvalidErrorModel(format!(
                "jitter_sigma must be >= 0, got {}",
                self.jitter_sigma
            )));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.angle_scale == 0.0 && self.jitter_sigma == 0.0
    }

    /// Noise stream `stream` of this model. Distinct pipeline stages draw from
    /// distinct streams so adding pulses to one stage leaves the others fixed.
    pub fn source(&self, stream: u64) -> Result<NoiseSource> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        let jitter = if self.jitter_sigma > 0.0 {
            Some(Normal::new(0.0, self.jitter_sigma).expect("validated sigma"))
        } else {
            None
        };
        Ok(NoiseSource {
            scale: 1.0 + self.angle_scale,
            jitter,
            rng,
        })
    }
}

/// Stateful angle perturber drawn from an [`ErrorModel`].
#[derive(Debug, Clone)]
pub struct NoiseSource {
    scale: f64,
    jitter: Option<Normal<f64>>,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn ideal() -> Self {
        ErrorModel::ideal().source(0).expect("ideal model is valid")
    }

    pub fn perturb(&mut self, angle: f64) -> f64 {
        let scaled = angle * self.scale;
        match &self.jitter {
            Some(n) => scaled + n.sample(&mut self.rng),
            None => scaled,
        }
    }
}

/// `a·I_zA + b·I_zB` with the system's thermal weights; `diag(1, 0, 0, −1)`
/// for unit weights.
pub fn thermal_deviation(sys: &SpinSystem) -> DensityMatrix {
    let [a, b] = sys.thermal_weights();
    let m = sys
        .embed(0, &spin_ops::iz())
        .scale_real(a)
        .add(&sys.embed(1, &spin_ops::iz()).scale_real(b))
        .expect("4x4");
    DensityMatrix::new(m, DensityKind::Deviation).expect("traceless Hermitian")
}

/// ρ ← UρU† event by event, with each rf angle drawn through `noise`.
pub fn apply_sequence(
    rho: &DensityMatrix,
    seq: &PulseSequence,
    sys: &SpinSystem,
    conv: RotationConvention,
    noise: &mut NoiseSource,
) -> Result<DensityMatrix> {
    apply_sequence_traced(rho, seq, sys, conv, noise, None)
}

/// As [`apply_sequence`], pushing `(event index, ρ after event)` into
/// `snapshots` when given.
pub fn apply_sequence_traced(
    rho: &DensityMatrix,
    seq: &PulseSequence,
    sys: &SpinSystem,
    conv: RotationConvention,
    noise: &mut NoiseSource,
    mut snapshots: Option<&mut Vec<(usize, DensityMatrix)>>,
) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            op: "apply_sequence",
            left: rho.shape(),
            right: (4, 4),
        });
    }
    let mut current = rho.clone();
    let offset = snapshots.as_ref().map_or(0, |s| s.len());
    for (i, event) in seq.events.iter().enumerate() {
        let u = event_unitary(event, sys, conv, &mut |a| noise.perturb(a))?;
        current = current.conjugate(&crate::linalg::UnitaryMatrix::from_trusted(u))?;
        if let Some(s) = snapshots.as_deref_mut() {
            s.push((offset + i, current.clone()));
        }
    }
    Ok(current)
}

/// Outcomes of the three temporal-averaging experiments E, P1, P2.
pub fn temporal_average_runs(
    sys: &SpinSystem,
    conv: RotationConvention,
    noise: &mut NoiseSource,
) -> Result<[DensityMatrix; 3]> {
    let thermal = thermal_deviation(sys);
    let p1 = apply_sequence(&thermal, &compile_temporal_p1(sys)?, sys, conv, noise)?;
    let p2 = apply_sequence(&thermal, &compile_temporal_p2(sys)?, sys, conv, noise)?;
    Ok([thermal, p1, p2])
}

/// Entrywise mean of the E, P1 and P2 outcomes. Pseudo-pure |00⟩ when the
/// pulses are ideal: `diag(1, −⅓, −⅓, −⅓)` for unit thermal weights.
pub fn temporal_average(
    sys: &SpinSystem,
    conv: RotationConvention,
    noise: &mut NoiseSource,
) -> Result<DensityMatrix> {
    DensityMatrix::mean(&temporal_average_runs(sys, conv, noise)?)
}

/// Complex areas of the four doublet lines:
/// `tr(ρ·I₊^A E₀^B)`, `tr(ρ·I₊^A E₁^B)`, `tr(ρ·E₀^A I₊^B)`, `tr(ρ·E₁^A I₊^B)`.
pub fn measure_peak_integrals(rho: &ComplexMatrix) -> Result<[C64; 4]> {
    if rho.shape() != (4, 4) {
        return Err(Error::DimensionMismatch {
            op: "measure_peak_integrals",
            left: rho.shape(),
            right: (4, 4),
        });
    }
    let obs = peak_observables();
    let mut out = [ZERO; 4];
    for (o, slot) in obs.iter().zip(out.iter_mut()) {
        // tr(ρO) = Σ ρ_ij O_ji = ⟨O†, ρ⟩
        *slot = o.adjoint().inner(rho)?;
    }
    Ok(out)
}

pub(crate) fn peak_observables() -> [ComplexMatrix; 4] {
    let raise = spin_ops::raising();
    let e0 = ComplexMatrix::diagonal(&[ONE, ZERO]);
    let e1 = ComplexMatrix::diagonal(&[ZERO, ONE]);
    [
        kron(&raise, &e0),
        kron(&raise, &e1),
        kron(&e0, &raise),
        kron(&e1, &raise),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Start from the pure state |input⟩⟨input|.
    #[default]
    Ideal,
    /// Start from the temporally averaged pseudo-pure state.
    Nmr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Reversal {
    /// Read out with the basis labels bit-reversed.
    #[default]
    Relabel,
    /// Apply the three CNOT pulse sequences.
    Cnot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Program {
    /// Hadamard, controlled phase and Hadamard sequences, gate by gate.
    #[default]
    Lowered,
    /// The printed two-spin program, verbatim.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentOptions {
    pub mode: Mode,
    /// Input basis state, 0..4 (`0b01` is |01⟩).
    pub input: usize,
    pub program: Program,
    pub reversal: Reversal,
    pub snapshots: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Ideal,
            input: 0b01,
            program: Program::Lowered,
            reversal: Reversal::Relabel,
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub final_state: DensityMatrix,
    /// State right after the DFT program, before the reversed readout.
    pub before_reversal: DensityMatrix,
    /// `(event index, ρ)` over the DFT program followed by the reversal
    /// network when it is pulsed. Empty unless requested.
    pub snapshots: Vec<(usize, DensityMatrix)>,
    pub convention: RotationConvention,
}

/// The two-spin DFT experiment: state preparation, the DFT program, then the
/// bit-reversed readout.
pub fn run_dft_experiment(
    sys: &SpinSystem,
    conv: RotationConvention,
    err: &ErrorModel,
    options: &ExperimentOptions,
) -> Result<ExperimentResult> {
    if options.input >= 4 {
        return Err(Error::Config(format!("input state {} out of range", options.input)));
    }
    let mut noise = err.source(0)?;
    let start = match options.mode {
        Mode::Ideal => StateVector::basis(4, options.input).projector(),
        Mode::Nmr => {
            let pseudo_pure = temporal_average(sys, conv, &mut noise)?;
            match options.input {
                0b00 => pseudo_pure,
                0b01 => apply_sequence(&pseudo_pure, &compile_prep_01(sys)?, sys, conv, &mut noise)?,
                other => {
                    return Err(Error::Config(format!(
                        "nmr mode prepares |00> or |01> only, got |{other:02b}>"
                    )))
                }
            }
        }
    };
    let program = match options.program {
        Program::Lowered => compile_lowered_qft(sys)?,
        Program::Printed => compile_qft_pulse_program(sys)?,
    };
    let mut snapshots = Vec::new();
    fn trace(on: bool, s: &mut Vec<(usize, DensityMatrix)>) -> Option<&mut Vec<(usize, DensityMatrix)>> {
        on.then_some(s)
    }
    let before_reversal = apply_sequence_traced(
        &start,
        &program,
        sys,
        conv,
        &mut noise,
        trace(options.snapshots, &mut snapshots),
    )?;
    let final_state = match options.reversal {
        Reversal::Relabel => before_reversal.relabel(&bit_reversal_permutation(2))?,
        Reversal::Cnot => apply_sequence_traced(
            &before_reversal,
            &compile_reversal_network(sys)?,
            sys,
            conv,
            &mut noise,
            trace(options.snapshots, &mut snapshots),
        )?,
    };
    Ok(ExperimentResult {
        final_state,
        before_reversal,
        snapshots,
        convention: conv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden;
    use crate::linalg::{matrix_relative_error, phase_invariant_distance, relative_error};
    use std::f64::consts::FRAC_1_SQRT_2;

    const CONV: RotationConvention = RotationConvention { rf_sign: -1, coupling_sign: 1 };

    fn sys() -> SpinSystem {
        SpinSystem::default()
    }

    #[test]
    fn thermal_state() {
        let t = thermal_deviation(&sys());
        assert_eq!(t.populations(), vec![1.0, 0.0, 0.0, -1.0]);
        assert_eq!(t.trace(), ZERO);
        assert_eq!(t.kind(), DensityKind::Deviation);
        assert!(t.is_hermitian(0.0));
        let weighted = thermal_deviation(&sys().with_thermal_weights([4.0, 1.0]));
        assert_eq!(weighted.populations(), vec![2.5, 1.5, -1.5, -2.5]);
    }

    #[test]
    fn empty_sequence_leaves_state() {
        let rho = thermal_deviation(&sys());
        let out = apply_sequence(&rho, &PulseSequence::empty("e"), &sys(), CONV, &mut NoiseSource::ideal()).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn noiseless_evolution_is_conjugation() {
        let s = sys();
        let seq = compile_qft_pulse_program(&s).unwrap();
        let rho = thermal_deviation(&s);
        let u = crate::pulse::sequence_unitary(&seq, &s, CONV).unwrap();
        let direct = rho.conjugate(&u).unwrap();
        let stepped = apply_sequence(&rho, &seq, &s, CONV, &mut NoiseSource::ideal()).unwrap();
        assert!(stepped.approx_eq(&direct, 1e-14));
    }

    #[test]
    fn rejects_wrong_dimension() {
        let rho = StateVector::basis(2, 0).projector();
        let r = apply_sequence(&rho, &PulseSequence::empty("e"), &sys(), CONV, &mut NoiseSource::ideal());
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn error_model_validation() {
        assert!(ErrorModel::new(-1.0, 0.0, 0).is_err());
        assert!(ErrorModel::new(0.0, -0.1, 0).is_err());
        assert!(ErrorModel::new(0.1, 0.01, 3).is_ok());
    }

    #[test]
    fn noise_scale_and_reproducibility() {
        let mut scaled = ErrorModel::new(0.1, 0.0, 0).unwrap().source(0).unwrap();
        assert!((scaled.perturb(1.0) - 1.1).abs() < 1e-15);
        let model = ErrorModel::new(0.0, 0.05, 42).unwrap();
        let draw = |stream| {
            let mut n = model.source(stream).unwrap();
            (0..5).map(|_| n.perturb(1.0)).collect::<Vec<_>>()
        };
        assert_eq!(draw(0), draw(0));
        assert_ne!(draw(0), draw(1));
    }

    #[test]
    fn prep_moves_population_to_01() {
        let s = sys();
        let prep = compile_prep_01(&s).unwrap();
        let full = StateVector::basis(4, 0).projector();
        let out = apply_sequence(&full, &prep, &s, CONV, &mut NoiseSource::ideal()).unwrap();
        assert!((out[(1, 1)].re - 1.0).abs() < 1e-9);
        let pseudo = temporal_average(&s, CONV, &mut NoiseSource::ideal()).unwrap();
        let moved = apply_sequence(&pseudo, &prep, &s, CONV, &mut NoiseSource::ideal()).unwrap();
        let pops = moved.populations();
        assert!((pops[1] - 1.0).abs() < 1e-9);
        for i in [0, 2, 3] {
            assert!((pops[i] + 1.0 / 3.0).abs() < 1e-9);
        }
        // twice acts on populations like the identity here; no involution is
        // claimed for the unitary itself
        let twice = apply_sequence(&out, &prep, &s, CONV, &mut NoiseSource::ideal()).unwrap();
        assert!((twice[(0, 0)].re - 1.0).abs() < 1e-9);
        let u = crate::pulse::sequence_unitary(&prep.clone().then(&prep), &s, CONV).unwrap();
        assert!(phase_invariant_distance(&u, &ComplexMatrix::identity(4)).unwrap() > 1.0);
    }

    #[test]
    fn temporal_average_is_pseudo_pure_00() {
        let avg = temporal_average(&sys(), CONV, &mut NoiseSource::ideal()).unwrap();
        let expected = ComplexMatrix::diagonal(&[
            C64::new(1.0, 0.0),
            C64::new(-1.0 / 3.0, 0.0),
            C64::new(-1.0 / 3.0, 0.0),
            C64::new(-1.0 / 3.0, 0.0),
        ]);
        assert!(avg.approx_eq(&expected, 1e-12));
        assert!(avg.trace().norm() < 1e-12);
    }

    #[test]
    fn peak_integral_examples() {
        let diag = thermal_deviation(&sys());
        assert_eq!(measure_peak_integrals(&diag).unwrap(), [ZERO; 4]);
        let h = FRAC_1_SQRT_2;
        let psi = StateVector::new(vec![C64::new(h, 0.0), ZERO, C64::new(h, 0.0), ZERO]).unwrap();
        let peaks = measure_peak_integrals(&psi.projector()).unwrap();
        assert!((peaks[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(&peaks[1..], &[ZERO; 3]);
        assert!(measure_peak_integrals(&ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn ideal_experiment_reproduces_golden() {
        let r = run_dft_experiment(&sys(), CONV, &ErrorModel::ideal(), &ExperimentOptions::default()).unwrap();
        let scaled = r.final_state.scale_real(4.0);
        assert!(scaled.approx_eq(&golden::dft_density_01_scaled(), 1e-9));
        assert!((r.final_state.purity() - 1.0).abs() < 1e-9);
        let expected_pre = golden::qft_output_01().projector();
        assert!(r.before_reversal.approx_eq(&expected_pre, 1e-9));
    }

    #[test]
    fn cnot_reversal_matches_relabeling() {
        let opts = ExperimentOptions {
            reversal: Reversal::Cnot,
            snapshots: true,
            ..Default::default()
        };
        let r = run_dft_experiment(&sys(), CONV, &ErrorModel::ideal(), &opts).unwrap();
        assert!(r.final_state.approx_eq(&golden::dft_density_01(), 1e-9));
        let program_len = compile_lowered_qft(&sys()).unwrap().len();
        let network_len = compile_reversal_network(&sys()).unwrap().len();
        assert_eq!(r.snapshots.len(), program_len + network_len);
        assert_eq!(r.snapshots.last().unwrap().0, program_len + network_len - 1);
    }

    #[test]
    fn nmr_experiment_is_scaled_deviation_of_golden() {
        let opts = ExperimentOptions {
            mode: Mode::Nmr,
            ..Default::default()
        };
        let r = run_dft_experiment(&sys(), CONV, &ErrorModel::ideal(), &opts).unwrap();
        assert_eq!(r.final_state.kind(), DensityKind::Deviation);
        let expected = golden::dft_density_01().deviation_part().scale_real(4.0 / 3.0);
        assert!(r.final_state.approx_eq(&expected, 1e-9));
    }

    #[test]
    fn nmr_mode_rejects_unprepared_inputs() {
        let opts = ExperimentOptions {
            mode: Mode::Nmr,
            input: 0b10,
            ..Default::default()
        };
        assert!(run_dft_experiment(&sys(), CONV, &ErrorModel::ideal(), &opts).is_err());
    }

    #[test]
    fn larger_miscalibration_gives_larger_error() {
        let golden = golden::dft_density_01();
        let err_at = |eps| {
            let model = ErrorModel::new(eps, 0.0, 5).unwrap();
            let r = run_dft_experiment(&sys(), CONV, &model, &ExperimentOptions::default()).unwrap();
            relative_error(&r.final_state, &golden).unwrap()
        };
        assert!(err_at(0.05) > err_at(0.01));
        assert!(err_at(0.01) > 0.0);
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let model = ErrorModel::new(0.02, 0.03, 11).unwrap();
        let opts = ExperimentOptions { mode: Mode::Nmr, ..Default::default() };
        let a = run_dft_experiment(&sys(), CONV, &model, &opts).unwrap();
        let b = run_dft_experiment(&sys(), CONV, &model, &opts).unwrap();
        assert_eq!(a.final_state, b.final_state);
        let other = ErrorModel::new(0.02, 0.03, 12).unwrap();
        let c = run_dft_experiment(&sys(), CONV, &other, &opts).unwrap();
        assert!(matrix_relative_error(&a.final_state, &c.final_state).unwrap() > 0.0);
    }
}
