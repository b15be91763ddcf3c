//! End-to-end runs: experiment, tomography, comparison against the expected
//! DFT state, and the error-vs-miscalibration sweep.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::dft_matrix;
use crate::error::{Error, Result};
use crate::golden;
use crate::linalg::{relative_error, ComplexMatrix, DensityKind, DensityMatrix, StateVector};
use crate::nmr::{run_dft_experiment, ErrorModel, ExperimentOptions, ExperimentResult, Mode, Program, Reversal};
use crate::pulse::{calibrate_convention, RotationConvention};
use crate::system::{SpinSystem, DEFAULT_J_HZ};
use crate::tomography::{
    simulate_readouts, tomography_report, ReadoutPulseSet, ReconstructionMap, TomographyRecord,
    TomographyReport, HARDWARE_CONTEXT,
};

/// Tolerance a noiseless run must meet against the expected state.
pub const RUN_TOLERANCE: f64 = 1e-6;

/// Two-bit input label, serialized as `"00"`..`"11"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputState(pub usize);

impl Default for InputState {
    fn default() -> Self {
        Self(0b01)
    }
}

impl fmt::Display for InputState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02b}", self.0)
    }
}

impl std::str::FromStr for InputState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() != 2 || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Config(format!("input_state must be two bits like \"01\", got \"{s}\"")));
        }
        Ok(Self(usize::from_str_radix(s, 2).expect("checked bits")))
    }
}

impl Serialize for InputState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for InputState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_j() -> f64 {
    DEFAULT_J_HZ
}

/// Experiment configuration. Every field is optional in JSON; the defaults
/// give the noiseless ideal-mode DFT of |01⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "J_hz", default = "default_j")]
    pub j_hz: f64,
    #[serde(default)]
    pub input_state: InputState,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub error: ErrorModel,
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default)]
    pub reversal: Reversal,
    #[serde(default)]
    pub program: Program,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            j_hz: DEFAULT_J_HZ,
            input_state: InputState::default(),
            mode: Mode::default(),
            error: ErrorModel::ideal(),
            snapshots: false,
            reversal: Reversal::default(),
            program: Program::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        self.system()?;
        self.error.validate()?;
        if self.mode == Mode::Nmr && self.input_state.0 > 0b01 {
            return Err(Error::Config(format!(
                "nmr mode prepares 00 or 01 only, got {}",
                self.input_state
            )));
        }
        Ok(())
    }

    pub fn system(&self) -> Result<SpinSystem> {
        SpinSystem::with_coupling(self.j_hz)
    }

    pub fn options(&self) -> ExperimentOptions {
        ExperimentOptions {
            mode: self.mode,
            input: self.input_state.0,
            program: self.program,
            reversal: self.reversal,
            snapshots: self.snapshots,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Warn => "WARN",
            Verdict::Fail => "FAIL",
        })
    }
}

/// The ideal output state ρ = |ψ⟩⟨ψ| for the DFT of `input`. For |01⟩ this
/// is the checked-in golden matrix.
pub fn expected_state(input: InputState) -> Result<DensityMatrix> {
    if input.0 == 0b01 {
        return Ok(golden::dft_density_01());
    }
    let dft = dft_matrix(4)?;
    Ok(dft.column(input.0).projector())
}

/// Fit of a deviation matrix to a reference deviation up to a real scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledComparison {
    /// Least-squares α in `measured ≈ α · reference`.
    pub scale: f64,
    /// relative_error(measured / α, reference).
    pub relative_error: f64,
}

/// Pseudo-pure experiments yield `α(|ψ⟩⟨ψ| − I/4)` for some α set by the
/// preparation, so the scale is fitted before comparing.
pub fn compare_deviation(measured: &DensityMatrix, reference_full: &DensityMatrix) -> Result<ScaledComparison> {
    let reference = reference_full.deviation_part();
    let norm = reference.inner(&reference)?.re;
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let scale = reference.inner(measured)?.re / norm;
    if !(scale > 0.0) {
        return Ok(ScaledComparison {
            scale,
            relative_error: f64::INFINITY,
        });
    }
    let rescaled = DensityMatrix::hermitian(measured.scale_real(1.0 / scale), DensityKind::Deviation)?;
    Ok(ScaledComparison {
        scale,
        relative_error: relative_error(&rescaled, &reference)?,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub experiment: ExperimentResult,
    pub record: TomographyRecord,
    pub reconstruction: DensityMatrix,
    /// Report of the reconstruction against the expected state (its deviation
    /// part in nmr mode, after rescaling).
    pub report: TomographyReport,
    /// Fitted scale in nmr mode.
    pub scale: Option<f64>,
    pub verdict: Verdict,
}

impl RunOutcome {
    pub fn relative_error(&self) -> f64 {
        self.report.relative_error
    }

    /// Output files as `(name, contents)`, in a fixed order.
    pub fn files(&self) -> Vec<(String, String)> {
        let meta = ResultMeta {
            convention: self.experiment.convention,
            mode: self.config.mode,
            seed: self.config.error.seed,
        };
        let mut files = vec![
            ("config.json".to_string(), self.config.to_json()),
            (
                "final_state.json".to_string(),
                pretty(&StateDump {
                    kind: self.experiment.final_state.kind(),
                    matrix: self.experiment.final_state.matrix(),
                    meta,
                }),
            ),
            ("tomography_record.json".to_string(), pretty(&self.record)),
            (
                "reconstruction.json".to_string(),
                pretty(&StateDump {
                    kind: self.reconstruction.kind(),
                    matrix: self.reconstruction.matrix(),
                    meta,
                }),
            ),
            (
                "report.json".to_string(),
                pretty(&ReportJson {
                    verdict: self.verdict,
                    relative_error: self.report.relative_error,
                    scale: self.scale,
                    tolerance: RUN_TOLERANCE,
                    report: &self.report,
                    meta,
                }),
            ),
            ("report.txt".to_string(), self.render()),
        ];
        if self.config.snapshots {
            let snaps: Vec<SnapshotDump> = self
                .experiment
                .snapshots
                .iter()
                .map(|(event, rho)| SnapshotDump {
                    event: *event,
                    matrix: rho.matrix(),
                })
                .collect();
            files.push(("snapshots.json".to_string(), pretty(&snaps)));
        }
        files
    }

    pub fn write_files(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for (name, contents) in self.files() {
            let path = dir.join(name);
            std::fs::write(&path, contents)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "input |{}>, mode {}, program {}, reversal {}, J = {} Hz",
            c.input_state,
            serde_json::to_value(c.mode).expect("enum").as_str().unwrap_or_default(),
            serde_json::to_value(c.program).expect("enum").as_str().unwrap_or_default(),
            serde_json::to_value(c.reversal).expect("enum").as_str().unwrap_or_default(),
            c.j_hz
        );
        let _ = writeln!(
            out,
            "error model: angle_scale {}, jitter_sigma {}, seed {}",
            c.error.angle_scale, c.error.jitter_sigma, c.error.seed
        );
        let _ = writeln!(out, "convention {}", self.experiment.convention);
        out.push_str("final state:\n");
        out.push_str(&self.experiment.final_state.render());
        if let Some(scale) = self.scale {
            let _ = writeln!(out, "fitted deviation scale: {scale:.6}");
        }
        out.push_str(&self.report.render());
        let _ = writeln!(out, "verdict: {}", self.verdict);
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ResultMeta {
    convention: RotationConvention,
    mode: Mode,
    seed: u64,
}

#[derive(Serialize)]
struct StateDump<'a> {
    kind: DensityKind,
    matrix: &'a ComplexMatrix,
    meta: ResultMeta,
}

#[derive(Serialize)]
struct SnapshotDump<'a> {
    event: usize,
    matrix: &'a ComplexMatrix,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    verdict: Verdict,
    relative_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    tolerance: f64,
    report: &'a TomographyReport,
    meta: ResultMeta,
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Shared per-system state for repeated runs.
pub struct Pipeline {
    sys: SpinSystem,
    convention: RotationConvention,
    readouts: ReadoutPulseSet,
    map: ReconstructionMap,
}

impl Pipeline {
    pub fn new(j_hz: f64) -> Result<Self> {
        let sys = SpinSystem::with_coupling(j_hz)?;
        let convention = calibrate_convention(&sys)?.convention;
        let readouts = ReadoutPulseSet::standard(&sys);
        let map = ReconstructionMap::new(&readouts, &sys, convention)?;
        Ok(Self {
            sys,
            convention,
            readouts,
            map,
        })
    }

    pub fn convention(&self) -> RotationConvention {
        self.convention
    }

    pub fn system(&self) -> &SpinSystem {
        &self.sys
    }

    pub fn run(&self, config: &RunConfig) -> Result<RunOutcome> {
        config.validate()?;
        if config.j_hz != self.sys.j_hz() {
            return Err(Error::Config(format!(
                "pipeline built for J = {} Hz, config has {}",
                self.sys.j_hz(),
                config.j_hz
            )));
        }
        let experiment = run_dft_experiment(&self.sys, self.convention, &config.error, &config.options())?;
        let record = simulate_readouts(
            &experiment.final_state,
            &self.readouts,
            &self.sys,
            self.convention,
            &config.error,
        )?;
        let reconstruction = self.map.reconstruct(&record)?;
        let expected = expected_state(config.input_state)?;
        let (report, scale) = match config.mode {
            Mode::Ideal => (tomography_report(&reconstruction, &expected)?, None),
            Mode::Nmr => {
                let fit = compare_deviation(&reconstruction, &expected)?;
                let rescaled = if fit.scale > 0.0 {
                    DensityMatrix::hermitian(reconstruction.scale_real(1.0 / fit.scale), DensityKind::Deviation)?
                } else {
                    reconstruction.clone()
                };
                let mut report = tomography_report(&rescaled, &expected.deviation_part())?;
                report.relative_error = fit.relative_error;
                (report, Some(fit.scale))
            }
        };
        let verdict = if !report.relative_error.is_finite() {
            Verdict::Fail
        } else if config.error.is_ideal() {
            if report.relative_error < RUN_TOLERANCE {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        } else {
            Verdict::Warn
        };
        Ok(RunOutcome {
            config: *config,
            experiment,
            record,
            reconstruction,
            report,
            scale,
            verdict,
        })
    }
}

/// Runs one configuration from scratch.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    Pipeline::new(config.j_hz)?.run(config)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seeds: u64,
    pub jitter_sigma: f64,
    pub rows: Vec<SweepRow>,
    /// Means nondecreasing in ε (rows are sorted by ε).
    pub monotone: bool,
}

impl SweepReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seeds {}, jitter_sigma {}", self.seeds, self.jitter_sigma);
        let _ = writeln!(out, "{:>10}  {:>14}  {:>14}  {:>14}", "epsilon", "mean", "min", "max");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>10}  {:>14.6e}  {:>14.6e}  {:>14.6e}",
                r.epsilon, r.mean, r.min, r.max
            );
        }
        let _ = writeln!(out, "monotone: {}", if self.monotone { "yes" } else { "no" });
        let _ = writeln!(out, "{HARDWARE_CONTEXT}");
        out
    }
}

/// Relative error against the expected state for every ε × seed
/// (seeds `0..seeds`), aggregated per ε.
pub fn sweep(base: &RunConfig, epsilons: &[f64], seeds: u64, jitter_sigma: f64) -> Result<SweepReport> {
    if epsilons.is_empty() {
        return Err(Error::Config("empty epsilon list".into()));
    }
    if seeds == 0 {
        return Err(Error::Config("need at least one seed".into()));
    }
    let mut sorted = epsilons.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pipeline = Pipeline::new(base.j_hz)?;
    let mut rows = Vec::with_capacity(sorted.len());
    for &epsilon in &sorted {
        let mut errors = Vec::with_capacity(seeds as usize);
        for seed in 0..seeds {
            let config = RunConfig {
                error: ErrorModel::new(epsilon, jitter_sigma, seed)?,
                snapshots: false,
                ..*base
            };
            errors.push(pipeline.run(&config)?.relative_error());
        }
        rows.push(SweepRow {
            epsilon,
            mean: errors.iter().sum::<f64>() / errors.len() as f64,
            min: errors.iter().cloned().fold(f64::INFINITY, f64::min),
            max: errors.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].mean >= w[0].mean);
    Ok(SweepReport {
        seeds,
        jitter_sigma,
        rows,
        monotone,
    })
}

/// Pure-state check used by callers that want the pre-relabel amplitudes.
pub fn state_of(rho: &DensityMatrix) -> Option<StateVector> {
    if (rho.purity() - 1.0).abs() > 1e-9 {
        return None;
    }
    let col = (0..rho.dim()).max_by(|&a, &b| rho[(a, a)].re.total_cmp(&rho[(b, b)].re))?;
    let norm = rho[(col, col)].re.sqrt();
    StateVector::new((0..rho.dim()).map(|i| rho[(i, col)] / norm).collect()).ok()
}
