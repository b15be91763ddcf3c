use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use spinqft_core::circuit::{circuit_dft_check_with_tol, dft_matrix, DftCheck};
use spinqft_core::linalg::tol;
use spinqft_core::pipeline::{run_pipeline, sweep, RunConfig, Verdict};
use spinqft_core::verify::verify_pulses;
use spinqft_core::{ComplexMatrix, Error, SpinSystem};

const EXIT_FAIL: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Matrices wider than this are written to --out only.
const MAX_PRINTED_DIM: usize = 32;

#[derive(Parser)]
#[command(name = "spinqft", version, about = "Two-spin NMR quantum Fourier transform simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the DFT matrix on L qubits and check the QFT gate network against it.
    QftMatrix {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=12))]
        qubits: u32,
        /// Write the matrix and check as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare every compiled pulse sequence with its target gate.
    PulseVerify {
        /// Run config to take J from.
        #[arg(long, conflicts_with = "j_hz")]
        config: Option<PathBuf>,
        /// Scalar coupling in Hz.
        #[arg(long)]
        j_hz: Option<f64>,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the experiment and tomography for a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory for result files.
        #[arg(long, default_value = "spinqft-out")]
        out: PathBuf,
    },
    /// Relative error against miscalibration over several seeds.
    Sweep {
        /// Comma-separated angle-scale errors.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        seeds: u64,
        /// Per-pulse Gaussian jitter in radians.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// Base config (mode, input, program); its error block is replaced.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_)
            | Error::Json(_)
            | Error::NonPositiveCoupling(_)
            | Error::InvalidSpinSystem(_)
            | Error::InvalidErrorModel(_) => EXIT_USAGE,
            _ => EXIT_FAIL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::QftMatrix { qubits, out } => qft_matrix(qubits as usize, out.as_deref()),
        Command::PulseVerify { config, j_hz, json } => pulse_verify(config.as_deref(), j_hz, json.as_deref()),
        Command::Run { config, out } => run(&config, &out),
        Command::Sweep {
            eps,
            seeds,
            jitter,
            config,
            json,
        } => run_sweep(&eps, seeds, jitter, config.as_deref(), json.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Verification tolerance, overridable through SPINQFT_TOL.
fn tolerance() -> Result<f64, Failure> {
    match std::env::var("SPINQFT_TOL") {
        Ok(text) => match text.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(Failure::usage(format!("SPINQFT_TOL must be a positive number, got '{text}'"))),
        },
        Err(_) => Ok(tol::UNITARY),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(|e| Failure {
        code: EXIT_FAIL,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

#[derive(Serialize)]
struct QftDump<'a> {
    qubits: usize,
    dft: &'a ComplexMatrix,
    check: Option<DftCheck>,
    tolerance: f64,
}

fn qft_matrix(qubits: usize, out: Option<&Path>) -> CmdResult {
    let tolerance = tolerance()?;
    let dft = dft_matrix(1 << qubits)?;
    if dft.rows() <= MAX_PRINTED_DIM {
        println!("DFT on {qubits} qubit(s):");
        print!("{}", dft.render());
    } else {
        println!("DFT on {qubits} qubits: {0}x{0} matrix, printed with --out only", dft.rows());
    }
    let (check, code) = match circuit_dft_check_with_tol(qubits, tolerance) {
        Ok(check) => {
            println!(
                "QFT network vs DFT: reversal on the {} side, distance {:.3e} (other side {:.3e}), tolerance {tolerance:e}",
                match check.side {
                    spinqft_core::circuit::ReversalSide::Post => "output",
                    spinqft_core::circuit::ReversalSide::Pre => "input",
                },
                check.distance,
                check.other_distance
            );
            println!("verdict: PASS");
            (Some(check), 0)
        }
        Err(Error::DftMismatch { pre, post }) => {
            println!("QFT network vs DFT: output-side distance {post:.3e}, input-side {pre:.3e}, tolerance {tolerance:e}");
            println!("verdict: FAIL");
            (None, EXIT_FAIL)
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = out {
        write_json(
            path,
            &QftDump {
                qubits,
                dft: &dft,
                check,
                tolerance,
            },
        )?;
    }
    Ok(code)
}

fn pulse_verify(config: Option<&Path>, j_hz: Option<f64>, json: Option<&Path>) -> CmdResult {
    let tolerance = tolerance()?;
    let j = match (config, j_hz) {
        (Some(path), _) => RunConfig::load(path)?.j_hz,
        (None, Some(j)) => j,
        (None, None) => RunConfig::default().j_hz,
    };
    let sys = SpinSystem::with_coupling(j)?;
    let report = match verify_pulses(&sys, tolerance) {
        Ok(r) => r,
        Err(Error::CalibrationFailed(table)) => {
            println!("no rotation convention reproduces the gate targets:");
            println!("{table}");
            println!("verdict: FAIL");
            return Ok(EXIT_FAIL);
        }
        Err(e) => return Err(e.into()),
    };
    print!("{}", report.render());
    if let Some(path) = json {
        write_json(path, &report)?;
    }
    Ok(if report.all_required_pass() { 0 } else { EXIT_FAIL })
}

fn run(config: &Path, out: &Path) -> CmdResult {
    let config = RunConfig::load(config)?;
    let outcome = run_pipeline(&config)?;
    let written = outcome.write_files(out).map_err(|e| Failure {
        code: EXIT_FAIL,
        message: e.to_string(),
    })?;
    print!("{}", outcome.render());
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(match outcome.verdict {
        Verdict::Pass | Verdict::Warn => 0,
        Verdict::Fail => EXIT_FAIL,
    })
}

fn run_sweep(eps: &[f64], seeds: u64, jitter: f64, config: Option<&Path>, json: Option<&Path>) -> CmdResult {
    if eps.is_empty() {
        return Err(Failure::usage("--eps needs at least one value"));
    }
    let base = match config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let report = sweep(&base, eps, seeds, jitter)?;
    print!("{}", report.render());
    // growth with |ε| is only expected on one side of zero
    let verdict = if report.monotone {
        Verdict::Pass
    } else if eps.iter().any(|&e| e < 0.0) {
        Verdict::Warn
    } else {
        Verdict::Fail
    };
    println!("verdict: {verdict}");
    if let Some(path) = json {
        write_json(path, &report)?;
    }
    Ok(if verdict == Verdict::Fail { EXIT_FAIL } else { 0 })
}
