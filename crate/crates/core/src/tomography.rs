//! Simulated state tomography: readout records under a set of readout pulses
//! and least-squares reconstruction in a Hermitian parameterization.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{format_complex, relative_error, ComplexMatrix, DensityKind, DensityMatrix, C64, I, ONE};
use crate::nmr::{apply_sequence, measure_peak_integrals, ErrorModel};
use crate::pulse::{sequence_unitary, Axis, PulseEvent, PulseSequence, Rf, RotationConvention};
use crate::system::SpinSystem;

/// Real parameters of a Hermitian 4×4 matrix.
pub const PARAMETERS: usize = 16;

/// Relative cutoff on eigenvalues of MᵀM (squared singular values) for rank
/// decisions.
const RANK_CUTOFF: f64 = 1e-10;

/// Noise stream used by readout pulses, distinct from the experiment's.
pub const READOUT_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub id: String,
    pub prep: PulseSequence,
}

/// Ordered readout pulses applied before acquisition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ReadoutPulseSet {
    readouts: Vec<Readout>,
}

impl<'de> Deserialize<'de> for ReadoutPulseSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let readouts = Vec::<Readout>::deserialize(d)?;
        Self::new(readouts).map_err(serde::de::Error::custom)
    }
}

impl ReadoutPulseSet {
    pub fn new(readouts: Vec<Readout>) -> Result<Self> {
        if readouts.is_empty() {
            return Err(Error::InvalidReadoutSet("no readouts".into()));
        }
        let mut seen = HashSet::new();
        for r in &readouts {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::InvalidReadoutSet(format!("duplicate id '{}'", r.id)));
            }
            r.prep.validate()?;
        }
        Ok(Self { readouts })
    }

    /// The nine products of {nothing, (π/2)_X, (π/2)_Y} on each spin. Ids
    /// name the first spin's pulse then the second's, e.g. `"XI"`, `"YX"`.
    pub fn standard(sys: &SpinSystem) -> Self {
        let choices = [('I', None), ('X', Some(Axis::X)), ('Y', Some(Axis::Y))];
        let mut readouts = Vec::with_capacity(9);
        for (a, axis_a) in choices {
            for (b, axis_b) in choices {
                let pulses: Vec<Rf> = [(0, axis_a), (1, axis_b)]
                    .into_iter()
                    .filter_map(|(spin, axis)| axis.map(|ax| Rf::new(sys.label(spin), ax, FRAC_PI_2)))
                    .collect();
                let events = match pulses.len() {
                    0 => vec![],
                    1 => vec![PulseEvent::Rf(pulses[0].clone())],
                    _ => vec![PulseEvent::Simultaneous { pulses }],
                };
                let id = format!("{a}{b}");
                readouts.push(Readout {
                    prep: PulseSequence::new(format!("readout {id}"), events).expect("valid pulses"),
                    id,
                });
            }
        }
        Self { readouts }
    }

    pub fn readouts(&self) -> &[Readout] {
        &self.readouts
    }

    pub fn len(&self) -> usize {
        self.readouts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readouts.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.readouts.iter().map(|r| r.id.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordMeta {
    pub kind: DensityKind,
    pub angle_scale: f64,
    pub jitter_sigma: f64,
    pub seed: u64,
}

/// Four complex peak integrals per readout id.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyRecord {
    pub readouts: BTreeMap<String, [C64; 4]>,
    pub meta: RecordMeta,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeaksJson {
    peaks: [[f64; 2]; 4],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJson {
    readouts: BTreeMap<String, PeaksJson>,
    meta: RecordMeta,
}

impl Serialize for TomographyRecord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let readouts = self
            .readouts
            .iter()
            .map(|(id, p)| (id.clone(), PeaksJson { peaks: p.map(|z| [z.re, z.im]) }))
            .collect();
        RecordJson {
            readouts,
            meta: self.meta,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TomographyRecord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RecordJson::deserialize(d)?;
        Ok(Self {
            readouts: raw
                .readouts
                .into_iter()
                .map(|(id, p)| (id, p.peaks.map(|[re, im]| C64::new(re, im))))
                .collect(),
            meta: raw.meta,
        })
    }
}

/// Applies each readout to a fresh copy of ρ (rf errors drawn from `err` on
/// the readout stream) and records the peak integrals.
pub fn simulate_readouts(
    rho: &DensityMatrix,
    set: &ReadoutPulseSet,
    sys: &SpinSystem,
    conv: RotationConvention,
    err: &ErrorModel,
) -> Result<TomographyRecord> {
    let mut noise = err.source(READOUT_STREAM)?;
    let mut readouts = BTreeMap::new();
    for r in set.readouts() {
        let after = apply_sequence(rho, &r.prep, sys, conv, &mut noise)?;
        readouts.insert(r.id.clone(), measure_peak_integrals(&after)?);
    }
    Ok(TomographyRecord {
        readouts,
        meta: RecordMeta {
            kind: rho.kind(),
            angle_scale: err.angle_scale,
            jitter_sigma: err.jitter_sigma,
            seed: err.seed,
        },
    })
}

/// Basis matrix for parameter `k`: four real diagonals, then for each i < j
/// the symmetric real part and the antisymmetric imaginary part.
fn hermitian_basis(k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    if k < 4 {
        m[(k, k)] = ONE;
        return m;
    }
    let pair = (k - 4) / 2;
    let (i, j) = upper_pairs()[pair];
    if (k - 4).is_multiple_of(2) {
        m[(i, j)] = ONE;
        m[(j, i)] = ONE;
    } else {
        m[(i, j)] = I;
        m[(j, i)] = -I;
    }
    m
}

fn upper_pairs() -> [(usize, usize); 6] {
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
}

fn from_parameters(p: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (k, &v) in p.iter().enumerate().take(4) {
        m[(k, k)] = C64::new(v, 0.0);
    }
    for (n, (i, j)) in upper_pairs().into_iter().enumerate() {
        let z = C64::new(p[4 + 2 * n], p[5 + 2 * n]);
        m[(i, j)] = z;
        m[(j, i)] = z.conj();
    }
    m
}

/// Linear map from the 16 Hermitian parameters to stacked real and imaginary
/// peak integrals, plus one trace row.
///
/// Raising-operator observables never see the identity component, so the
/// observations alone have rank 15. The trace row (1 for full states, 0 for
/// deviation matrices) pins that direction and brings the rank to 16.
#[derive(Debug, Clone)]
pub struct ReconstructionMap {
    ids: Vec<String>,
    design: DMatrix<f64>,
    pseudo_inverse: DMatrix<f64>,
    observed_rank: usize,
    rank: usize,
}

impl ReconstructionMap {
    pub fn new(set: &ReadoutPulseSet, sys: &SpinSystem, conv: RotationConvention) -> Result<Self> {
        let rows = 8 * set.len() + 1;
        let mut design = DMatrix::<f64>::zeros(rows, PARAMETERS);
        for (r, readout) in set.readouts().iter().enumerate() {
            let u = sequence_unitary(&readout.prep, sys, conv)?;
            let u_dag = u.adjoint();
            for k in 0..PARAMETERS {
                let rotated = u.matmul(&hermitian_basis(k))?.matmul(&u_dag)?;
                for (p, z) in measure_peak_integrals(&rotated)?.iter().enumerate() {
                    design[(8 * r + 2 * p, k)] = z.re;
                    design[(8 * r + 2 * p + 1, k)] = z.im;
                }
            }
        }
        for k in 0..4 {
            design[(rows - 1, k)] = 1.0;
        }
        let observed_rank = numerical_rank(&design.rows(0, rows - 1).into_owned());
        let rank = numerical_rank(&design);
        if rank < PARAMETERS {
            return Err(Error::RankDeficient {
                rank,
                required: PARAMETERS,
            });
        }
        // Householder QR: x = R⁻¹Qᵀb. Full column rank makes R invertible.
        let qr = design.clone().qr();
        let r_inv = qr
            .r()
            .try_inverse()
            .ok_or(Error::RankDeficient { rank, required: PARAMETERS })?;
        let pseudo_inverse = r_inv * qr.q().transpose();
        Ok(Self {
            ids: set.ids().map(str::to_string).collect(),
            design,
            pseudo_inverse,
            observed_rank,
            rank,
        })
    }

    /// Rank including the trace row.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Rank of the peak observations alone.
    pub fn observed_rank(&self) -> usize {
        self.observed_rank
    }

    pub fn rows(&self) -> usize {
        self.design.nrows()
    }

    /// Least-squares Hermitian solution for `record`.
    pub fn reconstruct(&self, record: &TomographyRecord) -> Result<DensityMatrix> {
        if record.readouts.len() != self.ids.len() {
            return Err(Error::RecordMismatch(format!(
                "{} readouts recorded, set has {}",
                record.readouts.len(),
                self.ids.len()
            )));
        }
        let mut b = nalgebra::DVector::<f64>::zeros(self.rows());
        for (r, id) in self.ids.iter().enumerate() {
            let peaks = record
                .readouts
                .get(id)
                .ok_or_else(|| Error::RecordMismatch(format!("missing readout '{id}'")))?;
            for (p, z) in peaks.iter().enumerate() {
                b[8 * r + 2 * p] = z.re;
                b[8 * r + 2 * p + 1] = z.im;
            }
        }
        let trace = match record.meta.kind {
            DensityKind::Full => 1.0,
            DensityKind::Deviation => 0.0,
        };
        b[self.rows() - 1] = trace;
        let params = &self.pseudo_inverse * b;
        DensityMatrix::hermitian(from_parameters(params.as_slice()), record.meta.kind)
    }
}

/// Rank from the eigenvalues of MᵀM. nalgebra's SVD stalls around 1e-7 on
/// the clustered spectra these maps have; the symmetric eigensolver does not.
fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let eig = (m.transpose() * m).symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    eig.eigenvalues.iter().filter(|&&v| v > RANK_CUTOFF * top).count()
}

/// Builds the map for `set` and reconstructs `record` with it.
pub fn reconstruct(
    record: &TomographyRecord,
    set: &ReadoutPulseSet,
    sys: &SpinSystem,
    conv: RotationConvention,
) -> Result<DensityMatrix> {
    ReconstructionMap::new(set, sys, conv)?.reconstruct(record)
}

/// Comparison of a reconstruction against a reference state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographyReport {
    pub relative_error: f64,
    /// `|rec[i,j] − ref[i,j]|`, row by row.
    pub deltas: Vec<Vec<f64>>,
    pub hermiticity_residual: f64,
    pub reconstructed: ComplexMatrix,
    pub reference: ComplexMatrix,
}

/// Hardware figures quoted for the original experiment; shown next to the
/// simulated metric and never compared against.
pub const HARDWARE_CONTEXT: &str =
    "context (non-normative): the hardware experiment reported relative errors of 24.8% and 4.7%";

pub fn tomography_report(rec: &DensityMatrix, reference: &DensityMatrix) -> Result<TomographyReport> {
    let relative_error = relative_error(rec, reference)?;
    let diff = rec.sub(reference)?;
    let deltas = (0..diff.rows())
        .map(|i| (0..diff.cols()).map(|j| diff[(i, j)].norm()).collect())
        .collect();
    Ok(TomographyReport {
        relative_error,
        deltas,
        hermiticity_residual: rec.hermiticity_residual(),
        reconstructed: rec.matrix().clone(),
        reference: reference.matrix().clone(),
    })
}

impl TomographyReport {
    pub fn max_delta(&self) -> f64 {
        self.deltas.iter().flatten().fold(0.0, |a, &b| a.max(b))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "relative error:        {:.6e}", self.relative_error);
        let _ = writeln!(out, "max |delta|:           {:.6e}", self.max_delta());
        let _ = writeln!(out, "hermiticity residual:  {:.6e}", self.hermiticity_residual);
        out.push_str("reconstructed:\n");
        out.push_str(&self.reconstructed.render());
        out.push_str("reference:\n");
        out.push_str(&self.reference.render());
        out.push_str("|delta|:\n");
        for row in &self.deltas {
            let cells: Vec<String> = row.iter().map(|d| format!("{d:.4e}")).collect();
            let _ = writeln!(out, "  {}", cells.join("  "));
        }
        let _ = writeln!(out, "{HARDWARE_CONTEXT}");
        out
    }
}

/// Compact one-line rendering of a record, mostly for debugging.
pub fn render_record(record: &TomographyRecord) -> String {
    record
        .readouts
        .iter()
        .map(|(id, p)| {
            let cells: Vec<String> = p.iter().map(|z| format_complex(*z)).collect();
            format!("{id}: {}", cells.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden;
    use crate::linalg::StateVector;

    const CONV: RotationConvention = RotationConvention { rf_sign: -1, coupling_sign: 1 };

    fn sys() -> SpinSystem {
        SpinSystem::default()
    }

    fn round_trip(rho: &DensityMatrix) -> DensityMatrix {
        let s = sys();
        let set = ReadoutPulseSet::standard(&s);
        let rec = simulate_readouts(rho, &set, &s, CONV, &ErrorModel::ideal()).unwrap();
        reconstruct(&rec, &set, &s, CONV).unwrap()
    }

    #[test]
    fn standard_set_ids_and_rank() {
        let s = sys();
        let set = ReadoutPulseSet::standard(&s);
        let ids: Vec<&str> = set.ids().collect();
        assert_eq!(ids, ["II", "IX", "IY", "XI", "XX", "XY", "YI", "YX", "YY"]);
        let map = ReconstructionMap::new(&set, &s, CONV).unwrap();
        assert_eq!(map.observed_rank(), 15);
        assert_eq!(map.rank(), 16);
        assert_eq!(map.rows(), 73);
    }

    #[test]
    fn single_readout_is_rank_deficient() {
        let s = sys();
        let set = ReadoutPulseSet::new(vec![Readout {
            id: "II".into(),
            prep: PulseSequence::empty("none"),
        }])
        .unwrap();
        match ReconstructionMap::new(&set, &s, CONV) {
            Err(Error::RankDeficient { rank, required: 16 }) => assert!(rank < 16),
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = Readout {
            id: "a".into(),
            prep: PulseSequence::empty("none"),
        };
        assert!(ReadoutPulseSet::new(vec![r.clone(), r]).is_err());
        assert!(ReadoutPulseSet::new(vec![]).is_err());
    }

    #[test]
    fn basis_parameters_round_trip() {
        let p: Vec<f64> = (0..16).map(|k| k as f64 * 0.5 - 3.0).collect();
        let m = from_parameters(&p);
        let mut acc = ComplexMatrix::zeros(4, 4);
        for (k, v) in p.iter().enumerate() {
            acc = acc.add(&hermitian_basis(k).scale_real(*v)).unwrap();
        }
        assert_eq!(m, acc);
        assert!(m.is_hermitian(0.0));
    }

    #[test]
    fn maximally_mixed_gives_zero_peaks() {
        let s = sys();
        let rho = DensityMatrix::new(ComplexMatrix::identity(4).scale_real(0.25), DensityKind::Full).unwrap();
        let rec = simulate_readouts(&rho, &ReadoutPulseSet::standard(&s), &s, CONV, &ErrorModel::ideal()).unwrap();
        for peaks in rec.readouts.values() {
            assert!(peaks.iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn basis_state_round_trip() {
        let rho = StateVector::basis(4, 0).projector();
        let rec = round_trip(&rho);
        let expected = ComplexMatrix::diagonal(&[ONE, C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(rec.approx_eq(&expected, 1e-8));
    }

    #[test]
    fn golden_state_round_trip() {
        let rho = golden::dft_output_01().projector();
        let rec = round_trip(&rho);
        assert!(rec.approx_eq(golden::dft_density_01().matrix(), 1e-8));
        assert!(rec.is_hermitian(0.0));
    }

    #[test]
    fn deviation_round_trip_keeps_zero_trace() {
        let s = sys();
        let rho = crate::nmr::thermal_deviation(&s);
        let rec = round_trip(&rho);
        assert_eq!(rec.kind(), DensityKind::Deviation);
        assert!(rec.approx_eq(rho.matrix(), 1e-10));
    }

    #[test]
    fn records_are_linear() {
        let s = sys();
        let set = ReadoutPulseSet::standard(&s);
        let a = StateVector::basis(4, 1).projector();
        let b = golden::dft_output_01().projector();
        let mix = DensityMatrix::new(
            a.scale_real(0.3).add(&b.scale_real(0.7)).unwrap(),
            DensityKind::Full,
        )
        .unwrap();
        let ideal = ErrorModel::ideal();
        let ra = simulate_readouts(&a, &set, &s, CONV, &ideal).unwrap();
        let rb = simulate_readouts(&b, &set, &s, CONV, &ideal).unwrap();
        let rm = simulate_readouts(&mix, &set, &s, CONV, &ideal).unwrap();
        for id in set.ids() {
            for p in 0..4 {
                let expect = ra.readouts[id][p] * 0.3 + rb.readouts[id][p] * 0.7;
                assert!((rm.readouts[id][p] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn missing_readout_is_reported() {
        let s = sys();
        let set = ReadoutPulseSet::standard(&s);
        let mut rec = simulate_readouts(&StateVector::basis(4, 0).projector(), &set, &s, CONV, &ErrorModel::ideal()).unwrap();
        let peaks = rec.readouts.remove("XY").unwrap();
        assert!(matches!(reconstruct(&rec, &set, &s, CONV), Err(Error::RecordMismatch(_))));
        rec.readouts.insert("ZZ".into(), peaks);
        assert!(matches!(reconstruct(&rec, &set, &s, CONV), Err(Error::RecordMismatch(_))));
    }

    #[test]
    fn record_json_layout() {
        let s = sys();
        let set = ReadoutPulseSet::standard(&s);
        let rec = simulate_readouts(&StateVector::basis(4, 0).projector(), &set, &s, CONV, &ErrorModel::ideal()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rec).unwrap();
        assert_eq!(v["readouts"].as_object().unwrap().len(), 9);
        assert_eq!(v["readouts"]["II"]["peaks"].as_array().unwrap().len(), 4);
        assert_eq!(v["meta"]["kind"], "full");
        let back: TomographyRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn report_examples() {
        let rho = golden::dft_density_01();
        let same = tomography_report(&rho, &rho).unwrap();
        assert_eq!(same.relative_error, 0.0);
        assert_eq!(same.max_delta(), 0.0);

        let dev = crate::nmr::thermal_deviation(&sys());
        let scaled = DensityMatrix::hermitian(dev.scale_real(1.1), DensityKind::Deviation).unwrap();
        let r = tomography_report(&scaled, &dev).unwrap();
        assert!((r.relative_error - 0.1).abs() < 1e-12);
        assert!(r.render().contains("24.8%"));
    }

    #[test]
    fn readout_errors_shrink_with_scale() {
        let s = sys();
        let set = ReadoutPulseSet::standard(&s);
        let map = ReconstructionMap::new(&set, &s, CONV).unwrap();
        let rho = golden::dft_density_01();
        let err_at = |eps: f64| {
            let rec = simulate_readouts(&rho, &set, &s, CONV, &ErrorModel::new(eps, 0.0, 0).unwrap()).unwrap();
            relative_error(&map.reconstruct(&rec).unwrap(), &rho).unwrap()
        };
        let small = err_at(1e-3);
        let large = err_at(1e-2);
        assert!(small > 0.0 && small < large);
        let ratio = large / small;
        assert!((0.5..=200.0).contains(&ratio), "ratio {ratio}");
    }
}
