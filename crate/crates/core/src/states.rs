//! Named multi-qubit states, seeded random ensembles and the JSON state file.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ONE, ZERO};

pub const MIN_QUBITS: usize = 1;
pub const MAX_QUBITS: usize = 6;

pub const NORM_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;

/// Normalized pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Checks length `2^n` and unit norm within `1e-12`.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(n_qubits, amplitudes, NORM_TOL)
    }

    /// Accepts a norm deviation up to `tol` and renormalizes.
    pub fn with_tolerance(n_qubits: usize, mut amplitudes: Vec<Complex64>, tol: f64) -> Result<Self> {
        check_size(n_qubits, MIN_QUBITS)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("squared norm {norm_sqr} is not 1")));
        }
        let inv = 1.0 / norm_sqr.sqrt();
        for z in &mut amplitudes {
            *z *= inv;
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sqr > 0.0) || !norm_sqr.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        let inv = 1.0 / norm_sqr.sqrt();
        Self::with_tolerance(n_qubits, amplitudes.into_iter().map(|z| z * inv).collect(), 1e-9)
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_size(n_qubits, MIN_QUBITS)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::InvalidState(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes: amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(self.n_qubits, ComplexMatrix::projector(&self.amplitudes))
    }

    /// Reduced state on `keep` (listed order is preserved).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = linalg::partial_trace_pure(&self.amplitudes, self.n_qubits, keep)?;
        Ok(DensityMatrix::from_trusted(keep.len(), m))
    }
}

fn check_size(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_QUBITS {
        Err(Error::UnsupportedSize(n))
    } else {
        Ok(())
    }
}

/// Hermitian, positive semidefinite, unit-trace operator on `n_qubits`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates the invariants: Hermitian within `1e-10`, eigenvalues
    /// `>= -1e-10`, trace 1 within `1e-12`.
    pub fn new(n_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        Self::with_trace_tolerance(n_qubits, matrix, TRACE_TOL)
    }

    /// Same as [`DensityMatrix::new`] with a looser trace tolerance; the
    /// matrix is rescaled to unit trace afterwards.
    pub fn with_trace_tolerance(n_qubits: usize, matrix: ComplexMatrix, trace_tol: f64) -> Result<Self> {
        check_size(n_qubits, MIN_QUBITS)?;
        let dim = 1 << n_qubits;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::InvalidDensityMatrix(format!(
                "{}x{} matrix for {n_qubits} qubits",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidDensityMatrix("non-finite entries".into()));
        }
        let herr = matrix.hermiticity_error();
        if herr > linalg::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian ({herr:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} is not 1")));
        }
        let eig = linalg::hermitian_eigenvalues(&matrix)
            .map_err(|e| Error::InvalidDensityMatrix(e.to_string()))?;
        if let Some(&min) = eig.first() {
            if min < linalg::NEG_EIG_CLAMP {
                return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
            }
        }
        let matrix = if (tr.re - 1.0).abs() > 0.0 {
            matrix.scale(Complex64::new(1.0 / tr.re, 0.0))
        } else {
            matrix
        };
        Ok(Self { n_qubits, matrix })
    }

    /// Skips validation; for matrices valid by construction.
    pub(crate) fn from_trusted(n_qubits: usize, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows(), 1 << n_qubits);
        Self { n_qubits, matrix }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = linalg::partial_trace(&self.matrix, self.n_qubits, keep)?;
        Ok(DensityMatrix::from_trusted(keep.len(), m))
    }
}

/// `(|0...0> + |1...1>)/sqrt(2)`.
pub fn ghz(n: usize) -> Result<StateVector> {
    check_size(n, 2)?;
    let dim = 1 << n;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = vec![ZERO; dim];
    amps[0] = h;
    amps[dim - 1] = h;
    Ok(StateVector {
        n_qubits: n,
        amplitudes: amps,
    })
}

/// Uniform superposition of the `n` single-excitation basis states.
pub fn w(n: usize) -> Result<StateVector> {
    check_size(n, 2)?;
    let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; 1 << n];
    for k in 0..n {
        amps[1 << k] = a;
    }
    Ok(StateVector {
        n_qubits: n,
        amplitudes: amps,
    })
}

/// `sqrt(p)|GHZ_3> - sqrt(1-p)|W_3>`.
pub fn ghz_w_superposition(p: f64) -> Result<StateVector> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            value: p,
            range: "[0, 1]",
        });
    }
    let g = ghz(3)?;
    let w = w(3)?;
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    let amps = g
        .amplitudes
        .iter()
        .zip(&w.amplitudes)
        .map(|(a, b)| a * sp - b * sq)
        .collect();
    // GHZ_3 and W_3 are orthogonal, so the norm is 1 up to rounding.
    StateVector::with_tolerance(3, amps, 1e-12)
}

/// Deterministic per-sample random stream.
///
/// Each `(master_seed, sample_index)` pair selects an independent ChaCha8
/// stream, so a sample's draws do not depend on which thread produces it
/// or in which order samples are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededSampler {
    pub master_seed: u64,
    pub sample_index: u64,
}

impl SeededSampler {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        Self {
            master_seed,
            sample_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.sample_index);
        rng
    }

    /// Independent sub-stream, e.g. one per optimizer restart.
    pub fn child(&self, index: u64) -> Self {
        Self {
            master_seed: splitmix64(self.master_seed ^ splitmix64(self.sample_index.wrapping_add(0x5851_f42d))),
            sample_index: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Haar-random pure state: `2^n` complex standard normals, normalized.
pub fn random_pure(n: usize, sampler: SeededSampler) -> Result<StateVector> {
    check_size(n, MIN_QUBITS)?;
    let mut rng = sampler.rng();
    let amps: Vec<Complex64> = (0..1 << n).map(|_| complex_normal(&mut rng)).collect();
    StateVector::normalized(n, amps)
}

/// Ginibre-induced mixed state `G G^dagger / tr(G G^dagger)` with `G` of
/// shape `2^n x rank`.
pub fn random_mixed(n: usize, rank: usize, sampler: SeededSampler) -> Result<DensityMatrix> {
    check_size(n, MIN_QUBITS)?;
    let dim = 1 << n;
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let mut rng = sampler.rng();
    let g = ComplexMatrix::from_fn(dim, rank, |_, _| complex_normal(&mut rng));
    let ggd = g.matmul(&g.adjoint())?;
    let tr = ggd.trace().re;
    let m = ComplexMatrix::from_fn(dim, dim, |i, j| {
        // Average with the adjoint so the result is exactly Hermitian.
        0.5 * (ggd[(i, j)] + ggd[(j, i)].conj()) / tr
    });
    Ok(DensityMatrix::from_trusted(n, m))
}

/// On-disk representation of a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateFile {
    Pure {
        n_qubits: usize,
        amplitudes: Vec<[f64; 2]>,
    },
    Mixed {
        n_qubits: usize,
        matrix: Vec<Vec<[f64; 2]>>,
    },
}

/// A parsed state file.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.n_qubits(),
            QuantumState::Mixed(r) => r.n_qubits(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(s) => s.to_density(),
            QuantumState::Mixed(r) => r.clone(),
        }
    }
}

/// Tolerance applied to norms and traces read from state files.
pub const FILE_NORM_TOL: f64 = 1e-6;

impl StateFile {
    pub fn from_pure(s: &StateVector) -> Self {
        StateFile::Pure {
            n_qubits: s.n_qubits,
            amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_mixed(r: &DensityMatrix) -> Self {
        let m = &r.matrix;
        StateFile::Mixed {
            n_qubits: r.n_qubits,
            matrix: (0..m.rows())
                .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn from_state(s: &QuantumState) -> Self {
        match s {
            QuantumState::Pure(v) => Self::from_pure(v),
            QuantumState::Mixed(r) => Self::from_mixed(r),
        }
    }

    /// Validates and converts; norm/trace deviations up to `1e-6` are
    /// renormalized, larger ones rejected.
    pub fn into_state(self) -> Result<QuantumState> {
        match self {
            StateFile::Pure {
                n_qubits,
                amplitudes,
            } => {
                let amps = amplitudes.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
                Ok(QuantumState::Pure(StateVector::with_tolerance(
                    n_qubits,
                    amps,
                    FILE_NORM_TOL,
                )?))
            }
            StateFile::Mixed { n_qubits, matrix } => {
                let rows = matrix.len();
                if matrix.iter().any(|r| r.len() != rows) {
                    return Err(Error::InvalidDensityMatrix("ragged matrix".into()));
                }
                let data = matrix
                    .into_iter()
                    .flatten()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect();
                let m = ComplexMatrix::from_vec(rows, rows, data)
                    .map_err(|e| Error::InvalidDensityMatrix(e.to_string()))?;
                Ok(QuantumState::Mixed(DensityMatrix::with_trace_tolerance(
                    n_qubits,
                    m,
                    FILE_NORM_TOL,
                )?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serializes")
    }

    pub fn parse(text: &str) -> Result<QuantumState> {
        let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        file.into_state()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz3_amplitudes() {
        let g = ghz(3).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (i, a) in g.amplitudes().iter().enumerate() {
            let expect = if i == 0 || i == 7 { h } else { 0.0 };
            assert_eq!(a.re, expect);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn ghz2_is_bell() {
        let r = ghz(2).unwrap().reduced(&[0]).unwrap();
        assert!(r.matrix().max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn w3_amplitudes_and_marginal() {
        let w3 = w(3).unwrap();
        let a = 1.0 / 3f64.sqrt();
        for (i, z) in w3.amplitudes().iter().enumerate() {
            let expect = if [1, 2, 4].contains(&i) { a } else { 0.0 };
            assert!((z.re - expect).abs() < 1e-15);
        }
        let ra = w3.reduced(&[0]).unwrap();
        assert!(ra
            .matrix()
            .max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0 / 3.0, 1.0 / 3.0]))
            < 1e-15);
    }

    #[test]
    fn size_limits() {
        assert!(matches!(ghz(1), Err(Error::UnsupportedSize(1))));
        assert!(matches!(w(7), Err(Error::UnsupportedSize(7))));
        assert!(random_pure(0, SeededSampler::new(1, 0)).is_err());
        assert!(random_pure(6, SeededSampler::new(1, 0)).is_ok());
    }

    #[test]
    fn superposition_endpoints() {
        let p1 = ghz_w_superposition(1.0).unwrap();
        assert_eq!(p1, ghz(3).unwrap());
        let p0 = ghz_w_superposition(0.0).unwrap();
        let w3 = w(3).unwrap();
        for (a, b) in p0.amplitudes().iter().zip(w3.amplitudes()) {
            assert!((a + b).norm() < 1e-15);
        }
        assert!(matches!(ghz_w_superposition(1.5), Err(Error::OutOfRange { .. })));
        assert!(ghz_w_superposition(-0.1).is_err());
    }

    #[test]
    fn superposition_half() {
        let s = ghz_w_superposition(0.5).unwrap();
        let a = s.amplitudes();
        assert!((a[0].re - 0.5).abs() < 1e-15 && (a[7].re - 0.5).abs() < 1e-15);
        for i in [1, 2, 4] {
            assert!((a[i].re + 1.0 / 6f64.sqrt()).abs() < 1e-15);
        }
        for i in [3, 5, 6] {
            assert_eq!(a[i], ZERO);
        }
    }

    #[test]
    fn superposition_norm_on_grid() {
        for k in 0..=1000 {
            let s = ghz_w_superposition(k as f64 / 1000.0).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_pure_is_deterministic_and_normalized() {
        let a = random_pure(3, SeededSampler::new(42, 7)).unwrap();
        let b = random_pure(3, SeededSampler::new(42, 7)).unwrap();
        let c = random_pure(3, SeededSampler::new(42, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_mixed_rank_one_is_pure() {
        let r = random_mixed(2, 1, SeededSampler::new(3, 0)).unwrap();
        assert!((r.purity() - 1.0).abs() < 1e-10);
        assert!(matches!(
            random_mixed(2, 5, SeededSampler::new(3, 0)),
            Err(Error::BadRank { rank: 5, dim: 4 })
        ));
        assert!(random_mixed(2, 0, SeededSampler::new(3, 0)).is_err());
    }

    #[test]
    fn random_mixed_satisfies_invariants() {
        for rank in 1..=4 {
            for idx in 0..20 {
                let r = random_mixed(2, rank, SeededSampler::new(11, idx)).unwrap();
                let checked = DensityMatrix::new(2, r.matrix().clone()).unwrap();
                let ev = checked.eigenvalues().unwrap();
                assert!(ev.iter().filter(|&&l| l > 1e-8).count() <= rank);
            }
        }
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.5, 0.4]);
        assert!(DensityMatrix::new(1, bad_trace).is_err());
        let negative = ComplexMatrix::from_real_diagonal(&[1.1, -0.1]);
        assert!(DensityMatrix::new(1, negative).is_err());
        let mut nonherm = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        nonherm[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::new(1, nonherm).is_err());
        assert!(DensityMatrix::new(1, ComplexMatrix::from_real_diagonal(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn state_file_json_shapes() {
        let g = ghz(2).unwrap();
        let json = StateFile::from_pure(&g).to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["kind"], "pure");
        assert_eq!(v["n_qubits"], 2);
        assert_eq!(v["amplitudes"].as_array().unwrap().len(), 4);
        assert_eq!(StateFile::parse(&json).unwrap(), QuantumState::Pure(g.clone()));

        let r = g.to_density();
        let json = StateFile::from_mixed(&r).to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["kind"], "mixed");
        assert!((v["matrix"][0][3][0].as_f64().unwrap() - 0.5).abs() < 1e-15);
        match StateFile::parse(&json).unwrap() {
            QuantumState::Mixed(m) => assert!(m.matrix().max_abs_diff(r.matrix()) < 1e-15),
            other => panic!("expected mixed, got {other:?}"),
        }
    }

    #[test]
    fn state_file_rejects_unnormalized() {
        let text = r#"{"n_qubits": 1, "kind": "pure", "amplitudes": [[1.0, 0.0], [0.01, 0.0]]}"#;
        assert!(matches!(StateFile::parse(text), Err(Error::InvalidState(_))));
        let text = r#"{"n_qubits": 1, "kind": "pure", "amplitudes": [[1.0, 0.0]]}"#;
        assert!(StateFile::parse(text).is_err());
        assert!(matches!(StateFile::parse("{not json"), Err(Error::Serde(_))));
    }
}
