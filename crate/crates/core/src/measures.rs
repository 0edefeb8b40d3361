//! Concurrence, Tsallis-q entropy and entanglement, and the closed-form
//! functions `g_q(C)` / `f_q(C^2)` with their derivatives.
//!
//! Two-qubit pure-state spectra are `{a, b}` with `a = (1+s)/2`,
//! `b = (1-s)/2` and `s = sqrt(1 - C^2)`. All expressions below are written
//! in terms of `expm1((q-1) ln p) / (q-1)` so they stay accurate as
//! `q -> 1`, and the derivative terms switch to a power series in `s` near
//! `C^2 -> 1` where the direct formulas cancel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::states::{DensityMatrix, StateVector};

/// Lower end of the range of `q` where `g_q` is monotone and convex.
pub const Q_ANALYTIC_MIN: f64 = 0.6972243622680054;
/// Upper end, `(5 + sqrt 13)/2`.
pub const Q_ANALYTIC_MAX: f64 = 4.302775637731995;
/// `|q - 1|` below which the von Neumann limit is used.
pub const VON_NEUMANN_EPS: f64 = 1e-9;
/// Eigenvalues below this are skipped in entropy sums.
pub const EIG_SKIP: f64 = 1e-14;
/// Spectral noise floor for the Wootters construction.
pub const WOOTTERS_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QRegime {
    BelowAnalytic,
    AnalyticRange,
    AboveAnalytic,
    VonNeumannLimit,
}

/// Tsallis order `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(Self(q))
        } else {
            Err(Error::InvalidQ(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn regime(self) -> QRegime {
        let q = self.0;
        if (q - 1.0).abs() <= VON_NEUMANN_EPS {
            QRegime::VonNeumannLimit
        } else if q < Q_ANALYTIC_MIN {
            QRegime::BelowAnalytic
        } else if q > Q_ANALYTIC_MAX {
            QRegime::AboveAnalytic
        } else {
            QRegime::AnalyticRange
        }
    }

    pub fn is_von_neumann(self) -> bool {
        self.regime() == QRegime::VonNeumannLimit
    }

    /// True for the analytic range and the von Neumann limit.
    pub fn admits_two_qubit_formula(self) -> bool {
        matches!(self.regime(), QRegime::AnalyticRange | QRegime::VonNeumannLimit)
    }

    fn require_analytic(self) -> Result<()> {
        if self.admits_two_qubit_formula() {
            Ok(())
        } else {
            Err(Error::QOutsideAnalyticRange(self.0))
        }
    }
}

impl TryFrom<f64> for QParam {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        QParam::new(q)
    }
}

/// Split of the qubits into side A and side B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartitionSpec {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl BipartitionSpec {
    /// Checks that the sides are nonempty, disjoint and cover `n_qubits`.
    pub fn new(side_a: Vec<usize>, side_b: Vec<usize>, n_qubits: usize) -> Result<Self> {
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::BadPartition("empty side".into()));
        }
        let mut all: Vec<usize> = side_a.iter().chain(&side_b).copied().collect();
        linalg::check_indices(&all, n_qubits).map_err(|e| Error::BadPartition(e.to_string()))?;
        all.sort_unstable();
        if all.len() != n_qubits {
            return Err(Error::BadPartition(format!(
                "sides cover {} of {n_qubits} qubits",
                all.len()
            )));
        }
        Ok(Self { side_a, side_b })
    }

    /// `focus | everything else`.
    pub fn single(focus: usize, n_qubits: usize) -> Result<Self> {
        let rest = (0..n_qubits).filter(|&i| i != focus).collect();
        Self::new(vec![focus], rest, n_qubits)
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    fn n_qubits(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    /// The side with fewer qubits; both marginals of a pure state share
    /// their nonzero spectrum.
    fn smaller_side(&self) -> &[usize] {
        if self.side_a.len() <= self.side_b.len() {
            &self.side_a
        } else {
            &self.side_b
        }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits() != n_qubits {
            return Err(Error::BadPartition(format!(
                "partition of {} qubits applied to a {n_qubits}-qubit state",
                self.n_qubits()
            )));
        }
        Ok(())
    }
}

/// `p (1 - p^(q-1)) / (q-1)`, or `-p ln p` in the von Neumann limit.
/// Sums of this over a normalized spectrum give `S_q`.
#[inline]
fn tsallis_term(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let lnp = p.ln();
    if (q - 1.0).abs() <= VON_NEUMANN_EPS {
        -p * lnp
    } else {
        -p * ((q - 1.0) * lnp).exp_m1() / (q - 1.0)
    }
}

/// Tsallis entropy of a normalized spectrum.
pub fn tsallis_of_spectrum(eigenvalues: &[f64], q: QParam) -> f64 {
    let kept: Vec<f64> = eigenvalues.iter().copied().filter(|&l| l >= EIG_SKIP).collect();
    let total: f64 = kept.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    kept.iter().map(|&l| tsallis_term(l / total, q.value())).sum::<f64>().max(0.0)
}

/// `S_q(rho) = (1 - tr rho^q)/(q-1)`; `-tr rho ln rho` (natural log) in the
/// von Neumann limit. Evaluated on the trace-normalized spectrum.
pub fn tsallis_entropy(rho: &DensityMatrix, q: QParam) -> Result<f64> {
    let ev = rho
        .eigenvalues()
        .map_err(|e| Error::InvalidDensityMatrix(e.to_string()))?;
    if let Some(&min) = ev.first() {
        if min < linalg::NEG_EIG_CLAMP {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
    }
    Ok(tsallis_of_spectrum(&ev, q))
}

/// Pure-state concurrence `sqrt(2 (1 - tr rho_A^2))`.
pub fn concurrence_pure(psi: &StateVector, part: &BipartitionSpec) -> Result<f64> {
    part.check(psi.n_qubits())?;
    let rho = psi.reduced(part.smaller_side())?;
    Ok((2.0 * (1.0 - rho.purity())).max(0.0).sqrt())
}

fn psd_power(rho: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let eig = linalg::hermitian_eig(rho, linalg::DEFAULT_EIG_TOL)?;
    if let Some(&min) = eig.eigenvalues.first() {
        if min < linalg::NEG_EIG_CLAMP {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    Ok(eig.reconstruct_with(|l| if l <= WOOTTERS_FLOOR { 0.0 } else { f(l) }))
}

/// Spin-flipped state `(sigma_y (x) sigma_y) rho^* (sigma_y (x) sigma_y)`.
pub fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    // sigma_y (x) sigma_y is real: anti-diagonal (-1, 1, 1, -1).
    let sign = [-1.0, 1.0, 1.0, -1.0];
    ComplexMatrix::from_fn(4, 4, |i, j| rho[(3 - i, 3 - j)].conj() * (sign[i] * sign[j]))
}

/// Wootters' `lambda_i`, descending: square roots of the eigenvalues of
/// `sqrt(rho) rho~ sqrt(rho)`.
pub fn wootters_lambdas(rho: &DensityMatrix) -> Result<[f64; 4]> {
    if rho.n_qubits() != 2 {
        return Err(Error::NotTwoQubits(rho.n_qubits()));
    }
    let m = rho.matrix();
    let sqrt_rho = psd_power(m, f64::sqrt)?;
    let flipped = spin_flip(m);
    let r = sqrt_rho.matmul(&flipped)?.matmul(&sqrt_rho)?;
    let r = ComplexMatrix::from_fn(4, 4, |i, j| 0.5 * (r[(i, j)] + r[(j, i)].conj()));
    let mu = linalg::hermitian_eigenvalues(&r)?;
    let mut lambdas = [0.0; 4];
    for (l, &m) in lambdas.iter_mut().zip(mu.iter().rev()) {
        *l = if m <= WOOTTERS_FLOOR { 0.0 } else { m.sqrt() };
    }
    Ok(lambdas)
}

/// Two-qubit concurrence `max(0, l1 - l2 - l3 - l4)`.
pub fn concurrence_wootters(rho: &DensityMatrix) -> Result<f64> {
    let l = wootters_lambdas(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// `(s, a, b)` for squared concurrence `y`: `s = sqrt(1-y)`,
/// `a = (1+s)/2`, `b = (1-s)/2` with `b` formed without cancellation.
#[inline]
fn spectrum_from_sq(y: f64) -> (f64, f64, f64) {
    let s = (1.0 - y).max(0.0).sqrt();
    (s, 0.5 * (1.0 + s), 0.5 * y / (1.0 + s))
}

#[inline]
fn spectrum_from_c(x: f64) -> (f64, f64, f64) {
    let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    (s, 0.5 * (1.0 + s), 0.5 * x * x / (1.0 + s))
}

#[inline]
fn two_level_tsallis(a: f64, b: f64, q: f64) -> f64 {
    tsallis_term(a, q) + tsallis_term(b, q)
}

fn check_unit(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            value: v,
            range: "[0, 1]",
        })
    }
}

/// `g_q(C) = [1 - ((1+sqrt(1-C^2))/2)^q - ((1-sqrt(1-C^2))/2)^q]/(q-1)`.
/// In the von Neumann limit this is the binary entropy (natural log).
pub fn g_q(x: f64, q: QParam) -> Result<f64> {
    check_unit(x)?;
    let (_, a, b) = spectrum_from_c(x);
    Ok(two_level_tsallis(a, b, q.value()))
}

/// `f_q(y) = g_q(sqrt y)`, the same function of the squared concurrence.
pub fn f_q(y: f64, q: QParam) -> Result<f64> {
    check_unit(y)?;
    let (_, a, b) = spectrum_from_sq(y);
    Ok(two_level_tsallis(a, b, q.value()))
}

/// Tsallis-q entanglement of a pure state across `part`: `S_q(rho_A)`.
pub fn tsallis_pure(psi: &StateVector, part: &BipartitionSpec, q: QParam) -> Result<f64> {
    part.check(psi.n_qubits())?;
    let rho = psi.reduced(part.smaller_side())?;
    let t = tsallis_entropy(&rho, q)?;
    #[cfg(debug_assertions)]
    if part.side_a.len() == 1 && q.admits_two_qubit_formula() {
        let c = concurrence_pure(psi, part)?.min(1.0);
        let via_g = g_q(c, q)?;
        debug_assert!(
            (t - via_g).abs() <= 1e-10,
            "S_q(rho_A) = {t} disagrees with g_q(C) = {via_g}"
        );
    }
    Ok(t)
}

/// `T_q(rho) = g_q(C(rho))` for two-qubit `rho`; refuses `q` outside the
/// analytic range where that equality is not established.
pub fn tsallis_two_qubit_mixed(rho: &DensityMatrix, q: QParam) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::NotTwoQubits(rho.n_qubits()));
    }
    q.require_analytic()?;
    g_q(concurrence_wootters(rho)?, q)
}

// Derivatives of f_q with respect to y = C^2.
//
// With u(t) = (1/2 + t)^(q-1):
//   f'(y)  = q/(4s) * [u(s/2) - u(-s/2)]/(q-1)
//   f''(y) = q/(8s^2) * ([u(s/2) - u(-s/2)]/s - [u'(s/2) + u'(-s/2)]/2)/(q-1)
// For small s both brackets are evaluated from the Taylor coefficients
//   c_m = u^(m)(0)/(q-1) = prod_{i=1}^{m-1}(q-1-i) * 2^(m+1-q).

const SERIES_S: f64 = 0.1;

fn taylor_coefficients(q: f64, count: usize) -> Vec<f64> {
    // c[m] for m = 0..count; c[0] unused.
    let mut c = vec![0.0; count + 1];
    let mut prod = 1.0;
    for (m, cm) in c.iter_mut().enumerate().skip(1) {
        if m >= 2 {
            prod *= q - 1.0 - (m - 1) as f64;
        }
        *cm = prod * 2f64.powf(m as f64 + 1.0 - q);
    }
    c
}

/// `[u(s/2) - u(-s/2)] / ((q-1) s)`.
fn odd_difference_over_s(s: f64, a: f64, b: f64, q: f64) -> f64 {
    if s < SERIES_S {
        let c = taylor_coefficients(q, 41);
        let mut sum = 0.0;
        let mut pow = 1.0; // (s/2)^(k-1)
        let mut fact = 1.0; // k!
        for k in (1..=41).step_by(2) {
            if k > 1 {
                pow *= (s / 2.0) * (s / 2.0);
                fact *= ((k - 1) * k) as f64;
            }
            let term = c[k] * pow / fact;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else if (q - 1.0).abs() <= VON_NEUMANN_EPS {
        (a.ln() - b.ln()) / s
    } else {
        let r = q - 1.0;
        ((r * a.ln()).exp_m1() - (r * b.ln()).exp_m1()) / (r * s)
    }
}

/// `([u(s/2) - u(-s/2)]/s - [u'(s/2) + u'(-s/2)]/2) / ((q-1) s^2)`.
fn curvature_bracket_over_s2(s: f64, a: f64, b: f64, q: f64) -> f64 {
    if s < SERIES_S {
        let c = taylor_coefficients(q, 42);
        // -sum_{j even >= 2} c_{j+1} s^(j-2) 2^(-j) j/(j+1)!
        let mut sum = 0.0;
        let mut pow = 1.0; // s^(j-2)
        let mut fact = 6.0; // (j+1)!
        let mut two = 0.25; // 2^(-j)
        let mut j = 2;
        while j < 42 {
            let term = -c[j + 1] * pow * two * j as f64 / fact;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            pow *= s * s;
            two *= 0.25;
            fact *= ((j + 2) * (j + 3)) as f64;
            j += 2;
        }
        sum
    } else {
        let odd = odd_difference_over_s(s, a, b, q);
        let even = 0.5 * (a.powf(q - 2.0) + b.powf(q - 2.0));
        (odd - even) / (s * s)
    }
}

/// `(f, f', f'')` at squared concurrence `y`.
fn f_derivatives(y: f64, q: f64) -> (f64, f64, f64) {
    let (s, a, b) = spectrum_from_sq(y);
    derivatives_from_spectrum(s, a, b, q)
}

fn derivatives_from_spectrum(s: f64, a: f64, b: f64, q: f64) -> (f64, f64, f64) {
    let f = two_level_tsallis(a, b, q);
    let f1 = q / 4.0 * odd_difference_over_s(s, a, b, q);
    let f2 = q / 8.0 * curvature_bracket_over_s2(s, a, b, q);
    (f, f1, f2)
}

fn check_open_unit(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Endpoint(x))
    }
}

/// `dg_q/dC` on `(0, 1)`.
pub fn dg_dx(x: f64, q: QParam) -> Result<f64> {
    check_open_unit(x)?;
    let (s, a, b) = spectrum_from_c(x);
    let (_, f1, _) = derivatives_from_spectrum(s, a, b, q.value());
    Ok(2.0 * x * f1)
}

/// `d^2 g_q / dC^2` on the open interval `(0, 1)`.
pub fn d2g_dx2(x: f64, q: QParam) -> Result<f64> {
    check_open_unit(x)?;
    let (s, a, b) = spectrum_from_c(x);
    let (_, f1, f2) = derivatives_from_spectrum(s, a, b, q.value());
    Ok(4.0 * x * x * f2 + 2.0 * f1)
}

/// `-2^(1-q) (3 - 5q + q^2) / 3`.
///
/// This is the `C -> 1` limit of `d^2 g_q/dC^2` divided by `q`, so it has
/// the same sign and the same roots `(5 -+ sqrt 13)/2` as the limit itself.
pub fn limit_d2g_dx2_at_1(q: QParam) -> f64 {
    let q = q.value();
    -(2f64.powf(1.0 - q)) * (3.0 - 5.0 * q + q * q) / 3.0
}

/// `d(T_q^2)/dy` with `y = C^2`, i.e. `2 f_q f_q'`.
///
/// Returns 0 at `y = 0` (the `1 - 2^-q M^q - 2^-q N^q` factor vanishes) and
/// the analytic limit `2 f_q(1) q 2^-q` at `y = 1`.
pub fn dtq2_dx(y: f64, q: QParam) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Endpoint(y));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let (f, f1, _) = f_derivatives(y, q.value());
    Ok(2.0 * f * f1)
}

/// `d^2(T_q^2)/dy^2 = 2 (f_q f_q'' + f_q'^2)` on `(0, 1)`.
pub fn d2tq2_dx2(y: f64, q: QParam) -> Result<f64> {
    check_open_unit(y)?;
    let (f, f1, f2) = f_derivatives(y, q.value());
    Ok(2.0 * (f * f2 + f1 * f1))
}

/// `F_q(y) = (q-1)^2 d^2(T_q^2)/dy^2` on `(0, 1)`.
pub fn big_f(y: f64, q: QParam) -> Result<f64> {
    let r = q.value() - 1.0;
    Ok(r * r * d2tq2_dx2(y, q)?)
}

/// `2^(-1-2q) q (2^q - 2) (q - 1)`.
pub fn limit_f_at_x0(q: QParam) -> f64 {
    let q = q.value();
    2f64.powf(-1.0 - 2.0 * q) * q * (2f64.powf(q) - 2.0) * (q - 1.0)
}

/// `6(2^q - 2) + (16 - 5 * 2^q) q + (2^q - 8) q^2`, the common bracket of
/// the `y -> 1` limits of `F_q` and `d^2(T_q^2)/dy^2`.
pub fn x1_bracket(q: f64) -> f64 {
    let p = 2f64.powf(q);
    6.0 * (p - 2.0) + (16.0 - 5.0 * p) * q + (p - 8.0) * q * q
}

/// `4^-q (1-q) q [bracket] / 3`: `F_q` as `y -> 1`.
pub fn limit_f_at_x1(q: QParam) -> f64 {
    let q = q.value();
    4f64.powf(-q) * (1.0 - q) * q * x1_bracket(q) / 3.0
}

/// `-4^-q q [bracket] / (3 (q-1))`: `d^2(T_q^2)/dy^2` as `y -> 1`.
pub fn limit_d2tq2_dx2_at_1(q: QParam) -> Result<f64> {
    let qv = q.value();
    if qv == 1.0 {
        return Err(Error::QIsOne);
    }
    Ok(-(4f64.powf(-qv)) * qv * x1_bracket(qv) / (3.0 * (qv - 1.0)))
}

/// `C = 2|ad - bc|` for a (possibly unnormalized) two-qubit vector.
pub fn two_qubit_pure_concurrence(amps: &[Complex64]) -> f64 {
    debug_assert_eq!(amps.len(), 4);
    let det = amps[0] * amps[3] - amps[1] * amps[2];
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if norm == 0.0 {
        return 0.0;
    }
    (2.0 * det.norm() / norm).min(1.0)
}

/// Reduced single-qubit spectrum of a (possibly unnormalized) two-qubit
/// vector, normalized. Closed-form 2x2 Hermitian eigenvalues.
pub fn two_qubit_marginal_spectrum(amps: &[Complex64]) -> [f64; 2] {
    debug_assert_eq!(amps.len(), 4);
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if norm == 0.0 {
        return [1.0, 0.0];
    }
    let r00 = (amps[0].norm_sqr() + amps[1].norm_sqr()) / norm;
    let r11 = (amps[2].norm_sqr() + amps[3].norm_sqr()) / norm;
    let r01: Complex64 = (amps[0] * amps[2].conj() + amps[1] * amps[3].conj()) / norm;
    let half_gap = (0.25 * (r00 - r11) * (r00 - r11) + r01.norm_sqr()).sqrt();
    let mid = 0.5 * (r00 + r11);
    let hi = mid + half_gap;
    // det = r00 r11 - |r01|^2 gives the small eigenvalue without cancellation.
    let det = r00 * r11 - r01.norm_sqr();
    let lo = if hi > 0.0 { (det / hi).max(0.0) } else { 0.0 };
    [hi, lo]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::states::{ghz, w, StateVector};

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    #[test]
    fn analytic_bounds_match_closed_form() {
        assert_eq!(Q_ANALYTIC_MIN, (5.0 - 13f64.sqrt()) / 2.0);
        assert_eq!(Q_ANALYTIC_MAX, (5.0 + 13f64.sqrt()) / 2.0);
    }

    #[test]
    fn regimes() {
        assert_eq!(q(0.5).regime(), QRegime::BelowAnalytic);
        assert_eq!(q(Q_ANALYTIC_MIN).regime(), QRegime::AnalyticRange);
        assert_eq!(q(Q_ANALYTIC_MAX).regime(), QRegime::AnalyticRange);
        assert_eq!(q(4.4).regime(), QRegime::AboveAnalytic);
        assert_eq!(q(1.0 + 1e-10).regime(), QRegime::VonNeumannLimit);
        assert_eq!(q(1.0 + 1e-6).regime(), QRegime::AnalyticRange);
        assert!(QParam::new(0.0).is_err());
        assert!(QParam::new(f64::NAN).is_err());
    }

    #[test]
    fn entropy_of_simple_states() {
        let pure = ghz(2).unwrap().to_density();
        for qv in [0.3, 1.0, 2.0, 5.0] {
            assert!(tsallis_entropy(&pure, q(qv)).unwrap().abs() < 1e-12);
        }
        let mixed = ghz(2).unwrap().reduced(&[0]).unwrap();
        assert!((tsallis_entropy(&mixed, q(2.0)).unwrap() - 0.5).abs() < 1e-15);
        let ln2 = std::f64::consts::LN_2;
        assert!((tsallis_entropy(&mixed, q(1.0)).unwrap() - ln2).abs() < 1e-15);
        // Continuity through q = 1 fixes the natural logarithm.
        for dq in [1e-6, -1e-6] {
            let s = tsallis_entropy(&mixed, q(1.0 + dq)).unwrap();
            assert!((s - ln2).abs() < 1e-6, "q = 1 + {dq}: {s}");
        }
    }

    #[test]
    fn pure_concurrences() {
        let prod = StateVector::basis(2, 0).unwrap();
        let p = BipartitionSpec::single(0, 2).unwrap();
        assert!(concurrence_pure(&prod, &p).unwrap().abs() < 1e-15);
        let p3 = BipartitionSpec::single(0, 3).unwrap();
        assert!((concurrence_pure(&ghz(3).unwrap(), &p3).unwrap() - 1.0).abs() < 1e-15);
        let cw = concurrence_pure(&w(3).unwrap(), &p3).unwrap();
        assert!((cw - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bipartition_validation() {
        assert!(BipartitionSpec::new(vec![0], vec![0, 1], 2).is_err());
        assert!(BipartitionSpec::new(vec![0], vec![1], 3).is_err());
        assert!(BipartitionSpec::new(vec![], vec![0, 1], 2).is_err());
        assert!(BipartitionSpec::new(vec![0, 3], vec![1, 2], 3).is_err());
        let p = BipartitionSpec::new(vec![2], vec![0, 1], 3).unwrap();
        assert!(matches!(
            concurrence_pure(&ghz(2).unwrap(), &p),
            Err(Error::BadPartition(_))
        ));
    }

    #[test]
    fn wootters_known_values() {
        let bell = ghz(2).unwrap().to_density();
        assert!((concurrence_wootters(&bell).unwrap() - 1.0).abs() < 1e-12);
        let sep = DensityMatrix::new(2, ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5])).unwrap();
        assert!(concurrence_wootters(&sep).unwrap().abs() < 1e-12);
        let wm = w(3).unwrap().reduced(&[0, 1]).unwrap();
        assert!((concurrence_wootters(&wm).unwrap() - 2.0 / 3.0).abs() < 1e-10);
        let three = ghz(3).unwrap().to_density();
        assert!(matches!(concurrence_wootters(&three), Err(Error::NotTwoQubits(3))));
    }

    #[test]
    fn g_and_f_closed_forms() {
        for qv in [0.3, 0.7, 1.0, 2.0, 4.0] {
            assert_eq!(g_q(0.0, q(qv)).unwrap(), 0.0);
            assert_eq!(f_q(0.0, q(qv)).unwrap(), 0.0);
        }
        assert!((g_q(1.0, q(2.0)).unwrap() - 0.5).abs() < 1e-15);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((g_q(x, q(2.0)).unwrap() - x * x / 2.0).abs() < 1e-12);
            assert!((f_q(x, q(2.0)).unwrap() - x / 2.0).abs() < 1e-12);
        }
        for qv in [0.5, 1.5, 3.0] {
            let expect = (1.0 - 2f64.powf(1.0 - qv)) / (qv - 1.0);
            assert!((f_q(1.0, q(qv)).unwrap() - expect).abs() < 1e-14);
        }
        assert!(matches!(g_q(1.1, q(2.0)), Err(Error::OutOfRange { .. })));
        assert!(f_q(-0.1, q(2.0)).is_err());
    }

    #[test]
    fn g_von_neumann_is_binary_entropy() {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let p = (1.0 + (1.0 - x * x).sqrt()) / 2.0;
            let h = if p >= 1.0 { 0.0 } else { -p * p.ln() - (1.0 - p) * (1.0 - p).ln() };
            assert!((g_q(x, q(1.0)).unwrap() - h).abs() < 1e-14);
        }
    }

    #[test]
    fn f_matches_g_of_sqrt() {
        for qi in 1..=50 {
            let qv = qi as f64 * 0.1;
            for yi in 0..=100 {
                let y = yi as f64 / 100.0;
                let d = f_q(y, q(qv)).unwrap() - g_q(y.sqrt(), q(qv)).unwrap();
                assert!(d.abs() < 1e-12, "q={qv} y={y} diff={d}");
            }
        }
    }

    #[test]
    fn tsallis_pure_examples() {
        let p3 = BipartitionSpec::single(0, 3).unwrap();
        let t = tsallis_pure(&ghz(3).unwrap(), &p3, q(2.0)).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
        let t = tsallis_pure(&w(3).unwrap(), &p3, q(2.0)).unwrap();
        assert!((t - 4.0 / 9.0).abs() < 1e-15);
        let prod = StateVector::basis(3, 5).unwrap();
        assert!(tsallis_pure(&prod, &p3, q(1.7)).unwrap().abs() < 1e-15);
        let two_and_one = BipartitionSpec::new(vec![0, 1], vec![2], 3).unwrap();
        let t = tsallis_pure(&w(3).unwrap(), &two_and_one, q(2.0)).unwrap();
        assert!((t - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_mixed_examples() {
        let wm = w(3).unwrap().reduced(&[0, 2]).unwrap();
        assert!((tsallis_two_qubit_mixed(&wm, q(2.0)).unwrap() - 2.0 / 9.0).abs() < 1e-10);
        let gm = ghz(3).unwrap().reduced(&[0, 1]).unwrap();
        for qv in [0.8, 1.0, 2.0, 4.0] {
            assert!(tsallis_two_qubit_mixed(&gm, q(qv)).unwrap().abs() < 1e-12);
        }
        let bell = ghz(2).unwrap().to_density();
        assert!((tsallis_two_qubit_mixed(&bell, q(2.0)).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            tsallis_two_qubit_mixed(&bell, q(0.5)),
            Err(Error::QOutsideAnalyticRange(_))
        ));
        assert!(tsallis_two_qubit_mixed(&bell, q(4.5)).is_err());
    }

    #[test]
    fn second_derivative_of_g_closed_forms() {
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!((d2g_dx2(x, q(2.0)).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(d2g_dx2(0.0, q(2.0)), Err(Error::Endpoint(_))));
        assert!(matches!(d2g_dx2(1.0, q(2.0)), Err(Error::Endpoint(_))));
        // Below q_c1 the curvature turns negative as x -> 1.
        assert!(d2g_dx2(0.999, q(0.6)).unwrap() < 0.0);
        assert!(d2g_dx2(0.2, q(0.6)).unwrap() > 0.0);
    }

    #[test]
    fn limits_of_g_curvature() {
        assert!((limit_d2g_dx2_at_1(q(2.0)) - 0.5).abs() < 1e-15);
        assert!(limit_d2g_dx2_at_1(q(Q_ANALYTIC_MIN)).abs() < 1e-15);
        assert!(limit_d2g_dx2_at_1(q(Q_ANALYTIC_MAX)).abs() < 1e-14);
        // The true limit is q times the returned expression.
        for qv in [0.6, 1.5, 2.0, 3.3, 4.8] {
            let near = d2g_dx2(1.0 - 1e-9, q(qv)).unwrap();
            assert!((near - qv * limit_d2g_dx2_at_1(q(qv))).abs() < 1e-6, "q={qv}");
        }
    }

    #[test]
    fn dtq2_examples() {
        assert!((dtq2_dx(0.5, q(2.0)).unwrap() - 0.25).abs() < 1e-14);
        for qv in [0.2, 0.7, 2.0, 5.0] {
            assert_eq!(dtq2_dx(0.0, q(qv)).unwrap(), 0.0);
        }
        for qv in [0.5, 2.0, 3.0] {
            let f1 = f_q(1.0, q(qv)).unwrap();
            let expect = 2.0 * f1 * qv * 2f64.powf(-qv);
            assert!((dtq2_dx(1.0, q(qv)).unwrap() - expect).abs() < 1e-14);
        }
        assert!(dtq2_dx(1.5, q(2.0)).is_err());
    }

    #[test]
    fn big_f_examples() {
        for i in 1..100 {
            let y = i as f64 / 100.0;
            assert!((big_f(y, q(2.0)).unwrap() - 0.5).abs() < 1e-12);
        }
        assert!(big_f(0.0, q(2.0)).is_err());
        assert!(big_f(1.0, q(2.0)).is_err());
    }

    #[test]
    fn boundary_limit_formulas() {
        assert_eq!(limit_f_at_x0(q(1.0)), 0.0);
        assert!((limit_f_at_x0(q(2.0)) - 0.125).abs() < 1e-15);
        // q = 0.5: 2^-2 * 0.5 * (sqrt2 - 2) * (-0.5) > 0.
        let v = limit_f_at_x0(q(0.5));
        assert!((v - 0.25 * 0.5 * (2f64.sqrt() - 2.0) * -0.5).abs() < 1e-15);
        assert!(v > 0.0);

        assert_eq!(limit_f_at_x1(q(1.0)), 0.0);
        assert!((limit_f_at_x1(q(2.0)) - 0.5).abs() < 1e-15);
        // The bracket at q = 4 is -44, so the limit is 176/256, not a root.
        assert!((x1_bracket(4.0) + 44.0).abs() < 1e-12);
        assert!((limit_f_at_x1(q(4.0)) - 0.6875).abs() < 1e-14);

        assert!((limit_d2tq2_dx2_at_1(q(2.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(limit_d2tq2_dx2_at_1(q(1.0)), Err(Error::QIsOne)));
        assert!(limit_d2tq2_dx2_at_1(q(0.65)).unwrap().abs() <= 1e-2);
    }

    #[test]
    fn f_limits_agree_with_interior() {
        for qv in [0.6, 1.5, 2.5, 3.3, 4.8] {
            let near = big_f(1.0 - 1e-10, q(qv)).unwrap();
            assert!((near - limit_f_at_x1(q(qv))).abs() < 1e-6, "q={qv}");
            let near = d2tq2_dx2(1.0 - 1e-10, q(qv)).unwrap();
            assert!((near - limit_d2tq2_dx2_at_1(q(qv)).unwrap()).abs() < 1e-6, "q={qv}");
        }
    }

    #[test]
    fn marginal_spectrum_closed_form() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [Complex64::new(h, 0.0), ZERO, ZERO, Complex64::new(h, 0.0)];
        let [hi, lo] = two_qubit_marginal_spectrum(&bell);
        assert!((hi - 0.5).abs() < 1e-15 && (lo - 0.5).abs() < 1e-15);
        assert!((two_qubit_pure_concurrence(&bell) - 1.0).abs() < 1e-15);
        let prod = [Complex64::new(1.0, 0.0), ZERO, ZERO, ZERO];
        assert_eq!(two_qubit_marginal_spectrum(&prod), [1.0, 0.0]);
    }
}
