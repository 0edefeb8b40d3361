//! Root finding, finite differences, critical-curve tracing and the
//! convex-roof search used to cross-check the two-qubit closed form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ZERO};
use crate::measures::{self, QParam};
use crate::monogamy;
use crate::states::{self, DensityMatrix, SeededSampler, StateVector};

pub const ROOT_MAX_ITERS: usize = 500;

/// Outcome of a bracketed solve, with the bracket widths after each step.
#[derive(Debug, Clone)]
pub struct RootReport {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
    pub widths: Vec<f64>,
}

/// Illinois-modified regula falsi with forced bisection whenever two
/// consecutive steps fail to halve the bracket. The bracket always keeps
/// a sign change and never grows.
pub fn bracketed_root(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<RootReport> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::DomainError(format!("non-finite value at bracket [{a}, {b}]")));
    }
    let mut widths = vec![b - a];
    if fa == 0.0 {
        return Ok(RootReport { root: a, lo: a, hi: a, iterations: 0, widths });
    }
    if fb == 0.0 {
        return Ok(RootReport { root: b, lo: b, hi: b, iterations: 0, widths });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    let (mut ga, mut gb) = (fa, fb); // Illinois-weighted copies
    let mut side = 0i8;
    let mut slow_steps = 0;
    for iter in 1..=ROOT_MAX_ITERS {
        let width = b - a;
        let best = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
        if width <= tol || best.1.abs() <= tol {
            return Ok(RootReport { root: best.0, lo: a, hi: b, iterations: iter - 1, widths });
        }
        let mut x = (a * gb - b * ga) / (gb - ga);
        let bisect = slow_steps >= 2 || !(x > a && x < b);
        if bisect {
            x = 0.5 * (a + b);
            slow_steps = 0;
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::DomainError(format!("non-finite value at {x}")));
        }
        if fx == 0.0 {
            widths.push(0.0);
            return Ok(RootReport { root: x, lo: x, hi: x, iterations: iter, widths });
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            gb = fx;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            ga = fx;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
        let new_width = b - a;
        if !bisect && new_width > 0.5 * width {
            slow_steps += 1;
        } else if !bisect {
            slow_steps = 0;
        }
        widths.push(new_width);
        if new_width <= f64::EPSILON * a.abs().max(b.abs()) {
            let best = if fa.abs() <= fb.abs() { a } else { b };
            return Ok(RootReport { root: best, lo: a, hi: b, iterations: iter, widths });
        }
    }
    Err(Error::MaxIterations(ROOT_MAX_ITERS))
}

/// Root of `f` in `[lo, hi]`, stopping once `|f(r)| <= tol` or the bracket
/// width is at most `tol`.
pub fn find_root_bracketed(f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    bracketed_root(f, lo, hi, tol).map(|r| r.root)
}

/// `(f(x+h) - 2 f(x) + f(x-h)) / h^2`.
pub fn finite_diff_2nd(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) || !x.is_finite() {
        return Err(Error::DomainError(format!("bad step h={h} at x={x}")));
    }
    let fp = f(x + h).map_err(|e| Error::DomainError(e.to_string()))?;
    let f0 = f(x).map_err(|e| Error::DomainError(e.to_string()))?;
    let fm = f(x - h).map_err(|e| Error::DomainError(e.to_string()))?;
    Ok((fp - 2.0 * f0 + fm) / (h * h))
}

/// `(f(x+h) - f(x-h)) / 2h`.
pub fn finite_diff_1st(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) || !x.is_finite() {
        return Err(Error::DomainError(format!("bad step h={h} at x={x}")));
    }
    let fp = f(x + h).map_err(|e| Error::DomainError(e.to_string()))?;
    let fm = f(x - h).map_err(|e| Error::DomainError(e.to_string()))?;
    Ok((fp - fm) / (2.0 * h))
}

const CRITICAL_TOL: f64 = 1e-13;

fn q_unchecked(q: f64) -> QParam {
    QParam::new(q).expect("positive q")
}

/// Roots of the `C -> 1` curvature limit of `g_q` in `(0,1)` and `(4,5)`.
pub fn find_qc_pair_g() -> Result<(f64, f64)> {
    let f = |q: f64| measures::limit_d2g_dx2_at_1(q_unchecked(q));
    let lo = find_root_bracketed(f, 0.01, 1.0, CRITICAL_TOL)?;
    let hi = find_root_bracketed(f, 4.0, 5.0, CRITICAL_TOL)?;
    Ok((lo, hi))
}

/// Roots of `6(2^q-2) + (16-5*2^q) q + (2^q-8) q^2` in `(0,1)` and `(4,5)`.
pub fn find_qc_pair_t2() -> Result<(f64, f64)> {
    let lo = find_root_bracketed(measures::x1_bracket, 0.01, 0.99, CRITICAL_TOL)?;
    let hi = find_root_bracketed(measures::x1_bracket, 4.0, 5.0, CRITICAL_TOL)?;
    Ok((lo, hi))
}

/// Nontrivial zero of the signed three-tangle closed form in `(0.1, 0.9)`.
pub fn find_p2() -> Result<f64> {
    find_root_bracketed(
        |p| monogamy::three_tangle_analytic(p).unwrap_or(f64::NAN),
        0.1,
        0.9,
        CRITICAL_TOL,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriticalCondition {
    /// `d^2 T_q / dC^2 = 0`.
    D2TqZero,
    /// `d^2 T_q^2 / d(C^2)^2 = 0`.
    D2Tq2Zero,
    /// `dF_q/dx = 0` (central differences).
    DFdxZero,
    /// `dF_q/dq = 0` (central differences).
    DFdqZero,
}

impl CriticalCondition {
    pub fn name(self) -> &'static str {
        match self {
            CriticalCondition::D2TqZero => "D2Tq_Zero",
            CriticalCondition::D2Tq2Zero => "D2Tq2_Zero",
            CriticalCondition::DFdxZero => "DFdx_Zero",
            CriticalCondition::DFdqZero => "DFdq_Zero",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match key.to_ascii_lowercase().as_str() {
            "d2tqzero" => Some(CriticalCondition::D2TqZero),
            "d2tq2zero" => Some(CriticalCondition::D2Tq2Zero),
            "dfdxzero" => Some(CriticalCondition::DFdxZero),
            "dfdqzero" => Some(CriticalCondition::DFdqZero),
            _ => None,
        }
    }

    /// Value of the condition expression at `(q, x)`.
    pub fn evaluate(self, q: f64, x: f64) -> Result<f64> {
        let qp = QParam::new(q)?;
        match self {
            CriticalCondition::D2TqZero => measures::d2g_dx2(x, qp),
            CriticalCondition::D2Tq2Zero => measures::d2tq2_dx2(x, qp),
            CriticalCondition::DFdxZero => {
                finite_diff_1st(|xx| measures::big_f(xx, qp), x, F_STEP)
            }
            CriticalCondition::DFdqZero => {
                finite_diff_1st(|qq| measures::big_f(x, QParam::new(qq)?), q, F_STEP)
            }
        }
    }
}

/// Central-difference step for the gradient of `F_q`.
pub const F_STEP: f64 = 1e-6;
/// Emitted curve points satisfy `|condition| <= CURVE_TOL`.
pub const CURVE_TOL: f64 = 1e-8;
const X_SCAN_POINTS: usize = 4000;
const X_SCAN_MARGIN: f64 = 1e-4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalCurve {
    pub condition: CriticalCondition,
    /// `(q, x)` sorted by `q`.
    pub points: Vec<(f64, f64)>,
}

/// A traced curve plus the gridpoints that produced no point.
#[derive(Debug, Clone)]
pub struct CurveTrace {
    pub curve: CriticalCurve,
    /// `q` values where the condition never changes sign in `x`.
    pub unbracketed: Vec<f64>,
    /// `q` values where a sign change was found but the solve failed.
    pub failed: Vec<(f64, String)>,
}

/// Evenly spaced grid including both endpoints.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Solves `condition(q, x) = 0` for `x in (0,1)` at each of `steps` values
/// of `q` in `[q_lo, q_hi]`, taking the smallest root found by scanning.
pub fn trace_critical_curve(
    condition: CriticalCondition,
    q_lo: f64,
    q_hi: f64,
    steps: usize,
) -> Result<CurveTrace> {
    if !(q_lo > 0.0) || !(q_hi >= q_lo) || steps == 0 {
        return Err(Error::DomainError(format!(
            "bad q range [{q_lo}, {q_hi}] with {steps} steps"
        )));
    }
    let xs = linspace(X_SCAN_MARGIN, 1.0 - X_SCAN_MARGIN, X_SCAN_POINTS);
    let mut points = Vec::new();
    let mut unbracketed = Vec::new();
    let mut failed = Vec::new();
    for q in linspace(q_lo, q_hi, steps) {
        match critical_x(condition, q, &xs) {
            Ok(Some(x)) => points.push((q, x)),
            Ok(None) => unbracketed.push(q),
            Err(e) => failed.push((q, e.to_string())),
        }
    }
    Ok(CurveTrace {
        curve: CriticalCurve { condition, points },
        unbracketed,
        failed,
    })
}

fn critical_x(condition: CriticalCondition, q: f64, xs: &[f64]) -> Result<Option<f64>> {
    let mut prev: Option<(f64, f64)> = None;
    for &x in xs {
        let v = condition.evaluate(q, x)?;
        if let Some((px, pv)) = prev {
            if pv == 0.0 {
                return Ok(Some(px));
            }
            if pv.signum() != v.signum() {
                let f = |t: f64| condition.evaluate(q, t).unwrap_or(f64::NAN);
                let report = bracketed_root(f, px, x, 1e-16)?;
                let value = condition.evaluate(q, report.root)?;
                if value.abs() > CURVE_TOL {
                    return Err(Error::DomainError(format!(
                        "|condition| = {value:e} at x = {} exceeds {CURVE_TOL:e}",
                        report.root
                    )));
                }
                return Ok(Some(report.root));
            }
        }
        prev = Some((x, v));
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Nelder-Mead

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead with dimension-adaptive coefficients (Gao and Han). Stops
/// when the spread of simplex values falls below `ftol` or after
/// `max_iters` iterations.
pub fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    ftol: f64,
) -> NelderMeadResult {
    let n = x0.len();
    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 0.5 / nf;
    let delta = 1.0 - 1.0 / nf;

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut centroid = vec![0.0; n];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= ftol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / nf;
            }
        }
        let worst = simplex[n].clone();
        let towards = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = towards(alpha);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = towards(alpha * beta);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = towards(alpha * gamma);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = towards(-gamma);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + delta * (*x - b);
            }
            values[i] = f(&simplex[i]);
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0);
    NelderMeadResult {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

// ---------------------------------------------------------------------------
// Convex roof

pub const DEFAULT_ENSEMBLE_SIZE: usize = 4;
pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_ITERS: usize = 500;
/// The best two restarts must agree within this for the search to count as
/// stable; a fifth of the 5e-3 accuracy the defaults are sized for.
pub const ROOF_STABILITY_TOL: f64 = 1e-3;
const ROOF_RANK_FLOOR: f64 = 1e-12;

/// Pure-state decomposition `rho = sum_i w_i |psi_i><psi_i|`.
#[derive(Debug, Clone)]
pub struct EnsembleDecomposition {
    pub weights: Vec<f64>,
    pub members: Vec<StateVector>,
}

impl EnsembleDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.members.first().map(|m| m.dim()).unwrap_or(1);
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, m) in self.weights.iter().zip(&self.members) {
            acc = &acc + &ComplexMatrix::projector(m.amplitudes()).scale(Complex64::new(*w, 0.0));
        }
        acc
    }
}

#[derive(Debug, Clone)]
pub struct ConvexRoofResult {
    /// Best average entanglement found; an upper bound on the convex roof.
    pub value: f64,
    pub best: EnsembleDecomposition,
    /// False when no two restarts agreed within [`ROOF_STABILITY_TOL`].
    pub converged: bool,
    pub restart_values: Vec<f64>,
}

/// Eigen-ensemble `sqrt(lambda_j) |phi_j>` of the nonzero spectrum.
fn scaled_eigenvectors(rho: &DensityMatrix) -> Result<Vec<Vec<Complex64>>> {
    let eig = linalg::hermitian_eig(rho.matrix(), linalg::DEFAULT_EIG_TOL)?;
    Ok((0..eig.eigenvalues.len())
        .rev()
        .filter(|&k| eig.eigenvalues[k] > ROOF_RANK_FLOOR)
        .map(|k| {
            let s = eig.eigenvalues[k].sqrt();
            eig.eigenvector(k).into_iter().map(|z| z * s).collect()
        })
        .collect())
}

/// Columns of the `m x r` complex matrix packed in `params`, orthonormalized
/// by modified Gram-Schmidt. `None` if the columns are (nearly) dependent.
fn isometry_from_params(params: &[f64], m: usize, r: usize) -> Option<Vec<Vec<Complex64>>> {
    let mut cols: Vec<Vec<Complex64>> = (0..r)
        .map(|j| {
            (0..m)
                .map(|i| {
                    let k = 2 * (j * m + i);
                    Complex64::new(params[k], params[k + 1])
                })
                .collect()
        })
        .collect();
    for j in 0..r {
        for k in 0..j {
            let proj: Complex64 = cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
            let (head, tail) = cols.split_at_mut(j);
            for (x, e) in tail[0].iter_mut().zip(&head[k]) {
                *x -= proj * e;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-8) {
            return None;
        }
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    Some(cols)
}

/// Unnormalized members `|psi~_i> = sum_j U_ij sqrt(lambda_j)|phi_j>`.
fn members_from_isometry(u: &[Vec<Complex64>], basis: &[Vec<Complex64>], m: usize) -> Vec<Vec<Complex64>> {
    let dim = basis[0].len();
    (0..m)
        .map(|i| {
            let mut v = vec![ZERO; dim];
            for (col, phi) in u.iter().zip(basis) {
                let c = col[i];
                for (x, p) in v.iter_mut().zip(phi) {
                    *x += c * p;
                }
            }
            v
        })
        .collect()
}

/// Average entanglement of an ensemble of unnormalized members; each
/// member's weight is its squared norm.
type MemberMeasure<'a> = dyn Fn(&[Complex64]) -> f64 + Sync + 'a;

fn ensemble_average(members: &[Vec<Complex64>], measure: &MemberMeasure<'_>) -> f64 {
    members
        .iter()
        .map(|v| {
            let w: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if w <= 1e-300 {
                0.0
            } else {
                w * measure(v)
            }
        })
        .sum()
}

/// Random-restart Nelder-Mead over size-`ensemble_size` decompositions of
/// `rho`, minimizing the ensemble average of `measure`.
pub fn convex_roof_search(
    rho: &DensityMatrix,
    measure: &MemberMeasure<'_>,
    ensemble_size: usize,
    restarts: usize,
    iters: usize,
    sampler: SeededSampler,
) -> Result<ConvexRoofResult> {
    let basis = scaled_eigenvectors(rho)?;
    let r = basis.len();
    let m = ensemble_size;
    if r == 0 {
        return Err(Error::InvalidDensityMatrix("zero matrix".into()));
    }
    if m < r {
        return Err(Error::DomainError(format!(
            "ensemble size {m} is below rank {r}"
        )));
    }
    let n_qubits = rho.n_qubits();
    let to_ensemble = |members: Vec<Vec<Complex64>>| -> Result<EnsembleDecomposition> {
        let mut weights = Vec::new();
        let mut states_out = Vec::new();
        for v in members {
            let w: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if w > 1e-300 {
                weights.push(w);
                states_out.push(StateVector::normalized(n_qubits, v)?);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(EnsembleDecomposition {
            weights,
            members: states_out,
        })
    };

    if r == 1 {
        let value = measure(&basis[0]);
        return Ok(ConvexRoofResult {
            value,
            best: to_ensemble(basis)?,
            converged: true,
            restart_values: vec![value],
        });
    }

    let penalty = 1e3;
    let mut objective = |p: &[f64]| -> f64 {
        match isometry_from_params(p, m, r) {
            Some(u) => ensemble_average(&members_from_isometry(&u, &basis, m), measure),
            None => penalty,
        }
    };

    let n_params = 2 * m * r;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut restart_values = Vec::with_capacity(restarts.max(1));
    for k in 0..restarts.max(1) {
        let mut rng = sampler.child(k as u64).rng();
        let x0: Vec<f64> = (0..n_params / 2)
            .flat_map(|_| {
                let z = states::complex_normal(&mut rng);
                [z.re, z.im]
            })
            .collect();
        // Re-seed the simplex around the incumbent a few times; plain
        // Nelder-Mead stalls in this many dimensions.
        let mut x = x0;
        let mut value = f64::INFINITY;
        let mut used = 0;
        let mut step = 0.5;
        while used < iters {
            let res = nelder_mead(&mut objective, &x, step, iters - used, 1e-15);
            used += res.iterations.max(1);
            let improved = value - res.value;
            x = res.x;
            value = res.value;
            if improved.abs() < 1e-13 {
                break;
            }
            step = (step * 0.5).max(1e-3);
        }
        restart_values.push(value);
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, x));
        }
    }
    let (value, params) = best.expect("at least one restart");
    let u = isometry_from_params(&params, m, r).ok_or_else(|| {
        Error::DomainError("degenerate isometry at the optimum".into())
    })?;
    let mut sorted = restart_values.clone();
    sorted.sort_by(f64::total_cmp);
    let converged = sorted.len() < 2 || sorted[1] - sorted[0] <= ROOF_STABILITY_TOL;
    Ok(ConvexRoofResult {
        value,
        best: to_ensemble(members_from_isometry(&u, &basis, m))?,
        converged,
        restart_values,
    })
}

/// Tsallis-q entanglement of a two-qubit pure member from its marginal
/// spectrum.
fn two_qubit_member_tsallis(q: QParam) -> impl Fn(&[Complex64]) -> f64 + Sync {
    move |v: &[Complex64]| measures::tsallis_of_spectrum(&measures::two_qubit_marginal_spectrum(v), q)
}

/// Upper bound on the convex roof `T_q(rho)` of a two-qubit state by
/// search over decompositions obtained from isometries applied to the
/// eigen-ensemble.
pub fn convex_roof_upper_bound(
    rho: &DensityMatrix,
    q: QParam,
    ensemble_size: usize,
    restarts: usize,
    iters: usize,
    sampler: SeededSampler,
) -> Result<ConvexRoofResult> {
    if rho.n_qubits() != 2 {
        return Err(Error::NotTwoQubits(rho.n_qubits()));
    }
    let measure = two_qubit_member_tsallis(q);
    convex_roof_search(rho, &measure, ensemble_size, restarts, iters, sampler)
}

/// Upper bound on `T_q(rho_{focus | rest})` for a mixed multi-qubit state,
/// by the same search with each member's `T_q` taken from its focus
/// marginal.
pub fn convex_roof_focus_upper_bound(
    rho: &DensityMatrix,
    focus: usize,
    q: QParam,
    ensemble_size: usize,
    restarts: usize,
    iters: usize,
    sampler: SeededSampler,
) -> Result<ConvexRoofResult> {
    let n = rho.n_qubits();
    if focus >= n {
        return Err(Error::IndexOutOfRange { index: focus, n_qubits: n });
    }
    let measure = move |v: &[Complex64]| -> f64 {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        match linalg::partial_trace_pure(v, n, &[focus]) {
            Ok(r) => {
                let (a, d) = (r[(0, 0)].re / norm, r[(1, 1)].re / norm);
                let off = r[(0, 1)].norm_sqr() / (norm * norm);
                let half_gap = (0.25 * (a - d) * (a - d) + off).sqrt();
                let hi = 0.5 * (a + d) + half_gap;
                let lo = if hi > 0.0 { ((a * d - off) / hi).max(0.0) } else { 0.0 };
                measures::tsallis_of_spectrum(&[hi, lo], q)
            }
            Err(_) => f64::NAN,
        }
    };
    convex_roof_search(rho, &measure, ensemble_size, restarts, iters, sampler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_mixed, w};

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    #[test]
    fn sqrt_two() {
        let r = find_root_bracketed(|x| x * x - 2.0, 1.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quadratic_roots_of_curvature_limit() {
        let f = |q: f64| 3.0 - 5.0 * q + q * q;
        let lo = find_root_bracketed(f, 0.0, 1.0, 1e-14).unwrap();
        let hi = find_root_bracketed(f, 4.0, 5.0, 1e-14).unwrap();
        assert!((lo - (5.0 - 13f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((hi - (5.0 + 13f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((lo - 0.697224).abs() < 1e-6 && (hi - 4.302776).abs() < 1e-6);
    }

    #[test]
    fn root_errors() {
        assert!(matches!(
            find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::NoSignChange { .. })
        ));
        assert!(find_root_bracketed(|_| f64::NAN, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn bracket_shrinks_monotonically() {
        for (lo, hi) in [(0.0, 3.0), (-2.0, 0.5), (0.1, 10.0)] {
            let f = |x: f64| x.powi(3) - 0.3 * x - 0.2;
            if f(lo).signum() == f(hi).signum() {
                continue;
            }
            let rep = bracketed_root(f, lo, hi, 1e-13).unwrap();
            assert!(rep.widths.windows(2).all(|w| w[1] <= w[0]));
            assert!(*rep.widths.last().unwrap() <= 1e-13 || f(rep.root).abs() <= 1e-13);
        }
    }

    #[test]
    fn critical_pairs() {
        let (a, b) = find_qc_pair_g().unwrap();
        assert!((a - 0.6972243623).abs() < 1e-9);
        assert!((b - 4.3027756377).abs() < 1e-9);
        assert!(measures::limit_d2g_dx2_at_1(q(2.0)) > 0.0);

        let (c, d) = find_qc_pair_t2().unwrap();
        assert!((0.64..=0.66).contains(&c), "q_c3 = {c}");
        assert!((4.60..=4.70).contains(&d), "q_c4 = {d}");
        assert!(measures::x1_bracket(c).abs() <= 1e-9);
        assert!(measures::x1_bracket(d).abs() <= 1e-9);
        assert!((measures::x1_bracket(2.0) + 12.0).abs() < 1e-12);
    }

    #[test]
    fn p2_root() {
        let p = find_p2().unwrap();
        assert!((0.626..=0.628).contains(&p));
        assert!(monogamy::three_tangle_analytic(p).unwrap().abs() <= 1e-9);
        // tau(p) = 0 <=> 81 p^4 = 384 p (1-p)^3 <=> (p/(1-p))^3 = 384/81.
        let ratio = (384.0f64 / 81.0).cbrt();
        assert!((p / (1.0 - p) - ratio).abs() < 1e-9);
    }

    #[test]
    fn second_differences() {
        let d = finite_diff_2nd(|x| Ok(x * x), 0.3, 1e-4).unwrap();
        assert!((d - 2.0).abs() < 1e-6);
        let d = finite_diff_2nd(|y| Ok(measures::f_q(y, q(2.0))?.powi(2)), 0.5, 1e-4).unwrap();
        assert!((d - 0.5).abs() < 1e-5);
        for qv in [0.8, 1.5, 3.0] {
            for x in [0.2, 0.5, 0.8] {
                let fd = finite_diff_2nd(|t| measures::g_q(t, q(qv)), x, 1e-4).unwrap();
                let exact = measures::d2g_dx2(x, q(qv)).unwrap();
                assert!((fd - exact).abs() < 1e-6, "q={qv} x={x}: {fd} vs {exact}");
            }
        }
        assert!(finite_diff_2nd(|t| measures::g_q(t, q(2.0)), 0.99995, 1e-4).is_err());
        assert!(finite_diff_2nd(Ok, 0.5, 0.0).is_err());
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let mut f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(&mut f, &[-1.2, 1.0], 0.5, 5000, 1e-20);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
    }

    #[test]
    fn isometry_is_orthonormal() {
        let params: Vec<f64> = (0..16).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.4).collect();
        let u = isometry_from_params(&params, 4, 2).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let ip: Complex64 = u[a].iter().zip(&u[b]).map(|(x, y)| x.conj() * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn roof_of_pure_state_collapses() {
        let psi = crate::states::random_pure(2, SeededSampler::new(5, 1)).unwrap();
        let rho = psi.to_density();
        let res = convex_roof_upper_bound(&rho, q(1.5), 4, 3, 100, SeededSampler::new(5, 2)).unwrap();
        let c = measures::two_qubit_pure_concurrence(psi.amplitudes());
        let expect = measures::g_q(c, q(1.5)).unwrap();
        assert!((res.value - expect).abs() < 1e-10);
        assert!(res.converged);
    }

    #[test]
    fn roof_w_marginal() {
        let rho = w(3).unwrap().reduced(&[0, 1]).unwrap();
        let res = convex_roof_upper_bound(
            &rho,
            q(2.0),
            DEFAULT_ENSEMBLE_SIZE,
            DEFAULT_RESTARTS,
            DEFAULT_ITERS,
            SeededSampler::new(1, 0),
        )
        .unwrap();
        let target = 2.0 / 9.0;
        assert!(res.value >= target - 1e-9);
        assert!(res.value - target <= 5e-3, "gap {}", res.value - target);
        assert!(res.best.reconstruct().max_abs_diff(rho.matrix()) < 1e-8);
        assert!((res.best.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn roof_random_rank_two() {
        let rho = random_mixed(2, 2, SeededSampler::new(9, 3)).unwrap();
        let qp = q(1.5);
        let res = convex_roof_upper_bound(&rho, qp, 4, 20, 500, SeededSampler::new(9, 4)).unwrap();
        let target = measures::g_q(measures::concurrence_wootters(&rho).unwrap(), qp).unwrap();
        assert!(res.value >= target - 1e-9);
        assert!(res.value - target <= 5e-3, "gap {}", res.value - target);
    }

    #[test]
    fn roof_rejects_small_ensemble() {
        let rho = random_mixed(2, 3, SeededSampler::new(2, 2)).unwrap();
        assert!(convex_roof_upper_bound(&rho, q(2.0), 2, 1, 10, SeededSampler::new(0, 0)).is_err());
    }
}
