//! Monogamy and polygamy residuals for pure multi-qubit states.
//!
//! Each residual is `lhs - rhs` where `lhs` measures the focus qubit against
//! the rest and `rhs` sums two-qubit quantities between the focus and each
//! other qubit. Monogamy-type relations predict `residual >= 0`, polygamy
//! (`mu <= 0`) predicts `residual <= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, BipartitionSpec, QParam};
use crate::states::StateVector;

/// Residuals below `-VIOLATION_TOL` are genuine counterexamples rather than
/// eigensolver noise.
pub const VIOLATION_TOL: f64 = 1e-10;

/// Pairwise `T_q` at or below this counts as zero when raised to a
/// non-positive power.
pub const POLYGAMY_MIN_BASE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Inequality {
    #[serde(rename = "CKW")]
    Ckw,
    #[serde(rename = "STqE")]
    Stqe,
    MuPower,
    MuPolygamy,
}

impl Inequality {
    pub fn label(self) -> &'static str {
        match self {
            Inequality::Ckw => "CKW",
            Inequality::Stqe => "STqE",
            Inequality::MuPower => "MuPower",
            Inequality::MuPolygamy => "MuPolygamy",
        }
    }

    /// True when the predicted sign is `lhs >= rhs`.
    pub fn is_monogamy(self) -> bool {
        !matches!(self, Inequality::MuPolygamy)
    }
}

/// One evaluated inequality for one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonogamyRecord {
    pub inequality: Inequality,
    pub q: f64,
    pub mu: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub state_id: String,
    pub seed_info: Option<(u64, u64)>,
    /// `mu = 0` polygamy reads `1 <= 2` and says nothing about the state.
    pub vacuous: bool,
    /// `lhs` is only an upper bound (mixed input, convex roof by search).
    pub best_effort: bool,
}

impl MonogamyRecord {
    fn new(inequality: Inequality, q: f64, mu: f64, lhs: f64, rhs: f64) -> Self {
        Self {
            inequality,
            q,
            mu,
            lhs,
            rhs,
            residual: lhs - rhs,
            state_id: String::new(),
            seed_info: None,
            vacuous: false,
            best_effort: false,
        }
    }

    pub fn with_id(mut self, state_id: impl Into<String>, seed_info: Option<(u64, u64)>) -> Self {
        self.state_id = state_id.into();
        self.seed_info = seed_info;
        self
    }

    /// True when the residual has the wrong sign beyond `tol`.
    pub fn violates(&self, tol: f64) -> bool {
        if self.best_effort || self.vacuous {
            return false;
        }
        if self.inequality.is_monogamy() {
            self.residual < -tol
        } else {
            self.residual > tol
        }
    }
}

/// Concurrences and the focus marginal of a pure state, computed once and
/// reused across many `q` and `mu`.
#[derive(Debug, Clone)]
pub struct FocusProfile {
    pub n_qubits: usize,
    pub focus: usize,
    /// `C(focus | rest)`.
    pub focus_concurrence: f64,
    /// Ascending spectrum of the focus qubit's marginal.
    pub focus_spectrum: Vec<f64>,
    /// `(other qubit, C(rho_{focus,other}))` in ascending qubit order.
    pub pair_concurrences: Vec<(usize, f64)>,
}

impl FocusProfile {
    pub fn new(psi: &StateVector, focus: usize) -> Result<Self> {
        let n = psi.n_qubits();
        if n < 3 {
            return Err(Error::UnsupportedSize(n));
        }
        if focus >= n {
            return Err(Error::IndexOutOfRange {
                index: focus,
                n_qubits: n,
            });
        }
        let part = BipartitionSpec::single(focus, n)?;
        let focus_concurrence = measures::concurrence_pure(psi, &part)?.min(1.0);
        let focus_spectrum = psi.reduced(&[focus])?.eigenvalues()?;
        let pair_concurrences = (0..n)
            .filter(|&i| i != focus)
            .map(|i| {
                let rho = psi.reduced(&[focus, i])?;
                Ok((i, measures::concurrence_wootters(&rho)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_qubits: n,
            focus,
            focus_concurrence,
            focus_spectrum,
            pair_concurrences,
        })
    }

    /// `T_q(focus | rest)` from the marginal spectrum.
    pub fn focus_tsallis(&self, q: QParam) -> f64 {
        measures::tsallis_of_spectrum(&self.focus_spectrum, q)
    }

    /// `T_q(rho_{focus,i}) = g_q(C_i)` for every other qubit.
    pub fn pair_tsallis(&self, q: QParam) -> Result<Vec<f64>> {
        if !q.admits_two_qubit_formula() {
            return Err(Error::QOutsideAnalyticRange(q.value()));
        }
        self.pair_concurrences
            .iter()
            .map(|&(_, c)| measures::g_q(c, q))
            .collect()
    }

    pub fn ckw(&self) -> MonogamyRecord {
        let lhs = self.focus_concurrence.powi(2);
        let rhs = self.pair_concurrences.iter().map(|&(_, c)| c * c).sum();
        MonogamyRecord::new(Inequality::Ckw, f64::NAN, 1.0, lhs, rhs)
    }

    pub fn stqe(&self, q: QParam) -> Result<MonogamyRecord> {
        let pairs = self.pair_tsallis(q)?;
        let lhs = self.focus_tsallis(q).powi(2);
        let rhs = pairs.iter().map(|t| t.powi(2)).sum();
        Ok(MonogamyRecord::new(Inequality::Stqe, q.value(), 2.0, lhs, rhs))
    }

    pub fn mu_power(&self, q: QParam, mu: f64) -> Result<MonogamyRecord> {
        if self.n_qubits != 3 {
            return Err(Error::UnsupportedSize(self.n_qubits));
        }
        if !mu.is_finite() || (mu > 0.0 && mu < 2.0) {
            return Err(Error::DomainError(format!(
                "mu = {mu}: need mu >= 2 (monogamy) or mu <= 0 (polygamy)"
            )));
        }
        let pairs = self.pair_tsallis(q)?;
        let kind = if mu >= 2.0 {
            Inequality::MuPower
        } else {
            Inequality::MuPolygamy
        };
        if mu < 0.0 {
            if let Some(&t) = pairs.iter().find(|&&t| t <= POLYGAMY_MIN_BASE) {
                return Err(Error::ZeroBaseNonpositivePower { value: t, mu });
            }
        }
        let lhs = pow_mu(self.focus_tsallis(q), mu);
        let rhs = pairs.iter().map(|&t| pow_mu(t, mu)).sum();
        let mut rec = MonogamyRecord::new(kind, q.value(), mu, lhs, rhs);
        rec.vacuous = mu == 0.0;
        Ok(rec)
    }
}

/// `t^mu`, with integer powers taken by repeated multiplication so that
/// `mu = 2` reproduces the squared-entanglement residual bit for bit.
fn pow_mu(t: f64, mu: f64) -> f64 {
    if mu.fract() == 0.0 && mu.abs() <= 64.0 {
        t.powi(mu as i32)
    } else {
        t.powf(mu)
    }
}

/// CKW: `C^2(focus|rest)` against `sum_i C^2(rho_{focus,i})`.
pub fn ckw_residual(psi: &StateVector, focus: usize) -> Result<MonogamyRecord> {
    Ok(FocusProfile::new(psi, focus)?.ckw())
}

/// Squared Tsallis-q monogamy; for pure inputs the residual is the
/// indicator `tau_q`.
pub fn stqe_residual(psi: &StateVector, focus: usize, q: QParam) -> Result<MonogamyRecord> {
    FocusProfile::new(psi, focus)?.stqe(q)
}

/// `T_q^mu(focus|rest)` against `sum_i T_q^mu(rho_{focus,i})` for three
/// qubits; monogamy for `mu >= 2`, polygamy for `mu <= 0`.
pub fn mu_power_residual(psi: &StateVector, focus: usize, q: QParam, mu: f64) -> Result<MonogamyRecord> {
    if psi.n_qubits() != 3 {
        return Err(Error::UnsupportedSize(psi.n_qubits()));
    }
    FocusProfile::new(psi, focus)?.mu_power(q, mu)
}

/// Three-tangle `C^2_{A|BC} - C^2_{AB} - C^2_{AC}` of a three-qubit pure
/// state. Values in `[-1e-10, 0)` are rounding and clamp to 0.
pub fn three_tangle(psi: &StateVector) -> Result<f64> {
    if psi.n_qubits() != 3 {
        return Err(Error::UnsupportedSize(psi.n_qubits()));
    }
    let tau = ckw_residual(psi, 0)?.residual;
    if tau < -VIOLATION_TOL {
        Err(Error::NegativeBeyondTolerance(tau))
    } else {
        Ok(tau.max(0.0))
    }
}

/// Signed closed form `p^2 - 8 sqrt6 sqrt(p (1-p)^3) / 9` on the family
/// `sqrt(p)|GHZ> - sqrt(1-p)|W>`.
///
/// The three-tangle itself is the absolute value of this expression; the
/// signed form is negative on `(0, p_2)` and crosses zero at `p_2`.
pub fn three_tangle_analytic(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            value: p,
            range: "[0, 1]",
        });
    }
    Ok(p * p - 8.0 * 6f64.sqrt() * (p * (1.0 - p).powi(3)).sqrt() / 9.0)
}

/// Checks `(1+x)^t >= 1 + x^t` for `0 < x <= 1, t >= 1`, or
/// `(1+x)^t < 1 + x^t` for `x > 0, t <= 0`.
pub fn scalar_power_lemma_check(x: f64, t: f64) -> Result<bool> {
    if !x.is_finite() || !t.is_finite() {
        return Err(Error::DomainError(format!("non-finite input x={x}, t={t}")));
    }
    if x > 0.0 && x <= 1.0 && t >= 1.0 {
        Ok((1.0 + x).powf(t) >= 1.0 + x.powf(t))
    } else if x > 0.0 && t <= 0.0 {
        Ok((1.0 + x).powf(t) < 1.0 + x.powf(t))
    } else {
        Err(Error::DomainError(format!(
            "(x, t) = ({x}, {t}) outside both lemma domains"
        )))
    }
}
