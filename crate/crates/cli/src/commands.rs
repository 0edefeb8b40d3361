//! Command bodies. Each returns data; `crate::run` handles I/O and exit codes.

use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use tqe_core::measures::{self, BipartitionSpec, QParam, Q_ANALYTIC_MAX, Q_ANALYTIC_MIN};
use tqe_core::monogamy::{self, FocusProfile, Inequality, MonogamyRecord};
use tqe_core::numerics::{self, linspace, CriticalCondition, CurveTrace};
use tqe_core::states::{self, DensityMatrix, QuantumState, SeededSampler, StateFile, StateVector};

use crate::error::{CliError, CliResult};
use crate::output::Table;

pub const DEFAULT_INDICATOR_Q: [f64; 3] = [0.8, 1.1, 1.4];
pub const DEFAULT_ORACLE_Q: [f64; 3] = [1.5, 2.0, 3.0];
pub const DEFAULT_MU: [f64; 3] = [2.0, 3.0, 5.0];
pub const DEFAULT_POLYGAMY_MU: [f64; 2] = [-1.0, -0.5];
pub const DEFAULT_SWEEP_Q_STEPS: usize = 9;
pub const DEFAULT_CURVE_STEPS: usize = 200;
pub const CURVE_MARGIN: f64 = 1e-3;
/// Curves fail when more than this fraction of bracketed gridpoints fail
/// to solve.
pub const CURVE_FAILURE_FRACTION: f64 = 0.1;
pub const ORACLE_FAILURE_FRACTION: f64 = 0.1;
/// Optimizer values below the closed form by more than this are bugs.
pub const UPPER_BOUND_SLACK: f64 = 1e-9;
const MAX_DUMPS: usize = 10;

fn qparam(q: f64) -> CliResult<QParam> {
    QParam::new(q).map_err(CliError::Input)
}

// ---------------------------------------------------------------------------
// critical

#[derive(Debug, Clone, Serialize)]
pub struct CriticalEntry {
    pub value: f64,
    /// Value of the defining equation at `value`.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalReport {
    pub q_c1: CriticalEntry,
    pub q_c2: CriticalEntry,
    pub q_c3: CriticalEntry,
    pub q_c4: CriticalEntry,
    pub p_1: CriticalEntry,
    pub p_2: CriticalEntry,
    /// Three-tangle of the superposition state at `p_2`, by partial traces.
    pub p_2_numerical_three_tangle: f64,
}

impl CriticalReport {
    pub fn entries(&self) -> [(&'static str, &CriticalEntry); 6] {
        [
            ("q_c1", &self.q_c1),
            ("q_c2", &self.q_c2),
            ("q_c3", &self.q_c3),
            ("q_c4", &self.q_c4),
            ("p_1", &self.p_1),
            ("p_2", &self.p_2),
        ]
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["name", "value", "residual", "closed_form"]);
        for (name, e) in self.entries() {
            t.push(vec![
                name.into(),
                e.value.into(),
                e.residual.into(),
                e.closed_form.unwrap_or(f64::NAN).into(),
            ]);
        }
        t
    }
}

pub fn critical() -> CliResult<CriticalReport> {
    let (c1, c2) = numerics::find_qc_pair_g().map_err(CliError::numerical)?;
    let (c3, c4) = numerics::find_qc_pair_t2().map_err(CliError::numerical)?;
    let p2 = numerics::find_p2().map_err(CliError::numerical)?;
    let sqrt13 = 13f64.sqrt();
    let g_entry = |q: f64, closed: f64| -> CliResult<CriticalEntry> {
        Ok(CriticalEntry {
            value: q,
            residual: measures::limit_d2g_dx2_at_1(qparam(q)?),
            closed_form: Some(closed),
        })
    };
    let t2_entry = |q: f64| CriticalEntry {
        value: q,
        residual: measures::x1_bracket(q),
        closed_form: None,
    };
    let tangle_entry = |p: f64| -> CliResult<CriticalEntry> {
        Ok(CriticalEntry {
            value: p,
            residual: monogamy::three_tangle_analytic(p).map_err(CliError::numerical)?,
            closed_form: None,
        })
    };
    let psi = states::ghz_w_superposition(p2).map_err(CliError::numerical)?;
    let numerical = monogamy::three_tangle(&psi).map_err(CliError::numerical)?;
    Ok(CriticalReport {
        q_c1: g_entry(c1, (5.0 - sqrt13) / 2.0)?,
        q_c2: g_entry(c2, (5.0 + sqrt13) / 2.0)?,
        q_c3: t2_entry(c3),
        q_c4: t2_entry(c4),
        p_1: tangle_entry(0.0)?,
        p_2: tangle_entry(p2)?,
        p_2_numerical_three_tangle: numerical,
    })
}

// ---------------------------------------------------------------------------
// curves

pub fn parse_condition(name: &str) -> CliResult<CriticalCondition> {
    CriticalCondition::parse(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown condition {name:?}; expected D2Tq_Zero, D2Tq2_Zero, DFdx_Zero or DFdq_Zero"
        ))
    })
}

/// Traces the curve and enforces the failure budget.
pub fn curves(condition: CriticalCondition, q_lo: f64, q_hi: f64, steps: usize) -> CliResult<(Table, CurveTrace)> {
    if !(q_lo > 0.0 && q_hi >= q_lo && q_hi.is_finite()) || steps == 0 {
        return Err(CliError::Usage(format!(
            "need 0 < q-min <= q-max and q-steps >= 1 (got [{q_lo}, {q_hi}], {steps})"
        )));
    }
    let trace = numerics::trace_critical_curve(condition, q_lo, q_hi, steps).map_err(CliError::Input)?;
    for (q, reason) in &trace.failed {
        warn!("{}: no point at q = {q}: {reason}", condition.name());
    }
    let bracketed = trace.curve.points.len() + trace.failed.len();
    if trace.failed.len() as f64 > CURVE_FAILURE_FRACTION * bracketed as f64 {
        return Err(CliError::Numerical(format!(
            "{} of {bracketed} bracketed gridpoints failed to solve",
            trace.failed.len()
        )));
    }
    let mut table = Table::new(vec!["q", "x"]);
    for &(q, x) in &trace.curve.points {
        table.push(vec![q.into(), x.into()]);
    }
    Ok((table, trace))
}

// ---------------------------------------------------------------------------
// surface

pub fn surface(x_steps: usize, q_steps: usize) -> CliResult<Table> {
    if x_steps < 2 || q_steps < 1 {
        return Err(CliError::Usage("surface needs x-steps >= 2 and q-steps >= 1".into()));
    }
    let xs = linspace(0.0, 1.0, x_steps);
    let qs = linspace(1.0, 4.0, q_steps);
    let mut table = Table::new(vec!["x", "q", "F"]);
    for &x in &xs {
        for &q in &qs {
            let qp = qparam(q)?;
            let f = if x == 0.0 {
                measures::limit_f_at_x0(qp)
            } else if x == 1.0 {
                measures::limit_f_at_x1(qp)
            } else {
                measures::big_f(x, qp).map_err(CliError::numerical)?
            };
            table.push(vec![x.into(), q.into(), f.into()]);
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// indicator

pub fn indicator(q_list: &[f64], p_steps: usize) -> CliResult<Table> {
    if p_steps < 2 {
        return Err(CliError::Usage("indicator needs p-steps >= 2".into()));
    }
    let qs = q_list.iter().map(|&q| qparam(q)).collect::<CliResult<Vec<_>>>()?;
    if let Some(q) = qs.iter().find(|q| !q.admits_two_qubit_formula()) {
        return Err(CliError::Input(tqe_core::Error::QOutsideAnalyticRange(q.value())));
    }
    let mut table = Table::new(vec!["p", "q", "tau_q", "three_tangle"]);
    for p in linspace(0.0, 1.0, p_steps) {
        let psi = states::ghz_w_superposition(p).map_err(CliError::numerical)?;
        let profile = FocusProfile::new(&psi, 0).map_err(CliError::numerical)?;
        let tangle = monogamy::three_tangle_analytic(p).map_err(CliError::numerical)?;
        for &q in &qs {
            let tau = profile.stqe(q).map_err(CliError::numerical)?.residual;
            table.push(vec![p.into(), q.value().into(), tau.into(), tangle.into()]);
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub inequality: SweepKind,
    pub n_qubits: usize,
    pub samples: usize,
    pub q_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub focus: usize,
    pub seed: u64,
    pub tol: f64,
    pub inject_w: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepKind {
    Ckw,
    Stqe,
    Mu,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub inequality: SweepKind,
    pub n_qubits: usize,
    pub samples: usize,
    pub rows: usize,
    /// Polygamy records skipped because a pairwise T_q was (near) zero.
    pub skipped: usize,
    pub vacuous: usize,
    pub min_residual: f64,
    pub argmin_state_id: String,
    pub max_residual: f64,
    pub argmax_state_id: String,
    pub violation_count: usize,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<(u64, MonogamyRecord)>,
    pub summary: SweepSummary,
    /// `(state_id, state)` for each violating sample, in sample order.
    pub violators: Vec<(String, StateVector)>,
}

impl SweepOutput {
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec![
            "sample", "state_id", "inequality", "q", "mu", "lhs", "rhs", "residual", "vacuous",
        ]);
        for (sample, r) in &self.records {
            t.push(vec![
                (*sample).into(),
                r.state_id.clone().into(),
                r.inequality.label().into(),
                r.q.into(),
                r.mu.into(),
                r.lhs.into(),
                r.rhs.into(),
                r.residual.into(),
                r.vacuous.into(),
            ]);
        }
        t
    }
}

/// Default `q` grid: 9 points spanning the analytic range.
pub fn analytic_q_grid(steps: usize) -> Vec<f64> {
    linspace(Q_ANALYTIC_MIN, Q_ANALYTIC_MAX, steps)
}

struct SampleResult {
    records: Vec<MonogamyRecord>,
    skipped: usize,
    state: StateVector,
}

fn sweep_sample(cfg: &SweepConfig, qs: &[QParam], index: u64) -> tqe_core::Result<SampleResult> {
    let (psi, id) = if cfg.inject_w && index == 0 {
        (states::w(cfg.n_qubits)?, "w".to_string())
    } else {
        let sampler = SeededSampler::new(cfg.seed, index);
        (states::random_pure(cfg.n_qubits, sampler)?, format!("haar-{}-{index}", cfg.seed))
    };
    let seed_info = Some((cfg.seed, index));
    let profile = FocusProfile::new(&psi, cfg.focus)?;
    let mut records = Vec::new();
    let mut skipped = 0;
    match cfg.inequality {
        SweepKind::Ckw => records.push(profile.ckw()),
        SweepKind::Stqe => {
            for &q in qs {
                records.push(profile.stqe(q)?);
            }
        }
        SweepKind::Mu => {
            for &q in qs {
                for &mu in &cfg.mu_values {
                    match profile.mu_power(q, mu) {
                        Ok(r) => records.push(r),
                        Err(tqe_core::Error::ZeroBaseNonpositivePower { .. }) => skipped += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    let records = records
        .into_iter()
        .map(|r| r.with_id(id.clone(), seed_info))
        .collect();
    Ok(SampleResult {
        records,
        skipped,
        state: psi,
    })
}

pub fn validate_sweep(cfg: &SweepConfig) -> CliResult<Vec<QParam>> {
    if cfg.samples == 0 {
        return Err(CliError::Usage("samples must be >= 1".into()));
    }
    if !(3..=states::MAX_QUBITS).contains(&cfg.n_qubits) {
        return Err(CliError::Usage(format!(
            "sweeps need 3 <= qubits <= {} (got {})",
            states::MAX_QUBITS,
            cfg.n_qubits
        )));
    }
    if cfg.focus >= cfg.n_qubits {
        return Err(CliError::Usage(format!(
            "focus {} out of range for {} qubits",
            cfg.focus, cfg.n_qubits
        )));
    }
    if !cfg.tol.is_finite() {
        return Err(CliError::Usage("tol must be finite".into()));
    }
    let qs = cfg.q_values.iter().map(|&q| qparam(q)).collect::<CliResult<Vec<_>>>()?;
    if cfg.inequality != SweepKind::Ckw {
        if qs.is_empty() {
            return Err(CliError::Usage("empty q grid".into()));
        }
        if let Some(q) = qs.iter().find(|q| !q.admits_two_qubit_formula()) {
            return Err(CliError::Input(tqe_core::Error::QOutsideAnalyticRange(q.value())));
        }
    }
    if cfg.inequality == SweepKind::Mu {
        if cfg.n_qubits != 3 {
            return Err(CliError::Usage("mu-power sweeps are defined for 3 qubits".into()));
        }
        if cfg.mu_values.is_empty() {
            return Err(CliError::Usage("empty mu list".into()));
        }
        if let Some(mu) = cfg.mu_values.iter().find(|&&mu| !mu.is_finite() || (mu > 0.0 && mu < 2.0)) {
            return Err(CliError::Usage(format!(
                "mu = {mu}: need mu >= 2 (monogamy) or mu <= 0 (polygamy)"
            )));
        }
    }
    Ok(qs)
}

pub fn sweep(cfg: &SweepConfig) -> CliResult<SweepOutput> {
    let qs = validate_sweep(cfg)?;
    let results: Vec<tqe_core::Result<SampleResult>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| sweep_sample(cfg, &qs, i))
        .collect();

    let mut records = Vec::new();
    let mut violators = Vec::new();
    let mut skipped = 0;
    let mut summary = SweepSummary {
        inequality: cfg.inequality,
        n_qubits: cfg.n_qubits,
        samples: cfg.samples,
        rows: 0,
        skipped: 0,
        vacuous: 0,
        min_residual: f64::INFINITY,
        argmin_state_id: String::new(),
        max_residual: f64::NEG_INFINITY,
        argmax_state_id: String::new(),
        violation_count: 0,
        tol: cfg.tol,
        seed: cfg.seed,
    };
    for (i, res) in results.into_iter().enumerate() {
        let sample = res.map_err(|e| CliError::Numerical(format!("sample {i}: {e}")))?;
        skipped += sample.skipped;
        let mut violated = false;
        for r in sample.records {
            if r.residual < summary.min_residual {
                summary.min_residual = r.residual;
                summary.argmin_state_id = r.state_id.clone();
            }
            if r.residual > summary.max_residual {
                summary.max_residual = r.residual;
                summary.argmax_state_id = r.state_id.clone();
            }
            if r.vacuous {
                summary.vacuous += 1;
            }
            if r.violates(cfg.tol) {
                summary.violation_count += 1;
                violated = true;
            }
            records.push((i as u64, r));
        }
        if violated {
            let id = records.last().map(|(_, r)| r.state_id.clone()).unwrap_or_default();
            violators.push((id, sample.state));
        }
    }
    summary.rows = records.len();
    summary.skipped = skipped;
    Ok(SweepOutput {
        records,
        summary,
        violators,
    })
}

/// Serializes up to ten violating states into `dir`.
pub fn dump_violators(dir: &Path, violators: &[(String, StateVector)]) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (id, psi) in violators.iter().take(MAX_DUMPS) {
        let path = dir.join(format!("violation-{id}.json"));
        std::fs::write(&path, StateFile::from_pure(psi).to_json()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// oracle

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub samples: usize,
    pub q_values: Vec<f64>,
    pub rank: Option<usize>,
    pub restarts: usize,
    pub iters: usize,
    pub ensemble: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub sample: u64,
    pub rank: usize,
    pub q: f64,
    pub concurrence: f64,
    pub analytic: f64,
    pub optimizer: f64,
    pub gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub rows: usize,
    pub max_gap: f64,
    pub min_gap: f64,
    pub nonconverged: usize,
    pub seed: u64,
}

pub fn oracle_rank(cfg: &OracleConfig, index: usize) -> usize {
    cfg.rank.unwrap_or(2 + index % 3)
}

pub fn oracle(cfg: &OracleConfig) -> CliResult<(Vec<OracleRow>, OracleSummary)> {
    if cfg.samples == 0 || cfg.restarts == 0 || cfg.iters == 0 {
        return Err(CliError::Usage("samples, restarts and iters must be >= 1".into()));
    }
    if let Some(r) = cfg.rank {
        if !(1..=4).contains(&r) {
            return Err(CliError::Usage(format!("rank must be 1..=4 for two qubits (got {r})")));
        }
    }
    let qs = cfg.q_values.iter().map(|&q| qparam(q)).collect::<CliResult<Vec<_>>>()?;
    if let Some(q) = qs.iter().find(|q| !q.admits_two_qubit_formula()) {
        return Err(CliError::Input(tqe_core::Error::QOutsideAnalyticRange(q.value())));
    }
    let max_rank = (0..cfg.samples).map(|i| oracle_rank(cfg, i)).max().unwrap_or(1);
    if cfg.ensemble < max_rank {
        return Err(CliError::Usage(format!(
            "ensemble size {} is below rank {max_rank}",
            cfg.ensemble
        )));
    }

    let jobs: Vec<(usize, usize)> = (0..cfg.samples)
        .flat_map(|i| (0..qs.len()).map(move |k| (i, k)))
        .collect();
    let rows: Vec<tqe_core::Result<OracleRow>> = jobs
        .par_iter()
        .map(|&(i, k)| {
            let rank = oracle_rank(cfg, i);
            let sampler = SeededSampler::new(cfg.seed, i as u64);
            let rho = states::random_mixed(2, rank, sampler)?;
            let c = measures::concurrence_wootters(&rho)?;
            let q = qs[k];
            let analytic = measures::g_q(c, q)?;
            let roof = numerics::convex_roof_upper_bound(
                &rho,
                q,
                cfg.ensemble,
                cfg.restarts,
                cfg.iters,
                sampler.child(1 << 32 | k as u64),
            )?;
            Ok(OracleRow {
                sample: i as u64,
                rank,
                q: q.value(),
                concurrence: c,
                analytic,
                optimizer: roof.value,
                gap: roof.value - analytic,
                converged: roof.converged,
            })
        })
        .collect();
    let rows = rows
        .into_iter()
        .collect::<tqe_core::Result<Vec<_>>>()
        .map_err(CliError::numerical)?;
    let summary = OracleSummary {
        rows: rows.len(),
        max_gap: rows.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max),
        min_gap: rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min),
        nonconverged: rows.iter().filter(|r| !r.converged).count(),
        seed: cfg.seed,
    };
    Ok((rows, summary))
}

pub fn oracle_table(rows: &[OracleRow]) -> Table {
    let mut t = Table::new(vec![
        "sample", "rank", "q", "concurrence", "analytic", "optimizer", "gap", "converged",
    ]);
    for r in rows {
        t.push(vec![
            r.sample.into(),
            r.rank.into(),
            r.q.into(),
            r.concurrence.into(),
            r.analytic.into(),
            r.optimizer.into(),
            r.gap.into(),
            r.converged.into(),
        ]);
    }
    t
}

// ---------------------------------------------------------------------------
// state

pub const DEFAULT_STATE_Q: [f64; 1] = [2.0];
const BEST_EFFORT_MAX_RANK: usize = 4;

/// Reads and validates a state file.
pub fn load_state(path: &Path) -> CliResult<QuantumState> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    StateFile::parse(&text).map_err(CliError::Input)
}

/// JSON report and the number of certified inequalities violated.
pub fn state_report(
    state: &QuantumState,
    q_list: &[f64],
    focus: usize,
    tol: f64,
    restarts: usize,
    seed: u64,
) -> CliResult<(Value, usize)> {
    let n = state.n_qubits();
    if focus >= n {
        return Err(CliError::Usage(format!("focus {focus} out of range for {n} qubits")));
    }
    let qs = q_list.iter().map(|&q| qparam(q)).collect::<CliResult<Vec<_>>>()?;
    let rho = state.density();
    let num = CliError::numerical;

    let mut pairwise = Vec::new();
    if n >= 2 {
        for i in 0..n {
            for j in i + 1..n {
                let r = rho.reduced(&[i, j]).map_err(num)?;
                pairwise.push(json!({
                    "pair": [i, j],
                    "concurrence": measures::concurrence_wootters(&r).map_err(num)?,
                }));
            }
        }
    }
    let mut report = json!({
        "n_qubits": n,
        "kind": match state { QuantumState::Pure(_) => "pure", QuantumState::Mixed(_) => "mixed" },
        "focus": focus,
        "purity": rho.purity(),
        "pairwise_concurrences": pairwise,
    });
    let mut violations = 0;

    match state {
        _ if n == 1 => {
            let per_q = qs
                .iter()
                .map(|&q| -> CliResult<Value> {
                    Ok(json!({
                        "q": q.value(),
                        "state_tsallis_entropy": measures::tsallis_entropy(&rho, q).map_err(num)?,
                    }))
                })
                .collect::<CliResult<Vec<_>>>()?;
            report["tsallis"] = Value::Array(per_q);
        }
        QuantumState::Pure(psi) if n >= 3 => {
            let profile = FocusProfile::new(psi, focus).map_err(num)?;
            report["focus_concurrence"] = json!(profile.focus_concurrence);
            let ckw = profile.ckw();
            violations += ckw.violates(tol) as usize;
            report["ckw"] = record_json(&ckw);
            if n == 3 {
                report["three_tangle"] = json!(monogamy::three_tangle(psi).map_err(num)?);
            }
            let mut per_q = Vec::new();
            for &q in &qs {
                let mut entry = json!({
                    "q": q.value(),
                    "focus_tsallis": profile.focus_tsallis(q),
                });
                if q.admits_two_qubit_formula() {
                    entry["pair_tsallis"] = json!(profile.pair_tsallis(q).map_err(num)?);
                    let stqe = profile.stqe(q).map_err(num)?;
                    violations += stqe.violates(tol) as usize;
                    entry["tau_q"] = json!(stqe.residual);
                    entry["stqe"] = record_json(&stqe);
                    if n == 3 {
                        let mut mu_records = Vec::new();
                        for &mu in DEFAULT_MU.iter().chain(&DEFAULT_POLYGAMY_MU) {
                            match profile.mu_power(q, mu) {
                                Ok(r) => {
                                    violations += r.violates(tol) as usize;
                                    mu_records.push(record_json(&r));
                                }
                                Err(tqe_core::Error::ZeroBaseNonpositivePower { .. }) => {
                                    mu_records.push(json!({ "mu": mu, "skipped": "zero pairwise entanglement" }));
                                }
                                Err(e) => return Err(num(e)),
                            }
                        }
                        entry["mu_power"] = Value::Array(mu_records);
                    }
                } else {
                    entry["note"] = json!("q outside the analytic range; pairwise T_q not certified");
                }
                per_q.push(entry);
            }
            report["tsallis"] = Value::Array(per_q);
        }
        QuantumState::Pure(psi) => {
            if n == 2 {
                let c = measures::two_qubit_pure_concurrence(psi.amplitudes());
                report["concurrence"] = json!(c);
            }
            let part = BipartitionSpec::single(focus, n).map_err(num)?;
            let per_q = qs
                .iter()
                .map(|&q| -> CliResult<Value> {
                    Ok(json!({
                        "q": q.value(),
                        "focus_tsallis": measures::tsallis_pure(psi, &part, q).map_err(num)?,
                    }))
                })
                .collect::<CliResult<Vec<_>>>()?;
            report["tsallis"] = Value::Array(per_q);
        }
        QuantumState::Mixed(r) if n == 2 => {
            let c = measures::concurrence_wootters(r).map_err(num)?;
            report["concurrence"] = json!(c);
            let per_q = qs
                .iter()
                .map(|&q| {
                    if q.admits_two_qubit_formula() {
                        Ok(json!({ "q": q.value(), "tsallis": measures::g_q(c, q).map_err(num)? }))
                    } else {
                        Ok(json!({ "q": q.value(), "tsallis": null, "note": "q outside the analytic range" }))
                    }
                })
                .collect::<CliResult<Vec<_>>>()?;
            report["tsallis"] = Value::Array(per_q);
        }
        QuantumState::Mixed(r) => {
            report["tsallis"] = Value::Array(mixed_best_effort(r, &qs, focus, restarts, seed)?);
        }
    }
    report["violations"] = json!(violations);
    Ok((report, violations))
}

/// STqE for a mixed multi-qubit state with the focus entanglement bounded
/// from above by search; never counted as a violation.
fn mixed_best_effort(rho: &DensityMatrix, qs: &[QParam], focus: usize, restarts: usize, seed: u64) -> CliResult<Vec<Value>> {
    let n = rho.n_qubits();
    let rank = rho
        .eigenvalues()
        .map_err(CliError::numerical)?
        .iter()
        .filter(|&&l| l > 1e-12)
        .count();
    let mut out = Vec::new();
    for (k, &q) in qs.iter().enumerate() {
        if rank > BEST_EFFORT_MAX_RANK {
            out.push(json!({
                "q": q.value(),
                "best_effort": true,
                "note": format!("rank {rank} exceeds {BEST_EFFORT_MAX_RANK}; convex roof not attempted"),
            }));
            continue;
        }
        let bound = numerics::convex_roof_focus_upper_bound(
            rho,
            focus,
            q,
            BEST_EFFORT_MAX_RANK,
            restarts.max(1),
            numerics::DEFAULT_ITERS,
            SeededSampler::new(seed, k as u64),
        )
        .map_err(CliError::numerical)?;
        let mut entry = json!({
            "q": q.value(),
            "best_effort": true,
            "focus_tsallis_upper_bound": bound.value,
            "optimizer_converged": bound.converged,
        });
        if q.admits_two_qubit_formula() {
            let pairs = (0..n)
                .filter(|&i| i != focus)
                .map(|i| {
                    let r = rho.reduced(&[focus, i])?;
                    measures::g_q(measures::concurrence_wootters(&r)?, q)
                })
                .collect::<tqe_core::Result<Vec<_>>>()
                .map_err(CliError::numerical)?;
            let rhs: f64 = pairs.iter().map(|t| t * t).sum();
            entry["pair_tsallis"] = json!(pairs);
            entry["stqe_residual_upper_bound"] = json!(bound.value * bound.value - rhs);
        }
        out.push(entry);
    }
    Ok(out)
}

fn record_json(r: &MonogamyRecord) -> Value {
    json!({
        "inequality": r.inequality.label(),
        "q": if r.inequality == Inequality::Ckw { Value::Null } else { json!(r.q) },
        "mu": r.mu,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "residual": r.residual,
        "vacuous": r.vacuous,
    })
}
