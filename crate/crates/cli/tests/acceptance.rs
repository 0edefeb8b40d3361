//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so every line is printed
//! whether it passes or not. Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use tqe_cli::commands::{self, OracleConfig, SweepConfig, SweepKind};
use tqe_core::measures::{self, QParam};
use tqe_core::monogamy;
use tqe_core::numerics::{self, finite_diff_2nd, linspace, CriticalCondition};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

fn critical_pair_g() -> Outcome {
    let r = match commands::critical() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let s = 13f64.sqrt();
    let e1 = (r.q_c1.value - (5.0 - s) / 2.0).abs();
    let e2 = (r.q_c2.value - (5.0 + s) / 2.0).abs();
    outcome(
        e1 <= 1e-9 && e2 <= 1e-9,
        format!("q_c1={:.10} q_c2={:.10} |err|={e1:.1e},{e2:.1e}", r.q_c1.value, r.q_c2.value),
    )
}

fn critical_pair_t2() -> Outcome {
    let r = match commands::critical() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let (c3, c4) = (r.q_c3.value, r.q_c4.value);
    let b3 = measures::x1_bracket(c3).abs();
    let b4 = measures::x1_bracket(c4).abs();
    let pass = (0.64..=0.66).contains(&c3) && (4.60..=4.70).contains(&c4) && b3 <= 1e-9 && b4 <= 1e-9;
    outcome(pass, format!("q_c3={c3:.10} q_c4={c4:.10} |bracket|={b3:.1e},{b4:.1e}"))
}

fn three_tangle_zeros() -> Outcome {
    let r = match commands::critical() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let p1 = monogamy::three_tangle_analytic(0.0).unwrap();
    let p2 = r.p_2.value;
    let num = r.p_2_numerical_three_tangle;
    let pass = p1 == 0.0 && (0.626..=0.628).contains(&p2) && num.abs() <= 1e-3;
    outcome(pass, format!("tau(0)={p1} p_2={p2:.10} numerical tau(p_2)={num:.1e}"))
}

fn indicator_figure() -> Outcome {
    let t = match commands::indicator(&commands::DEFAULT_INDICATOR_Q, 101) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let tau = t.float_column("tau_q").unwrap();
    let tangle = t.float_column("three_tangle").unwrap();
    let p = t.float_column("p").unwrap();
    let min_tau = tau.iter().cloned().fold(f64::INFINITY, f64::min);
    let crossing = p
        .windows(2)
        .zip(tangle.windows(2))
        .find(|(_, w)| w[0] < 0.0 && w[1] > 0.0)
        .map(|(pw, _)| pw[0]);
    let pass = tau.len() == 303 && min_tau > 0.0 && crossing.is_some_and(|pc| (0.6..0.64).contains(&pc));
    outcome(pass, format!("rows={} min tau_q={min_tau:.4e} sign change after p={crossing:?}", tau.len()))
}

fn surface_figure() -> Outcome {
    let t = match commands::surface(100, 100) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let f = t.float_column("F").unwrap();
    let min = f.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(f.len() == 10_000 && min >= -1e-9, format!("rows={} min F={min:.3e}", f.len()))
}

fn sweep_cfg(kind: SweepKind, n: usize, samples: usize) -> SweepConfig {
    SweepConfig {
        inequality: kind,
        n_qubits: n,
        samples,
        q_values: commands::analytic_q_grid(9),
        mu_values: vec![],
        focus: 0,
        seed: 2024,
        tol: 1e-10,
        inject_w: false,
    }
}

fn monogamy_sweeps() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (kind, n, samples) in [
        (SweepKind::Stqe, 3, 10_000),
        (SweepKind::Stqe, 4, 1_000),
        (SweepKind::Ckw, 3, 10_000),
        (SweepKind::Ckw, 4, 1_000),
    ] {
        let mut cfg = sweep_cfg(kind, n, samples);
        cfg.inject_w = kind == SweepKind::Ckw;
        match commands::sweep(&cfg) {
            Ok(out) => {
                let s = &out.summary;
                let expected_rows = if kind == SweepKind::Ckw { samples } else { 9 * samples };
                pass &= s.violation_count == 0 && s.rows == expected_rows;
                let mut line = format!("{kind:?} n={n}: {} rows, min {:.2e}", s.rows, s.min_residual);
                if kind == SweepKind::Ckw {
                    let w = out.records[0].1.residual;
                    pass &= out.records[0].1.state_id == "w" && w.abs() <= 1e-10;
                    line.push_str(&format!(", W residual {w:.1e}"));
                }
                details.push(line);
            }
            Err(e) => {
                pass = false;
                details.push(format!("{kind:?} n={n}: {e}"));
            }
        }
    }
    outcome(pass, details.join("; "))
}

fn mu_power_sweeps() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for mus in [vec![2.0, 3.0, 5.0], vec![-1.0, -0.5]] {
        let mut cfg = sweep_cfg(SweepKind::Mu, 3, 1_000);
        cfg.mu_values = mus.clone();
        match commands::sweep(&cfg) {
            Ok(out) => {
                let s = &out.summary;
                pass &= s.violation_count == 0 && s.rows + s.skipped == 9 * mus.len() * 1_000;
                details.push(format!(
                    "mu={mus:?}: {} rows, {} skipped, residual range [{:.2e}, {:.2e}]",
                    s.rows, s.skipped, s.min_residual, s.max_residual
                ));
            }
            Err(e) => {
                pass = false;
                details.push(format!("mu={mus:?}: {e}"));
            }
        }
    }
    outcome(pass, details.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let cfg = OracleConfig {
        samples: 20,
        q_values: vec![1.5, 2.0, 3.0],
        rank: None,
        restarts: numerics::DEFAULT_RESTARTS,
        iters: numerics::DEFAULT_ITERS,
        ensemble: numerics::DEFAULT_ENSEMBLE_SIZE,
        seed: 7,
    };
    match commands::oracle(&cfg) {
        Ok((rows, s)) => {
            let ranks_ok = rows.iter().all(|r| (2..=4).contains(&r.rank));
            let pass = rows.len() == 60 && ranks_ok && s.min_gap >= -1e-9 && s.max_gap <= 5e-3;
            outcome(pass, format!("rows={} gap range [{:.2e}, {:.2e}]", rows.len(), s.min_gap, s.max_gap))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn derivative_correctness() -> Outcome {
    let h = 1e-5;
    let mut max_err = 0.0f64;
    for qv in [0.2, 0.7, 1.0 - 1e-6, 1.0 + 1e-6, 2.0, 3.0, 4.3, 5.0] {
        for y in linspace(0.01, 0.99, 99) {
            let sq = |t: f64| measures::f_q(t, q(qv)).map(|v| v * v);
            let fd = (sq(y + h).unwrap() - sq(y - h).unwrap()) / (2.0 * h);
            let exact = measures::dtq2_dx(y, q(qv)).unwrap();
            max_err = max_err.max((fd - exact).abs());
        }
    }
    let mut closed_err = 0.0f64;
    for y in linspace(0.005, 0.995, 199) {
        closed_err = closed_err.max((measures::f_q(y, q(2.0)).unwrap() - y / 2.0).abs());
        closed_err = closed_err.max((measures::big_f(y, q(2.0)).unwrap() - 0.5).abs());
    }
    outcome(
        max_err <= 1e-6 && closed_err <= 1e-12,
        format!("max |FD - analytic|={max_err:.2e}, q=2 closed-form error={closed_err:.2e}"),
    )
}

fn convexity_boundary() -> Outcome {
    let h = 1e-3;
    let xs = linspace(h, 1.0 - h, 999);
    let d2 = |qv: f64, x: f64| finite_diff_2nd(|t| measures::f_q(t, q(qv)).map(|v| v * v), x, h).unwrap();
    let mut min_inside = f64::INFINITY;
    for qv in [0.70, 1.0 - 1e-6, 1.0 + 1e-6, 2.0, 3.0, 4.3] {
        for &x in &xs {
            min_inside = min_inside.min(d2(qv, x));
        }
    }
    let mut outside = Vec::new();
    for qv in [0.6, 4.8] {
        let near_one = xs.iter().filter(|&&x| x >= 0.9).map(|&x| d2(qv, x)).fold(f64::INFINITY, f64::min);
        outside.push(near_one);
    }
    let pass = min_inside >= -1e-8 && outside.iter().all(|&v| v < -1e-4);
    outcome(
        pass,
        format!("min inside window={min_inside:.3e}; min near x=1 at q=0.6,4.8: {:.3e}, {:.3e}", outside[0], outside[1]),
    )
}

fn curve_monotonicity() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for cond in [CriticalCondition::D2TqZero, CriticalCondition::D2Tq2Zero] {
        for (lo, hi, increasing) in [(0.001, 0.999, true), (4.001, 4.999, false)] {
            match commands::curves(cond, lo, hi, 200) {
                Ok((_, trace)) => {
                    let xs: Vec<f64> = trace.curve.points.iter().map(|p| p.1).collect();
                    let monotone = xs.windows(2).all(|w| if increasing { w[1] >= w[0] } else { w[1] <= w[0] });
                    let sorted = trace.curve.points.windows(2).all(|w| w[1].0 > w[0].0);
                    pass &= monotone && sorted && xs.len() >= 2;
                    details.push(format!("{} ({lo},{hi}): {} points", cond.name(), xs.len()));
                }
                Err(e) => {
                    pass = false;
                    details.push(format!("{} ({lo},{hi}): {e}", cond.name()));
                }
            }
        }
    }
    outcome(pass, details.join("; "))
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, title: "critical points q_c1, q_c2 of the C->1 curvature limit", budget: Some(secs(1)), check: critical_pair_g },
        Criterion { id: 2, title: "critical points q_c3, q_c4 of the squared-measure bracket", budget: Some(secs(1)), check: critical_pair_t2 },
        Criterion { id: 3, title: "three-tangle zeros p_1 = 0 and p_2", budget: Some(secs(1)), check: three_tangle_zeros },
        Criterion { id: 4, title: "indicator tau_q positive on the GHZ/W family", budget: Some(secs(10)), check: indicator_figure },
        Criterion { id: 5, title: "F_q nonnegative on [0,1] x [1,4]", budget: Some(secs(30)), check: surface_figure },
        Criterion { id: 6, title: "STqE and CKW sweeps, W saturation", budget: Some(secs(300)), check: monogamy_sweeps },
        Criterion { id: 7, title: "mu-power monogamy and polygamy sweeps", budget: Some(secs(60)), check: mu_power_sweeps },
        Criterion { id: 8, title: "convex-roof search agrees with g_q(C)", budget: Some(secs(120)), check: oracle_equivalence },
        Criterion { id: 9, title: "derivative of T_q^2 and q=2 closed forms", budget: None, check: derivative_correctness },
        Criterion { id: 10, title: "convexity of f_q^2 inside and outside [q_c3, q_c4]", budget: None, check: convexity_boundary },
        Criterion { id: 11, title: "critical curve monotonicity", budget: None, check: curve_monotonicity },
    ];

    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let out = (c.check)();
        let elapsed = start.elapsed();
        let in_time = c.budget.is_none_or(|b| elapsed < b);
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget = c.budget.map_or(String::new(), |b| format!(" / {}s", b.as_secs()));
        let overrun = if in_time { "" } else { " [over time budget]" };
        println!(
            "{} AC-{:02} {}: {} ({:.2}s{budget}){overrun}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            out.detail,
            elapsed.as_secs_f64(),
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
