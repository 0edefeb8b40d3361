use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

/// Tsallis-q entanglement monogamy: critical points, figure data and
/// sampled verification sweeps.
///
/// Qubit 0 is the most significant bit of a basis index.
#[derive(Debug, Parser)]
#[command(name = "tqe", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Explicit q values, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Option<Vec<f64>>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q_max: Option<f64>,
    #[arg(long, global = true)]
    pub q_steps: Option<usize>,
    /// Exponents for the mu-power relations, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub mu: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub qubits: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub focus: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Violation threshold: monogamy fails when residual < -tol, polygamy
    /// when residual > tol. The default is the eigensolver noise floor at
    /// dimension <= 64.
    #[arg(long, global = true, default_value_t = 1e-10, allow_negative_numbers = true)]
    pub tol: f64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Rank of sampled mixed states (default cycles through 2, 3, 4).
    #[arg(long, global = true)]
    pub rank: Option<usize>,
    /// Random restarts of the convex-roof search.
    #[arg(long, global = true, default_value_t = tqe_core::numerics::DEFAULT_RESTARTS)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InequalityArg {
    Ckw,
    Stqe,
    /// Power `mu` of T_q; `mu >= 2` monogamy, `mu <= 0` polygamy.
    #[value(alias = "mu-power", alias = "mu-polygamy")]
    Mu,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical q values and the nontrivial zero of the three-tangle.
    Critical,
    /// Trace a critical curve x(q) as CSV `q,x`.
    Curves {
        /// D2Tq_Zero, D2Tq2_Zero, DFdx_Zero or DFdq_Zero.
        #[arg(long)]
        condition: String,
    },
    /// F_q over x in [0,1] and q in [1,4] as CSV `x,q,F`.
    Surface {
        #[arg(long, default_value_t = 100)]
        x_steps: usize,
    },
    /// tau_q and the three-tangle along sqrt(p)|GHZ> - sqrt(1-p)|W>.
    Indicator {
        #[arg(long, default_value_t = 101)]
        p_steps: usize,
    },
    /// Sampled monogamy/polygamy residuals over Haar-random pure states.
    Sweep {
        #[arg(long, value_enum)]
        inequality: InequalityArg,
        /// Replace sample 0 by the W state.
        #[arg(long)]
        inject_w: bool,
        /// Summary JSON path; stderr when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Directory for serialized offending states.
        #[arg(long, default_value = ".")]
        dump_dir: PathBuf,
    },
    /// Convex-roof search against the closed form on random two-qubit states.
    Oracle {
        #[arg(long, default_value_t = tqe_core::numerics::DEFAULT_ITERS)]
        iters: usize,
        #[arg(long, default_value_t = tqe_core::numerics::DEFAULT_ENSEMBLE_SIZE)]
        ensemble: usize,
        /// Summary JSON path; stderr when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Report measures and residuals for a state file.
    State {
        path: PathBuf,
    },
}
