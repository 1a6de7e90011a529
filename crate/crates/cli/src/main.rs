//! `qsynth`: train, evaluate and compare state-preparation agents.
//!
//! Exit codes: 0 success, 1 invalid input (arguments, config, files),
//! 2 runtime failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsynth::baseline::{LayerKind, LocalGate};
use qsynth::circuit::GraphPreset;
use qsynth::synth::TargetStructure;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<qsynth::Error> for CliError {
    fn from(e: qsynth::Error) -> Self {
        use qsynth::Error as E;
        match e {
            E::InvalidArgument(_) | E::Validation(_) | E::Format(_) | E::BudgetExceeded(_) => {
                CliError::Validation(e.to_string())
            }
            E::Io(_) | E::Json(_) | E::Csv(_) => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qsynth", version, about = "Reinforcement-learned CNOT sequences for state preparation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for target sampling and optimizer restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for evaluation and search; results do not depend on it.
    #[arg(long, env = "QSYNTH_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// BFGS starts per optimization, the first from the usual initial point.
    /// Default 3; `oracle` defaults to 4 global starts.
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train an agent from a TOML config into a fresh run directory.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Parent of the run directory.
        #[arg(long, env = "QSYNTH_OUTPUT_ROOT", default_value = "runs")]
        out_root: PathBuf,
        /// Overrides `train.seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Greedy evaluation on freshly sampled targets.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n_states: usize,
        #[arg(long, default_value = "haar")]
        structure: TargetStructure,
        /// CNOT budget; repeat for a sweep. Unbounded when absent.
        #[arg(long)]
        budget: Vec<usize>,
        /// Summary CSV, one row per budget.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-target CSV with a budget column.
        #[arg(long)]
        per_target: Option<PathBuf>,
        /// CNOT-count histogram CSV with a budget column.
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a preparation circuit for the amplitudes in a JSON file.
    Prepare {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        /// Output prefix; writes `<prefix>.txt` and `<prefix>.json`.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Agent against a layered ansatz at matched CNOT counts.
    Compare {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "pairwise")]
        kind: LayerKind,
        #[arg(long, default_value = "rzry")]
        local_gate: LocalGate,
        /// Layer count; repeat for several. The agent gets `L·(n−1)` CNOTs.
        #[arg(long, required = true)]
        layers: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        n_states: usize,
        #[arg(long, default_value = "haar")]
        structure: TargetStructure,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive best fidelity over CNOT sequences of length at most k.
    Oracle {
        /// Amplitude file; alternatively `--state`.
        #[arg(long, conflicts_with = "state")]
        target: Option<PathBuf>,
        /// Built-in target: `w` or `ghz`, on `--qubits` qubits.
        #[arg(long, requires = "qubits")]
        state: Option<String>,
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "unrestricted")]
        graph: GraphPreset,
        /// Also print the best result for every exact length.
        #[arg(long)]
        table: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { config, out_root, seed } => commands::train(&config, &out_root, seed),
        Command::Eval {
            checkpoint,
            n_states,
            structure,
            budget,
            out,
            per_target,
            histogram,
            common,
        } => commands::eval(commands::EvalArgs {
            checkpoint,
            n_states,
            structure,
            budgets: budget,
            out,
            per_target,
            histogram,
            common,
        }),
        Command::Prepare {
            checkpoint,
            target,
            budget,
            out,
            common,
        } => commands::prepare(&checkpoint, &target, budget, &out, &common),
        Command::Compare {
            checkpoint,
            kind,
            local_gate,
            layers,
            n_states,
            structure,
            out,
            common,
        } => commands::compare(commands::CompareArgs {
            checkpoint,
            kind,
            local_gate,
            layers,
            n_states,
            structure,
            out,
            common,
        }),
        Command::Oracle {
            target,
            state,
            qubits,
            k,
            graph,
            table,
            common,
        } => commands::oracle(target, state, qubits, k, graph, table, &common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Validation(_) => 1,
                CliError::Runtime(_) => 2,
            })
        }
    }
}
