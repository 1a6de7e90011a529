//! Episodes, training, evaluation, exhaustive search and known constructions.

mod episode;
mod eval;
mod oracle;
mod targets;
mod train;
mod wstate;

pub use episode::{
    generate_circuit, prepare_from_record, preparation_fidelity, run_episode, run_episode_density,
    AgentPolicy, EpisodeConfig, EpisodeRecord, Policy, PreparedCircuit, ScriptedPolicy,
};
pub use eval::{evaluate, histogram_rows, write_csv, EvalReport, EvalRow, HistogramRow};
pub use oracle::{
    brute_force_oracle, candidate_sequences, OracleConfig, OracleResult, OracleRow, ORACLE_MAX_CNOTS,
    ORACLE_MAX_QUBITS,
};
pub use targets::{parse_target_json, sample_targets, TargetStructure, TARGET_NORM_TOL};
pub use train::{train, write_metrics_csv, MetricsRow, TrainConfig, TrainReport};
pub use wstate::{ghz_state, optimize_wstate_ladder, w_state, wstate_ladder, LadderGate, LadderResult};
