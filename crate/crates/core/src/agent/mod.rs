//! Double deep Q-learning over CNOT choices.

mod ddqn;
mod encoding;
mod model;
mod policy;
mod replay;
mod schedule;

pub use ddqn::{compute_q_targets, update, Encoded, Transition, UpdateStats};
pub use encoding::{action_key, encode_input, encode_pure, key_width_for, EncoderSpec};
pub use model::{AgentConfig, AgentFile, DdqnAgent, AGENT_FORMAT, AGENT_VERSION};
pub use policy::{epsilon_at, greedy, legal_mask, select_action, top_k};
pub use replay::ReplayBuffer;
pub use schedule::{
    schedule_cin, schedule_threshold, CinConfig, ScheduleState, ThresholdConfig,
};
