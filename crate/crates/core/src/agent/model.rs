use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoding::{encode_pure, EncoderSpec};
use super::policy::legal_mask;
use super::schedule::{CinConfig, ThresholdConfig};
use crate::circuit::{ActionSet, ConnectivityGraph};
use crate::error::{invalid, Error, Result};
use crate::nn::{AdamState, Mlp, MlpFile};
use crate::quantum::PureState;

pub const AGENT_FORMAT: &str = "qsynth-agent";
pub const AGENT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub gamma: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Episodes over which ε falls linearly from `eps_start` to `eps_end`.
    pub eps_decay_episodes: usize,
    pub p_prior: f64,
    pub top_q: usize,
    pub threshold: ThresholdConfig,
    pub cin: CinConfig,
    /// Reward scale.
    pub c_r: f64,
    pub batch_size: usize,
    pub tau: f64,
    pub buffer_capacity: usize,
    pub lr: f64,
    pub hidden: Vec<usize>,
    /// Gradient updates per environment step once the buffer is warm.
    pub updates_per_step: usize,
    /// Most CNOTs per episode; 3·n when unset.
    pub max_actions: Option<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_episodes: 1000,
            p_prior: 0.5,
            top_q: 3,
            threshold: ThresholdConfig::default(),
            cin: CinConfig::default(),
            c_r: 1.0,
            batch_size: 64,
            tau: 0.01,
            buffer_capacity: 100_000,
            lr: 1e-4,
            hidden: vec![512, 512],
            updates_per_step: 1,
            max_actions: None,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return invalid("gamma must lie in (0, 1)");
        }
        for (name, p) in [
            ("eps_start", self.eps_start),
            ("eps_end", self.eps_end),
            ("p_prior", self.p_prior),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("{name} must lie in [0, 1]"));
            }
        }
        if self.top_q == 0 {
            return invalid("top_q must be at least 1");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return invalid("need 0 < batch_size <= buffer_capacity");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return invalid("tau must lie in [0, 1]");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return invalid("lr must be positive");
        }
        if !(self.c_r.is_finite() && self.c_r > 0.0) {
            return invalid("c_r must be positive");
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return invalid("hidden layer sizes must be positive");
        }
        self.threshold.validate()?;
        self.cin.validate()
    }

    pub fn max_actions_for(&self, n_qubits: usize) -> usize {
        self.max_actions.unwrap_or(3 * n_qubits)
    }
}

/// Online and target Q-networks with everything needed to encode states.
#[derive(Debug, Clone)]
pub struct DdqnAgent {
    pub graph: ConnectivityGraph,
    pub actions: ActionSet,
    pub spec: EncoderSpec,
    pub config: AgentConfig,
    pub online: Mlp,
    pub target: Mlp,
    pub adam: AdamState,
}

impl DdqnAgent {
    /// Fresh agent; the target net starts as a copy of the online net.
    pub fn new<R: Rng + ?Sized>(graph: ConnectivityGraph, config: AgentConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let actions = ActionSet::new(&graph);
        let n = graph.n_qubits();
        let spec = EncoderSpec::new(n, actions.d_out(), config.max_actions_for(n), config.cin.initial)?;
        let mut sizes = vec![spec.d_in()];
        sizes.extend(&config.hidden);
        sizes.push(spec.d_out);
        let online = Mlp::new(&sizes, rng)?;
        let adam = AdamState::new(&online, config.lr);
        Ok(Self {
            graph,
            actions,
            spec,
            config,
            target: online.clone(),
            online,
            adam,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.graph.n_qubits()
    }

    pub fn max_actions(&self) -> usize {
        self.spec.max_actions
    }

    pub fn q_values(&self, state: &PureState, history: &[usize]) -> Result<Vec<f64>> {
        self.online.forward(&encode_pure(state, history, &self.spec)?)
    }

    /// Every action is legal until `taken` reaches the budget (or the episode
    /// length), after which only STOP is.
    pub fn legal_mask(&self, taken: usize, budget: Option<usize>) -> Vec<bool> {
        let limit = budget.map_or(self.max_actions(), |b| b.min(self.max_actions()));
        legal_mask(self.actions.d_out(), taken, limit)
    }

    pub fn to_file(&self) -> AgentFile {
        AgentFile {
            format: AGENT_FORMAT.into(),
            version: AGENT_VERSION,
            n_qubits: self.graph.n_qubits(),
            edges: self.graph.edges().collect(),
            config: self.config.clone(),
            spec: self.spec,
            online: self.online.to_file(),
            target: self.target.to_file(),
        }
    }

    pub fn from_file(file: AgentFile) -> Result<Self> {
        if file.format != AGENT_FORMAT {
            return Err(Error::Format(format!(
                "expected format {AGENT_FORMAT:?}, found {:?}",
                file.format
            )));
        }
        if file.version != AGENT_VERSION {
            return Err(Error::Format(format!(
                "unsupported agent file version {}",
                file.version
            )));
        }
        let bad = |e: Error| Error::Format(format!("bad agent record: {e}"));
        let graph = ConnectivityGraph::new(file.n_qubits, file.edges).map_err(bad)?;
        file.config.validate().map_err(bad)?;
        let actions = ActionSet::new(&graph);
        let online = Mlp::from_file(file.online)?;
        let target = Mlp::from_file(file.target)?;
        let spec = file.spec;
        let expect = EncoderSpec::new(graph.n_qubits(), actions.d_out(), spec.max_actions, spec.c_in)
            .map_err(bad)?;
        if spec != expect {
            return Err(Error::Format("encoder record does not match the graph".into()));
        }
        if online.d_in() != spec.d_in()
            || online.d_out() != spec.d_out
            || online.layer_sizes() != target.layer_sizes()
        {
            return Err(Error::Format("network shapes do not match the encoder".into()));
        }
        let adam = AdamState::new(&online, file.config.lr);
        Ok(Self {
            graph,
            actions,
            spec,
            config: file.config,
            online,
            target,
            adam,
        })
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec(&self.to_file())?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: AgentFile = serde_json::from_slice(bytes)
            .map_err(|e| Error::Format(format!("not an agent checkpoint: {e}")))?;
        Self::from_file(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read(path)?)
    }
}

/// Agent checkpoint. Adam moments are not stored; a reloaded agent resumes
/// with fresh optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentFile {
    pub format: String,
    pub version: u32,
    pub n_qubits: usize,
    pub edges: Vec<(usize, usize)>,
    pub config: AgentConfig,
    pub spec: EncoderSpec,
    pub online: MlpFile,
    pub target: MlpFile,
}
