//! Training run configuration (TOML).

use std::path::Path;

use qsynth::agent::AgentConfig;
use qsynth::circuit::{preset_graph, ConnectivityGraph, GraphPreset};
use qsynth::synth::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything `train` needs. Only `n_qubits` is required; every other key
/// has a default (listed in the README), and `config.toml` in a run
/// directory holds the fully resolved values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_qubits: usize,
    #[serde(default = "default_graph")]
    pub graph: GraphPreset,
    /// Explicit coupling edges; replaces `graph` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub agent: AgentConfig,
}

fn default_graph() -> GraphPreset {
    GraphPreset::Unrestricted
}

impl RunConfig {
    #[cfg(test)]
    pub fn with_qubits(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            graph: default_graph(),
            edges: None,
            train: TrainConfig::default(),
            agent: AgentConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("cannot write config: {e}")))
    }

    pub fn graph(&self) -> Result<ConnectivityGraph, CliError> {
        let g = match &self.edges {
            Some(e) => ConnectivityGraph::new(self.n_qubits, e.iter().copied()),
            None => preset_graph(self.graph, self.n_qubits),
        };
        g.map_err(|e| CliError::Validation(format!("graph: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.graph()?;
        self.train
            .validate()
            .map_err(|e| CliError::Validation(format!("train: {e}")))?;
        self.agent
            .validate()
            .map_err(|e| CliError::Validation(format!("agent: {e}")))
    }
}
