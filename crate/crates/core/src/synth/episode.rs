use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{legal_mask, select_action, DdqnAgent, Transition};
use crate::circuit::{append_basis_correction, invert, invert_params, Action, ActionSet, Circuit};
use crate::error::{invalid, Result};
use crate::optim::{optimize_global, optimize_local_step, OptimizerConfig};
use crate::quantum::{argmax_population, DensityMatrix, PureState, QuantumState};

/// Chooses the next action of an episode.
pub trait Policy {
    fn action_set(&self) -> &ActionSet;
    fn max_actions(&self) -> usize;
    fn choose(
        &mut self,
        state: &PureState,
        history: &[usize],
        legal: &[bool],
        rng: &mut dyn rand::RngCore,
    ) -> Result<usize>;
}

/// The agent's online network under ε-greedy selection (`eps = 0` is greedy).
pub struct AgentPolicy<'a> {
    pub agent: &'a DdqnAgent,
    pub eps: f64,
}

impl Policy for AgentPolicy<'_> {
    fn action_set(&self) -> &ActionSet {
        &self.agent.actions
    }

    fn max_actions(&self) -> usize {
        self.agent.max_actions()
    }

    fn choose(
        &mut self,
        state: &PureState,
        history: &[usize],
        legal: &[bool],
        rng: &mut dyn rand::RngCore,
    ) -> Result<usize> {
        let q = self.agent.q_values(state, history)?;
        let cfg = &self.agent.config;
        select_action(&q, legal, self.eps, cfg.p_prior, cfg.top_q, rng)
    }
}

/// Plays a fixed CNOT sequence, then STOP.
pub struct ScriptedPolicy {
    set: ActionSet,
    script: Vec<usize>,
}

impl ScriptedPolicy {
    pub fn new(set: ActionSet, script: &[Action]) -> Result<Self> {
        let script = script
            .iter()
            .map(|&a| set.encode(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { set, script })
    }
}

impl Policy for ScriptedPolicy {
    fn action_set(&self) -> &ActionSet {
        &self.set
    }

    fn max_actions(&self) -> usize {
        self.script.len()
    }

    fn choose(
        &mut self,
        _: &PureState,
        history: &[usize],
        legal: &[bool],
        _: &mut dyn rand::RngCore,
    ) -> Result<usize> {
        let a = self
            .script
            .get(history.len())
            .copied()
            .unwrap_or(self.set.stop_index());
        if !legal[a] {
            return Ok(self.set.stop_index());
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    /// Per-step angle optimization (starts from zero angles).
    pub local: OptimizerConfig,
    /// End-of-episode joint optimization.
    pub global: OptimizerConfig,
    /// Infidelity threshold for a reward.
    pub t_f: f64,
    pub c_r: f64,
    /// Most CNOTs allowed; the policy's own limit when unset.
    pub budget: Option<usize>,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            local: OptimizerConfig::default(),
            global: OptimizerConfig::default(),
            t_f: 0.01,
            c_r: 1.0,
            budget: None,
        }
    }
}

/// Everything an episode produced.
#[derive(Debug, Clone)]
pub struct EpisodeRecord {
    pub target: PureState,
    pub transitions: Vec<Transition>,
    /// Diagonalizing circuit `C` followed by the X corrections, mapping the
    /// target to (approximately) `|0...0>`.
    pub circuit: Circuit,
    pub params: Vec<f64>,
    /// `<0|U ρ_T U†|0>` with `U` the corrected circuit.
    pub fidelity: f64,
    /// Same quantity at the per-step angles, before the joint optimization.
    pub local_fidelity: f64,
    /// Coherence loss after the joint optimization.
    pub loss: f64,
    /// Closest basis state before correction.
    pub basis: usize,
    pub sequence: Vec<Action>,
    pub reward: f64,
    /// An optimizer gave up; the reward is zero.
    pub failed: bool,
}

impl EpisodeRecord {
    pub fn cnots(&self) -> usize {
        self.sequence.len()
    }

    /// `1 − F < T_F`.
    pub fn success(&self, t_f: f64) -> bool {
        !self.failed && 1.0 - self.fidelity < t_f
    }
}

fn best_population(state: &PureState) -> (usize, f64) {
    let pops = state.populations();
    let b = argmax_population(&pops);
    (b, pops[b])
}

/// One episode of circuit generation on a pure target: rotation layer, a
/// CNOT block per chosen action (each locally optimized), joint
/// re-optimization, then X corrections to the nearest basis state. Only the
/// last transition carries the reward `c_r · F`, and only when `1 − F < T_F`.
pub fn run_episode<P: Policy + ?Sized, R: Rng>(
    target: &PureState,
    policy: &mut P,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> Result<EpisodeRecord> {
    let set = policy.action_set().clone();
    let n = set.n_qubits();
    if target.n_qubits() != n {
        return invalid(format!(
            "target has {} qubits, policy acts on {n}",
            target.n_qubits()
        ));
    }
    let d_out = set.d_out();
    let stop = set.stop_index();
    let limit = cfg
        .budget
        .map_or(policy.max_actions(), |b| b.min(policy.max_actions()));

    let mut circuit = Circuit::with_rotation_layer(n)?;
    let mut failed = false;
    let (mut params, mut state) = match optimize_local_step(&circuit, target, &cfg.local.with_seed(rng.gen())) {
        Ok(step) => (step.params, step.next_state),
        Err(_) => {
            failed = true;
            (vec![0.0; circuit.n_params()], target.clone())
        }
    };

    // (state, history, action, next state)
    let mut steps: Vec<(PureState, Vec<usize>, usize, PureState)> = Vec::new();
    let mut history: Vec<usize> = Vec::new();
    let mut sequence = Vec::new();
    while !failed && history.len() < limit {
        let legal = legal_mask(d_out, history.len(), limit);
        let a = policy.choose(&state, &history, &legal, rng)?;
        if !legal[a] {
            return invalid(format!("policy chose illegal action {a}"));
        }
        if a == stop {
            steps.push((state.clone(), history.clone(), a, state.clone()));
            break;
        }
        let action = set.decode(a)?;
        let mut block = Circuit::new(n)?;
        block.push_action(action)?;
        let step = match optimize_local_step(&block, &state, &cfg.local.with_seed(rng.gen())) {
            Ok(s) => s,
            Err(_) => {
                failed = true;
                break;
            }
        };
        circuit.push_action(action)?;
        params.extend_from_slice(&step.params);
        steps.push((state, history.clone(), a, step.next_state.clone()));
        history.push(a);
        sequence.push(action);
        state = step.next_state;
    }

    let mut after_local = target.clone();
    circuit.apply(&params, &mut after_local)?;
    let (_, local_fidelity) = best_population(&after_local);

    let global_seed = rng.gen();
    // The global optimum is kept only if it does not lower the fidelity.
    let mut final_params = params;
    let mut out = after_local;
    if !failed {
        if let Ok(r) = optimize_global(&circuit, target, &final_params, &cfg.global.with_seed(global_seed)) {
            let mut g = target.clone();
            circuit.apply(&r.best_params, &mut g)?;
            if best_population(&g).1 >= local_fidelity {
                final_params = r.best_params;
                out = g;
            }
        }
    }
    let (basis, fidelity) = best_population(&out);
    let loss = out.coherence_loss();
    let reward = if !failed && 1.0 - fidelity < cfg.t_f {
        cfg.c_r * fidelity
    } else {
        0.0
    };

    let last = steps.len().saturating_sub(1);
    let transitions = steps
        .into_iter()
        .enumerate()
        .map(|(i, (s, h, a, next))| {
            let terminal = i == last;
            let next_legal = if terminal {
                vec![false; d_out]
            } else {
                legal_mask(d_out, h.len() + 1, limit)
            };
            Transition {
                state: s,
                history: h,
                action: a,
                reward: if terminal { reward } else { 0.0 },
                next_state: next,
                terminal,
                next_legal,
            }
        })
        .collect();

    Ok(EpisodeRecord {
        target: target.clone(),
        transitions,
        circuit: append_basis_correction(&circuit, basis)?,
        params: final_params,
        fidelity,
        local_fidelity,
        loss,
        basis,
        sequence,
        reward,
        failed,
    })
}

/// [`run_episode`] for a density-matrix target, which must be pure.
pub fn run_episode_density<P: Policy + ?Sized, R: Rng>(
    target: &DensityMatrix,
    policy: &mut P,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> Result<EpisodeRecord> {
    run_episode(&target.to_pure(1e-8)?, policy, cfg, rng)
}

/// A state-preparation circuit: applied to `|0...0>` it yields a state with
/// the given fidelity to the target.
#[derive(Debug, Clone)]
pub struct PreparedCircuit {
    pub circuit: Circuit,
    pub params: Vec<f64>,
    pub fidelity: f64,
    /// CNOTs chosen while diagonalizing, in that order.
    pub sequence: Vec<Action>,
}

/// Invert an episode's corrected diagonalizing circuit.
pub fn prepare_from_record(rec: &EpisodeRecord) -> Result<PreparedCircuit> {
    Ok(PreparedCircuit {
        circuit: invert(&rec.circuit),
        params: invert_params(&rec.circuit, &rec.params)?,
        fidelity: rec.fidelity,
        sequence: rec.sequence.clone(),
    })
}

/// Greedy episode on `target`, then inversion.
pub fn generate_circuit<R: Rng>(
    target: &PureState,
    agent: &DdqnAgent,
    budget: Option<usize>,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> Result<PreparedCircuit> {
    let cfg = EpisodeConfig { budget, ..*cfg };
    let rec = run_episode(target, &mut AgentPolicy { agent, eps: 0.0 }, &cfg, rng)?;
    prepare_from_record(&rec)
}

/// `|<ψ|U(θ)|0...0>|²`.
pub fn preparation_fidelity(c: &Circuit, params: &[f64], target: &PureState) -> Result<f64> {
    let mut s = PureState::zero(c.n_qubits())?;
    c.apply(params, &mut s)?;
    Ok(s.inner(target).norm_sqr().clamp(0.0, 1.0))
}
