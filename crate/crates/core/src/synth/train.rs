use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, AgentPolicy, EpisodeConfig};
use super::targets::TargetStructure;
use crate::agent::{epsilon_at, update, DdqnAgent, ReplayBuffer, ScheduleState, Transition};
use crate::error::{invalid, Result};
use crate::optim::OptimizerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub episodes: usize,
    pub seed: u64,
    pub structure: TargetStructure,
    pub local: OptimizerConfig,
    pub global: OptimizerConfig,
    /// CNOT cap during training; the agent's `max_actions` when unset.
    pub budget: Option<usize>,
    /// Call the checkpoint hook every this many episodes (0: only at the end).
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 2000,
            seed: 0,
            structure: TargetStructure::default(),
            local: OptimizerConfig {
                restarts: 1,
                ..Default::default()
            },
            global: OptimizerConfig {
                restarts: 1,
                ..Default::default()
            },
            budget: None,
            checkpoint_every: 500,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.local.validate()?;
        self.global.validate()?;
        if let TargetStructure::Mixed(p) = self.structure {
            if !(0.0..=1.0).contains(&p) {
                return invalid("mixed probability must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

/// One line of the training metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub episode: usize,
    pub fidelity: f64,
    pub cnots: usize,
    pub t_f: f64,
    pub c_in: f64,
    pub eps: f64,
    /// Mean update loss over the episode's gradient steps.
    pub loss: Option<f64>,
}

pub fn write_metrics_csv<W: std::io::Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub rows: Vec<MetricsRow>,
    pub seed: u64,
    pub wall_clock_secs: f64,
    pub failed_episodes: usize,
}

/// Episodes against sampled targets, each followed by gradient updates
/// (`updates_per_step` per recorded transition), with the threshold and
/// `c_in` schedules advanced after every episode. `on_checkpoint` sees the
/// agent and the metrics so far every `checkpoint_every` episodes and once
/// at the end. Deterministic for a given seed.
pub fn train(
    agent: &mut DdqnAgent,
    cfg: &TrainConfig,
    mut on_checkpoint: impl FnMut(usize, &DdqnAgent, &[MetricsRow]) -> Result<()>,
) -> Result<TrainReport> {
    cfg.validate()?;
    agent.config.validate()?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ac = agent.config.clone();
    let n = agent.n_qubits();
    let mut buffer: ReplayBuffer<Transition> = ReplayBuffer::new(ac.buffer_capacity)?;
    let mut sched = ScheduleState::new(&ac.threshold, &ac.cin);
    agent.spec = agent.spec.with_c_in(sched.c_in);
    let mut rows = Vec::with_capacity(cfg.episodes);
    let mut failed_episodes = 0;

    for episode in 0..cfg.episodes {
        let eps = epsilon_at(episode, ac.eps_start, ac.eps_end, ac.eps_decay_episodes);
        let t_f = sched.t_f;
        let c_in = sched.c_in;
        let target = cfg.structure.sample(n, &mut rng)?;
        let ep_cfg = EpisodeConfig {
            local: cfg.local,
            global: cfg.global,
            t_f,
            c_r: ac.c_r,
            budget: cfg.budget,
        };
        let rec = run_episode(&target, &mut AgentPolicy { agent, eps }, &ep_cfg, &mut rng)?;
        if rec.failed {
            failed_episodes += 1;
        }
        let steps = rec.transitions.len();
        for t in rec.transitions.iter().cloned() {
            buffer.push(t);
        }

        let spec = agent.spec;
        let (mut loss_sum, mut n_loss) = (0.0, 0usize);
        for _ in 0..steps * ac.updates_per_step {
            let stats = update(
                &buffer,
                &mut agent.online,
                &mut agent.target,
                &mut agent.adam,
                ac.gamma,
                ac.batch_size,
                ac.tau,
                |t: &Transition| t.encode(&spec),
                &mut rng,
            )?;
            if let Some(s) = stats {
                loss_sum += s.loss;
                n_loss += 1;
            }
        }

        sched.record(rec.success(t_f), &ac.threshold, &ac.cin);
        agent.spec = agent.spec.with_c_in(sched.c_in);
        rows.push(MetricsRow {
            episode,
            fidelity: rec.fidelity,
            cnots: rec.cnots(),
            t_f,
            c_in,
            eps,
            loss: (n_loss > 0).then(|| loss_sum / n_loss as f64),
        });
        let done = episode + 1;
        if cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done < cfg.episodes {
            on_checkpoint(done, agent, &rows)?;
        }
    }
    on_checkpoint(cfg.episodes, agent, &rows)?;

    Ok(TrainReport {
        rows,
        seed: cfg.seed,
        wall_clock_secs: start.elapsed().as_secs_f64(),
        failed_episodes,
    })
}
