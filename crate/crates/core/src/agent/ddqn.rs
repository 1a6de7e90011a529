use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoding::{encode_pure, EncoderSpec};
use super::policy::greedy;
use super::replay::ReplayBuffer;
use crate::error::{invalid, Result};
use crate::nn::{polyak, train_batch, AdamState, Mlp};
use crate::quantum::PureState;

/// One environment step stored in the replay buffer. States are kept raw and
/// encoded when sampled, so a changed `c_in` applies to old experience too.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: PureState,
    /// Actions taken before this step.
    pub history: Vec<usize>,
    pub action: usize,
    pub reward: f64,
    pub next_state: PureState,
    pub terminal: bool,
    /// Legal actions at the next state.
    pub next_legal: Vec<bool>,
}

impl Transition {
    pub fn encode(&self, spec: &EncoderSpec) -> Result<Encoded> {
        let input = encode_pure(&self.state, &self.history, spec)?;
        let next_input = if self.terminal {
            Vec::new()
        } else {
            let mut h = self.history.clone();
            h.push(self.action);
            encode_pure(&self.next_state, &h, spec)?
        };
        Ok(Encoded {
            input,
            action: self.action,
            reward: self.reward,
            next_input,
            terminal: self.terminal,
            next_legal: self.next_legal.clone(),
        })
    }
}

/// A transition as network inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub input: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    /// Empty for terminal transitions.
    pub next_input: Vec<f64>,
    pub terminal: bool,
    pub next_legal: Vec<bool>,
}

/// `r` for terminal steps, otherwise
/// `r + γ · Q_target(s′, argmax_{legal a} Q_online(s′, a))`.
pub fn compute_q_targets(batch: &[Encoded], online: &Mlp, target: &Mlp, gamma: f64) -> Result<Vec<f64>> {
    if online.layer_sizes() != target.layer_sizes() {
        return invalid("online and target networks differ in shape");
    }
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                return Ok(t.reward);
            }
            let q_online = online.forward(&t.next_input)?;
            let Some(a) = greedy(&q_online, &t.next_legal) else {
                return invalid("non-terminal transition without a legal next action");
            };
            Ok(t.reward + gamma * target.forward(&t.next_input)?[a])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    /// Masked MSE of the sampled batch before the step.
    pub loss: f64,
    pub skipped: usize,
}

/// Sample a batch uniformly, build double-Q targets, take one Adam step on
/// the online net and polyak-average it into the target net. Returns `None`
/// (and changes nothing) while the buffer holds fewer than `batch_size` items.
#[allow(clippy::too_many_arguments)]
pub fn update<T, R: Rng + ?Sized>(
    buffer: &ReplayBuffer<T>,
    online: &mut Mlp,
    target: &mut Mlp,
    adam: &mut AdamState,
    gamma: f64,
    batch_size: usize,
    tau: f64,
    mut encode: impl FnMut(&T) -> Result<Encoded>,
    rng: &mut R,
) -> Result<Option<UpdateStats>> {
    if batch_size == 0 || buffer.len() < batch_size {
        return Ok(None);
    }
    let batch: Vec<Encoded> = buffer
        .sample(batch_size, rng)
        .into_iter()
        .map(&mut encode)
        .collect::<Result<_>>()?;
    let targets = compute_q_targets(&batch, online, target, gamma)?;
    let inputs: Vec<Vec<f64>> = batch.iter().map(|t| t.input.clone()).collect();
    let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
    let stats = train_batch(online, adam, &inputs, &actions, &targets)?;
    polyak(target, online, tau)?;
    Ok(Some(UpdateStats {
        loss: stats.loss,
        skipped: stats.skipped,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn enc(x: Vec<f64>, a: usize, r: f64, next: Vec<f64>, terminal: bool) -> Encoded {
        Encoded {
            input: x,
            action: a,
            reward: r,
            next_input: next,
            terminal,
            next_legal: vec![true; 3],
        }
    }

    #[test]
    fn terminal_target_is_reward() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = Mlp::new(&[2, 4, 3], &mut rng).unwrap();
        let b = Mlp::new(&[2, 4, 3], &mut rng).unwrap();
        let t = [enc(vec![0.1, 0.2], 1, 1.0, vec![], true)];
        assert_eq!(compute_q_targets(&t, &a, &b, 0.9).unwrap(), vec![1.0]);
        assert_eq!(compute_q_targets(&t, &b, &a, 0.9).unwrap(), vec![1.0]);
    }

    #[test]
    fn double_q_formula() {
        // Online prefers action 2 at s′; the target net values action 2 at 0.5.
        let online = Mlp::from_params(&[1, 3], vec![0.0, 0.0, 0.0, 0.1, 0.2, 0.9]).unwrap();
        let target = Mlp::from_params(&[1, 3], vec![0.0, 0.0, 0.0, 2.0, 3.0, 0.5]).unwrap();
        let t = [enc(vec![0.0], 0, 0.0, vec![0.0], false)];
        let q = compute_q_targets(&t, &online, &target, 0.9).unwrap();
        assert!((q[0] - 0.45).abs() < 1e-15);
        // Identical nets give the max-based target.
        let q = compute_q_targets(&t, &target, &target, 0.9).unwrap();
        assert!((q[0] - 2.7).abs() < 1e-15);
        // The argmax respects the legal mask.
        let mut masked = t[0].clone();
        masked.next_legal = vec![true, false, false];
        let q = compute_q_targets(&[masked], &online, &target, 0.9).unwrap();
        assert!((q[0] - 1.8).abs() < 1e-15);
    }

    #[test]
    fn update_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut online = Mlp::new(&[2, 8, 3], &mut rng).unwrap();
        let mut target = Mlp::new(&[2, 8, 3], &mut rng).unwrap();
        let mut adam = AdamState::new(&online, 1e-2);
        let mut buf = ReplayBuffer::new(100).unwrap();
        let id = |t: &Encoded| Ok(t.clone());
        assert!(update(&buf, &mut online, &mut target, &mut adam, 0.9, 4, 0.01, id, &mut rng)
            .unwrap()
            .is_none());
        for i in 0..10 {
            let x = vec![i as f64 * 0.1, 1.0 - i as f64 * 0.1];
            buf.push(enc(x.clone(), i % 3, 0.3, x, i % 2 == 0));
        }

        // τ = 0 keeps the target net fixed.
        let frozen = target.clone();
        for _ in 0..2 {
            update(&buf, &mut online, &mut target, &mut adam, 0.9, 4, 0.0, id, &mut rng).unwrap();
        }
        assert_eq!(target, frozen);

        // Polyak drift is bounded by τ·|W − W′| elementwise.
        let before_t = target.clone();
        update(&buf, &mut online, &mut target, &mut adam, 0.9, 4, 0.1, id, &mut rng).unwrap();
        for ((t1, t0), w) in target.params().iter().zip(before_t.params()).zip(online.params()) {
            assert!((t1 - t0).abs() <= 0.1 * (w - t0).abs() + 1e-15);
        }
    }

    #[test]
    fn reported_loss_matches_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut online = Mlp::new(&[2, 6, 3], &mut rng).unwrap();
        let mut target = Mlp::new(&[2, 6, 3], &mut rng).unwrap();
        let mut adam = AdamState::new(&online, 1e-3);
        let mut buf = ReplayBuffer::new(16).unwrap();
        for i in 0..16 {
            let x = vec![(i as f64).sin(), (i as f64).cos()];
            buf.push(enc(x.clone(), i % 3, i as f64 * 0.1, x, i % 3 == 0));
        }
        let (on0, tg0) = (online.clone(), target.clone());
        let mut replay = rng.clone();
        let stats = update(&buf, &mut online, &mut target, &mut adam, 0.95, 8, 0.01, |t| Ok(t.clone()), &mut rng)
            .unwrap()
            .unwrap();
        let batch: Vec<Encoded> = buf.sample(8, &mut replay).into_iter().cloned().collect();
        let q = compute_q_targets(&batch, &on0, &tg0, 0.95).unwrap();
        let want: f64 = batch
            .iter()
            .zip(&q)
            .map(|(t, y)| (on0.forward(&t.input).unwrap()[t.action] - y).powi(2))
            .sum::<f64>()
            / 8.0;
        assert!((stats.loss - want).abs() < 1e-12);
    }
}
