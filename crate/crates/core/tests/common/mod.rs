//! Deterministic 5-state chain for checking the double-Q update against
//! tabular value iteration.
//!
//! States 0..=4, actions 0 (left) and 1 (right). Moving right from 3 reaches
//! the absorbing state 4 with reward 1; every other move pays 0. Left at 0
//! stays put. Only states 0..=3 are ever fed to the network.

use qsynth::agent::{update, Encoded, ReplayBuffer};
use qsynth::nn::{AdamState, Mlp};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const N_STATES: usize = 5;
pub const GOAL: usize = N_STATES - 1;
pub const GAMMA: f64 = 0.9;

pub fn step(s: usize, a: usize) -> (usize, f64) {
    match a {
        0 => (s.saturating_sub(1), 0.0),
        _ if s + 1 == GOAL => (GOAL, 1.0),
        _ => (s + 1, 0.0),
    }
}

/// `q[s][a]` for the non-absorbing states, by sweeping Bellman backups.
pub fn value_iteration() -> Vec<[f64; 2]> {
    let mut q = vec![[0.0f64; 2]; GOAL];
    for _ in 0..1000 {
        let v: Vec<f64> = q.iter().map(|r| r[0].max(r[1])).collect();
        for (s, row) in q.iter_mut().enumerate() {
            for (a, x) in row.iter_mut().enumerate() {
                let (s2, r) = step(s, a);
                *x = r + if s2 == GOAL { 0.0 } else { GAMMA * v[s2] };
            }
        }
    }
    q
}

fn one_hot(s: usize) -> Vec<f64> {
    let mut x = vec![0.0; N_STATES];
    x[s] = 1.0;
    x
}

/// Every (state, action) pair sits in the buffer; the networks learn from
/// uniform replay only.
pub fn chain_buffer() -> ReplayBuffer<Encoded> {
    let mut buf = ReplayBuffer::new(64).unwrap();
    for s in 0..GOAL {
        for a in 0..2 {
            let (s2, r) = step(s, a);
            let terminal = s2 == GOAL;
            buf.push(Encoded {
                input: one_hot(s),
                action: a,
                reward: r,
                next_input: if terminal { Vec::new() } else { one_hot(s2) },
                terminal,
                next_legal: vec![true; 2],
            });
        }
    }
    buf
}

pub struct ChainRun {
    pub max_error: f64,
    pub updates: usize,
}

/// Run DDQN updates until the online net is within `tol` of `Q*` on every
/// pair (checked every 100 updates) or `max_updates` is reached.
pub fn train_chain(seed: u64, max_updates: usize, tol: f64) -> ChainRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut online = Mlp::new(&[N_STATES, 32, 2], &mut rng).unwrap();
    let mut target = online.clone();
    let mut adam = AdamState::new(&online, 5e-3);
    let buf = chain_buffer();
    let q_star = value_iteration();
    let err = |net: &Mlp| {
        (0..GOAL)
            .flat_map(|s| {
                let q = net.forward(&one_hot(s)).unwrap();
                let qs = q_star[s];
                [(q[0] - qs[0]).abs(), (q[1] - qs[1]).abs()]
            })
            .fold(0.0, f64::max)
    };
    let mut updates = 0;
    let mut max_error = err(&online);
    while updates < max_updates {
        update(&buf, &mut online, &mut target, &mut adam, GAMMA, 8, 0.05, |t| Ok(t.clone()), &mut rng).unwrap();
        updates += 1;
        if updates % 100 == 0 {
            max_error = err(&online);
            if max_error < tol {
                break;
            }
        }
    }
    ChainRun { max_error, updates }
}
