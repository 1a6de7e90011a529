use rand::Rng;

use crate::error::{invalid, Result};

/// Legal index with the largest value; ties go to the lowest index.
pub fn greedy(qvals: &[f64], legal: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (&q, &ok)) in qvals.iter().zip(legal).enumerate() {
        if ok && best.map_or(true, |b| q > qvals[b]) {
            best = Some(i);
        }
    }
    best
}

/// The `k` best legal indices, highest value first (ties to the lower index).
pub fn top_k(qvals: &[f64], legal: &[bool], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..qvals.len()).filter(|&i| legal[i]).collect();
    idx.sort_by(|&a, &b| qvals[b].total_cmp(&qvals[a]).then(a.cmp(&b)));
    idx.truncate(k.max(1));
    idx
}

/// ε-greedy with prioritized exploration. With probability `1 − ε` the
/// greedy action; otherwise, with probability `p_prior`, a uniform pick from
/// the `top_q` best legal actions, else a uniform pick from all legal ones.
pub fn select_action<R: Rng + ?Sized>(
    qvals: &[f64],
    legal: &[bool],
    eps: f64,
    p_prior: f64,
    top_q: usize,
    rng: &mut R,
) -> Result<usize> {
    if qvals.len() != legal.len() {
        return invalid("mask length differs from the number of Q-values");
    }
    let Some(best) = greedy(qvals, legal) else {
        return invalid("no legal action");
    };
    if eps <= 0.0 || rng.gen::<f64>() >= eps {
        return Ok(best);
    }
    let pool: Vec<usize> = if rng.gen::<f64>() < p_prior {
        top_k(qvals, legal, top_q)
    } else {
        (0..legal.len()).filter(|&i| legal[i]).collect()
    };
    Ok(pool[rng.gen_range(0..pool.len())])
}

/// Every action is legal while fewer than `limit` CNOTs have been taken;
/// afterwards only STOP (the last index) is.
pub fn legal_mask(d_out: usize, taken: usize, limit: usize) -> Vec<bool> {
    (0..d_out).map(|i| i + 1 == d_out || taken < limit).collect()
}

/// Linear anneal from `start` to `end` over `steps` episodes, then flat.
pub fn epsilon_at(episode: usize, start: f64, end: f64, steps: usize) -> f64 {
    if steps == 0 || episode >= steps {
        return end;
    }
    start + (end - start) * episode as f64 / steps as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn greedy_and_ties() {
        let q = [0.1, 0.5, 0.5, 0.2];
        let all = [true; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(select_action(&q, &all, 0.0, 0.5, 3, &mut rng).unwrap(), 1);
        }
        assert_eq!(greedy(&q, &[true, false, true, true]), Some(2));
        assert!(select_action(&q, &[false; 4], 0.0, 0.5, 3, &mut rng).is_err());
    }

    #[test]
    fn full_exploration_is_uniform_over_legal() {
        let q = [3.0, 1.0, 2.0, 0.0, 5.0];
        let legal = [true, true, false, true, true];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            counts[select_action(&q, &legal, 1.0, 0.0, 3, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[2], 0);
        // χ² with 3 degrees of freedom, 0.999 quantile 16.27.
        let chi2: f64 = [0, 1, 3, 4]
            .iter()
            .map(|&i| (counts[i] as f64 - 2500.0).powi(2) / 2500.0)
            .sum();
        assert!(chi2 < 16.27, "{counts:?}");
    }

    #[test]
    fn degenerate_prioritization_is_greedy() {
        let q = [0.3, -1.0, 0.9, 0.4];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            assert_eq!(select_action(&q, &[true; 4], 1.0, 1.0, 1, &mut rng).unwrap(), 2);
        }
        let picks: std::collections::BTreeSet<usize> = (0..500)
            .map(|_| select_action(&q, &[true; 4], 1.0, 1.0, 2, &mut rng).unwrap())
            .collect();
        assert_eq!(picks, [2, 3].into_iter().collect());
    }

    #[test]
    fn epsilon_schedule() {
        assert_eq!(epsilon_at(0, 1.0, 0.05, 100), 1.0);
        assert!((epsilon_at(50, 1.0, 0.0, 100) - 0.5).abs() < 1e-15);
        assert_eq!(epsilon_at(500, 1.0, 0.05, 100), 0.05);
        assert_eq!(epsilon_at(3, 1.0, 0.05, 0), 0.05);
    }
}
