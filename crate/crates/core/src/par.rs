//! Order-preserving parallel map over a slice.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `f(i, &items[i])` for every item, on up to `threads` scoped threads.
/// Results come back in input order whatever the thread count.
pub fn par_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().enumerate().map(|(i, x)| f(i, x)).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                s.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(j, x)| f(c * chunk + j, x))
                        .collect::<Vec<R>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

/// Independent generator for work item `index` under `seed`.
pub fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn order_and_thread_independence() {
        let xs: Vec<u64> = (0..23).collect();
        let one = par_map(&xs, 1, |i, &x| (i as u64, x * x, item_rng(5, i).gen::<u64>()));
        for t in [2, 4, 64] {
            assert_eq!(par_map(&xs, t, |i, &x| (i as u64, x * x, item_rng(5, i).gen::<u64>())), one);
        }
        assert!(par_map(&[] as &[u8], 3, |_, _| 0).is_empty());
        assert_ne!(item_rng(5, 0).gen::<u64>(), item_rng(5, 1).gen::<u64>());
    }
}
