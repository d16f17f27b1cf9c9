//! Deterministic data-parallel helper.
//!
//! Work is split by index over scoped threads and every result lands in its
//! own output slot, so results are bitwise identical for any worker count.

/// Fills `out[i] = f(i)` using up to `workers` threads.
pub fn fill_slots<R, F>(out: &mut [R], workers: usize, f: F)
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let n = out.len();
    if n == 0 {
        return;
    }
    let workers = workers.max(1).min(n);
    if workers == 1 {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
        return;
    }
    let chunk = n.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slots) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                let base = w * chunk;
                for (j, slot) in slots.iter_mut().enumerate() {
                    *slot = f(base + j);
                }
            });
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_across_worker_counts() {
        let f = |i: usize| (i as f64).sqrt() * 3.7 - (i % 13) as f64;
        let mut one = vec![0.0; 1000];
        fill_slots(&mut one, 1, f);
        for w in [2, 3, 4, 9] {
            let mut many = vec![0.0; 1000];
            fill_slots(&mut many, w, f);
            assert_eq!(one, many);
        }
    }

    #[test]
    fn empty_and_tiny() {
        let mut empty: Vec<u32> = vec![];
        fill_slots(&mut empty, 4, |_| 1);
        let mut tiny = vec![0u32; 2];
        fill_slots(&mut tiny, 8, |i| i as u32 + 1);
        assert_eq!(tiny, vec![1, 2]);
    }
}
