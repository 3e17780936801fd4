//! Deterministic generator streams.
//!
//! Every stochastic routine takes its generator explicitly. Parallel work is
//! split into a fixed number of partitions, each with its own stream derived
//! from `(seed, partition)`, so results do not depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// Default number of partitions for parallel Monte-Carlo work.
pub const DEFAULT_PARTITIONS: usize = 16;

/// Mixes a tag into a seed (splitmix64 finalizer) for independent sub-experiments.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `0..total` into `partitions` contiguous ranges and runs `work` on
/// each with its own stream. Outputs are returned in partition order.
pub fn partitioned<T, F>(seed: u64, total: usize, partitions: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>, &mut StreamRng) -> T + Sync,
{
    let partitions = partitions.max(1);
    let ranges: Vec<_> = (0..partitions)
        .map(|p| (p * total / partitions)..((p + 1) * total / partitions))
        .collect();
    ranges
        .into_par_iter()
        .enumerate()
        .map(|(p, range)| {
            let mut rng = stream(seed, p as u64 + 1);
            work(range, &mut rng)
        })
        .collect()
}

/// Like [`partitioned`], but with fixed-size blocks: block `b` covers
/// `b*block .. (b+1)*block` and uses stream `b + 1`. Growing `total` only
/// appends blocks, so a larger run extends a smaller one draw for draw.
pub fn blocked<T, F>(seed: u64, total: usize, block: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>, &mut StreamRng) -> T + Sync,
{
    let block = block.max(1);
    let ranges: Vec<_> = (0..total.div_ceil(block))
        .map(|b| (b * block)..((b + 1) * block).min(total))
        .collect();
    ranges
        .into_par_iter()
        .enumerate()
        .map(|(b, range)| {
            let mut rng = stream(seed, b as u64 + 1);
            work(range, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn partitions_cover_range_in_order() {
        let parts = partitioned(1, 103, 7, |r, _| r);
        let flat: Vec<usize> = parts.into_iter().flatten().collect();
        assert_eq!(flat, (0..103).collect::<Vec<_>>());
    }

    #[test]
    fn blocks_extend_prefix() {
        let draw = |total| -> Vec<u64> {
            blocked(4, total, 100, |r, rng| r.map(|_| rng.random::<u64>()).collect::<Vec<_>>())
                .into_iter()
                .flatten()
                .collect()
        };
        let short = draw(250);
        let long = draw(500);
        assert_eq!(short.len(), 250);
        assert_eq!(short[..200], long[..200]);
    }

    #[test]
    fn independent_of_thread_count() {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| partitioned(9, 1000, 8, |r, rng| r.fold(0u64, |a, _| a.wrapping_add(rng.random::<u64>()))))
        };
        assert_eq!(run(1), run(3));
    }
}
