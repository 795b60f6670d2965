//! Seeded random substreams for reproducible parallel simulation.
//!
//! Work is cut into fixed-size blocks; block `b` always draws from ChaCha
//! stream `b` of the run seed, so results do not depend on how blocks are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const BLOCK_SIZE: usize = 8192;

pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// `(block index, draws in block)` covering `total` draws.
pub fn blocks(total: usize) -> impl Iterator<Item = (u64, usize)> + Clone {
    let full = total / BLOCK_SIZE;
    let rest = total % BLOCK_SIZE;
    (0..full)
        .map(|b| (b as u64, BLOCK_SIZE))
        .chain((rest > 0).then_some((full as u64, rest)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn blocks_cover_total() {
        for total in [0, 1, BLOCK_SIZE, BLOCK_SIZE + 3, 5 * BLOCK_SIZE - 1] {
            assert_eq!(blocks(total).map(|(_, n)| n).sum::<usize>(), total);
        }
    }

    #[test]
    fn streams_are_distinct_and_repeatable() {
        let a: u64 = block_rng(7, 0).random();
        let b: u64 = block_rng(7, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, block_rng(7, 0).random::<u64>());
    }
}
