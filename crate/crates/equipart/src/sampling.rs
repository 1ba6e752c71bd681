//! Reproducible, order-independent Monte Carlo sampling support.
//!
//! Sampling uses a counter-based generator (ChaCha8) keyed by
//! `(master seed, stream id)`. Each sample index owns a fixed span of the
//! key stream, so sample `i` draws the same point no matter which worker
//! evaluates it or in which order. Accumulation happens in fixed-size
//! chunks that are combined by pairwise summation in chunk order, making
//! results bit-identical for any worker count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

/// Samples per accumulation chunk.
pub const CHUNK: u64 = 1 << 14;

/// Stream id for rejection sampling over `H <= E` (volumes, divergence
/// integrals and the intrinsic-law right-hand side share these points).
pub const STREAM_ME: u64 = 1;
/// Stream id for thin-shell averages.
pub const STREAM_SHELL: u64 = 2;
/// Stream id for the correlated finite-difference pair in `vol_sigma`.
pub const STREAM_SIGMA: u64 = 3;

/// Deterministic random access into the (seed, stream) key stream.
pub struct CounterRng {
    rng: ChaCha8Rng,
}

impl CounterRng {
    /// Position a generator at `sample_index`, where each sample consumes
    /// exactly `draws_per_sample` `f64` draws.
    pub fn at(seed: u64, stream: u64, draws_per_sample: u64, sample_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        // One f64 draw consumes one u64, i.e. two 32-bit words.
        let words = 2u128 * draws_per_sample as u128 * sample_index as u128;
        rng.set_word_pos(words);
        CounterRng { rng }
    }

    /// Uniform draw in [0, 1) with 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform draw in [lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// Pairwise sum over values in their given order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Map sample indices `0..n_samples` through `body` chunk by chunk, in
/// parallel, then reduce the per-chunk partials in chunk order.
///
/// `body` receives the chunk's starting sample index and its length and
/// must derive all randomness from those (via [`CounterRng::at`]), never
/// from execution order.
pub fn chunked_map_reduce<P, B, R>(n_samples: u64, body: B, reduce: R) -> P
where
    P: Send,
    B: Fn(u64, u64) -> P + Sync,
    R: Fn(Vec<P>) -> P,
{
    let n_chunks = n_samples.div_ceil(CHUNK);
    let partials: Vec<P> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(n_samples - start);
            body(start, len)
        })
        .collect();
    reduce(partials)
}

/// Pairwise reduction of per-chunk `f64` partial sums.
pub fn reduce_sums(partials: Vec<Vec<f64>>) -> Vec<f64> {
    if partials.is_empty() {
        return Vec::new();
    }
    let width = partials[0].len();
    (0..width)
        .map(|k| {
            let column: Vec<f64> = partials.iter().map(|p| p[k]).collect();
            pairwise_sum(&column)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_indexing_is_random_access() {
        // Drawing sample 5 directly matches drawing samples 0..=5 in order.
        let draws = 3;
        let mut seq = CounterRng::at(42, STREAM_ME, draws, 0);
        let mut sequential = Vec::new();
        for _ in 0..6 {
            let mut point = Vec::new();
            for _ in 0..draws {
                point.push(seq.uniform());
            }
            sequential.push(point);
        }
        let mut direct = CounterRng::at(42, STREAM_ME, draws, 5);
        for k in 0..draws as usize {
            assert_eq!(direct.uniform().to_bits(), sequential[5][k].to_bits());
        }
    }

    #[test]
    fn streams_are_distinct() {
        let a = CounterRng::at(7, STREAM_ME, 2, 0).uniform();
        let b = CounterRng::at(7, STREAM_SHELL, 2, 0).uniform();
        assert_ne!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn seeds_are_distinct() {
        let a = CounterRng::at(1, STREAM_ME, 2, 0).uniform();
        let b = CounterRng::at(2, STREAM_ME, 2, 0).uniform();
        assert_ne!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn uniform_values_in_unit_interval() {
        let mut rng = CounterRng::at(3, STREAM_ME, 1, 0);
        for _ in 0..1000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn pairwise_sum_matches_sequential_for_small_inputs() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(pairwise_sum(&v), 15.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn chunked_reduction_is_worker_count_independent() {
        // The same computation under 1-thread and N-thread pools must agree
        // bit for bit.
        let run = |threads: usize| -> f64 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                chunked_map_reduce(
                    100_000,
                    |start, len| {
                        let mut rng = CounterRng::at(9, STREAM_ME, 1, start);
                        let mut sum = 0.0;
                        for _ in 0..len {
                            sum += rng.uniform();
                        }
                        vec![sum]
                    },
                    reduce_sums,
                )[0]
            })
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }
}
