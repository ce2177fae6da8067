//! Seeded low-discrepancy start points: a Halton sequence with a random
//! per-dimension shift (Cranley-Patterson rotation) drawn from the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    out
}

#[derive(Debug, Clone)]
pub struct StartSequence {
    shift: Vec<f64>,
    index: u64,
}

impl StartSequence {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.random::<f64>()).collect();
        // Index 0 of the Halton sequence is the origin for every base; skip it.
        StartSequence { shift, index: 1 }
    }
}

impl Iterator for StartSequence {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let i = self.index;
        self.index += 1;
        Some(
            self.shift
                .iter()
                .zip(PRIMES)
                .map(|(s, b)| (radical_inverse(i, b) + s).fract())
                .collect(),
        )
    }
}
