//! Seeded random streams.
//!
//! A run seed expands into a ChaCha8 key; trial `i` reads from stream `i` of
//! that key. Streams are independent, and the mapping from `(seed, i)` to
//! draws is fixed across platforms and thread counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type EngineRng = ChaCha8Rng;

/// Key for a run seed: SplitMix64 expansion of `seed` into 256 bits.
fn key_for(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    key
}

/// Independent stream number `index` under run seed `seed`.
pub fn substream(seed: u64, index: u64) -> EngineRng {
    let mut rng = ChaCha8Rng::from_seed(key_for(seed));
    rng.set_stream(index);
    rng
}

pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.random::<f64>() < p
    }
}

/// Binomial(n, p) by summing Bernoulli trials. `n` is always small here.
pub fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u32, p: f64) -> u32 {
    (0..n).filter(|_| bernoulli(rng, p)).count() as u32
}

/// Index drawn from unnormalised non-negative weights; `None` if they sum to 0.
pub fn categorical<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if u < acc {
            return Some(i);
        }
    }
    last
}
