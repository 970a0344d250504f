//! Derivation of per-rollout randomness streams.
//!
//! Each stream is keyed by `(base seed, purpose, index)` pushed through a
//! 64-bit finalizer into a ChaCha key. Properties the harness relies on:
//! streams for different triples are statistically independent, derivation
//! is platform-independent (explicit little-endian key layout), and no
//! shared mutable generator exists — so rollouts can run on any number of
//! threads in any order without changing a single draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes. Separating them means, e.g., that adding policy noise
/// never perturbs the transition noise of the same rollout.
pub(crate) const DOMAIN_PARAMS: u64 = 1;
pub(crate) const DOMAIN_INIT: u64 = 2;
pub(crate) const DOMAIN_TRANSITION: u64 = 3;
pub(crate) const DOMAIN_POLICY: u64 = 4;
pub(crate) const DOMAIN_CEM_SAMPLE: u64 = 5;
pub(crate) const DOMAIN_CEM_EVAL: u64 = 6;
pub(crate) const DOMAIN_RANDOM_POLICY: u64 = 7;
pub(crate) const DOMAIN_EXPERIMENT: u64 = 8;
pub(crate) const DOMAIN_EXPERIMENT_CASE: u64 = 9;
pub(crate) const DOMAIN_EXPERIMENT_POLICY: u64 = 10;

/// 64-bit mix/finalizer (the splitmix64 constants): consecutive and
/// otherwise structured inputs come out decorrelated.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapses `(seed, domain, index)` into one well-mixed integer, for
/// consumers that want a plain seed rather than a stream (e.g. handing
/// derived rollout seeds to the rollout runner, which splits its own
/// streams from them).
pub(crate) fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    let mut acc = mix(seed ^ 0x243F_6A88_85A3_08D3);
    acc = mix(acc ^ domain);
    mix(acc ^ index)
}

/// Expands `(seed, domain, index)` into an independent ChaCha8 stream.
pub(crate) fn derive_stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut acc = mix(seed ^ 0x243F_6A88_85A3_08D3);
    acc = mix(acc ^ domain);
    acc = mix(acc ^ index);
    let mut key = [0u8; 32];
    let mut word = acc;
    for chunk in key.chunks_exact_mut(8) {
        word = mix(word.wrapping_add(0x9E37_79B9_7F4A_7C15));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn equal_triples_give_equal_streams() {
        let mut a = derive_stream(7, DOMAIN_TRANSITION, 3);
        let mut b = derive_stream(7, DOMAIN_TRANSITION, 3);
        for _ in 0..100 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }

    #[test]
    fn any_triple_component_separates_streams() {
        let base: Vec<u64> = {
            let mut r = derive_stream(7, DOMAIN_TRANSITION, 3);
            (0..8).map(|_| r.random()).collect()
        };
        for mut other in [
            derive_stream(8, DOMAIN_TRANSITION, 3),
            derive_stream(7, DOMAIN_POLICY, 3),
            derive_stream(7, DOMAIN_TRANSITION, 4),
        ] {
            let draws: Vec<u64> = (0..8).map(|_| other.random()).collect();
            assert_ne!(base, draws);
        }
    }

    #[test]
    fn adjacent_indices_look_uncorrelated() {
        // Crude independence check: uniform draws from consecutive rollout
        // indices should have sample correlation near zero.
        let n = 10_000;
        let xs: Vec<f64> =
            (0..n).map(|i| derive_stream(42, DOMAIN_TRANSITION, i).random::<f64>()).collect();
        let ys: Vec<f64> =
            (0..n).map(|i| derive_stream(42, DOMAIN_TRANSITION, i + 1).random::<f64>()).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mx, my) = (mean(&xs), mean(&ys));
        let mut num = 0.0;
        let (mut dx, mut dy) = (0.0, 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            num += (x - mx) * (y - my);
            dx += (x - mx) * (x - mx);
            dy += (y - my) * (y - my);
        }
        let corr = num / (dx.sqrt() * dy.sqrt());
        assert!(corr.abs() < 0.05, "correlation {corr} too large");
    }
}
